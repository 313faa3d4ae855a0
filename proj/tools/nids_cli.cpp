// Command line front end: split, train, classify, report, run, compare.

#include "nids/architectures.hpp"
#include "nids/dataset.hpp"
#include "nids/error.hpp"
#include "nids/eval.hpp"
#include "nids/harness.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace fs = std::filesystem;

namespace {

struct CommonOptions {
    std::string config;
    std::map<std::string, std::string> overrides;
    std::vector<std::string> settings;
};

void add_common(CLI::App& app, CommonOptions& options) {
    app.add_option("--config", options.config, "Experiment config file (key = value lines)");
    const auto flag = [&](const char* name, const char* key, const char* help) {
        app.add_option_function<std::string>(name, [&options, key](const std::string& value) {
            options.overrides[key] = value;
        }, help);
    };
    const auto path_flag = [&](const char* name, const char* key, const char* help) {
        app.add_option_function<std::string>(name, [&options, key](const std::string& value) {
            options.overrides[key] = fs::absolute(value).lexically_normal().string();
        }, help);
    };
    const auto path_list_flag = [&](const char* name, const char* key, const char* help) {
        app.add_option_function<std::string>(name, [&options, key](const std::string& value) {
            std::string joined;
            for (const auto& item : nids::split_list(value)) {
                joined += (joined.empty() ? "" : ",") + fs::absolute(item).lexically_normal().string();
            }
            options.overrides[key] = joined;
        }, help);
    };
    path_list_flag("--corpus", "corpus", "Comma separated NSL-KDD files");
    path_flag("--taxonomy", "taxonomy", "attack_type,category table");
    path_flag("--out", "out", "Output directory");
    flag("--technique", "technique", "new-attack or partition");
    flag("--model", "model", "phase, level or both");
    flag("--learner", "learners", "Comma separated learners: C5,CRT,CHAID,QUEST");
    flag("--seed", "seed", "Seed for splits and CART holdout");
    flag("--top-k", "top_k", "Keep the k highest information-gain features");
    flag("--train-fraction", "train_fraction", "Partition training fraction");
    flag("--unknown", "unknown_attack_types", "Comma separated held-out attack types");
    flag("--min-node-size", "min_node_size", "Smallest node that may split");
    flag("--max-depth", "max_depth", "Depth limit or none");
    flag("--alpha", "alpha", "CHAID/QUEST significance level");
    flag("--prune-cf", "prune_cf", "C5 pruning confidence factor");
    flag("--cc-holdout", "cc_holdout_fraction", "CART pruning holdout fraction, 0 disables pruning");
    flag("--bin-count", "bin_count", "CHAID discretization bins");
    flag("--prune", "prune", "true or false: prune C5 and CART trees");
    app.add_option("--set", options.settings, "Any config key as key=value");
}

nids::ExperimentConfig build_config(const CommonOptions& options) {
    auto overrides = options.overrides;
    for (const auto& setting : options.settings) {
        const auto eq = setting.find('=');
        if (eq == std::string::npos) {
            throw nids::ConfigError("--set expects key=value, got '" + setting + "'");
        }
        overrides[nids::trim(setting.substr(0, eq))] = nids::trim(setting.substr(eq + 1));
    }
    if (!options.config.empty()) {
        return nids::ExperimentConfig::load(options.config, overrides);
    }
    nids::KeyValueConfig config;
    for (const auto& [key, value] : overrides) {
        config.set(key, value);
    }
    return nids::ExperimentConfig::from_config(config);
}

std::vector<nids::Architecture> architectures_of(nids::ModelChoice choice) {
    std::vector<nids::Architecture> out;
    if (choice != nids::ModelChoice::Level) {
        out.push_back(nids::Architecture::Phase);
    }
    if (choice != nids::ModelChoice::Phase) {
        out.push_back(nids::Architecture::Level);
    }
    return out;
}

std::string model_kind(const fs::path& dir) {
    std::ifstream in(dir / "manifest.txt");
    std::string kind;
    if (!(in >> kind)) {
        throw nids::Error("no model manifest in " + dir.string());
    }
    return kind;
}

void write_records_file(const fs::path& path, std::span<const nids::ConnectionRecord> records) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw nids::Error("cannot write " + path.string());
    }
    nids::write_records(out, records);
}

struct Classified {
    std::optional<nids::PhaseModel> phase;
    std::optional<nids::LevelModel> level;
    std::vector<nids::PhaseVerdict> phase_verdicts;
    std::vector<nids::LevelVerdict> level_verdicts;
};

Classified classify_with(const fs::path& model_dir, std::span<const nids::ConnectionRecord> records) {
    Classified out;
    const auto kind = model_kind(model_dir);
    if (kind == "nids-phase-model") {
        out.phase = nids::PhaseModel::load(model_dir);
        out.phase_verdicts = out.phase->classify(records);
    } else if (kind == "nids-level-model") {
        out.level = nids::LevelModel::load(model_dir);
        out.level_verdicts = out.level->classify(records);
    } else {
        throw nids::Error("unknown model kind '" + kind + "' in " + model_dir.string());
    }
    return out;
}

int cmd_split(const CommonOptions& options) {
    const auto config = build_config(options);
    if (config.corpus.empty()) {
        throw nids::ConfigError("no corpus files configured");
    }
    const auto taxonomy = nids::LabelTaxonomy::load(config.taxonomy);
    const auto corpus = nids::load_corpus(config.corpus);
    taxonomy.validate(corpus);
    const auto data = nids::split_corpus(corpus, config, taxonomy);
    fs::create_directories(config.out);
    write_records_file(config.out / "train.txt", data.train);
    write_records_file(config.out / "test.txt", data.test);
    for (const auto& [key, value] : data.counts) {
        std::cout << key << " = " << value << '\n';
    }
    return 0;
}

int cmd_train(const CommonOptions& options, const std::string& train_file) {
    const auto config = build_config(options);
    const auto taxonomy = nids::LabelTaxonomy::load(config.taxonomy);
    std::vector<nids::ConnectionRecord> train;
    if (!train_file.empty()) {
        train = nids::load_records(fs::path(train_file));
    } else {
        if (config.corpus.empty()) {
            throw nids::ConfigError("give --train or a corpus to split");
        }
        const auto corpus = nids::load_corpus(config.corpus);
        auto data = nids::split_corpus(corpus, config, taxonomy);
        fs::create_directories(config.out);
        write_records_file(config.out / "test.txt", data.test);
        train = std::move(data.train);
    }
    taxonomy.validate(train);
    const auto preprocess = nids::PreprocessState::fit(train, config.preprocess, taxonomy);
    for (auto learner : config.learners) {
        for (auto architecture : architectures_of(config.model)) {
            const auto dir = config.out / "models" /
                             (std::string(nids::to_string(architecture)) + "_" + std::string(nids::to_string(learner)));
            nids::StageTimes times{};
            if (architecture == nids::Architecture::Phase) {
                const auto model = nids::PhaseModel::train(train, taxonomy, learner, config.params, preprocess);
                model.save(dir);
                times = model.stage_seconds();
            } else {
                const auto model = nids::LevelModel::train(train, taxonomy, learner, config.params, preprocess);
                model.save(dir);
                times = model.stage_seconds();
            }
            std::cout << dir.string() << "\ttrain_seconds=" << times[0] + times[1] + times[2] << '\n';
        }
    }
    return 0;
}

int cmd_classify(const std::string& model_dir, const std::string& input, const std::string& out_file,
                 const std::string& alerts_file) {
    const auto records = nids::load_records(fs::path(input));
    const auto result = classify_with(model_dir, records);
    std::ofstream file;
    if (!out_file.empty()) {
        file.open(out_file, std::ios::binary);
        if (!file) {
            throw nids::Error("cannot write " + out_file);
        }
    }
    std::ostream& out = out_file.empty() ? std::cout : file;
    if (result.phase) {
        out << "index\tis_attack\tcategory\ttype\ttrail\n";
        for (std::size_t i = 0; i < result.phase_verdicts.size(); ++i) {
            const auto& v = result.phase_verdicts[i];
            out << i << '\t' << (v.is_attack ? "attack" : "normal") << '\t'
                << (v.category ? std::string(nids::to_string(*v.category)) : "-") << '\t' << v.attack_type.value_or("-")
                << '\t';
            for (std::size_t s = 0; s < v.stage_trail.size(); ++s) {
                out << (s ? "," : "") << v.stage_trail[s].label << ':' << v.stage_trail[s].confidence;
            }
            out << '\n';
        }
    } else {
        out << "index\tlevel1\tlevel2\tlevel3\n";
        for (std::size_t i = 0; i < result.level_verdicts.size(); ++i) {
            const auto& v = result.level_verdicts[i];
            out << i << '\t' << v.level1.label << '\t' << v.level2.label << '\t' << v.level3.label << '\n';
        }
    }
    if (!alerts_file.empty()) {
        std::ofstream alerts(alerts_file, std::ios::binary);
        if (!alerts) {
            throw nids::Error("cannot write " + alerts_file);
        }
        const auto count = result.phase ? nids::emit_alerts(result.phase_verdicts, alerts)
                                        : nids::emit_alerts(result.level_verdicts, alerts);
        std::cerr << count << " alerts\n";
    }
    return 0;
}

int cmd_report(const std::vector<std::string>& model_dirs, const std::string& input, const std::string& taxonomy_file,
               const std::string& technique, const std::string& out_dir) {
    const auto taxonomy = nids::LabelTaxonomy::load(
        taxonomy_file.empty() ? nids::ExperimentConfig::from_config(nids::KeyValueConfig{}).taxonomy
                              : fs::path(taxonomy_file));
    const auto records = nids::load_records(fs::path(input));
    std::vector<nids::EvalReport> reports;
    std::vector<nids::MetricTuple> tuples;
    for (const auto& dir : model_dirs) {
        const auto result = classify_with(dir, records);
        reports.push_back(result.phase ? nids::phase_report(result.phase_verdicts, records, taxonomy,
                                                            result.phase->learner(), technique)
                                       : nids::level_report(result.level_verdicts, records, taxonomy,
                                                            result.level->learner(), technique));
        const auto cell = nids::metric_tuples(reports.back());
        tuples.insert(tuples.end(), cell.begin(), cell.end());
    }
    if (out_dir.empty()) {
        nids::write_report_table(std::cout, reports);
        std::cout << '\n';
        nids::write_metric_tuples(std::cout, tuples);
        return 0;
    }
    fs::create_directories(out_dir);
    std::ofstream table(fs::path(out_dir) / "report.csv", std::ios::binary);
    nids::write_report_table(table, reports);
    std::ofstream metrics(fs::path(out_dir) / "metrics.csv", std::ios::binary);
    nids::write_metric_tuples(metrics, tuples);
    return table && metrics ? 0 : 1;
}

int cmd_run(const CommonOptions& options) {
    const auto config = build_config(options);
    const auto result = nids::run_experiment(config, &std::cerr);
    if (!result.complete) {
        std::cerr << "run failed at stage '" << result.failed_stage << "': " << result.error << '\n';
        return 1;
    }
    std::cerr << "wrote " << config.out.string() << '\n';
    return 0;
}

int cmd_compare(const std::string& run_dir, const std::string& out_file) {
    const auto summaries = nids::load_summaries(run_dir);
    std::vector<nids::Comparison> comparisons;
    for (const auto& phase : summaries) {
        if (phase.architecture != nids::Architecture::Phase) {
            continue;
        }
        for (const auto& level : summaries) {
            if (level.architecture == nids::Architecture::Level && level.learner == phase.learner &&
                level.technique == phase.technique) {
                comparisons.push_back(nids::compare_models(phase, level));
            }
        }
    }
    if (comparisons.empty()) {
        throw nids::Error("run in " + run_dir + " holds no phase/level pair to compare");
    }
    if (out_file.empty()) {
        nids::write_comparison(std::cout, comparisons);
        return 0;
    }
    std::ofstream out(out_file, std::ios::binary);
    nids::write_comparison(out, comparisons);
    return out ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Multi-stage decision-tree intrusion detection on NSL-KDD records"};
    app.require_subcommand(1);

    CommonOptions split_options;
    auto* split = app.add_subcommand("split", "Split a corpus into train.txt and test.txt");
    add_common(*split, split_options);

    CommonOptions train_options;
    std::string train_file;
    auto* train = app.add_subcommand("train", "Train phase and/or level models");
    add_common(*train, train_options);
    train->add_option("--train", train_file, "Training records (otherwise the corpus is split)");

    std::string classify_models, classify_input, classify_out, classify_alerts;
    auto* classify = app.add_subcommand("classify", "Classify records with a saved model");
    classify->add_option("--models", classify_models, "Saved model directory")->required();
    classify->add_option("--input", classify_input, "Records to classify")->required();
    classify->add_option("--out", classify_out, "Verdict file (default stdout)");
    classify->add_option("--alerts", classify_alerts, "Alert stream file");

    std::vector<std::string> report_models;
    std::string report_input, report_taxonomy, report_technique = "custom", report_out;
    auto* report = app.add_subcommand("report", "Evaluate saved models on labeled records");
    report->add_option("--models", report_models, "Saved model directories")->required();
    report->add_option("--input", report_input, "Labeled test records")->required();
    report->add_option("--taxonomy", report_taxonomy, "attack_type,category table");
    report->add_option("--technique", report_technique, "Technique label for the metric tuples");
    report->add_option("--out", report_out, "Directory for report.csv and metrics.csv (default stdout)");

    CommonOptions run_options;
    auto* run = app.add_subcommand("run", "Run a full experiment");
    add_common(*run, run_options);

    std::string compare_run, compare_out;
    auto* compare = app.add_subcommand("compare", "Compare phase and level results of a run");
    compare->add_option("--run", compare_run, "Run output directory")->required();
    compare->add_option("--out", compare_out, "Comparison file (default stdout)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*split) {
            return cmd_split(split_options);
        }
        if (*train) {
            return cmd_train(train_options, train_file);
        }
        if (*classify) {
            return cmd_classify(classify_models, classify_input, classify_out, classify_alerts);
        }
        if (*report) {
            return cmd_report(report_models, report_input, report_taxonomy, report_technique, report_out);
        }
        if (*run) {
            return cmd_run(run_options);
        }
        if (*compare) {
            return cmd_compare(compare_run, compare_out);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
