#include "nids/harness.hpp"

#include "nids/error.hpp"
#include "text_io.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <ostream>
#include <set>
#include <sstream>

#ifndef NIDS_DEFAULT_TAXONOMY
#define NIDS_DEFAULT_TAXONOMY "data/attack_taxonomy.csv"
#endif

namespace nids {

namespace {

using Clock = std::chrono::steady_clock;

const std::set<std::string> kConfigKeys = {
    "corpus",      "taxonomy",  "technique", "train_fraction", "unknown_attack_types", "train_normal",
    "train_attack", "test_normal", "test_known", "seed",        "model",                "learners",
    "min_node_size", "max_depth", "alpha",     "prune_cf",      "cc_holdout_fraction",  "bin_count",
    "prune",       "top_k",     "out"};

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& text) {
    std::filesystem::path path(text);
    if (path.is_relative() && !base.empty()) {
        path = base / path;
    }
    return path.lexically_normal();
}

bool parse_bool(const std::string& key, const std::string& text) {
    std::string lower = text;
    std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
    if (lower == "true" || lower == "yes" || lower == "1" || lower == "on") {
        return true;
    }
    if (lower == "false" || lower == "no" || lower == "0" || lower == "off") {
        return false;
    }
    throw ConfigError("config key '" + key + "' expects true or false, got '" + text + "'");
}

std::size_t parse_count(const KeyValueConfig& config, const std::string& key, std::size_t fallback) {
    const auto value = config.get_int(key, static_cast<long long>(fallback));
    if (value < 0) {
        throw ConfigError("config key '" + key + "' must be non-negative");
    }
    return static_cast<std::size_t>(value);
}

std::string fixed(double value, int decimals) {
    char buffer[64];
    std::snprintf(buffer, sizeof buffer, "%.*f", decimals, value);
    return buffer;
}

std::string join_confidences(const std::vector<double>& values) {
    std::string out;
    for (std::size_t i = 0; i < values.size(); ++i) {
        out += (i ? "," : "") + fixed(values[i], 4);
    }
    return out;
}

std::size_t write_alerts(const std::vector<Alert>& alerts, std::ostream& sink) {
    for (const auto& alert : alerts) {
        sink << alert.record_index << '\t' << to_string(alert.architecture) << '\t' << alert.stage << '\t'
             << alert.category << '\t' << alert.attack_type << '\t' << join_confidences(alert.confidences) << '\t'
             << alert.timestamp << '\n';
    }
    if (!sink) {
        throw Error("alert sink write failed");
    }
    return alerts.size();
}

void write_text(const std::filesystem::path& path, const std::function<void(std::ostream&)>& writer) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw Error("cannot write " + path.string());
    }
    writer(out);
    if (!out.flush()) {
        throw Error("write failed for " + path.string());
    }
}

std::string cell_name(Architecture architecture, Learner learner) {
    return std::string(to_string(architecture)) + "_" + std::string(to_string(learner));
}

} // namespace

std::string_view to_string(ModelChoice choice) {
    switch (choice) {
    case ModelChoice::Phase:
        return "phase";
    case ModelChoice::Level:
        return "level";
    case ModelChoice::Both:
        return "both";
    }
    return "both";
}

ModelChoice parse_model_choice(std::string_view text) {
    if (text == "phase") {
        return ModelChoice::Phase;
    }
    if (text == "level") {
        return ModelChoice::Level;
    }
    if (text == "both") {
        return ModelChoice::Both;
    }
    throw ConfigError("model must be phase, level or both, got '" + std::string(text) + "'");
}

ExperimentConfig ExperimentConfig::from_config(const KeyValueConfig& config, const std::filesystem::path& base_dir) {
    for (const auto& [key, value] : config.entries()) {
        if (!kConfigKeys.contains(key)) {
            throw ConfigError("unknown config key '" + key + "'");
        }
    }
    ExperimentConfig out;
    for (const auto& item : config.get_list("corpus")) {
        out.corpus.push_back(resolve(base_dir, item));
    }
    out.taxonomy = config.has("taxonomy") ? resolve(base_dir, *config.get("taxonomy"))
                                          : std::filesystem::path(NIDS_DEFAULT_TAXONOMY);
    out.split = SplitSpec::from_config(config);
    if (auto model = config.get("model")) {
        out.model = parse_model_choice(*model);
    }
    if (config.has("learners")) {
        out.learners.clear();
        for (const auto& name : config.get_list("learners")) {
            const auto learner = parse_learner(name);
            if (std::find(out.learners.begin(), out.learners.end(), learner) == out.learners.end()) {
                out.learners.push_back(learner);
            }
        }
    }
    out.params.seed = out.split.seed;
    out.params.min_node_size = parse_count(config, "min_node_size", out.params.min_node_size);
    if (auto depth = config.get("max_depth"); depth && *depth != "none") {
        out.params.max_depth = parse_count(config, "max_depth", 0);
    }
    out.params.alpha = config.get_double("alpha", out.params.alpha);
    out.params.prune_cf = config.get_double("prune_cf", out.params.prune_cf);
    out.params.cc_holdout_fraction = config.get_double("cc_holdout_fraction", out.params.cc_holdout_fraction);
    out.params.bin_count = parse_count(config, "bin_count", out.params.bin_count);
    if (auto prune = config.get("prune")) {
        out.params.prune = parse_bool("prune", *prune);
    }
    out.params.validate();
    out.preprocess.bin_count = out.params.bin_count;
    if (auto top_k = config.get("top_k"); top_k && *top_k != "all" && *top_k != "none") {
        const auto k = parse_count(config, "top_k", 0);
        if (k == 0 || k > kFeatureCount) {
            throw ConfigError("top_k must be between 1 and " + std::to_string(kFeatureCount));
        }
        out.preprocess.top_k = k;
    }
    if (auto dir = config.get("out")) {
        out.out = resolve(base_dir, *dir);
    }
    return out;
}

ExperimentConfig ExperimentConfig::load(const std::filesystem::path& path,
                                        const std::map<std::string, std::string>& overrides) {
    auto config = KeyValueConfig::load(path);
    for (const auto& [key, value] : overrides) {
        config.set(key, value);
    }
    return from_config(config, path.parent_path());
}

KeyValueConfig ExperimentConfig::to_config() const {
    KeyValueConfig config;
    std::string corpus_list;
    for (const auto& path : corpus) {
        corpus_list += (corpus_list.empty() ? "" : ",") + path.string();
    }
    config.set("corpus", corpus_list);
    config.set("taxonomy", taxonomy.string());
    config.set("technique", std::string(to_string(split.technique)));
    config.set("train_fraction", detail::format_double(split.train_fraction));
    std::string unknown;
    for (const auto& type : split.unknown_attack_types) {
        unknown += (unknown.empty() ? "" : ",") + type;
    }
    config.set("unknown_attack_types", unknown);
    const auto set_target = [&](const char* key, const std::optional<std::size_t>& value) {
        if (value) {
            config.set(key, std::to_string(*value));
        }
    };
    set_target("train_normal", split.targets.train_normal);
    set_target("train_attack", split.targets.train_attack);
    set_target("test_normal", split.targets.test_normal);
    set_target("test_known", split.targets.test_known_attack);
    config.set("seed", std::to_string(split.seed));
    config.set("model", std::string(to_string(model)));
    std::string learner_list;
    for (auto learner : learners) {
        learner_list += (learner_list.empty() ? "" : ",") + std::string(to_string(learner));
    }
    config.set("learners", learner_list);
    config.set("min_node_size", std::to_string(params.min_node_size));
    config.set("max_depth", params.max_depth ? std::to_string(*params.max_depth) : "none");
    config.set("alpha", detail::format_double(params.alpha));
    config.set("prune_cf", detail::format_double(params.prune_cf));
    config.set("cc_holdout_fraction", detail::format_double(params.cc_holdout_fraction));
    config.set("bin_count", std::to_string(params.bin_count));
    config.set("prune", params.prune ? "true" : "false");
    config.set("top_k", preprocess.top_k ? std::to_string(*preprocess.top_k) : "all");
    config.set("out", out.string());
    return config;
}

void ExperimentConfig::validate() const {
    if (learners.empty()) {
        throw ConfigError("at least one learner is required");
    }
    if (corpus.empty()) {
        throw ConfigError("no corpus files configured");
    }
    for (const auto& path : corpus) {
        if (!std::filesystem::exists(path)) {
            throw ConfigError("corpus file not found: " + path.string());
        }
    }
    if (!std::filesystem::exists(taxonomy)) {
        throw ConfigError("taxonomy file not found: " + taxonomy.string());
    }
    params.validate();
}

std::string utc_timestamp() {
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buffer[32];
    std::strftime(buffer, sizeof buffer, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buffer;
}

std::vector<Alert> phase_alerts(std::span<const PhaseVerdict> verdicts, const TimestampSource& now) {
    std::vector<Alert> alerts;
    for (std::size_t i = 0; i < verdicts.size(); ++i) {
        const auto& verdict = verdicts[i];
        if (!verdict.is_attack) {
            continue;
        }
        Alert alert;
        alert.record_index = i;
        alert.architecture = Architecture::Phase;
        alert.stage = verdict.stage_trail.size();
        alert.category = verdict.category ? std::string(to_string(*verdict.category)) : "";
        alert.attack_type = verdict.attack_type.value_or("");
        for (const auto& step : verdict.stage_trail) {
            alert.confidences.push_back(step.confidence);
        }
        alert.timestamp = now();
        alerts.push_back(std::move(alert));
    }
    return alerts;
}

std::vector<Alert> level_alerts(std::span<const LevelVerdict> verdicts, const TimestampSource& now) {
    std::vector<Alert> alerts;
    for (std::size_t i = 0; i < verdicts.size(); ++i) {
        const auto& verdict = verdicts[i];
        if (!verdict.is_attack()) {
            continue;
        }
        Alert alert;
        alert.record_index = i;
        alert.architecture = Architecture::Level;
        alert.stage = 3;
        alert.category = verdict.level2.label;
        alert.attack_type = verdict.level3.label;
        alert.confidences = {verdict.level1.confidence, verdict.level2.confidence, verdict.level3.confidence};
        alert.timestamp = now();
        alerts.push_back(std::move(alert));
    }
    return alerts;
}

std::size_t emit_alerts(std::span<const PhaseVerdict> verdicts, std::ostream& sink, const TimestampSource& now) {
    return write_alerts(phase_alerts(verdicts, now), sink);
}

std::size_t emit_alerts(std::span<const LevelVerdict> verdicts, std::ostream& sink, const TimestampSource& now) {
    return write_alerts(level_alerts(verdicts, now), sink);
}

ModelSummary summarize(const EvalReport& report, const StageTimes& times) {
    ModelSummary summary;
    summary.technique = report.technique;
    summary.architecture = report.architecture;
    summary.learner = report.learner;
    summary.test_count = report.test_count;
    const auto value = [](const std::optional<Rational>& r) -> std::optional<double> {
        return r ? std::optional<double>(r->to_double()) : std::nullopt;
    };
    for (const auto& stage : report.stages) {
        summary.rates[stage.stage]["ccr"] = value(stage.ccr);
        summary.rates[stage.stage]["dr"] = value(stage.detection_rate);
        summary.rates[stage.stage]["far"] = value(stage.false_alarm_rate);
    }
    summary.training_seconds = times[0] + times[1] + times[2];
    return summary;
}

Comparison compare_models(const ModelSummary& phase, const ModelSummary& level) {
    if (phase.technique != level.technique || phase.test_count != level.test_count) {
        throw Error("cannot compare models evaluated on different splits");
    }
    if (phase.learner != level.learner) {
        throw Error("cannot compare models built with different learners");
    }
    Comparison comparison;
    comparison.technique = phase.technique;
    comparison.learner = phase.learner;
    const auto rate = [](const ModelSummary& s, const std::string& stage, const std::string& metric) {
        const auto st = s.rates.find(stage);
        if (st == s.rates.end()) {
            return std::optional<double>{};
        }
        const auto m = st->second.find(metric);
        return m == st->second.end() ? std::optional<double>{} : m->second;
    };
    const auto add_row = [&](std::string stage, std::string metric, std::optional<double> p, std::optional<double> l) {
        std::optional<double> delta;
        if (p && l) {
            delta = *p - *l;
        }
        comparison.rows.push_back({std::move(stage), std::move(metric), p, l, delta});
    };
    for (const std::string stage : {"1", "2", "3"}) {
        for (const std::string metric : {"ccr", "dr", "far"}) {
            add_row(stage, metric, rate(phase, stage, metric), rate(level, stage, metric));
        }
    }
    add_row("type", "ccr", rate(phase, "final", "ccr"), rate(level, "3", "ccr"));
    add_row("all", "train_seconds", phase.training_seconds, level.training_seconds);

    comparison.less_training_time = phase.training_seconds <= level.training_seconds;
    const auto at_least = [](std::optional<double> a, std::optional<double> b) { return a && b && *a >= *b; };
    const auto phase_type_ccr = phase.architecture == Architecture::Phase ? rate(phase, "final", "ccr")
                                                                          : rate(phase, "3", "ccr");
    comparison.higher_classification_rate = at_least(phase_type_ccr, rate(level, "3", "ccr"));
    comparison.lower_false_alarm_rate = at_least(rate(level, "1", "far"), rate(phase, "1", "far"));
    comparison.higher_detection_rate = at_least(rate(phase, "1", "dr"), rate(level, "1", "dr"));
    return comparison;
}

void write_comparison(std::ostream& out, std::span<const Comparison> comparisons) {
    out << "technique,learner,stage,metric,phase,level,delta\n";
    for (const auto& c : comparisons) {
        for (const auto& row : c.rows) {
            const int decimals = row.metric == "train_seconds" ? 3 : 2;
            const auto show = [&](const std::optional<double>& v) { return v ? fixed(*v, decimals) : "NA"; };
            out << c.technique << ',' << to_string(c.learner) << ',' << row.stage << ',' << row.metric << ','
                << show(row.phase) << ',' << show(row.level) << ',' << show(row.delta) << '\n';
        }
    }
    out << "\ntechnique,learner,claim,holds\n";
    for (const auto& c : comparisons) {
        const auto claim = [&](const char* name, bool holds) {
            out << c.technique << ',' << to_string(c.learner) << ',' << name << ',' << (holds ? "true" : "false")
                << '\n';
        };
        claim("less_training_time", c.less_training_time);
        claim("higher_classification_rate", c.higher_classification_rate);
        claim("lower_false_alarm_rate", c.lower_false_alarm_rate);
        claim("higher_detection_rate", c.higher_detection_rate);
    }
}

std::vector<ModelSummary> load_summaries(const std::filesystem::path& run_dir) {
    std::ifstream metrics(run_dir / "metrics.csv");
    if (!metrics) {
        throw Error("cannot read " + (run_dir / "metrics.csv").string());
    }
    const auto manifest = KeyValueConfig::load(run_dir / "manifest.txt");
    std::map<std::tuple<std::string, std::string, std::string>, ModelSummary> summaries;
    std::string line;
    std::getline(metrics, line);
    std::size_t line_no = 1;
    while (std::getline(metrics, line)) {
        ++line_no;
        if (line.empty()) {
            continue;
        }
        std::vector<std::string> fields;
        std::stringstream stream(line);
        std::string field;
        while (std::getline(stream, field, ',')) {
            fields.push_back(field);
        }
        if (fields.size() != 6) {
            throw ParseError(line_no, "metrics: expected 6 fields");
        }
        auto& summary = summaries[{fields[0], fields[1], fields[2]}];
        summary.technique = fields[0];
        summary.architecture = fields[1] == "phase" ? Architecture::Phase : Architecture::Level;
        summary.learner = parse_learner(fields[2]);
        if (fields[4] == "population") {
            if (fields[3] == "1") {
                summary.test_count = std::stoll(fields[5]);
            }
            continue;
        }
        summary.rates[fields[3]][fields[4]] =
            fields[5] == "NA" ? std::nullopt : std::optional<double>(detail::parse_double(fields[5], "metrics"));
    }
    std::vector<ModelSummary> out;
    for (auto& [key, summary] : summaries) {
        const auto time_key = "time." + std::get<1>(key) + "." + std::get<2>(key) + ".train_total";
        summary.training_seconds = manifest.get_double(time_key, 0.0);
        out.push_back(std::move(summary));
    }
    return out;
}

std::vector<ConnectionRecord> load_corpus(std::span<const std::filesystem::path> paths) {
    std::vector<ConnectionRecord> corpus;
    for (const auto& path : paths) {
        auto records = load_records(path);
        corpus.insert(corpus.end(), std::make_move_iterator(records.begin()), std::make_move_iterator(records.end()));
    }
    return corpus;
}

ExperimentData split_corpus(std::span<const ConnectionRecord> corpus, const ExperimentConfig& config,
                            const LabelTaxonomy& taxonomy) {
    ExperimentData data;
    const auto count_normals = [&](const std::vector<ConnectionRecord>& records) {
        return static_cast<std::size_t>(std::count_if(records.begin(), records.end(),
                                                      [&](const auto& r) { return taxonomy.is_normal(r.label); }));
    };
    data.counts["corpus"] = corpus.size();
    if (config.split.technique == SplitTechnique::Partition) {
        auto split = split_partition(corpus, config.split);
        data.train = std::move(split.train);
        data.test = std::move(split.test);
    } else {
        auto split = split_new_attack(corpus, config.split, taxonomy);
        data.train = std::move(split.train);
        const auto test_normal = count_normals(split.test_known);
        data.counts["test_normal"] = test_normal;
        data.counts["test_known_attack"] = split.test_known.size() - test_normal;
        data.counts["test_unknown"] = split.test_unknown.size();
        data.counts["unused"] = split.unused;
        data.test = std::move(split.test_known);
        data.test.insert(data.test.end(), std::make_move_iterator(split.test_unknown.begin()),
                         std::make_move_iterator(split.test_unknown.end()));
    }
    const auto train_normal = count_normals(data.train);
    data.counts["train"] = data.train.size();
    data.counts["train_normal"] = train_normal;
    data.counts["train_attack"] = data.train.size() - train_normal;
    data.counts["test"] = data.test.size();
    return data;
}

RunResult run_experiment(const ExperimentConfig& config, std::ostream* log) {
    RunResult result;
    KeyValueConfig manifest;
    const auto echo = config.to_config();
    for (const auto& [key, value] : echo.entries()) {
        manifest.set("config." + key, value);
    }
    const auto note = [&](const std::string& message) {
        if (log) {
            *log << message << '\n';
        }
    };
    const auto record_time = [&](const std::string& key, double seconds) {
        manifest.set("time." + key, fixed(seconds, 6));
    };
    std::string stage = "config";
    std::vector<MetricTuple> tuples;
    try {
        config.validate();
        std::filesystem::create_directories(config.out / "models");
        std::filesystem::create_directories(config.out / "alerts");

        stage = "load";
        auto start = Clock::now();
        const auto corpus = load_corpus(config.corpus);
        record_time("load", std::chrono::duration<double>(Clock::now() - start).count());
        note("loaded " + std::to_string(corpus.size()) + " records");

        stage = "taxonomy";
        const auto taxonomy = LabelTaxonomy::load(config.taxonomy);
        taxonomy.validate(corpus);

        stage = "split";
        const auto data = split_corpus(corpus, config, taxonomy);
        for (const auto& [key, value] : data.counts) {
            manifest.set("count." + key, std::to_string(value));
        }
        note("train " + std::to_string(data.train.size()) + ", test " + std::to_string(data.test.size()));

        stage = "preprocess";
        start = Clock::now();
        const auto preprocess = PreprocessState::fit(data.train, config.preprocess, taxonomy);
        record_time("preprocess", std::chrono::duration<double>(Clock::now() - start).count());
        std::string retained;
        for (const auto& name : preprocess.retained_names()) {
            retained += (retained.empty() ? "" : ",") + name;
        }
        manifest.set("features", retained);

        const std::string technique(to_string(config.split.technique));
        std::vector<Architecture> architectures;
        if (config.model != ModelChoice::Level) {
            architectures.push_back(Architecture::Phase);
        }
        if (config.model != ModelChoice::Phase) {
            architectures.push_back(Architecture::Level);
        }
        std::map<std::pair<Learner, Architecture>, ModelSummary> summaries;
        for (auto learner : config.learners) {
            for (auto architecture : architectures) {
                const auto cell = cell_name(architecture, learner);
                const auto time_prefix = std::string(to_string(architecture)) + "." + std::string(to_string(learner));
                stage = "train " + cell;
                note(stage);
                EvalReport report;
                StageTimes times{};
                if (architecture == Architecture::Phase) {
                    const auto model = PhaseModel::train(data.train, taxonomy, learner, config.params, preprocess);
                    times = model.stage_seconds();
                    stage = "classify " + cell;
                    start = Clock::now();
                    const auto verdicts = model.classify(data.test);
                    record_time(time_prefix + ".classify", std::chrono::duration<double>(Clock::now() - start).count());
                    stage = "save " + cell;
                    model.save(config.out / "models" / cell);
                    std::size_t alerts = 0;
                    write_text(config.out / "alerts" / (cell + ".tsv"),
                               [&](std::ostream& out) { alerts = emit_alerts(verdicts, out); });
                    manifest.set("alerts." + cell, std::to_string(alerts));
                    manifest.set("trees." + cell, std::to_string(model.tree_count()));
                    stage = "evaluate " + cell;
                    report = phase_report(verdicts, data.test, taxonomy, learner, technique);
                } else {
                    const auto model = LevelModel::train(data.train, taxonomy, learner, config.params, preprocess);
                    times = model.stage_seconds();
                    stage = "classify " + cell;
                    start = Clock::now();
                    const auto verdicts = model.classify(data.test);
                    record_time(time_prefix + ".classify", std::chrono::duration<double>(Clock::now() - start).count());
                    stage = "save " + cell;
                    model.save(config.out / "models" / cell);
                    std::size_t alerts = 0;
                    write_text(config.out / "alerts" / (cell + ".tsv"),
                               [&](std::ostream& out) { alerts = emit_alerts(verdicts, out); });
                    manifest.set("alerts." + cell, std::to_string(alerts));
                    manifest.set("trees." + cell, std::to_string(model.tree_count()));
                    stage = "evaluate " + cell;
                    report = level_report(verdicts, data.test, taxonomy, learner, technique);
                }
                for (int i = 0; i < 3; ++i) {
                    record_time(time_prefix + ".stage" + std::to_string(i + 1), times[static_cast<std::size_t>(i)]);
                }
                record_time(time_prefix + ".train_total", times[0] + times[1] + times[2]);
                summaries[{learner, architecture}] = summarize(report, times);
                const auto cell_tuples = metric_tuples(report);
                tuples.insert(tuples.end(), cell_tuples.begin(), cell_tuples.end());
                result.reports.push_back(std::move(report));
            }
            if (architectures.size() == 2) {
                result.comparisons.push_back(compare_models(summaries.at({learner, Architecture::Phase}),
                                                            summaries.at({learner, Architecture::Level})));
            }
        }

        stage = "report";
        write_text(config.out / "report.csv",
                   [&](std::ostream& out) { write_report_table(out, result.reports); });
        if (!result.comparisons.empty()) {
            write_text(config.out / "comparison.csv",
                       [&](std::ostream& out) { write_comparison(out, result.comparisons); });
        }
        result.complete = true;
    } catch (const std::exception& e) {
        result.failed_stage = stage;
        result.error = e.what();
        note("failed at " + stage + ": " + e.what());
    }
    try {
        if (std::filesystem::exists(config.out) || std::filesystem::create_directories(config.out)) {
            write_text(config.out / "metrics.csv", [&](std::ostream& out) { write_metric_tuples(out, tuples); });
            manifest.set("status", result.complete ? "complete" : "incomplete");
            if (!result.complete) {
                manifest.set("failed_stage", result.failed_stage);
                manifest.set("error", result.error);
            }
            write_text(config.out / "manifest.txt", [&](std::ostream& out) { manifest.write(out); });
        }
    } catch (const std::exception& e) {
        if (result.complete) {
            result.complete = false;
            result.failed_stage = "write manifest";
            result.error = e.what();
        }
    }
    return result;
}

} // namespace nids
