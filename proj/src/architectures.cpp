#include "nids/architectures.hpp"

#include "nids/error.hpp"
#include "nids/learners.hpp"
#include "text_io.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <set>

namespace nids {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

struct Labeled {
    std::vector<const ConnectionRecord*> records;
    std::vector<int> labels;
};

TreeModel fit_tree(const Labeled& set, std::vector<std::string> class_names, Learner learner, const TreeParams& params,
                   const PreprocessState& preprocess) {
    const auto view = view_for(learner);
    LabeledMatrix matrix(preprocess.tree_kinds(view), std::move(class_names));
    for (std::size_t i = 0; i < set.records.size(); ++i) {
        matrix.add_row(preprocess.tree_row(*set.records[i], view), set.labels[i]);
    }
    return train_tree(learner, matrix, params);
}

int index_of(const std::vector<std::string>& names, std::string_view name) {
    const auto it = std::find(names.begin(), names.end(), name);
    if (it == names.end()) {
        throw Error("class '" + std::string(name) + "' missing from class set");
    }
    return static_cast<int>(it - names.begin());
}

std::vector<ClassLabel> categorize_all(std::span<const ConnectionRecord> train, const LabelTaxonomy& taxonomy) {
    if (train.empty()) {
        throw Error("cannot train on an empty training set");
    }
    std::vector<ClassLabel> labels;
    labels.reserve(train.size());
    bool any_normal = false;
    bool any_attack = false;
    for (const auto& record : train) {
        labels.push_back(taxonomy.categorize(record.label));
        (labels.back().is_attack() ? any_attack : any_normal) = true;
    }
    if (!any_attack) {
        throw Error("training set holds no attack records");
    }
    if (!any_normal) {
        throw Error("training set holds no normal records");
    }
    return labels;
}

std::vector<std::string> category_names() {
    std::vector<std::string> names;
    for (auto c : kCategories) {
        names.emplace_back(to_string(c));
    }
    return names;
}

StageOutput output_of(const TreeModel& tree, std::span<const double> row) {
    const auto prediction = tree.predict(row);
    return {tree.class_name(prediction.class_index), prediction.confidence};
}

void write_file(const std::filesystem::path& path, const auto& writer) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw Error("cannot write " + path.string());
    }
    writer(out);
    if (!out.flush()) {
        throw Error("write failed for " + path.string());
    }
}

TreeModel read_tree(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error("cannot read " + path.string());
    }
    return TreeModel::read(in);
}

PreprocessState read_preprocess(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error("cannot read " + path.string());
    }
    return PreprocessState::read(in);
}

struct Manifest {
    Learner learner = Learner::C5;
    std::string preprocess_file;
    std::vector<std::pair<std::string, std::string>> trees;
};

void write_manifest(const std::filesystem::path& dir, std::string_view kind, const Manifest& manifest) {
    write_file(dir / "manifest.txt", [&](std::ostream& out) {
        out << kind << " 1\n";
        out << "learner " << to_string(manifest.learner) << '\n';
        out << "preprocess " << manifest.preprocess_file << '\n';
        for (const auto& [name, file] : manifest.trees) {
            out << "tree " << name << ' ' << file << '\n';
        }
        out << "end\n";
    });
}

Manifest read_manifest(const std::filesystem::path& dir, std::string_view kind) {
    const auto path = dir / "manifest.txt";
    std::ifstream in(path);
    if (!in) {
        throw Error("cannot read " + path.string());
    }
    const std::string context = "manifest";
    detail::expect_word(in, context, std::string(kind));
    if (detail::read_value<int>(in, context, "version") != 1) {
        throw ParseError(0, "manifest: unsupported version");
    }
    Manifest manifest;
    detail::expect_word(in, context, "learner");
    manifest.learner = parse_learner(detail::read_value<std::string>(in, context, "learner"));
    detail::expect_word(in, context, "preprocess");
    manifest.preprocess_file = detail::read_value<std::string>(in, context, "preprocess file");
    for (;;) {
        const auto word = detail::read_value<std::string>(in, context, "tree or end");
        if (word == "end") {
            break;
        }
        if (word != "tree") {
            throw ParseError(0, "manifest: unexpected '" + word + "'");
        }
        auto name = detail::read_value<std::string>(in, context, "tree name");
        auto file = detail::read_value<std::string>(in, context, "tree file");
        manifest.trees.emplace_back(std::move(name), std::move(file));
    }
    return manifest;
}

} // namespace

std::string_view to_string(Architecture architecture) {
    return architecture == Architecture::Phase ? "phase" : "level";
}

TreeView view_for(Learner learner) {
    return learner == Learner::CHAID ? TreeView::Discretized : TreeView::Continuous;
}

PhaseModel::PhaseModel(Learner learner, PreprocessState preprocess, std::vector<TreeModel> trees,
                       std::map<Category, TreeModel> phase3, StageTimes times)
    : learner_(learner), preprocess_(std::move(preprocess)), trees_(std::move(trees)), phase3_(std::move(phase3)),
      times_(times) {}

PhaseModel PhaseModel::train(std::span<const ConnectionRecord> train, const LabelTaxonomy& taxonomy, Learner learner,
                             const TreeParams& params, const PreprocessOptions& options) {
    const auto preprocess = PreprocessState::fit(train, options, taxonomy);
    return PhaseModel::train(train, taxonomy, learner, params, preprocess);
}

PhaseModel PhaseModel::train(std::span<const ConnectionRecord> train, const LabelTaxonomy& taxonomy, Learner learner,
                             const TreeParams& params, const PreprocessState& preprocess) {
    const auto labels = categorize_all(train, taxonomy);
    StageTimes times{};
    std::vector<TreeModel> trees;

    auto start = Clock::now();
    Labeled binary;
    for (std::size_t i = 0; i < train.size(); ++i) {
        binary.records.push_back(&train[i]);
        binary.labels.push_back(labels[i].is_attack() ? 1 : 0);
    }
    trees.push_back(fit_tree(binary, {std::string(kNormalClass), std::string(kAttackClass)}, learner, params, preprocess));
    times[0] = seconds_since(start);

    start = Clock::now();
    Labeled attacks;
    std::map<Category, Labeled> by_category;
    std::map<Category, std::set<std::string>> types;
    for (std::size_t i = 0; i < train.size(); ++i) {
        if (!labels[i].is_attack()) {
            continue;
        }
        const auto category = *labels[i].category();
        attacks.records.push_back(&train[i]);
        attacks.labels.push_back(static_cast<int>(category));
        by_category[category].records.push_back(&train[i]);
        types[category].insert(labels[i].attack_type());
    }
    trees.push_back(fit_tree(attacks, category_names(), learner, params, preprocess));
    times[1] = seconds_since(start);

    start = Clock::now();
    std::map<Category, TreeModel> phase3;
    for (auto& [category, set] : by_category) {
        const std::vector<std::string> names(types[category].begin(), types[category].end());
        for (const auto* record : set.records) {
            set.labels.push_back(index_of(names, labels[static_cast<std::size_t>(record - train.data())].attack_type()));
        }
        phase3.emplace(category, fit_tree(set, names, learner, params, preprocess));
    }
    times[2] = seconds_since(start);
    return PhaseModel(learner, preprocess, std::move(trees), std::move(phase3), times);
}

PhaseVerdict PhaseModel::classify(const ConnectionRecord& record) const {
    const auto row = preprocess_.tree_row(record, view_for(learner_));
    PhaseVerdict verdict;
    verdict.stage_trail.push_back(output_of(phase1(), row));
    if (verdict.stage_trail.back().label != kAttackClass) {
        return verdict;
    }
    verdict.is_attack = true;
    verdict.stage_trail.push_back(output_of(phase2(), row));
    const auto category = *parse_category(verdict.stage_trail.back().label);
    verdict.category = category;
    const auto module = phase3_.find(category);
    if (module == phase3_.end()) {
        verdict.attack_type = std::string(kUnspecifiedType);
        return verdict;
    }
    verdict.stage_trail.push_back(output_of(module->second, row));
    verdict.attack_type = verdict.stage_trail.back().label;
    return verdict;
}

std::vector<PhaseVerdict> PhaseModel::classify(std::span<const ConnectionRecord> records) const {
    std::vector<PhaseVerdict> out;
    out.reserve(records.size());
    for (const auto& record : records) {
        out.push_back(classify(record));
    }
    return out;
}

void PhaseModel::save(const std::filesystem::path& dir) const {
    std::filesystem::create_directories(dir);
    Manifest manifest;
    manifest.learner = learner_;
    manifest.preprocess_file = "preprocess.txt";
    write_file(dir / manifest.preprocess_file, [&](std::ostream& out) { preprocess_.write(out); });
    const auto save_tree = [&](const std::string& name, const TreeModel& tree) {
        const auto file = name + ".tree";
        write_file(dir / file, [&](std::ostream& out) { tree.write(out); });
        manifest.trees.emplace_back(name, file);
    };
    save_tree("phase1", phase1());
    save_tree("phase2", phase2());
    for (const auto& [category, tree] : phase3_) {
        save_tree("phase3_" + std::string(to_string(category)), tree);
    }
    write_manifest(dir, "nids-phase-model", manifest);
}

PhaseModel PhaseModel::load(const std::filesystem::path& dir) {
    const auto manifest = read_manifest(dir, "nids-phase-model");
    auto preprocess = read_preprocess(dir / manifest.preprocess_file);
    std::vector<TreeModel> trees;
    std::map<Category, TreeModel> phase3;
    for (const auto& [name, file] : manifest.trees) {
        auto tree = read_tree(dir / file);
        if (name == "phase1" && trees.empty()) {
            trees.push_back(std::move(tree));
        } else if (name == "phase2" && trees.size() == 1) {
            trees.push_back(std::move(tree));
        } else if (name.rfind("phase3_", 0) == 0 && parse_category(name.substr(7))) {
            phase3.emplace(*parse_category(name.substr(7)), std::move(tree));
        } else {
            throw ParseError(0, "manifest: unexpected tree '" + name + "'");
        }
    }
    if (trees.size() != 2) {
        throw ParseError(0, "manifest: phase model needs phase1 and phase2 trees");
    }
    return PhaseModel(manifest.learner, std::move(preprocess), std::move(trees), std::move(phase3), {});
}

bool PhaseModel::operator==(const PhaseModel& other) const {
    return learner_ == other.learner_ && preprocess_ == other.preprocess_ && trees_ == other.trees_ &&
           phase3_ == other.phase3_;
}

LevelModel::LevelModel(Learner learner, PreprocessState preprocess, std::vector<TreeModel> trees, StageTimes times)
    : learner_(learner), preprocess_(std::move(preprocess)), trees_(std::move(trees)), times_(times) {}

LevelModel LevelModel::train(std::span<const ConnectionRecord> train, const LabelTaxonomy& taxonomy, Learner learner,
                             const TreeParams& params, const PreprocessOptions& options) {
    const auto preprocess = PreprocessState::fit(train, options, taxonomy);
    return LevelModel::train(train, taxonomy, learner, params, preprocess);
}

LevelModel LevelModel::train(std::span<const ConnectionRecord> train, const LabelTaxonomy& taxonomy, Learner learner,
                             const TreeParams& params, const PreprocessState& preprocess) {
    const auto labels = categorize_all(train, taxonomy);
    StageTimes times{};
    std::vector<TreeModel> trees;
    Labeled set;
    for (const auto& record : train) {
        set.records.push_back(&record);
    }

    auto start = Clock::now();
    set.labels.clear();
    for (const auto& label : labels) {
        set.labels.push_back(label.is_attack() ? 1 : 0);
    }
    trees.push_back(fit_tree(set, {std::string(kNormalClass), std::string(kAttackClass)}, learner, params, preprocess));
    times[0] = seconds_since(start);

    start = Clock::now();
    std::vector<std::string> level2_names{std::string(kNormalClass)};
    for (const auto& name : category_names()) {
        level2_names.push_back(name);
    }
    set.labels.clear();
    for (const auto& label : labels) {
        set.labels.push_back(label.is_attack() ? 1 + static_cast<int>(*label.category()) : 0);
    }
    trees.push_back(fit_tree(set, level2_names, learner, params, preprocess));
    times[1] = seconds_since(start);

    start = Clock::now();
    std::set<std::string> types;
    for (const auto& label : labels) {
        if (label.is_attack()) {
            types.insert(label.attack_type());
        }
    }
    std::vector<std::string> level3_names{std::string(kNormalClass)};
    level3_names.insert(level3_names.end(), types.begin(), types.end());
    set.labels.clear();
    for (const auto& label : labels) {
        set.labels.push_back(label.is_attack() ? index_of(level3_names, label.attack_type()) : 0);
    }
    trees.push_back(fit_tree(set, level3_names, learner, params, preprocess));
    times[2] = seconds_since(start);
    return LevelModel(learner, preprocess, std::move(trees), times);
}

StageOutput LevelModel::classify_level(const ConnectionRecord& record, int level) const {
    if (level < 1 || level > 3) {
        throw Error("level must be 1, 2 or 3");
    }
    const auto row = preprocess_.tree_row(record, view_for(learner_));
    return output_of(this->level(level), row);
}

LevelVerdict LevelModel::classify(const ConnectionRecord& record) const {
    const auto row = preprocess_.tree_row(record, view_for(learner_));
    return {output_of(level(1), row), output_of(level(2), row), output_of(level(3), row)};
}

std::vector<LevelVerdict> LevelModel::classify(std::span<const ConnectionRecord> records) const {
    std::vector<LevelVerdict> out;
    out.reserve(records.size());
    for (const auto& record : records) {
        out.push_back(classify(record));
    }
    return out;
}

void LevelModel::save(const std::filesystem::path& dir) const {
    std::filesystem::create_directories(dir);
    Manifest manifest;
    manifest.learner = learner_;
    manifest.preprocess_file = "preprocess.txt";
    write_file(dir / manifest.preprocess_file, [&](std::ostream& out) { preprocess_.write(out); });
    for (int i = 1; i <= 3; ++i) {
        const auto name = "level" + std::to_string(i);
        const auto file = name + ".tree";
        write_file(dir / file, [&](std::ostream& out) { level(i).write(out); });
        manifest.trees.emplace_back(name, file);
    }
    write_manifest(dir, "nids-level-model", manifest);
}

LevelModel LevelModel::load(const std::filesystem::path& dir) {
    const auto manifest = read_manifest(dir, "nids-level-model");
    auto preprocess = read_preprocess(dir / manifest.preprocess_file);
    std::vector<TreeModel> trees;
    for (const auto& [name, file] : manifest.trees) {
        if (name != "level" + std::to_string(trees.size() + 1)) {
            throw ParseError(0, "manifest: unexpected tree '" + name + "'");
        }
        trees.push_back(read_tree(dir / file));
    }
    if (trees.size() != 3) {
        throw ParseError(0, "manifest: level model needs three trees");
    }
    return LevelModel(manifest.learner, std::move(preprocess), std::move(trees), {});
}

bool LevelModel::operator==(const LevelModel& other) const {
    return learner_ == other.learner_ && preprocess_ == other.preprocess_ && trees_ == other.trees_;
}

} // namespace nids
