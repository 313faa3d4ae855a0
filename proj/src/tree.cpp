#include "nids/tree.hpp"

#include "nids/error.hpp"
#include "text_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

namespace nids {

using detail::format_double;

namespace {

std::string upper(std::string_view text) {
    std::string out(text);
    std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
    return out;
}

bool is_code(double value, int code_count) {
    return value >= 0.0 && value < static_cast<double>(code_count) && std::floor(value) == value;
}

} // namespace

std::string_view to_string(Learner learner) {
    switch (learner) {
    case Learner::C5: return "C5";
    case Learner::CART: return "CRT";
    case Learner::CHAID: return "CHAID";
    case Learner::QUEST: return "QUEST";
    }
    return "?";
}

Learner parse_learner(std::string_view text) {
    const auto key = upper(text);
    if (key == "C5" || key == "C5.0" || key == "C45" || key == "C4.5") {
        return Learner::C5;
    }
    if (key == "CART" || key == "CRT") {
        return Learner::CART;
    }
    if (key == "CHAID") {
        return Learner::CHAID;
    }
    if (key == "QUEST") {
        return Learner::QUEST;
    }
    throw ConfigError("unknown learner '" + std::string(text) + "' (expected C5, CART, CHAID or QUEST)");
}

LabeledMatrix::LabeledMatrix(std::vector<FeatureKind> kinds, std::vector<std::string> class_names)
    : kinds_{std::move(kinds)}, class_names_{std::move(class_names)} {
    if (kinds_.empty()) {
        throw Error("labeled matrix needs at least one feature");
    }
    if (class_names_.empty()) {
        throw Error("labeled matrix needs at least one class");
    }
    for (const auto& kind : kinds_) {
        if (kind.nominal && kind.code_count < 1) {
            throw Error("nominal feature needs a positive code count");
        }
    }
}

void LabeledMatrix::add_row(std::span<const double> features, int label) {
    if (features.size() != cols()) {
        throw Error("row width " + std::to_string(features.size()) + " differs from " + std::to_string(cols()));
    }
    if (label < 0 || static_cast<std::size_t>(label) >= class_count()) {
        throw Error("class label " + std::to_string(label) + " out of range");
    }
    for (std::size_t j = 0; j < cols(); ++j) {
        if (kinds_[j].nominal && !is_code(features[j], kinds_[j].code_count)) {
            throw Error("feature " + std::to_string(j) + ": value is not a code below " +
                        std::to_string(kinds_[j].code_count));
        }
    }
    values_.insert(values_.end(), features.begin(), features.end());
    labels_.push_back(label);
}

std::vector<std::int64_t> LabeledMatrix::class_counts() const {
    std::vector<std::int64_t> counts(class_count(), 0);
    for (int label : labels_) {
        ++counts[static_cast<std::size_t>(label)];
    }
    return counts;
}

LabeledMatrix LabeledMatrix::subset(std::span<const std::size_t> rows) const {
    LabeledMatrix out(kinds_, class_names_);
    out.values_.reserve(rows.size() * cols());
    out.labels_.reserve(rows.size());
    for (auto r : rows) {
        const auto source = row(r);
        out.values_.insert(out.values_.end(), source.begin(), source.end());
        out.labels_.push_back(labels_[r]);
    }
    return out;
}

void TreeParams::validate() const {
    if (min_node_size < 1) {
        throw ConfigError("min_node_size must be at least 1");
    }
    if (!(alpha > 0.0 && alpha < 1.0)) {
        throw ConfigError("alpha must lie in (0, 1)");
    }
    if (!(prune_cf > 0.0 && prune_cf < 1.0)) {
        throw ConfigError("prune_cf must lie in (0, 1)");
    }
    if (!(cc_holdout_fraction >= 0.0 && cc_holdout_fraction < 1.0)) {
        throw ConfigError("cc_holdout_fraction must lie in [0, 1)");
    }
    if (bin_count < 1) {
        throw ConfigError("bin_count must be at least 1");
    }
}

std::size_t NominalSplit::child_for(double value) const {
    if (value >= 0.0 && std::floor(value) == value) {
        const auto code = static_cast<int>(value);
        for (std::size_t g = 0; g < groups.size(); ++g) {
            if (std::find(groups[g].begin(), groups[g].end(), code) != groups[g].end()) {
                return g;
            }
        }
    }
    return fallback_child;
}

std::size_t split_feature(const SplitPredicate& predicate) {
    return std::visit([](const auto& split) { return split.feature; }, predicate);
}

std::size_t split_arity(const SplitPredicate& predicate) {
    if (const auto* nominal = std::get_if<NominalSplit>(&predicate)) {
        return nominal->groups.size();
    }
    return 2;
}

std::size_t route(const SplitPredicate& predicate, std::span<const double> x) {
    if (const auto* threshold = std::get_if<ThresholdSplit>(&predicate)) {
        return x[threshold->feature] <= threshold->cut ? 0 : 1;
    }
    const auto& nominal = std::get<NominalSplit>(predicate);
    return nominal.child_for(x[nominal.feature]);
}

std::size_t majority_class(std::span<const std::int64_t> counts) {
    std::size_t best = 0;
    for (std::size_t k = 1; k < counts.size(); ++k) {
        if (counts[k] > counts[best]) {
            best = k;
        }
    }
    return best;
}

TreeModel::TreeModel(Learner learner, std::vector<std::string> class_names, std::vector<FeatureKind> kinds,
                     TreeParams params, std::vector<TreeNode> nodes)
    : learner_{learner}, class_names_{std::move(class_names)}, kinds_{std::move(kinds)}, params_{params},
      nodes_{std::move(nodes)} {
    validate();
}

TreeModel TreeModel::single_leaf(Learner learner, std::vector<std::string> class_names,
                                 std::vector<FeatureKind> kinds, TreeParams params,
                                 std::vector<std::int64_t> class_counts) {
    TreeNode leaf;
    leaf.class_counts = std::move(class_counts);
    return TreeModel(learner, std::move(class_names), std::move(kinds), params, {std::move(leaf)});
}

void TreeModel::validate() const {
    if (class_names_.empty()) {
        throw Error("tree needs at least one class");
    }
    if (nodes_.empty()) {
        throw Error("tree has no nodes");
    }
    std::vector<int> parents(nodes_.size(), 0);
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        const auto& node = nodes_[i];
        if (node.class_counts.size() != class_names_.size()) {
            throw Error("node " + std::to_string(i) + ": class count width mismatch");
        }
        if (node.is_leaf()) {
            if (!node.children.empty()) {
                throw Error("node " + std::to_string(i) + ": leaf with children");
            }
            if (std::all_of(node.class_counts.begin(), node.class_counts.end(), [](auto c) { return c == 0; })) {
                throw Error("node " + std::to_string(i) + ": leaf with no training rows");
            }
            continue;
        }
        const auto feature = split_feature(*node.split);
        if (feature >= kinds_.size()) {
            throw Error("node " + std::to_string(i) + ": split feature out of range");
        }
        if (node.children.size() != split_arity(*node.split)) {
            throw Error("node " + std::to_string(i) + ": child count does not match predicate arity");
        }
        if (std::holds_alternative<ThresholdSplit>(*node.split) && kinds_[feature].nominal) {
            throw Error("node " + std::to_string(i) + ": threshold split on a nominal feature");
        }
        if (const auto* nominal = std::get_if<NominalSplit>(&*node.split)) {
            if (!kinds_[feature].nominal || nominal->groups.size() < 2 ||
                nominal->fallback_child >= nominal->groups.size()) {
                throw Error("node " + std::to_string(i) + ": malformed nominal split");
            }
            std::vector<int> seen(static_cast<std::size_t>(kinds_[feature].code_count), 0);
            for (const auto& group : nominal->groups) {
                for (int code : group) {
                    if (code < 0 || code >= kinds_[feature].code_count || seen[static_cast<std::size_t>(code)]++) {
                        throw Error("node " + std::to_string(i) + ": nominal groups overlap or hold invalid codes");
                    }
                }
            }
            if (std::find(seen.begin(), seen.end(), 0) != seen.end()) {
                throw Error("node " + std::to_string(i) + ": nominal groups do not cover every code");
            }
        }
        for (auto child : node.children) {
            if (child <= i || child >= nodes_.size()) {
                throw Error("node " + std::to_string(i) + ": child index breaks pre-order");
            }
            ++parents[child];
        }
    }
    for (std::size_t i = 1; i < nodes_.size(); ++i) {
        if (parents[i] != 1) {
            throw Error("node " + std::to_string(i) + ": not reachable exactly once");
        }
    }
}

Prediction TreeModel::predict(std::span<const double> x) const {
    if (x.size() != kinds_.size()) {
        throw Error("feature vector width " + std::to_string(x.size()) + " differs from the trained width " +
                    std::to_string(kinds_.size()));
    }
    std::size_t index = 0;
    while (!nodes_[index].is_leaf()) {
        const auto& node = nodes_[index];
        index = node.children[route(*node.split, x)];
    }
    const auto& counts = nodes_[index].class_counts;
    const auto best = majority_class(counts);
    std::int64_t sum = 0;
    for (auto c : counts) {
        sum += c;
    }
    return {best, static_cast<double>(counts[best]) / static_cast<double>(sum)};
}

std::size_t TreeModel::leaf_count() const {
    return static_cast<std::size_t>(std::count_if(nodes_.begin(), nodes_.end(), [](const auto& n) { return n.is_leaf(); }));
}

std::size_t TreeModel::depth() const {
    std::vector<std::size_t> level(nodes_.size(), 0);
    std::size_t deepest = 0;
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        deepest = std::max(deepest, level[i]);
        for (auto child : nodes_[i].children) {
            level[child] = level[i] + 1;
        }
    }
    return deepest;
}

// Format, one item per line:
//   nids-tree 1
//   learner <name>
//   classes <k> then k lines "class <name>"
//   features <n> <kind>...          kind is "c" or "n<code_count>"
//   params <min_node_size> <max_depth|none> <alpha> <prune_cf> <cc_holdout> <bin_count> <seed> <prune|noprune>
//   nodes <m> then m lines in pre-order:
//     L <counts...>
//     T <feature> <cut> <counts...>
//     N <feature> <fallback> <groups> (<size> <codes...>)... <counts...>
//   end
// Reals use shortest round-trip formatting, so reloading is bit exact.
void TreeModel::write(std::ostream& out) const {
    out << "nids-tree 1\n";
    out << "learner " << to_string(learner_) << '\n';
    out << "classes " << class_names_.size() << '\n';
    for (const auto& name : class_names_) {
        out << "class " << name << '\n';
    }
    out << "features " << kinds_.size();
    for (const auto& kind : kinds_) {
        out << ' ' << (kind.nominal ? "n" + std::to_string(kind.code_count) : std::string("c"));
    }
    out << '\n';
    out << "params " << params_.min_node_size << ' '
        << (params_.max_depth ? std::to_string(*params_.max_depth) : std::string("none")) << ' '
        << format_double(params_.alpha) << ' ' << format_double(params_.prune_cf) << ' '
        << format_double(params_.cc_holdout_fraction) << ' ' << params_.bin_count << ' ' << params_.seed << ' '
        << (params_.prune ? "prune" : "noprune") << '\n';
    out << "nodes " << nodes_.size() << '\n';
    for (const auto& node : nodes_) {
        if (node.is_leaf()) {
            out << 'L';
        } else if (const auto* threshold = std::get_if<ThresholdSplit>(&*node.split)) {
            out << "T " << threshold->feature << ' ' << format_double(threshold->cut);
        } else {
            const auto& nominal = std::get<NominalSplit>(*node.split);
            out << "N " << nominal.feature << ' ' << nominal.fallback_child << ' ' << nominal.groups.size();
            for (const auto& group : nominal.groups) {
                out << ' ' << group.size();
                for (int code : group) {
                    out << ' ' << code;
                }
            }
        }
        for (auto c : node.class_counts) {
            out << ' ' << c;
        }
        out << '\n';
    }
    out << "end\n";
}

TreeModel TreeModel::read(std::istream& in) {
    detail::expect_word(in, "tree", "nids-tree");
    if (detail::read_value<int>(in, "tree", "format version") != 1) {
        throw ParseError(0, "tree: unsupported format version");
    }
    detail::expect_word(in, "tree", "learner");
    const auto learner = parse_learner(detail::read_value<std::string>(in, "tree", "learner name"));
    detail::expect_word(in, "tree", "classes");
    const auto class_count = detail::read_value<std::size_t>(in, "tree", "class count");
    std::vector<std::string> class_names;
    for (std::size_t k = 0; k < class_count; ++k) {
        detail::expect_word(in, "tree", "class");
        class_names.push_back(detail::read_value<std::string>(in, "tree", "class name"));
    }
    detail::expect_word(in, "tree", "features");
    const auto width = detail::read_value<std::size_t>(in, "tree", "feature count");
    std::vector<FeatureKind> kinds;
    for (std::size_t j = 0; j < width; ++j) {
        const auto token = detail::read_value<std::string>(in, "tree", "feature kind");
        if (token == "c") {
            kinds.push_back(FeatureKind::continuous());
        } else if (token.size() > 1 && token[0] == 'n') {
            kinds.push_back(FeatureKind::categorical(std::stoi(token.substr(1))));
        } else {
            throw ParseError(0, "tree: bad feature kind '" + token + "'");
        }
    }
    detail::expect_word(in, "tree", "params");
    TreeParams params;
    params.min_node_size = detail::read_value<std::size_t>(in, "tree", "min_node_size");
    const auto depth_token = detail::read_value<std::string>(in, "tree", "max_depth");
    if (depth_token != "none") {
        params.max_depth = static_cast<std::size_t>(std::stoull(depth_token));
    }
    params.alpha = detail::read_double(in, "tree", "alpha");
    params.prune_cf = detail::read_double(in, "tree", "prune_cf");
    params.cc_holdout_fraction = detail::read_double(in, "tree", "cc_holdout_fraction");
    params.bin_count = detail::read_value<std::size_t>(in, "tree", "bin_count");
    params.seed = detail::read_value<std::uint64_t>(in, "tree", "seed");
    params.prune = detail::read_value<std::string>(in, "tree", "prune flag") == "prune";

    detail::expect_word(in, "tree", "nodes");
    const auto node_count = detail::read_value<std::size_t>(in, "tree", "node count");
    std::vector<TreeNode> nodes(node_count);
    for (auto& node : nodes) {
        const auto tag = detail::read_value<std::string>(in, "tree", "node tag");
        if (tag == "T") {
            ThresholdSplit split;
            split.feature = detail::read_value<std::size_t>(in, "tree", "feature");
            split.cut = detail::read_double(in, "tree", "cut");
            node.split = split;
        } else if (tag == "N") {
            NominalSplit split;
            split.feature = detail::read_value<std::size_t>(in, "tree", "feature");
            split.fallback_child = detail::read_value<std::size_t>(in, "tree", "fallback child");
            split.groups.resize(detail::read_value<std::size_t>(in, "tree", "group count"));
            for (auto& group : split.groups) {
                group.resize(detail::read_value<std::size_t>(in, "tree", "group size"));
                for (auto& code : group) {
                    code = detail::read_value<int>(in, "tree", "code");
                }
            }
            node.split = std::move(split);
        } else if (tag != "L") {
            throw ParseError(0, "tree: bad node tag '" + tag + "'");
        }
        node.class_counts.resize(class_count);
        for (auto& c : node.class_counts) {
            c = detail::read_value<std::int64_t>(in, "tree", "class count");
        }
    }
    detail::expect_word(in, "tree", "end");

    // Children follow their parent in pre-order; rebuild the index links.
    std::vector<std::size_t> stack;
    std::vector<std::size_t> pending;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        if (i > 0) {
            if (stack.empty()) {
                throw ParseError(0, "tree: node list is not a single pre-order tree");
            }
            const auto parent = stack.back();
            nodes[parent].children.push_back(i);
            if (--pending.back() == 0) {
                stack.pop_back();
                pending.pop_back();
            }
        }
        if (!nodes[i].is_leaf()) {
            stack.push_back(i);
            pending.push_back(split_arity(*nodes[i].split));
        }
    }
    if (!stack.empty()) {
        throw ParseError(0, "tree: truncated node list");
    }
    return TreeModel(learner, std::move(class_names), std::move(kinds), params, std::move(nodes));
}

} // namespace nids
