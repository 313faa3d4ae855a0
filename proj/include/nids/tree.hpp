#ifndef NIDS_TREE_HPP
#define NIDS_TREE_HPP

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace nids {

enum class Learner { C5, CART, CHAID, QUEST };

inline constexpr Learner kLearners[] = {Learner::C5, Learner::CART, Learner::CHAID, Learner::QUEST};

/// "C5", "CRT", "CHAID", "QUEST" (the table names used in reports).
std::string_view to_string(Learner learner);

/// Accepts C5, CART, CRT, CHAID, QUEST in any case.
Learner parse_learner(std::string_view text);

/// Continuous features hold reals; nominal features hold integer codes in
/// [0, code_count). The last code of a preprocessed categorical feature is the
/// reserved code for unseen tokens.
struct FeatureKind {
    bool nominal = false;
    int code_count = 0;

    static FeatureKind continuous() { return {}; }
    static FeatureKind categorical(int code_count) { return {true, code_count}; }

    bool operator==(const FeatureKind&) const = default;
};

/// Row-major training matrix with one class index per row.
class LabeledMatrix {
public:
    LabeledMatrix(std::vector<FeatureKind> kinds, std::vector<std::string> class_names);

    /// Throws nids::Error on width mismatch, out-of-range nominal codes or labels.
    void add_row(std::span<const double> features, int label);

    std::size_t rows() const noexcept { return labels_.size(); }
    std::size_t cols() const noexcept { return kinds_.size(); }
    std::size_t class_count() const noexcept { return class_names_.size(); }

    double at(std::size_t row, std::size_t col) const { return values_[row * cols() + col]; }
    std::span<const double> row(std::size_t r) const { return {values_.data() + r * cols(), cols()}; }
    int label(std::size_t r) const { return labels_[r]; }

    const std::vector<FeatureKind>& kinds() const noexcept { return kinds_; }
    const std::vector<std::string>& class_names() const noexcept { return class_names_; }
    std::vector<std::int64_t> class_counts() const;

    LabeledMatrix subset(std::span<const std::size_t> rows) const;

private:
    std::vector<FeatureKind> kinds_;
    std::vector<std::string> class_names_;
    std::vector<double> values_;
    std::vector<int> labels_;
};

struct TreeParams {
    std::size_t min_node_size = 2;
    std::optional<std::size_t> max_depth;
    double alpha = 0.05;
    double prune_cf = 0.25;
    /// 0 disables cost-complexity pruning.
    double cc_holdout_fraction = 0.2;
    std::size_t bin_count = 10;
    std::uint64_t seed = 1;
    /// false keeps C5 and CART trees at full growth.
    bool prune = true;

    /// Throws ConfigError when a field is out of range.
    void validate() const;

    bool operator==(const TreeParams&) const = default;
};

/// x[feature] <= cut routes to child 0, anything else to child 1.
struct ThresholdSplit {
    std::size_t feature = 0;
    double cut = 0.0;

    bool operator==(const ThresholdSplit&) const = default;
};

/// One child per group. Groups are disjoint and cover every code of the feature;
/// values that are not a valid code route to fallback_child, the child that held
/// the most training rows.
struct NominalSplit {
    std::size_t feature = 0;
    std::vector<std::vector<int>> groups;
    std::size_t fallback_child = 0;

    std::size_t child_for(double value) const;

    bool operator==(const NominalSplit&) const = default;
};

using SplitPredicate = std::variant<ThresholdSplit, NominalSplit>;

std::size_t split_feature(const SplitPredicate& predicate);
std::size_t split_arity(const SplitPredicate& predicate);
std::size_t route(const SplitPredicate& predicate, std::span<const double> x);

struct TreeNode {
    std::optional<SplitPredicate> split;
    /// Indices into TreeModel::nodes(), one per predicate outcome.
    std::vector<std::size_t> children;
    /// Training rows reaching this node, per class.
    std::vector<std::int64_t> class_counts;

    bool is_leaf() const noexcept { return !split.has_value(); }

    bool operator==(const TreeNode&) const = default;
};

struct Prediction {
    std::size_t class_index = 0;
    double confidence = 0.0;
};

/// Majority class of a count vector; ties go to the smaller class index.
std::size_t majority_class(std::span<const std::int64_t> counts);

/// Immutable trained tree. Nodes are stored in pre-order with the root at 0.
class TreeModel {
public:
    /// Throws nids::Error when the node list violates a structural invariant.
    TreeModel(Learner learner, std::vector<std::string> class_names, std::vector<FeatureKind> kinds,
              TreeParams params, std::vector<TreeNode> nodes);

    static TreeModel single_leaf(Learner learner, std::vector<std::string> class_names,
                                 std::vector<FeatureKind> kinds, TreeParams params,
                                 std::vector<std::int64_t> class_counts);

    /// Throws nids::Error when x.size() differs from the training width.
    Prediction predict(std::span<const double> x) const;
    const std::string& class_name(std::size_t index) const { return class_names_.at(index); }

    Learner learner() const noexcept { return learner_; }
    const std::vector<std::string>& class_names() const noexcept { return class_names_; }
    const std::vector<FeatureKind>& kinds() const noexcept { return kinds_; }
    const TreeParams& params() const noexcept { return params_; }
    const std::vector<TreeNode>& nodes() const noexcept { return nodes_; }
    const TreeNode& root() const { return nodes_.front(); }

    std::size_t node_count() const noexcept { return nodes_.size(); }
    std::size_t leaf_count() const;
    std::size_t depth() const;

    void write(std::ostream& out) const;
    static TreeModel read(std::istream& in);

    bool operator==(const TreeModel&) const = default;

private:
    void validate() const;

    Learner learner_;
    std::vector<std::string> class_names_;
    std::vector<FeatureKind> kinds_;
    TreeParams params_;
    std::vector<TreeNode> nodes_;
};

} // namespace nids

#endif // NIDS_TREE_HPP
