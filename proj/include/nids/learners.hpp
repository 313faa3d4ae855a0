#ifndef NIDS_LEARNERS_HPP
#define NIDS_LEARNERS_HPP

#include "nids/tree.hpp"

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace nids {

/// Gain-ratio tree with error-based (pessimistic) pruning at params.prune_cf.
/// Continuous features split at midpoints between adjacent distinct values; a
/// nominal feature splits one child per code present at the node. Among
/// candidates with positive gain, those with at least the average gain compete
/// on gain ratio. Codes absent at a node route to the child with most rows.
TreeModel train_c5(const LabeledMatrix& data, const TreeParams& params);

/// Binary Gini tree, grown full then cost-complexity pruned. The pruning
/// strength is picked on a seeded holdout of params.cc_holdout_fraction of the
/// rows, then applied to a tree regrown on all rows.
TreeModel train_cart(const LabeledMatrix& data, const TreeParams& params);

/// Multiway chi-square tree over nominal features only (discretize first).
/// Categories are merged pairwise while the most similar pair has p > alpha;
/// the feature with the smallest Bonferroni-adjusted p splits if it is <= alpha.
/// No pruning.
TreeModel train_chaid(const LabeledMatrix& data, const TreeParams& params);

/// Binary tree with split-free attribute selection: ANOVA F for continuous
/// features, chi-square for nominal ones, smallest p wins. Continuous cuts come
/// from a quadratic discriminant between two superclasses found by 2-means on
/// the class means. No pruning.
TreeModel train_quest(const LabeledMatrix& data, const TreeParams& params);

TreeModel train_tree(Learner learner, const LabeledMatrix& data, const TreeParams& params);

// Node-level building blocks, exposed for verification.

struct CartSplit {
    SplitPredicate predicate;
    double impurity_decrease = 0.0;
};

/// Best Gini split over the given rows, or nullopt when no split decreases impurity.
std::optional<CartSplit> best_cart_split(const LabeledMatrix& data, std::span<const std::size_t> rows);

struct ChaidMergeStep {
    std::vector<int> kept;
    std::vector<int> absorbed;
    double p_value = 1.0;
};

struct ChaidFeatureTest {
    std::size_t feature = 0;
    /// Merged categories, each sorted, ordered by smallest code. Only codes seen
    /// at the node appear here.
    std::vector<std::vector<int>> groups;
    std::vector<ChaidMergeStep> merges;
    double statistic = 0.0;
    int degrees_of_freedom = 0;
    double log_adjusted_p = 0.0;
    std::size_t original_categories = 0;
};

/// Merge trace and Bonferroni-adjusted test for one nominal feature, or nullopt
/// when fewer than two categories or classes occur at the node.
std::optional<ChaidFeatureTest> chaid_test_feature(const LabeledMatrix& data, std::span<const std::size_t> rows,
                                                   std::size_t feature, double alpha);

/// log of the Stirling number of the second kind S(n, k).
double log_stirling2(std::size_t n, std::size_t k);

struct QuestSelection {
    std::size_t feature = 0;
    double log_p_value = 0.0;
};

/// Feature with the smallest association p-value at the node, or nullopt when
/// no feature can be tested.
std::optional<QuestSelection> quest_select_feature(const LabeledMatrix& data, std::span<const std::size_t> rows);

/// Cut between two normal superclasses (mean, variance, prior). Falls back to the
/// midpoint of the means when a variance is below 1e-12 or no root lies between them.
double quest_discriminant_cut(double mean_a, double var_a, double prior_a, double mean_b, double var_b,
                              double prior_b);

} // namespace nids

#endif // NIDS_LEARNERS_HPP
