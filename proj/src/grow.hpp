#ifndef NIDS_SRC_GROW_HPP
#define NIDS_SRC_GROW_HPP

// Growth-time tree representation and helpers shared by the learners.

#include "nids/tree.hpp"

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <utility>
#include <vector>

namespace nids::detail {

struct GrowNode {
    std::vector<std::int64_t> counts;
    std::optional<SplitPredicate> split;
    std::vector<std::unique_ptr<GrowNode>> children;

    bool is_leaf() const noexcept { return !split.has_value(); }
    void make_leaf() {
        split.reset();
        children.clear();
    }
};

using Rows = std::vector<std::size_t>;

std::vector<std::int64_t> count_classes(const LabeledMatrix& data, std::span<const std::size_t> rows);

bool is_pure(std::span<const std::int64_t> counts);

std::int64_t misclassified(std::span<const std::int64_t> counts);

/// Purity, min_node_size and max_depth stopping rules common to every learner.
bool should_stop(std::size_t row_count, std::span<const std::int64_t> counts, std::size_t depth,
                 const TreeParams& params);

std::vector<Rows> partition_rows(const LabeledMatrix& data, std::span<const std::size_t> rows,
                                 const SplitPredicate& predicate);

/// Nominal split over the codes seen at a node. Codes never seen there join the
/// group of the largest child, which also becomes the fallback child.
NominalSplit make_nominal_split(std::size_t feature, std::vector<std::vector<int>> seen_groups, int code_count,
                                std::span<const std::int64_t> group_sizes);

/// code_count x classes table of rows per (code, class).
std::vector<std::vector<std::int64_t>> code_class_table(const LabeledMatrix& data, std::span<const std::size_t> rows,
                                                        std::size_t feature);

/// Calls visit(cut, left_counts, right_counts) for every midpoint between
/// adjacent distinct values of a continuous feature, in ascending cut order.
template <typename Visit>
void scan_thresholds(const LabeledMatrix& data, std::span<const std::size_t> rows, std::size_t feature,
                     std::span<const std::int64_t> node_counts, Visit&& visit) {
    std::vector<std::pair<double, int>> sorted;
    sorted.reserve(rows.size());
    for (auto r : rows) {
        sorted.emplace_back(data.at(r, feature), data.label(r));
    }
    std::sort(sorted.begin(), sorted.end());
    std::vector<std::int64_t> left(node_counts.size(), 0);
    std::vector<std::int64_t> right(node_counts.begin(), node_counts.end());
    for (std::size_t i = 0; i + 1 < sorted.size(); ++i) {
        const auto k = static_cast<std::size_t>(sorted[i].second);
        ++left[k];
        --right[k];
        if (sorted[i].first < sorted[i + 1].first) {
            const double cut = sorted[i].first + (sorted[i + 1].first - sorted[i].first) / 2.0;
            visit(cut, std::span<const std::int64_t>(left), std::span<const std::int64_t>(right));
        }
    }
}

/// Pre-order flattening into an immutable model.
TreeModel flatten(Learner learner, const LabeledMatrix& data, const TreeParams& params, const GrowNode& root);

} // namespace nids::detail

#endif // NIDS_SRC_GROW_HPP
