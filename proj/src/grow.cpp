#include "grow.hpp"

#include "nids/error.hpp"

#include <algorithm>

namespace nids::detail {

std::vector<std::int64_t> count_classes(const LabeledMatrix& data, std::span<const std::size_t> rows) {
    std::vector<std::int64_t> counts(data.class_count(), 0);
    for (auto r : rows) {
        ++counts[static_cast<std::size_t>(data.label(r))];
    }
    return counts;
}

bool is_pure(std::span<const std::int64_t> counts) {
    return std::count_if(counts.begin(), counts.end(), [](auto c) { return c > 0; }) <= 1;
}

std::int64_t misclassified(std::span<const std::int64_t> counts) {
    std::int64_t sum = 0;
    for (auto c : counts) {
        sum += c;
    }
    return counts.empty() ? 0 : sum - counts[majority_class(counts)];
}

bool should_stop(std::size_t row_count, std::span<const std::int64_t> counts, std::size_t depth,
                 const TreeParams& params) {
    if (is_pure(counts) || row_count < params.min_node_size || row_count < 2) {
        return true;
    }
    return params.max_depth && depth >= *params.max_depth;
}

std::vector<Rows> partition_rows(const LabeledMatrix& data, std::span<const std::size_t> rows,
                                 const SplitPredicate& predicate) {
    std::vector<Rows> parts(split_arity(predicate));
    for (auto r : rows) {
        parts[route(predicate, data.row(r))].push_back(r);
    }
    return parts;
}

NominalSplit make_nominal_split(std::size_t feature, std::vector<std::vector<int>> seen_groups, int code_count,
                                std::span<const std::int64_t> group_sizes) {
    NominalSplit split;
    split.feature = feature;
    split.fallback_child = majority_class(group_sizes);
    std::vector<bool> seen(static_cast<std::size_t>(code_count), false);
    for (const auto& group : seen_groups) {
        for (int code : group) {
            seen[static_cast<std::size_t>(code)] = true;
        }
    }
    auto& fallback = seen_groups[split.fallback_child];
    for (int code = 0; code < code_count; ++code) {
        if (!seen[static_cast<std::size_t>(code)]) {
            fallback.push_back(code);
        }
    }
    std::sort(fallback.begin(), fallback.end());
    split.groups = std::move(seen_groups);
    return split;
}

std::vector<std::vector<std::int64_t>> code_class_table(const LabeledMatrix& data, std::span<const std::size_t> rows,
                                                        std::size_t feature) {
    const auto codes = static_cast<std::size_t>(data.kinds()[feature].code_count);
    std::vector<std::vector<std::int64_t>> table(codes, std::vector<std::int64_t>(data.class_count(), 0));
    for (auto r : rows) {
        ++table[static_cast<std::size_t>(data.at(r, feature))][static_cast<std::size_t>(data.label(r))];
    }
    return table;
}

namespace {

void flatten_into(const GrowNode& node, std::vector<TreeNode>& out) {
    const auto index = out.size();
    out.push_back(TreeNode{node.split, {}, node.counts});
    for (const auto& child : node.children) {
        out[index].children.push_back(out.size());
        flatten_into(*child, out);
    }
}

} // namespace

TreeModel flatten(Learner learner, const LabeledMatrix& data, const TreeParams& params, const GrowNode& root) {
    std::vector<TreeNode> nodes;
    flatten_into(root, nodes);
    return TreeModel(learner, data.class_names(), data.kinds(), params, std::move(nodes));
}

} // namespace nids::detail
