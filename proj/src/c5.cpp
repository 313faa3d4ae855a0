#include "nids/learners.hpp"

#include "grow.hpp"
#include "nids/error.hpp"
#include "nids/stats.hpp"

#include <cmath>

namespace nids {

namespace {

using detail::GrowNode;
using detail::Rows;

constexpr double kMinGain = 1e-12;

struct Candidate {
    SplitPredicate predicate;
    double gain = 0.0;
    double ratio = 0.0;
};

double child_entropy(std::span<const std::int64_t> counts) {
    return stats::total(counts) > 0 ? stats::entropy(counts) : 0.0;
}

std::optional<Candidate> best_threshold(const LabeledMatrix& data, const Rows& rows, std::size_t feature,
                                        std::span<const std::int64_t> counts, double parent_entropy) {
    const double n = static_cast<double>(rows.size());
    std::optional<Candidate> best;
    double best_left = 0.0;
    detail::scan_thresholds(data, rows, feature, counts, [&](double cut, auto left, auto right) {
        const auto n_left = static_cast<double>(stats::total(left));
        const auto n_right = n - n_left;
        const double gain = parent_entropy - n_left / n * child_entropy(left) - n_right / n * child_entropy(right);
        if (!best || gain > best->gain) {
            best = Candidate{ThresholdSplit{feature, cut}, gain, 0.0};
            best_left = n_left;
        }
    });
    if (best) {
        const std::vector<std::int64_t> sizes{static_cast<std::int64_t>(best_left),
                                              static_cast<std::int64_t>(rows.size()) - static_cast<std::int64_t>(best_left)};
        best->ratio = best->gain / stats::entropy(sizes);
    }
    return best;
}

std::optional<Candidate> nominal_candidate(const LabeledMatrix& data, const Rows& rows, std::size_t feature,
                                           double parent_entropy) {
    const auto table = detail::code_class_table(data, rows, feature);
    std::vector<std::vector<int>> groups;
    std::vector<std::int64_t> sizes;
    const double n = static_cast<double>(rows.size());
    double remainder = 0.0;
    for (std::size_t code = 0; code < table.size(); ++code) {
        const auto size = stats::total(table[code]);
        if (size == 0) {
            continue;
        }
        groups.push_back({static_cast<int>(code)});
        sizes.push_back(size);
        remainder += static_cast<double>(size) / n * stats::entropy(table[code]);
    }
    if (groups.size() < 2) {
        return std::nullopt;
    }
    Candidate candidate;
    candidate.gain = parent_entropy - remainder;
    candidate.ratio = candidate.gain / stats::entropy(sizes);
    candidate.predicate = detail::make_nominal_split(feature, std::move(groups), data.kinds()[feature].code_count, sizes);
    return candidate;
}

std::unique_ptr<GrowNode> grow(const LabeledMatrix& data, const Rows& rows, std::size_t depth,
                               const TreeParams& params) {
    auto node = std::make_unique<GrowNode>();
    node->counts = detail::count_classes(data, rows);
    if (detail::should_stop(rows.size(), node->counts, depth, params)) {
        return node;
    }
    const double parent_entropy = stats::entropy(node->counts);

    std::vector<Candidate> candidates;
    for (std::size_t f = 0; f < data.cols(); ++f) {
        auto candidate = data.kinds()[f].nominal ? nominal_candidate(data, rows, f, parent_entropy)
                                                 : best_threshold(data, rows, f, node->counts, parent_entropy);
        if (candidate && candidate->gain > kMinGain) {
            candidates.push_back(std::move(*candidate));
        }
    }
    if (candidates.empty()) {
        return node;
    }
    double mean_gain = 0.0;
    for (const auto& c : candidates) {
        mean_gain += c.gain;
    }
    mean_gain /= static_cast<double>(candidates.size());

    const Candidate* chosen = nullptr;
    for (const auto& c : candidates) {
        if (c.gain + kMinGain >= mean_gain && (!chosen || c.ratio > chosen->ratio)) {
            chosen = &c;
        }
    }
    node->split = chosen->predicate;
    for (const auto& part : detail::partition_rows(data, rows, *node->split)) {
        node->children.push_back(grow(data, part, depth + 1, params));
    }
    return node;
}

// Returns the subtree's estimated error count after pruning it.
double prune(GrowNode& node, double confidence) {
    const double n = static_cast<double>(stats::total(node.counts));
    const double errors = static_cast<double>(detail::misclassified(node.counts));
    const double leaf_estimate = n * stats::binomial_upper_bound(errors, n, confidence);
    if (node.is_leaf()) {
        return leaf_estimate;
    }
    double subtree_estimate = 0.0;
    for (auto& child : node.children) {
        subtree_estimate += prune(*child, confidence);
    }
    if (leaf_estimate <= subtree_estimate) {
        node.make_leaf();
        return leaf_estimate;
    }
    return subtree_estimate;
}

} // namespace

TreeModel train_c5(const LabeledMatrix& data, const TreeParams& params) {
    params.validate();
    if (data.rows() == 0) {
        throw Error("cannot train on an empty data set");
    }
    Rows rows(data.rows());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        rows[i] = i;
    }
    auto root = grow(data, rows, 0, params);
    if (params.prune) {
        prune(*root, params.prune_cf);
    }
    return detail::flatten(Learner::C5, data, params, *root);
}

} // namespace nids
