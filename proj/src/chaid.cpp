#include "nids/learners.hpp"

#include "grow.hpp"
#include "nids/error.hpp"
#include "nids/stats.hpp"

#include <cmath>
#include <limits>
#include <numeric>

namespace nids {

namespace {

using detail::GrowNode;
using detail::Rows;

double log_add(double a, double b) {
    if (a == -std::numeric_limits<double>::infinity()) {
        return b;
    }
    if (b == -std::numeric_limits<double>::infinity()) {
        return a;
    }
    const double hi = std::max(a, b);
    return hi + std::log1p(std::exp(std::min(a, b) - hi));
}

std::size_t live_columns(const std::vector<std::int64_t>& a, const std::vector<std::int64_t>& b) {
    std::size_t live = 0;
    for (std::size_t c = 0; c < a.size(); ++c) {
        live += (a[c] + b[c] > 0) ? 1 : 0;
    }
    return live;
}

double pair_log_p(const std::vector<std::int64_t>& a, const std::vector<std::int64_t>& b) {
    if (live_columns(a, b) < 2) {
        return 0.0;
    }
    return stats::chi_square({a, b}).log_p_value;
}

std::unique_ptr<GrowNode> grow(const LabeledMatrix& data, const Rows& rows, std::size_t depth,
                               const TreeParams& params) {
    auto node = std::make_unique<GrowNode>();
    node->counts = detail::count_classes(data, rows);
    if (detail::should_stop(rows.size(), node->counts, depth, params)) {
        return node;
    }
    std::optional<ChaidFeatureTest> best;
    for (std::size_t f = 0; f < data.cols(); ++f) {
        auto test = chaid_test_feature(data, rows, f, params.alpha);
        if (test && (!best || test->log_adjusted_p < best->log_adjusted_p)) {
            best = std::move(test);
        }
    }
    if (!best || best->log_adjusted_p > std::log(params.alpha)) {
        return node;
    }
    std::vector<std::int64_t> sizes;
    for (const auto& group : best->groups) {
        std::int64_t size = 0;
        for (auto r : rows) {
            const auto code = static_cast<int>(data.at(r, best->feature));
            size += std::find(group.begin(), group.end(), code) != group.end() ? 1 : 0;
        }
        sizes.push_back(size);
    }
    node->split = detail::make_nominal_split(best->feature, best->groups, data.kinds()[best->feature].code_count, sizes);
    for (const auto& part : detail::partition_rows(data, rows, *node->split)) {
        node->children.push_back(grow(data, part, depth + 1, params));
    }
    return node;
}

} // namespace

double log_stirling2(std::size_t n, std::size_t k) {
    const double neg_inf = -std::numeric_limits<double>::infinity();
    if (k > n) {
        return neg_inf;
    }
    if (n == 0) {
        return 0.0;
    }
    if (k == 0) {
        return neg_inf;
    }
    // row[j] = log S(i, j); S(i, j) = j S(i-1, j) + S(i-1, j-1).
    std::vector<double> row(k + 1, neg_inf);
    row[0] = 0.0;
    for (std::size_t i = 1; i <= n; ++i) {
        for (std::size_t j = std::min(i, k); j >= 1; --j) {
            const double stay = row[j] == neg_inf ? neg_inf : std::log(static_cast<double>(j)) + row[j];
            row[j] = log_add(stay, row[j - 1]);
        }
        row[0] = neg_inf;
    }
    return row[k];
}

std::optional<ChaidFeatureTest> chaid_test_feature(const LabeledMatrix& data, std::span<const std::size_t> rows,
                                                   std::size_t feature, double alpha) {
    if (!data.kinds()[feature].nominal) {
        throw Error("CHAID needs nominal features; feature " + std::to_string(feature) + " is continuous");
    }
    const auto table = detail::code_class_table(data, rows, feature);
    ChaidFeatureTest test;
    test.feature = feature;
    std::vector<std::vector<std::int64_t>> group_counts;
    for (std::size_t code = 0; code < table.size(); ++code) {
        if (stats::total(table[code]) > 0) {
            test.groups.push_back({static_cast<int>(code)});
            group_counts.push_back(table[code]);
        }
    }
    test.original_categories = test.groups.size();
    if (test.groups.size() < 2) {
        return std::nullopt;
    }
    const auto classes = data.class_count();
    std::size_t live_classes = 0;
    for (std::size_t c = 0; c < classes; ++c) {
        std::int64_t sum = 0;
        for (const auto& counts : group_counts) {
            sum += counts[c];
        }
        live_classes += sum > 0 ? 1 : 0;
    }
    if (live_classes < 2) {
        return std::nullopt;
    }

    const double log_alpha = std::log(alpha);
    while (test.groups.size() > 2) {
        std::size_t best_i = 0;
        std::size_t best_j = 1;
        double best_log_p = -std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < test.groups.size(); ++i) {
            for (std::size_t j = i + 1; j < test.groups.size(); ++j) {
                const double log_p = pair_log_p(group_counts[i], group_counts[j]);
                if (log_p > best_log_p) {
                    best_log_p = log_p;
                    best_i = i;
                    best_j = j;
                }
            }
        }
        if (best_log_p <= log_alpha) {
            break;
        }
        test.merges.push_back({test.groups[best_i], test.groups[best_j], std::exp(best_log_p)});
        auto& kept = test.groups[best_i];
        kept.insert(kept.end(), test.groups[best_j].begin(), test.groups[best_j].end());
        std::sort(kept.begin(), kept.end());
        for (std::size_t c = 0; c < classes; ++c) {
            group_counts[best_i][c] += group_counts[best_j][c];
        }
        test.groups.erase(test.groups.begin() + static_cast<std::ptrdiff_t>(best_j));
        group_counts.erase(group_counts.begin() + static_cast<std::ptrdiff_t>(best_j));
    }

    const auto result = stats::chi_square(group_counts);
    test.statistic = result.statistic;
    test.degrees_of_freedom = result.degrees_of_freedom;
    const double log_bonferroni = log_stirling2(test.original_categories, test.groups.size());
    test.log_adjusted_p = std::min(0.0, result.log_p_value + log_bonferroni);
    return test;
}

TreeModel train_chaid(const LabeledMatrix& data, const TreeParams& params) {
    params.validate();
    if (data.rows() == 0) {
        throw Error("cannot train on an empty data set");
    }
    for (std::size_t f = 0; f < data.cols(); ++f) {
        if (!data.kinds()[f].nominal) {
            throw Error("CHAID needs discretized input; feature " + std::to_string(f) + " is continuous");
        }
    }
    Rows rows(data.rows());
    std::iota(rows.begin(), rows.end(), std::size_t{0});
    auto root = grow(data, rows, 0, params);
    return detail::flatten(Learner::CHAID, data, params, *root);
}

} // namespace nids
