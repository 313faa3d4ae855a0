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

constexpr double kMinVariance = 1e-12;

double mean_of(std::vector<double> values) {
    std::sort(values.begin(), values.end());
    double sum = 0.0;
    for (double v : values) {
        sum += v;
    }
    return sum / static_cast<double>(values.size());
}

double variance_of(std::vector<double> values, double mean) {
    if (values.size() < 2) {
        return 0.0;
    }
    std::sort(values.begin(), values.end());
    double sum = 0.0;
    for (double v : values) {
        sum += (v - mean) * (v - mean);
    }
    return sum / static_cast<double>(values.size() - 1);
}

std::optional<double> feature_log_p(const LabeledMatrix& data, std::span<const std::size_t> rows, std::size_t f) {
    if (data.kinds()[f].nominal) {
        const auto table = detail::code_class_table(data, rows, f);
        std::vector<std::vector<std::int64_t>> live;
        for (const auto& row : table) {
            if (stats::total(row) > 0) {
                live.push_back(row);
            }
        }
        if (live.size() < 2) {
            return std::nullopt;
        }
        std::size_t live_classes = 0;
        for (std::size_t c = 0; c < data.class_count(); ++c) {
            std::int64_t sum = 0;
            for (const auto& row : live) {
                sum += row[c];
            }
            live_classes += sum > 0 ? 1 : 0;
        }
        if (live_classes < 2) {
            return std::nullopt;
        }
        return stats::chi_square(live).log_p_value;
    }
    std::vector<std::vector<double>> groups(data.class_count());
    for (auto r : rows) {
        groups[static_cast<std::size_t>(data.label(r))].push_back(data.at(r, f));
    }
    const auto result = stats::anova_f(groups);
    if (!result) {
        return std::nullopt;
    }
    return result->log_p_value;
}

std::size_t count_at_or_below(const LabeledMatrix& data, const Rows& rows, std::size_t f, double cut) {
    std::size_t left = 0;
    for (auto r : rows) {
        left += data.at(r, f) <= cut ? 1 : 0;
    }
    return left;
}

std::optional<SplitPredicate> continuous_split(const LabeledMatrix& data, const Rows& rows, std::size_t f) {
    std::vector<std::vector<double>> by_class(data.class_count());
    for (auto r : rows) {
        by_class[static_cast<std::size_t>(data.label(r))].push_back(data.at(r, f));
    }
    std::vector<std::size_t> present;
    std::vector<double> class_means;
    for (std::size_t c = 0; c < by_class.size(); ++c) {
        if (!by_class[c].empty()) {
            present.push_back(c);
            class_means.push_back(mean_of(by_class[c]));
        }
    }
    if (present.size() < 2) {
        return std::nullopt;
    }
    // Two-means on the class means, started from the extreme means.
    double center_a = *std::min_element(class_means.begin(), class_means.end());
    double center_b = *std::max_element(class_means.begin(), class_means.end());
    if (!(center_a < center_b)) {
        return std::nullopt;
    }
    std::vector<bool> in_b(present.size(), false);
    for (int iteration = 0; iteration < 100; ++iteration) {
        std::vector<bool> next(present.size());
        for (std::size_t i = 0; i < present.size(); ++i) {
            next[i] = std::abs(class_means[i] - center_b) < std::abs(class_means[i] - center_a);
        }
        std::vector<double> a_means;
        std::vector<double> b_means;
        for (std::size_t i = 0; i < present.size(); ++i) {
            (next[i] ? b_means : a_means).push_back(class_means[i]);
        }
        if (a_means.empty() || b_means.empty()) {
            return std::nullopt;
        }
        center_a = mean_of(a_means);
        center_b = mean_of(b_means);
        if (next == in_b && iteration > 0) {
            break;
        }
        in_b = std::move(next);
    }
    std::vector<double> a_values;
    std::vector<double> b_values;
    for (std::size_t i = 0; i < present.size(); ++i) {
        auto& target = in_b[i] ? b_values : a_values;
        target.insert(target.end(), by_class[present[i]].begin(), by_class[present[i]].end());
    }
    const double n = static_cast<double>(rows.size());
    const double mean_a = mean_of(a_values);
    const double mean_b = mean_of(b_values);
    const double cut = quest_discriminant_cut(mean_a, variance_of(a_values, mean_a), static_cast<double>(a_values.size()) / n,
                                              mean_b, variance_of(b_values, mean_b), static_cast<double>(b_values.size()) / n);
    for (double candidate : {cut, mean_a + (mean_b - mean_a) / 2.0}) {
        const auto left = count_at_or_below(data, rows, f, candidate);
        if (left > 0 && left < rows.size()) {
            return ThresholdSplit{f, candidate};
        }
    }
    return std::nullopt;
}

std::optional<SplitPredicate> nominal_split(const LabeledMatrix& data, const Rows& rows, std::size_t f,
                                            std::span<const std::int64_t> counts) {
    const auto table = detail::code_class_table(data, rows, f);
    const auto majority = majority_class(counts);
    std::vector<int> left;
    std::vector<int> right;
    std::int64_t left_size = 0;
    std::int64_t right_size = 0;
    for (std::size_t code = 0; code < table.size(); ++code) {
        const auto size = stats::total(table[code]);
        if (size == 0) {
            continue;
        }
        if (2 * table[code][majority] > size) {
            left.push_back(static_cast<int>(code));
            left_size += size;
        } else {
            right.push_back(static_cast<int>(code));
            right_size += size;
        }
    }
    if (left.empty() || right.empty()) {
        // Largest majority-class share against the rest.
        std::vector<int> seen;
        seen.insert(seen.end(), left.begin(), left.end());
        seen.insert(seen.end(), right.begin(), right.end());
        std::sort(seen.begin(), seen.end());
        if (seen.size() < 2) {
            return std::nullopt;
        }
        std::size_t best = 0;
        for (std::size_t i = 1; i < seen.size(); ++i) {
            const auto& a = table[static_cast<std::size_t>(seen[i])];
            const auto& b = table[static_cast<std::size_t>(seen[best])];
            if (static_cast<__int128>(a[majority]) * stats::total(b) >
                static_cast<__int128>(b[majority]) * stats::total(a)) {
                best = i;
            }
        }
        left = {seen[best]};
        right.clear();
        for (std::size_t i = 0; i < seen.size(); ++i) {
            if (i != best) {
                right.push_back(seen[i]);
            }
        }
        left_size = stats::total(table[static_cast<std::size_t>(seen[best])]);
        right_size = static_cast<std::int64_t>(rows.size()) - left_size;
    }
    const std::vector<std::int64_t> sizes{left_size, right_size};
    return detail::make_nominal_split(f, {left, right}, data.kinds()[f].code_count, sizes);
}

std::unique_ptr<GrowNode> grow(const LabeledMatrix& data, const Rows& rows, std::size_t depth,
                               const TreeParams& params) {
    auto node = std::make_unique<GrowNode>();
    node->counts = detail::count_classes(data, rows);
    if (detail::should_stop(rows.size(), node->counts, depth, params)) {
        return node;
    }
    const auto selection = quest_select_feature(data, rows);
    if (!selection) {
        return node;
    }
    const auto f = selection->feature;
    node->split = data.kinds()[f].nominal ? nominal_split(data, rows, f, node->counts) : continuous_split(data, rows, f);
    if (!node->split) {
        return node;
    }
    for (const auto& part : detail::partition_rows(data, rows, *node->split)) {
        node->children.push_back(grow(data, part, depth + 1, params));
    }
    return node;
}

} // namespace

std::optional<QuestSelection> quest_select_feature(const LabeledMatrix& data, std::span<const std::size_t> rows) {
    std::optional<QuestSelection> best;
    for (std::size_t f = 0; f < data.cols(); ++f) {
        const auto log_p = feature_log_p(data, rows, f);
        if (log_p && (!best || *log_p < best->log_p_value)) {
            best = QuestSelection{f, *log_p};
        }
    }
    return best;
}

double quest_discriminant_cut(double mean_a, double var_a, double prior_a, double mean_b, double var_b,
                              double prior_b) {
    const double mid = mean_a + (mean_b - mean_a) / 2.0;
    if (var_a < kMinVariance || var_b < kMinVariance || prior_a <= 0.0 || prior_b <= 0.0) {
        return mid;
    }
    const double lo = std::min(mean_a, mean_b);
    const double hi = std::max(mean_a, mean_b);
    const auto between = [&](double x) { return std::isfinite(x) && x >= lo && x <= hi; };
    // a x^2 + b x + c = 0 where the two weighted normal densities meet.
    const double a = 1.0 / (2.0 * var_b) - 1.0 / (2.0 * var_a);
    const double b = mean_a / var_a - mean_b / var_b;
    const double c = mean_b * mean_b / (2.0 * var_b) - mean_a * mean_a / (2.0 * var_a) +
                     std::log(prior_a / prior_b) + 0.5 * std::log(var_b / var_a);
    if (std::abs(a) <= 1e-12 * std::max(1.0 / var_a, 1.0 / var_b)) {
        if (b == 0.0) {
            return mid;
        }
        const double x = -c / b;
        return between(x) ? x : mid;
    }
    const double disc = b * b - 4.0 * a * c;
    if (disc < 0.0) {
        return mid;
    }
    const double q = -0.5 * (b + std::copysign(std::sqrt(disc), b));
    std::vector<double> roots;
    if (q != 0.0) {
        roots.push_back(q / a);
        roots.push_back(c / q);
    } else {
        roots.push_back(-b / (2.0 * a));
    }
    std::optional<double> chosen;
    for (double r : roots) {
        if (between(r) && (!chosen || std::abs(r - mid) < std::abs(*chosen - mid))) {
            chosen = r;
        }
    }
    return chosen.value_or(mid);
}

TreeModel train_quest(const LabeledMatrix& data, const TreeParams& params) {
    params.validate();
    if (data.rows() == 0) {
        throw Error("cannot train on an empty data set");
    }
    Rows rows(data.rows());
    std::iota(rows.begin(), rows.end(), std::size_t{0});
    auto root = grow(data, rows, 0, params);
    return detail::flatten(Learner::QUEST, data, params, *root);
}

TreeModel train_tree(Learner learner, const LabeledMatrix& data, const TreeParams& params) {
    switch (learner) {
    case Learner::C5:
        return train_c5(data, params);
    case Learner::CART:
        return train_cart(data, params);
    case Learner::CHAID:
        return train_chaid(data, params);
    case Learner::QUEST:
        return train_quest(data, params);
    }
    throw Error("unknown learner");
}

} // namespace nids
