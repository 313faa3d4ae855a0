#include "nids/learners.hpp"

#include "grow.hpp"
#include "nids/error.hpp"
#include "nids/stats.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <limits>
#include <map>
#include <numeric>

namespace nids {

namespace {

using detail::GrowNode;
using detail::Rows;

constexpr double kMinDecrease = 1e-12;
constexpr std::size_t kExhaustiveCodeLimit = 12;

struct NominalBest {
    double decrease = -1.0;
    std::vector<int> left;
    std::vector<int> right;
    std::int64_t left_size = 0;
};

NominalBest best_nominal_partition(const LabeledMatrix& data, std::span<const std::size_t> rows, std::size_t feature,
                                   std::span<const std::int64_t> counts) {
    const auto table = detail::code_class_table(data, rows, feature);
    std::vector<int> present;
    for (std::size_t code = 0; code < table.size(); ++code) {
        if (stats::total(table[code]) > 0) {
            present.push_back(static_cast<int>(code));
        }
    }
    NominalBest best;
    const auto k = present.size();
    if (k < 2) {
        return best;
    }
    const auto classes = counts.size();
    std::vector<std::int64_t> left(classes);
    std::vector<std::int64_t> right(classes);

    auto consider = [&](const std::vector<int>& left_codes) {
        std::fill(left.begin(), left.end(), 0);
        for (int code : left_codes) {
            for (std::size_t c = 0; c < classes; ++c) {
                left[c] += table[static_cast<std::size_t>(code)][c];
            }
        }
        for (std::size_t c = 0; c < classes; ++c) {
            right[c] = counts[c] - left[c];
        }
        const double decrease = stats::gini_decrease(counts, left, right);
        if (decrease > best.decrease) {
            best.decrease = decrease;
            best.left = left_codes;
            best.left_size = stats::total(left);
        }
    };

    if (k <= kExhaustiveCodeLimit) {
        // The smallest present code stays left; every other code toggles with one
        // mask bit. The all-left mask is not a split.
        const std::uint64_t limit = (std::uint64_t{1} << (k - 1)) - 1;
        std::vector<int> left_codes;
        for (std::uint64_t mask = 0; mask < limit; ++mask) {
            left_codes.assign(1, present[0]);
            for (std::size_t j = 1; j < k; ++j) {
                if (mask & (std::uint64_t{1} << (j - 1))) {
                    left_codes.push_back(present[j]);
                }
            }
            consider(left_codes);
        }
    } else {
        // Order codes by their share of the node's majority class and scan the
        // k - 1 prefix splits of that order.
        const auto target = majority_class(counts);
        std::vector<int> ordered = present;
        std::stable_sort(ordered.begin(), ordered.end(), [&](int a, int b) {
            const auto& ra = table[static_cast<std::size_t>(a)];
            const auto& rb = table[static_cast<std::size_t>(b)];
            // ra[target] / |a| < rb[target] / |b| without division.
            return ra[target] * stats::total(rb) < rb[target] * stats::total(ra);
        });
        std::vector<int> left_codes;
        for (std::size_t i = 0; i + 1 < k; ++i) {
            left_codes.push_back(ordered[i]);
            auto sorted = left_codes;
            std::sort(sorted.begin(), sorted.end());
            consider(sorted);
        }
    }
    for (int code : present) {
        if (std::find(best.left.begin(), best.left.end(), code) == best.left.end()) {
            best.right.push_back(code);
        }
    }
    return best;
}

std::unique_ptr<GrowNode> grow(const LabeledMatrix& data, const Rows& rows, std::size_t depth,
                               const TreeParams& params) {
    auto node = std::make_unique<GrowNode>();
    node->counts = detail::count_classes(data, rows);
    if (detail::should_stop(rows.size(), node->counts, depth, params)) {
        return node;
    }
    auto split = best_cart_split(data, rows);
    if (!split) {
        return node;
    }
    node->split = std::move(split->predicate);
    for (const auto& part : detail::partition_rows(data, rows, *node->split)) {
        node->children.push_back(grow(data, part, depth + 1, params));
    }
    return node;
}

// Weakest-link pruning. Each internal node gets the complexity parameter at which
// it collapses; errors are resubstitution counts divided by the training size.
struct Fraction {
    std::int64_t num = 0;
    std::int64_t den = 1;
};

bool less_than(const Fraction& a, const Fraction& b) {
    return static_cast<__int128>(a.num) * b.den < static_cast<__int128>(b.num) * a.den;
}

bool equal(const Fraction& a, const Fraction& b) {
    return static_cast<__int128>(a.num) * b.den == static_cast<__int128>(b.num) * a.den;
}

using AlphaMap = std::map<const GrowNode*, double>;

struct SubtreeStats {
    std::int64_t errors = 0;
    std::int64_t leaves = 0;
};

SubtreeStats collect_links(const GrowNode& node, const AlphaMap& pruned,
                           std::vector<std::pair<const GrowNode*, Fraction>>& links) {
    if (node.is_leaf() || pruned.contains(&node)) {
        return {detail::misclassified(node.counts), 1};
    }
    SubtreeStats sum;
    for (const auto& child : node.children) {
        const auto s = collect_links(*child, pruned, links);
        sum.errors += s.errors;
        sum.leaves += s.leaves;
    }
    links.emplace_back(&node, Fraction{detail::misclassified(node.counts) - sum.errors, sum.leaves - 1});
    return sum;
}

AlphaMap prune_alphas(const GrowNode& root, std::size_t training_rows) {
    AlphaMap alphas;
    const double n = static_cast<double>(training_rows);
    while (!root.is_leaf() && !alphas.contains(&root)) {
        std::vector<std::pair<const GrowNode*, Fraction>> links;
        collect_links(root, alphas, links);
        Fraction weakest = links.front().second;
        for (const auto& [node, g] : links) {
            if (less_than(g, weakest)) {
                weakest = g;
            }
        }
        const double alpha = static_cast<double>(weakest.num) / static_cast<double>(weakest.den) / n;
        for (const auto& [node, g] : links) {
            if (equal(g, weakest)) {
                alphas.emplace(node, alpha);
            }
        }
    }
    return alphas;
}

void collapse(GrowNode& node, const AlphaMap& alphas, double alpha) {
    if (node.is_leaf()) {
        return;
    }
    if (auto it = alphas.find(&node); it != alphas.end() && it->second <= alpha) {
        node.make_leaf();
        return;
    }
    for (auto& child : node.children) {
        collapse(*child, alphas, alpha);
    }
}

// Complexity parameter with the best holdout accuracy; ties favour the smaller tree.
double select_alpha(const LabeledMatrix& data, const GrowNode& root, const AlphaMap& alphas, const Rows& holdout) {
    std::vector<double> candidates{0.0};
    for (const auto& [node, alpha] : alphas) {
        candidates.push_back(alpha);
    }
    std::sort(candidates.begin(), candidates.end());
    candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());
    const auto k = candidates.size();

    std::vector<std::int64_t> diff(k + 1, 0);
    const double inf = std::numeric_limits<double>::infinity();
    for (auto r : holdout) {
        const auto x = data.row(r);
        const auto truth = static_cast<std::size_t>(data.label(r));
        const GrowNode* node = &root;
        double above = inf;
        while (true) {
            double own = inf;
            if (auto it = alphas.find(node); it != alphas.end()) {
                own = it->second;
            }
            const double effective = std::min(above, own);
            // An internal node predicts for candidates in [effective, above); the
            // leaf for every candidate below `above`.
            const auto lo = node->is_leaf()
                                ? std::size_t{0}
                                : static_cast<std::size_t>(std::lower_bound(candidates.begin(), candidates.end(), effective) - candidates.begin());
            const auto hi = static_cast<std::size_t>(std::lower_bound(candidates.begin(), candidates.end(), above) - candidates.begin());
            if (lo < hi && majority_class(node->counts) == truth) {
                ++diff[lo];
                --diff[hi];
            }
            if (node->is_leaf()) {
                break;
            }
            above = effective;
            node = node->children[route(*node->split, x)].get();
        }
    }
    std::size_t best = 0;
    std::int64_t best_correct = -1;
    std::int64_t running = 0;
    for (std::size_t i = 0; i < k; ++i) {
        running += diff[i];
        if (running >= best_correct) {
            best_correct = running;
            best = i;
        }
    }
    if (best + 1 < k) {
        return std::sqrt(candidates[best] * candidates[best + 1]);
    }
    return candidates[best];
}

std::uint64_t mix(std::uint64_t h, std::uint64_t v) {
    h ^= v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    h ^= h >> 31;
    h *= 0xbf58476d1ce4e5b9ULL;
    return h ^ (h >> 29);
}

// Holdout membership depends on row content and the seed, never on row order.
Rows content_ordered_rows(const LabeledMatrix& data, std::uint64_t seed) {
    std::vector<std::uint64_t> keys(data.rows());
    for (std::size_t r = 0; r < data.rows(); ++r) {
        std::uint64_t h = mix(0x84222325cbf29ce4ULL, seed);
        for (double v : data.row(r)) {
            h = mix(h, std::bit_cast<std::uint64_t>(v));
        }
        keys[r] = mix(h, static_cast<std::uint64_t>(data.label(r)));
    }
    Rows order(data.rows());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (keys[a] != keys[b]) {
            return keys[a] < keys[b];
        }
        const auto ra = data.row(a);
        const auto rb = data.row(b);
        if (!std::equal(ra.begin(), ra.end(), rb.begin())) {
            return std::lexicographical_compare(ra.begin(), ra.end(), rb.begin(), rb.end());
        }
        return data.label(a) < data.label(b);
    });
    return order;
}

} // namespace

std::optional<CartSplit> best_cart_split(const LabeledMatrix& data, std::span<const std::size_t> rows) {
    if (rows.size() < 2) {
        return std::nullopt;
    }
    const auto counts = detail::count_classes(data, rows);
    if (detail::is_pure(counts)) {
        return std::nullopt;
    }
    std::optional<CartSplit> best;
    for (std::size_t f = 0; f < data.cols(); ++f) {
        const auto& kind = data.kinds()[f];
        if (!kind.nominal) {
            detail::scan_thresholds(data, rows, f, counts, [&](double cut, auto left, auto right) {
                const double decrease = stats::gini_decrease(counts, left, right);
                if (!best || decrease > best->impurity_decrease) {
                    best = CartSplit{ThresholdSplit{f, cut}, decrease};
                }
            });
            continue;
        }
        auto nominal = best_nominal_partition(data, rows, f, counts);
        if (nominal.left.empty() || (best && !(nominal.decrease > best->impurity_decrease))) {
            continue;
        }
        const std::int64_t sizes[] = {nominal.left_size, static_cast<std::int64_t>(rows.size()) - nominal.left_size};
        best = CartSplit{detail::make_nominal_split(f, {nominal.left, nominal.right}, kind.code_count, sizes),
                         nominal.decrease};
    }
    if (!best || best->impurity_decrease <= kMinDecrease) {
        return std::nullopt;
    }
    return best;
}

TreeModel train_cart(const LabeledMatrix& data, const TreeParams& params) {
    params.validate();
    if (data.rows() == 0) {
        throw Error("cannot train on an empty data set");
    }
    Rows all(data.rows());
    std::iota(all.begin(), all.end(), std::size_t{0});
    auto root = grow(data, all, 0, params);

    const auto holdout_size =
        static_cast<std::size_t>(std::llround(params.cc_holdout_fraction * static_cast<double>(data.rows())));
    if (params.prune && !root->is_leaf() && holdout_size > 0 && data.rows() - holdout_size >= 2) {
        const auto order = content_ordered_rows(data, params.seed);
        Rows holdout(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(holdout_size));
        Rows grow_rows(order.begin() + static_cast<std::ptrdiff_t>(holdout_size), order.end());
        std::sort(grow_rows.begin(), grow_rows.end());

        const auto trial = grow(data, grow_rows, 0, params);
        const auto trial_alphas = prune_alphas(*trial, grow_rows.size());
        const double alpha = select_alpha(data, *trial, trial_alphas, holdout);
        collapse(*root, prune_alphas(*root, data.rows()), alpha);
    }
    return detail::flatten(Learner::CART, data, params, *root);
}

} // namespace nids
