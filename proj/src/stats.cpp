#include "nids/stats.hpp"

#include "nids/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace nids::stats {

namespace {

constexpr double kEpsilon = 1e-16;
constexpr double kTiny = 1e-300;
constexpr int kMaxIterations = 100000;

std::int64_t checked_total(Counts counts) {
    std::int64_t sum = 0;
    for (auto c : counts) {
        if (c < 0) {
            throw Error("negative class count");
        }
        sum += c;
    }
    if (sum == 0) {
        throw Error("class counts sum to zero");
    }
    return sum;
}

// Series expansion of P(a, x), valid for x < a + 1.
double gamma_p_series(double a, double x) {
    double ap = a;
    double term = 1.0 / a;
    double sum = term;
    for (int i = 0; i < kMaxIterations; ++i) {
        ap += 1.0;
        term *= x / ap;
        sum += term;
        if (std::fabs(term) < std::fabs(sum) * kEpsilon) {
            break;
        }
    }
    return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// log Q(a, x) by Lentz's continued fraction, valid for x >= a + 1.
double log_gamma_q_fraction(double a, double x) {
    double b = x + 1.0 - a;
    double c = 1.0 / kTiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i < kMaxIterations; ++i) {
        const double an = -i * (i - a);
        b += 2.0;
        d = an * d + b;
        if (std::fabs(d) < kTiny) {
            d = kTiny;
        }
        c = b + an / c;
        if (std::fabs(c) < kTiny) {
            c = kTiny;
        }
        d = 1.0 / d;
        const double delta = d * c;
        h *= delta;
        if (std::fabs(delta - 1.0) < kEpsilon) {
            break;
        }
    }
    return -x + a * std::log(x) - std::lgamma(a) + std::log(h);
}

// Continued fraction for the incomplete beta function.
double beta_fraction(double a, double b, double x) {
    const double qab = a + b;
    const double qap = a + 1.0;
    const double qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::fabs(d) < kTiny) {
        d = kTiny;
    }
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m < kMaxIterations; ++m) {
        const double m2 = 2.0 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kTiny) {
            d = kTiny;
        }
        c = 1.0 + aa / c;
        if (std::fabs(c) < kTiny) {
            c = kTiny;
        }
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kTiny) {
            d = kTiny;
        }
        c = 1.0 + aa / c;
        if (std::fabs(c) < kTiny) {
            c = kTiny;
        }
        d = 1.0 / d;
        const double delta = d * c;
        h *= delta;
        if (std::fabs(delta - 1.0) < kEpsilon) {
            break;
        }
    }
    return h;
}

double log_beta_front(double a, double b, double x) {
    return a * std::log(x) + b * std::log1p(-x) - (std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b)) - std::log(a);
}

void check_children(Counts parent, const CountTable& children) {
    std::vector<std::int64_t> sum(parent.size(), 0);
    for (const auto& child : children) {
        if (child.size() != parent.size()) {
            throw Error("child count vector width differs from parent");
        }
        for (std::size_t k = 0; k < child.size(); ++k) {
            if (child[k] < 0) {
                throw Error("negative class count");
            }
            sum[k] += child[k];
        }
    }
    if (!std::equal(sum.begin(), sum.end(), parent.begin())) {
        throw Error("child counts do not sum to the parent counts");
    }
}

} // namespace

std::int64_t total(Counts counts) {
    return std::accumulate(counts.begin(), counts.end(), std::int64_t{0});
}

double entropy(Counts counts) {
    const double n = static_cast<double>(checked_total(counts));
    double h = 0.0;
    for (auto c : counts) {
        if (c > 0) {
            const double p = static_cast<double>(c) / n;
            h -= p * std::log2(p);
        }
    }
    return h;
}

double gini(Counts counts) {
    const double n = static_cast<double>(checked_total(counts));
    double sum_sq = 0.0;
    for (auto c : counts) {
        const double p = static_cast<double>(c) / n;
        sum_sq += p * p;
    }
    return 1.0 - sum_sq;
}

double gini_decrease(Counts parent, Counts left, Counts right) {
    const double n = static_cast<double>(checked_total(parent));
    const auto n_left = total(left);
    const auto n_right = total(right);
    double decrease = gini(parent);
    if (n_left > 0) {
        decrease -= static_cast<double>(n_left) / n * gini(left);
    }
    if (n_right > 0) {
        decrease -= static_cast<double>(n_right) / n * gini(right);
    }
    return decrease;
}

double information_gain(Counts parent, const CountTable& children) {
    check_children(parent, children);
    const double n = static_cast<double>(checked_total(parent));
    double remainder = 0.0;
    for (const auto& child : children) {
        const auto size = total(child);
        if (size > 0) {
            remainder += static_cast<double>(size) / n * entropy(child);
        }
    }
    return entropy(parent) - remainder;
}

double split_information(const CountTable& children) {
    std::vector<std::int64_t> sizes;
    sizes.reserve(children.size());
    for (const auto& child : children) {
        sizes.push_back(total(child));
    }
    return entropy(sizes);
}

double gain_ratio(Counts parent, const CountTable& children) {
    const double gain = information_gain(parent, children);
    const double info = split_information(children);
    if (info <= 0.0) {
        return 0.0;
    }
    return gain / info;
}

ChiSquareResult chi_square(const CountTable& table) {
    if (table.empty()) {
        throw Error("empty contingency table");
    }
    const auto cols = table.front().size();
    std::vector<std::int64_t> col_totals(cols, 0);
    std::vector<std::int64_t> row_totals;
    for (const auto& row : table) {
        if (row.size() != cols) {
            throw Error("ragged contingency table");
        }
        std::int64_t sum = 0;
        for (std::size_t j = 0; j < cols; ++j) {
            if (row[j] < 0) {
                throw Error("negative count in contingency table");
            }
            sum += row[j];
            col_totals[j] += row[j];
        }
        row_totals.push_back(sum);
    }
    const auto live_rows = std::count_if(row_totals.begin(), row_totals.end(), [](auto t) { return t > 0; });
    const auto live_cols = std::count_if(col_totals.begin(), col_totals.end(), [](auto t) { return t > 0; });
    if (live_rows < 2 || live_cols < 2) {
        throw Error("contingency table needs two non-empty rows and two non-empty columns");
    }
    const std::int64_t n = std::accumulate(row_totals.begin(), row_totals.end(), std::int64_t{0});

    // (O - E)^2 / E == (n O - R C)^2 / (n R C); the integer residual is exact, so a
    // table equal to its independence expectation scores exactly zero.
    double statistic = 0.0;
    for (std::size_t i = 0; i < table.size(); ++i) {
        if (row_totals[i] == 0) {
            continue;
        }
        for (std::size_t j = 0; j < cols; ++j) {
            if (col_totals[j] == 0) {
                continue;
            }
            const std::int64_t residual = n * table[i][j] - row_totals[i] * col_totals[j];
            const double r = static_cast<double>(residual);
            statistic += r * r /
                         (static_cast<double>(n) * static_cast<double>(row_totals[i]) * static_cast<double>(col_totals[j]));
        }
    }
    ChiSquareResult result;
    result.statistic = statistic;
    result.degrees_of_freedom = static_cast<int>((live_rows - 1) * (live_cols - 1));
    result.log_p_value = log_chi_square_sf(statistic, result.degrees_of_freedom);
    result.p_value = std::exp(result.log_p_value);
    return result;
}

std::optional<FTestResult> anova_f(std::span<const std::vector<double>> groups) {
    std::size_t k = 0;
    std::size_t n = 0;
    std::vector<double> means;
    std::vector<std::size_t> sizes;
    double ss_within = 0.0;
    double grand_sum = 0.0;
    for (const auto& group : groups) {
        if (group.empty()) {
            continue;
        }
        std::vector<double> sorted = group;
        std::sort(sorted.begin(), sorted.end());
        const double sum = std::accumulate(sorted.begin(), sorted.end(), 0.0);
        const double mean = sum / static_cast<double>(sorted.size());
        for (double v : sorted) {
            ss_within += (v - mean) * (v - mean);
        }
        grand_sum += sum;
        means.push_back(mean);
        sizes.push_back(sorted.size());
        ++k;
        n += sorted.size();
    }
    if (k < 2 || n <= k) {
        return std::nullopt;
    }
    const double grand_mean = grand_sum / static_cast<double>(n);
    double ss_between = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
        ss_between += static_cast<double>(sizes[i]) * (means[i] - grand_mean) * (means[i] - grand_mean);
    }
    if (ss_within <= 0.0 && ss_between <= 0.0) {
        return std::nullopt;
    }
    FTestResult result;
    result.df_between = static_cast<double>(k - 1);
    result.df_within = static_cast<double>(n - k);
    if (ss_within <= 0.0) {
        result.statistic = std::numeric_limits<double>::infinity();
        result.p_value = 0.0;
        result.log_p_value = -std::numeric_limits<double>::infinity();
        return result;
    }
    result.statistic = (ss_between / result.df_between) / (ss_within / result.df_within);
    result.log_p_value = log_f_sf(result.statistic, result.df_between, result.df_within);
    result.p_value = std::exp(result.log_p_value);
    return result;
}

double regularized_gamma_p(double a, double x) {
    if (a <= 0.0) {
        throw Error("regularized gamma needs a > 0");
    }
    if (x <= 0.0) {
        return 0.0;
    }
    if (x < a + 1.0) {
        return gamma_p_series(a, x);
    }
    return -std::expm1(log_gamma_q_fraction(a, x));
}

double regularized_gamma_q(double a, double x) {
    return std::exp(log_regularized_gamma_q(a, x));
}

double log_regularized_gamma_q(double a, double x) {
    if (a <= 0.0) {
        throw Error("regularized gamma needs a > 0");
    }
    if (x <= 0.0) {
        return 0.0;
    }
    if (std::isinf(x)) {
        return -std::numeric_limits<double>::infinity();
    }
    if (x < a + 1.0) {
        return std::log1p(-gamma_p_series(a, x));
    }
    return log_gamma_q_fraction(a, x);
}

double regularized_beta(double a, double b, double x) {
    return std::exp(log_regularized_beta(a, b, x));
}

double log_regularized_beta(double a, double b, double x) {
    if (a <= 0.0 || b <= 0.0) {
        throw Error("regularized beta needs a, b > 0");
    }
    if (x <= 0.0) {
        return -std::numeric_limits<double>::infinity();
    }
    if (x >= 1.0) {
        return 0.0;
    }
    if (x < (a + 1.0) / (a + b + 2.0)) {
        return log_beta_front(a, b, x) + std::log(beta_fraction(a, b, x));
    }
    const double complement = std::exp(log_beta_front(b, a, 1.0 - x)) * beta_fraction(b, a, 1.0 - x);
    return std::log1p(-complement);
}

double chi_square_sf(double statistic, double degrees_of_freedom) {
    return std::exp(log_chi_square_sf(statistic, degrees_of_freedom));
}

double log_chi_square_sf(double statistic, double degrees_of_freedom) {
    if (degrees_of_freedom <= 0.0) {
        throw Error("chi-square needs positive degrees of freedom");
    }
    if (statistic <= 0.0) {
        return 0.0;
    }
    return log_regularized_gamma_q(0.5 * degrees_of_freedom, 0.5 * statistic);
}

double f_sf(double statistic, double df1, double df2) {
    return std::exp(log_f_sf(statistic, df1, df2));
}

double log_f_sf(double statistic, double df1, double df2) {
    if (df1 <= 0.0 || df2 <= 0.0) {
        throw Error("F distribution needs positive degrees of freedom");
    }
    if (statistic <= 0.0) {
        return 0.0;
    }
    if (std::isinf(statistic)) {
        return -std::numeric_limits<double>::infinity();
    }
    const double x = df2 / (df2 + df1 * statistic);
    return log_regularized_beta(0.5 * df2, 0.5 * df1, x);
}

double binomial_upper_bound(double errors, double n, double confidence) {
    if (n <= 0.0) {
        return 0.0;
    }
    if (errors >= n) {
        return 1.0;
    }
    if (errors <= 0.0) {
        return 1.0 - std::pow(confidence, 1.0 / n);
    }
    // P(X <= e | n, p) = I_{1-p}(n - e, e + 1), decreasing in p.
    double lo = errors / n;
    double hi = 1.0;
    for (int i = 0; i < 200 && hi - lo > 1e-15; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (regularized_beta(n - errors, errors + 1.0, 1.0 - mid) > confidence) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

} // namespace nids::stats
