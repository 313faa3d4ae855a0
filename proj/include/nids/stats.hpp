#ifndef NIDS_STATS_HPP
#define NIDS_STATS_HPP

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

/// Split statistics shared by the tree learners: impurity measures, the
/// chi-square test of association, one-way ANOVA, and the distribution tails
/// they need. Tail probabilities come with log-space variants because node-level
/// tests on large samples underflow double precision long before they tie.
namespace nids::stats {

using Counts = std::span<const std::int64_t>;
using CountTable = std::vector<std::vector<std::int64_t>>;

std::int64_t total(Counts counts);

/// Shannon entropy in bits. Throws nids::Error when the counts sum to zero.
double entropy(Counts counts);

/// 1 - sum p_i^2. Throws nids::Error when the counts sum to zero.
double gini(Counts counts);

/// gini(parent) - |L|/|P| gini(L) - |R|/|P| gini(R); an empty side contributes 0.
double gini_decrease(Counts parent, Counts left, Counts right);

double information_gain(Counts parent, const CountTable& children);

/// Entropy of the child-size proportions.
double split_information(const CountTable& children);

/// information_gain / split_information, 0 when split information is 0.
/// Throws nids::Error if the children do not sum to the parent.
double gain_ratio(Counts parent, const CountTable& children);

struct ChiSquareResult {
    double statistic = 0.0;
    int degrees_of_freedom = 0;
    double p_value = 1.0;
    double log_p_value = 0.0;
};

/// Pearson chi-square test of association on a rows x classes table. All-zero
/// rows and columns are dropped first; throws nids::Error when fewer than two
/// non-empty rows or columns remain.
ChiSquareResult chi_square(const CountTable& table);

struct FTestResult {
    double statistic = 0.0;
    double df_between = 0.0;
    double df_within = 0.0;
    double p_value = 1.0;
    double log_p_value = 0.0;
};

/// One-way ANOVA across groups. Returns nullopt when the test is undefined: fewer
/// than two non-empty groups, no within-group degrees of freedom, or no variation
/// at all. Sums run over sorted values, so the result does not depend on input order.
std::optional<FTestResult> anova_f(std::span<const std::vector<double>> groups);

/// Lower and upper regularized incomplete gamma functions P(a, x), Q(a, x).
double regularized_gamma_p(double a, double x);
double regularized_gamma_q(double a, double x);
double log_regularized_gamma_q(double a, double x);

/// Regularized incomplete beta I_x(a, b).
double regularized_beta(double a, double b, double x);
double log_regularized_beta(double a, double b, double x);

/// Upper tail of the chi-square distribution.
double chi_square_sf(double statistic, double degrees_of_freedom);
double log_chi_square_sf(double statistic, double degrees_of_freedom);

/// Upper tail of Snedecor's F distribution.
double f_sf(double statistic, double df1, double df2);
double log_f_sf(double statistic, double df1, double df2);

/// Upper confidence limit on a binomial error rate: the p with
/// P(X <= errors | n, p) = confidence. Used by error-based pruning.
double binomial_upper_bound(double errors, double n, double confidence);

} // namespace nids::stats

#endif // NIDS_STATS_HPP
