#ifndef NIDS_EVAL_HPP
#define NIDS_EVAL_HPP

#include "nids/architectures.hpp"
#include "nids/dataset.hpp"

#include <compare>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace nids {

/// Reduced fraction with a positive denominator.
class Rational {
public:
    Rational() = default;
    /// Throws nids::Error for a zero denominator.
    Rational(std::int64_t numerator, std::int64_t denominator);

    std::int64_t numerator() const noexcept { return num_; }
    std::int64_t denominator() const noexcept { return den_; }
    double to_double() const noexcept { return static_cast<double>(num_) / static_cast<double>(den_); }
    /// Rounded half away from zero to the given number of decimals.
    std::string to_fixed(int decimals = 2) const;

    friend Rational operator+(const Rational& a, const Rational& b);
    friend Rational operator-(const Rational& a, const Rational& b);
    bool operator==(const Rational&) const = default;
    std::strong_ordering operator<=>(const Rational& other) const;

private:
    std::int64_t num_ = 0;
    std::int64_t den_ = 1;
};

/// counts[truth][predicted] over a fixed class list.
class ConfusionMatrix {
public:
    ConfusionMatrix() = default;
    explicit ConfusionMatrix(std::vector<std::string> classes);

    /// Throws nids::Error for a label outside the class list.
    void add(std::string_view truth, std::string_view predicted, std::int64_t count = 1);

    const std::vector<std::string>& classes() const noexcept { return classes_; }
    std::int64_t at(std::size_t truth, std::size_t predicted) const { return counts_.at(truth).at(predicted); }
    std::int64_t count(std::string_view truth, std::string_view predicted) const;
    std::optional<std::size_t> index_of(std::string_view name) const;
    std::int64_t row_total(std::size_t truth) const;
    std::int64_t total() const;
    std::int64_t trace() const;

    bool operator==(const ConfusionMatrix&) const = default;

private:
    std::vector<std::string> classes_;
    std::vector<std::vector<std::int64_t>> counts_;
};

/// Throws nids::Error on length mismatch or labels outside the class list.
ConfusionMatrix confusion(std::span<const std::string> predictions, std::span<const std::string> truths,
                          std::vector<std::string> classes);

/// (TA - FN) / TA * 100 where TA counts rows other than `normal_class` and FN
/// those rows predicted as `normal_class`. Throws nids::Error when TA = 0.
Rational detection_rate(const ConfusionMatrix& cm, std::string_view normal_class = kNormalClass);

/// FP / TN * 100 where TN is the `normal_class` row total and FP the part of it
/// predicted as anything else. Throws nids::Error when TN = 0.
Rational false_alarm_rate(const ConfusionMatrix& cm, std::string_view normal_class = kNormalClass);

/// Exact-match percentage. Throws nids::Error on empty or unequal input.
Rational correct_classification_rate(std::span<const std::string> predictions, std::span<const std::string> truths);
/// Trace / total * 100. Throws nids::Error on an empty matrix.
Rational correct_classification_rate(const ConfusionMatrix& cm);

/// "1", "2", "3" for architecture stages, "final" for the phase cascade's
/// end-to-end attack-type output.
struct StageMetrics {
    std::string stage;
    /// Records evaluated at this stage.
    std::int64_t population = 0;
    ConfusionMatrix confusion;
    std::optional<Rational> ccr;
    std::optional<Rational> detection_rate;
    std::optional<Rational> false_alarm_rate;
};

struct EvalReport {
    std::string technique;
    Architecture architecture = Architecture::Phase;
    Learner learner = Learner::C5;
    std::int64_t test_count = 0;
    std::vector<StageMetrics> stages;

    const StageMetrics& stage(std::string_view name) const;
};

/// Phase stage n is scored over the records whose trail reached stage n, against
/// that stage's truth; normals misrouted past phase 1 count as errors with truth
/// "normal". Detection and false alarm rates of every phase stage describe the
/// cascade's binary decision over the whole test set.
EvalReport phase_report(std::span<const PhaseVerdict> verdicts, std::span<const ConnectionRecord> records,
                        const LabelTaxonomy& taxonomy, Learner learner, std::string technique);

/// Every level is scored over the whole test set against its own relabeled
/// truth; detection and false alarm rates collapse that level's classes to
/// normal versus the rest.
EvalReport level_report(std::span<const LevelVerdict> verdicts, std::span<const ConnectionRecord> records,
                        const LabelTaxonomy& taxonomy, Learner learner, std::string technique);

struct MetricTuple {
    std::string technique;
    std::string model;
    std::string learner;
    std::string stage;
    std::string metric;
    std::string value;

    auto operator<=>(const MetricTuple&) const = default;
};

/// ccr, dr, far (2 decimals) and population per stage. Rates that are
/// undefined for a stage render as NA.
std::vector<MetricTuple> metric_tuples(const EvalReport& report);

/// Sorted, with a header line.
void write_metric_tuples(std::ostream& out, std::vector<MetricTuple> tuples);

/// One block per architecture: rows are stage and metric, columns the learners.
void write_report_table(std::ostream& out, std::span<const EvalReport> reports);

} // namespace nids

#endif // NIDS_EVAL_HPP
