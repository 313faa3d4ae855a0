#include "nids/eval.hpp"

#include "nids/error.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <ostream>
#include <set>

namespace nids {

namespace {

using Wide = __int128;

Wide wide_abs(Wide v) {
    return v < 0 ? -v : v;
}

Wide wide_gcd(Wide a, Wide b) {
    a = wide_abs(a);
    b = wide_abs(b);
    while (b != 0) {
        const Wide t = a % b;
        a = b;
        b = t;
    }
    return a;
}

Rational reduce(Wide num, Wide den) {
    if (den < 0) {
        num = -num;
        den = -den;
    }
    const Wide g = wide_gcd(num, den);
    if (g > 1) {
        num /= g;
        den /= g;
    }
    if (wide_abs(num) > INT64_MAX || den > INT64_MAX) {
        throw Error("rational overflow");
    }
    return Rational(static_cast<std::int64_t>(num), static_cast<std::int64_t>(den));
}

Rational percent(std::int64_t part, std::int64_t whole) {
    return Rational(100 * part, whole);
}

std::string binary_truth(const ClassLabel& label) {
    return std::string(label.is_attack() ? kAttackClass : kNormalClass);
}

std::string category_truth(const ClassLabel& label) {
    return label.is_attack() ? std::string(to_string(*label.category())) : std::string(kNormalClass);
}

std::string type_truth(const ClassLabel& label) {
    return label.is_attack() ? label.attack_type() : std::string(kNormalClass);
}

/// Fixed leading classes followed by any other seen labels in sorted order.
std::vector<std::string> class_list(std::vector<std::string> leading, std::span<const std::string> a,
                                    std::span<const std::string> b) {
    std::set<std::string> extra;
    for (auto span : {a, b}) {
        for (const auto& label : span) {
            if (std::find(leading.begin(), leading.end(), label) == leading.end()) {
                extra.insert(label);
            }
        }
    }
    leading.insert(leading.end(), extra.begin(), extra.end());
    return leading;
}

std::vector<std::string> category_classes() {
    std::vector<std::string> names{std::string(kNormalClass)};
    for (auto c : kCategories) {
        names.emplace_back(to_string(c));
    }
    return names;
}

StageMetrics score(std::string stage, std::span<const std::string> predictions, std::span<const std::string> truths,
                   std::vector<std::string> leading) {
    StageMetrics metrics;
    metrics.stage = std::move(stage);
    metrics.population = static_cast<std::int64_t>(truths.size());
    metrics.confusion = confusion(predictions, truths, class_list(std::move(leading), predictions, truths));
    if (metrics.population > 0) {
        metrics.ccr = correct_classification_rate(metrics.confusion);
    }
    return metrics;
}

void add_binary_rates(StageMetrics& metrics, const ConfusionMatrix& cm) {
    const auto normal = cm.index_of(kNormalClass);
    const auto normal_rows = normal ? cm.row_total(*normal) : 0;
    if (cm.total() - normal_rows > 0) {
        metrics.detection_rate = detection_rate(cm);
    }
    if (normal_rows > 0) {
        metrics.false_alarm_rate = false_alarm_rate(cm);
    }
}

std::string render(const std::optional<Rational>& value) {
    return value ? value->to_fixed(2) : "NA";
}

} // namespace

Rational::Rational(std::int64_t numerator, std::int64_t denominator) {
    if (denominator == 0) {
        throw Error("rational with zero denominator");
    }
    if (denominator < 0) {
        numerator = -numerator;
        denominator = -denominator;
    }
    const auto g = std::gcd(numerator, denominator);
    num_ = numerator / g;
    den_ = denominator / g;
}

std::string Rational::to_fixed(int decimals) const {
    Wide scale = 1;
    for (int i = 0; i < decimals; ++i) {
        scale *= 10;
    }
    const Wide scaled = wide_abs(static_cast<Wide>(num_)) * scale;
    Wide q = scaled / den_;
    if (2 * (scaled % den_) >= den_) {
        ++q;
    }
    const auto whole = static_cast<long long>(q / scale);
    auto frac = static_cast<long long>(q % scale);
    std::string out = (num_ < 0 && q != 0 ? "-" : "") + std::to_string(whole);
    if (decimals > 0) {
        std::string digits = std::to_string(frac);
        out += '.' + std::string(static_cast<std::size_t>(decimals) - digits.size(), '0') + digits;
    }
    return out;
}

Rational operator+(const Rational& a, const Rational& b) {
    return reduce(static_cast<Wide>(a.num_) * b.den_ + static_cast<Wide>(b.num_) * a.den_,
                  static_cast<Wide>(a.den_) * b.den_);
}

Rational operator-(const Rational& a, const Rational& b) {
    return reduce(static_cast<Wide>(a.num_) * b.den_ - static_cast<Wide>(b.num_) * a.den_,
                  static_cast<Wide>(a.den_) * b.den_);
}

std::strong_ordering Rational::operator<=>(const Rational& other) const {
    const Wide lhs = static_cast<Wide>(num_) * other.den_;
    const Wide rhs = static_cast<Wide>(other.num_) * den_;
    return lhs < rhs ? std::strong_ordering::less : lhs > rhs ? std::strong_ordering::greater
                                                              : std::strong_ordering::equal;
}

ConfusionMatrix::ConfusionMatrix(std::vector<std::string> classes)
    : classes_(std::move(classes)), counts_(classes_.size(), std::vector<std::int64_t>(classes_.size(), 0)) {
    std::set<std::string> unique(classes_.begin(), classes_.end());
    if (unique.size() != classes_.size()) {
        throw Error("confusion matrix classes must be distinct");
    }
}

std::optional<std::size_t> ConfusionMatrix::index_of(std::string_view name) const {
    const auto it = std::find(classes_.begin(), classes_.end(), name);
    if (it == classes_.end()) {
        return std::nullopt;
    }
    return static_cast<std::size_t>(it - classes_.begin());
}

void ConfusionMatrix::add(std::string_view truth, std::string_view predicted, std::int64_t count) {
    const auto t = index_of(truth);
    const auto p = index_of(predicted);
    if (!t || !p) {
        throw Error("label '" + std::string(t ? predicted : truth) + "' is outside the class list");
    }
    counts_[*t][*p] += count;
}

std::int64_t ConfusionMatrix::count(std::string_view truth, std::string_view predicted) const {
    const auto t = index_of(truth);
    const auto p = index_of(predicted);
    return t && p ? counts_[*t][*p] : 0;
}

std::int64_t ConfusionMatrix::row_total(std::size_t truth) const {
    return std::accumulate(counts_.at(truth).begin(), counts_.at(truth).end(), std::int64_t{0});
}

std::int64_t ConfusionMatrix::total() const {
    std::int64_t sum = 0;
    for (std::size_t i = 0; i < counts_.size(); ++i) {
        sum += row_total(i);
    }
    return sum;
}

std::int64_t ConfusionMatrix::trace() const {
    std::int64_t sum = 0;
    for (std::size_t i = 0; i < counts_.size(); ++i) {
        sum += counts_[i][i];
    }
    return sum;
}

ConfusionMatrix confusion(std::span<const std::string> predictions, std::span<const std::string> truths,
                          std::vector<std::string> classes) {
    if (predictions.size() != truths.size()) {
        throw Error("predictions and truths differ in length");
    }
    ConfusionMatrix cm(std::move(classes));
    for (std::size_t i = 0; i < truths.size(); ++i) {
        cm.add(truths[i], predictions[i]);
    }
    return cm;
}

Rational detection_rate(const ConfusionMatrix& cm, std::string_view normal_class) {
    const auto normal = cm.index_of(normal_class);
    std::int64_t attacks = 0;
    std::int64_t missed = 0;
    for (std::size_t t = 0; t < cm.classes().size(); ++t) {
        if (normal && t == *normal) {
            continue;
        }
        attacks += cm.row_total(t);
        missed += normal ? cm.at(t, *normal) : 0;
    }
    if (attacks == 0) {
        throw Error("detection rate needs at least one attack record");
    }
    return percent(attacks - missed, attacks);
}

Rational false_alarm_rate(const ConfusionMatrix& cm, std::string_view normal_class) {
    const auto normal = cm.index_of(normal_class);
    const auto normals = normal ? cm.row_total(*normal) : 0;
    if (normals == 0) {
        throw Error("false alarm rate needs at least one normal record");
    }
    return percent(normals - cm.at(*normal, *normal), normals);
}

Rational correct_classification_rate(std::span<const std::string> predictions, std::span<const std::string> truths) {
    if (predictions.size() != truths.size()) {
        throw Error("predictions and truths differ in length");
    }
    if (truths.empty()) {
        throw Error("correct classification rate of an empty set");
    }
    std::int64_t correct = 0;
    for (std::size_t i = 0; i < truths.size(); ++i) {
        correct += predictions[i] == truths[i] ? 1 : 0;
    }
    return percent(correct, static_cast<std::int64_t>(truths.size()));
}

Rational correct_classification_rate(const ConfusionMatrix& cm) {
    if (cm.total() == 0) {
        throw Error("correct classification rate of an empty set");
    }
    return percent(cm.trace(), cm.total());
}

const StageMetrics& EvalReport::stage(std::string_view name) const {
    for (const auto& s : stages) {
        if (s.stage == name) {
            return s;
        }
    }
    throw Error("report has no stage '" + std::string(name) + "'");
}

EvalReport phase_report(std::span<const PhaseVerdict> verdicts, std::span<const ConnectionRecord> records,
                        const LabelTaxonomy& taxonomy, Learner learner, std::string technique) {
    if (verdicts.size() != records.size()) {
        throw Error("verdict count differs from record count");
    }
    EvalReport report;
    report.technique = std::move(technique);
    report.architecture = Architecture::Phase;
    report.learner = learner;
    report.test_count = static_cast<std::int64_t>(records.size());

    std::vector<std::string> pred1, truth1, pred2, truth2, pred3, truth3, pred_final, truth_final;
    for (std::size_t i = 0; i < records.size(); ++i) {
        const auto& verdict = verdicts[i];
        const auto& trail = verdict.stage_trail;
        if (trail.empty() || trail.size() > 3 || verdict.is_attack != (trail.size() > 1) ||
            verdict.is_attack != verdict.category.has_value()) {
            throw Error("phase verdict " + std::to_string(i) + " has an inconsistent stage trail");
        }
        const auto label = taxonomy.categorize(records[i].label);
        pred1.push_back(trail[0].label);
        truth1.push_back(binary_truth(label));
        if (trail.size() >= 2) {
            pred2.push_back(trail[1].label);
            truth2.push_back(category_truth(label));
        }
        if (trail.size() >= 3) {
            pred3.push_back(trail[2].label);
            truth3.push_back(type_truth(label));
        }
        pred_final.push_back(verdict.is_attack ? verdict.attack_type.value_or(std::string(kUnspecifiedType))
                                               : std::string(kNormalClass));
        truth_final.push_back(type_truth(label));
    }

    auto stage1 = score("1", pred1, truth1, {std::string(kNormalClass), std::string(kAttackClass)});
    add_binary_rates(stage1, stage1.confusion);
    const auto binary = stage1.confusion;
    report.stages.push_back(std::move(stage1));
    auto stage2 = score("2", pred2, truth2, category_classes());
    auto stage3 = score("3", pred3, truth3, {std::string(kNormalClass)});
    auto final_stage = score("final", pred_final, truth_final, {std::string(kNormalClass)});
    for (auto* s : {&stage2, &stage3, &final_stage}) {
        add_binary_rates(*s, binary);
        report.stages.push_back(std::move(*s));
    }
    return report;
}

EvalReport level_report(std::span<const LevelVerdict> verdicts, std::span<const ConnectionRecord> records,
                        const LabelTaxonomy& taxonomy, Learner learner, std::string technique) {
    if (verdicts.size() != records.size()) {
        throw Error("verdict count differs from record count");
    }
    EvalReport report;
    report.technique = std::move(technique);
    report.architecture = Architecture::Level;
    report.learner = learner;
    report.test_count = static_cast<std::int64_t>(records.size());

    std::vector<std::string> pred[3], truth[3];
    for (std::size_t i = 0; i < records.size(); ++i) {
        const auto label = taxonomy.categorize(records[i].label);
        pred[0].push_back(verdicts[i].level1.label);
        pred[1].push_back(verdicts[i].level2.label);
        pred[2].push_back(verdicts[i].level3.label);
        truth[0].push_back(binary_truth(label));
        truth[1].push_back(category_truth(label));
        truth[2].push_back(type_truth(label));
    }
    const std::vector<std::string> leading[3] = {
        {std::string(kNormalClass), std::string(kAttackClass)}, category_classes(), {std::string(kNormalClass)}};
    for (int level = 0; level < 3; ++level) {
        auto metrics = score(std::to_string(level + 1), pred[level], truth[level], leading[level]);
        add_binary_rates(metrics, metrics.confusion);
        report.stages.push_back(std::move(metrics));
    }
    return report;
}

std::vector<MetricTuple> metric_tuples(const EvalReport& report) {
    std::vector<MetricTuple> tuples;
    const std::string model(to_string(report.architecture));
    const std::string learner(to_string(report.learner));
    for (const auto& stage : report.stages) {
        const auto add = [&](const char* metric, std::string value) {
            tuples.push_back({report.technique, model, learner, stage.stage, metric, std::move(value)});
        };
        add("ccr", render(stage.ccr));
        add("dr", render(stage.detection_rate));
        add("far", render(stage.false_alarm_rate));
        add("population", std::to_string(stage.population));
    }
    return tuples;
}

void write_metric_tuples(std::ostream& out, std::vector<MetricTuple> tuples) {
    std::sort(tuples.begin(), tuples.end());
    out << "technique,model,learner,stage,metric,value\n";
    for (const auto& t : tuples) {
        out << t.technique << ',' << t.model << ',' << t.learner << ',' << t.stage << ',' << t.metric << ','
            << t.value << '\n';
    }
}

void write_report_table(std::ostream& out, std::span<const EvalReport> reports) {
    std::map<std::pair<std::string, std::string>, std::vector<const EvalReport*>> blocks;
    for (const auto& report : reports) {
        blocks[{report.technique, std::string(to_string(report.architecture))}].push_back(&report);
    }
    bool first = true;
    for (auto& [key, group] : blocks) {
        std::sort(group.begin(), group.end(),
                  [](const EvalReport* a, const EvalReport* b) { return a->learner < b->learner; });
        if (!first) {
            out << '\n';
        }
        first = false;
        out << "# technique=" << key.first << " model=" << key.second << '\n';
        out << "stage,metric";
        for (const auto* report : group) {
            out << ',' << to_string(report->learner);
        }
        out << '\n';
        for (const auto& stage : group.front()->stages) {
            for (const char* metric : {"ccr", "dr", "far", "population"}) {
                out << stage.stage << ',' << metric;
                for (const auto* report : group) {
                    const auto& s = report->stage(stage.stage);
                    const std::string name(metric);
                    out << ','
                        << (name == "ccr"   ? render(s.ccr)
                            : name == "dr"  ? render(s.detection_rate)
                            : name == "far" ? render(s.false_alarm_rate)
                                            : std::to_string(s.population));
                }
                out << '\n';
            }
        }
    }
}

} // namespace nids
