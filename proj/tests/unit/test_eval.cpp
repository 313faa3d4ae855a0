#include "doctest.h"

#include "fixtures.hpp"

#include "nids/error.hpp"
#include "nids/eval.hpp"
#include "nids/rng.hpp"

#include <sstream>

using namespace nids;
using nids::testing::make_record;

namespace {

using Labels = std::vector<std::string>;

ConfusionMatrix binary(std::int64_t tn_ok, std::int64_t fp, std::int64_t fn, std::int64_t tp) {
    ConfusionMatrix cm({"normal", "attack"});
    cm.add("normal", "normal", tn_ok);
    cm.add("normal", "attack", fp);
    cm.add("attack", "normal", fn);
    cm.add("attack", "attack", tp);
    return cm;
}

StageOutput out(std::string label) {
    return {std::move(label), 1.0};
}

PhaseVerdict normal_verdict() {
    return {false, std::nullopt, std::nullopt, {out("normal")}};
}

PhaseVerdict attack_verdict(Category category, std::string type) {
    return {true, category, type, {out("attack"), out(std::string(to_string(category))), out(type)}};
}

std::vector<ConnectionRecord> records_of(const Labels& labels) {
    std::vector<ConnectionRecord> out;
    for (const auto& l : labels) {
        out.push_back(make_record(l));
    }
    return out;
}

LabelTaxonomy small_taxonomy() {
    LabelTaxonomy taxonomy;
    taxonomy.add_attack("neptune", Category::DoS);
    taxonomy.add_attack("smurf", Category::DoS);
    taxonomy.add_attack("satan", Category::Probe);
    taxonomy.add_attack("rootkit", Category::U2R);
    return taxonomy;
}

} // namespace

TEST_SUITE("eval") {

TEST_CASE("rationals reduce and render half away from zero") {
    CHECK(Rational(6, 8) == Rational(3, 4));
    CHECK(Rational(3, -6) == Rational(-1, 2));
    CHECK(Rational(3, -6).denominator() == 2);
    CHECK(Rational(200, 3).to_fixed() == "66.67");
    CHECK(Rational(1, 8).to_fixed() == "0.13");
    CHECK(Rational(-1, 8).to_fixed() == "-0.13");
    CHECK(Rational(100, 1).to_fixed() == "100.00");
    CHECK(Rational(1, 3).to_fixed(4) == "0.3333");
    CHECK(Rational(1, 2) + Rational(1, 3) == Rational(5, 6));
    CHECK(Rational(1, 2) - Rational(1, 3) == Rational(1, 6));
    CHECK(Rational(1, 3) < Rational(1, 2));
    CHECK_THROWS_AS(Rational(1, 0), Error);
}

TEST_CASE("confusion tallies truth by prediction") {
    const Labels truths{"A", "A", "B"};
    const Labels preds{"A", "B", "B"};
    const auto cm = confusion(preds, truths, {"A", "B"});
    CHECK(cm.at(0, 0) == 1);
    CHECK(cm.at(0, 1) == 1);
    CHECK(cm.at(1, 0) == 0);
    CHECK(cm.at(1, 1) == 1);
    CHECK(cm.total() == 3);
    CHECK(cm.row_total(0) == 2);

    Labels same;
    for (int i = 0; i < 10; ++i) {
        same.push_back(i % 3 == 0 ? "A" : "B");
    }
    const auto perfect = confusion(same, same, {"A", "B"});
    CHECK(perfect.trace() == 10);
    CHECK(perfect.at(0, 1) == 0);
    CHECK(perfect.at(1, 0) == 0);

    const auto empty = confusion(Labels{}, Labels{}, {"A", "B"});
    CHECK(empty.total() == 0);

    CHECK_THROWS_AS(confusion(Labels{"A"}, Labels{"A", "B"}, {"A", "B"}), Error);
    CHECK_THROWS_AS(confusion(Labels{"C"}, Labels{"A"}, {"A", "B"}), Error);
    CHECK_THROWS_AS(ConfusionMatrix({"A", "A"}), Error);
}

TEST_CASE("detection rate examples") {
    CHECK(detection_rate(binary(5, 0, 0, 30)) == Rational(100, 1));
    CHECK(detection_rate(binary(0, 0, 50, 150)) == Rational(75, 1));
    CHECK(detection_rate(binary(3, 1, 1, 0)) == Rational(0, 1));
    CHECK_THROWS_AS(detection_rate(binary(10, 2, 0, 0)), Error);
}

TEST_CASE("false alarm rate examples") {
    CHECK(false_alarm_rate(binary(9647, 0, 4, 6)) == Rational(0, 1));
    CHECK(false_alarm_rate(binary(900, 100, 0, 1)) == Rational(10, 1));
    CHECK(false_alarm_rate(binary(0, 12, 0, 1)) == Rational(100, 1));
    CHECK_THROWS_AS(false_alarm_rate(binary(0, 0, 3, 4)), Error);
}

TEST_CASE("correct classification rate examples") {
    Labels truths;
    Labels preds;
    for (int i = 0; i < 20; ++i) {
        truths.push_back(i % 2 == 0 ? "x" : "y");
        preds.push_back(i < 3 ? (i % 2 == 0 ? "y" : "x") : truths.back());
    }
    CHECK(correct_classification_rate(truths, truths) == Rational(100, 1));
    CHECK(correct_classification_rate(preds, truths) == Rational(85, 1));
    const auto cm = confusion(preds, truths, {"x", "y"});
    const Rational off_diagonal(cm.at(0, 1) + cm.at(1, 0), 1);
    CHECK(correct_classification_rate(cm) == Rational(100, 1) - Rational(off_diagonal.numerator() * 100, cm.total()));
    CHECK_THROWS_AS(correct_classification_rate(Labels{}, Labels{}), Error);
    CHECK_THROWS_AS(correct_classification_rate(ConfusionMatrix({"x"})), Error);
}

TEST_CASE("multiclass detection collapses to normal versus the rest") {
    ConfusionMatrix cm({"normal", "DoS", "Probe"});
    cm.add("DoS", "Probe", 4);
    cm.add("DoS", "normal", 1);
    cm.add("Probe", "Probe", 5);
    cm.add("normal", "DoS", 2);
    cm.add("normal", "normal", 8);
    CHECK(detection_rate(cm) == Rational(90, 1));
    CHECK(false_alarm_rate(cm) == Rational(20, 1));
}

TEST_CASE("rate identities hold on random matrices") {
    std::mt19937_64 engine(3);
    for (int trial = 0; trial < 300; ++trial) {
        const auto draw = [&] { return static_cast<std::int64_t>(bounded_draw(engine, 1000)); };
        const auto cm = binary(draw(), draw(), draw(), 1 + draw());
        const auto ta = cm.row_total(1);
        const auto fn = cm.at(1, 0);
        CHECK(detection_rate(cm) + Rational(100 * fn, ta) == Rational(100, 1));
        CHECK(detection_rate(cm) >= Rational(0, 1));
        CHECK(detection_rate(cm) <= Rational(100, 1));
        if (cm.row_total(0) > 0) {
            CHECK(false_alarm_rate(cm) >= Rational(0, 1));
            CHECK(false_alarm_rate(cm) <= Rational(100, 1));
        }
        Labels preds;
        Labels truths;
        for (std::size_t t = 0; t < 2; ++t) {
            for (std::size_t p = 0; p < 2; ++p) {
                for (std::int64_t k = 0; k < cm.at(t, p); ++k) {
                    truths.push_back(cm.classes()[t]);
                    preds.push_back(cm.classes()[p]);
                }
            }
        }
        CHECK(correct_classification_rate(preds, truths) == correct_classification_rate(cm));
    }
}

TEST_CASE("a constant-normal predictor detects nothing and raises no alarms") {
    const auto cm = binary(40, 0, 25, 0);
    CHECK(detection_rate(cm) == Rational(0, 1));
    CHECK(false_alarm_rate(cm) == Rational(0, 1));
}

TEST_CASE("a perfect phase cascade scores 100 everywhere") {
    const auto taxonomy = small_taxonomy();
    const Labels labels{"normal", "neptune", "satan", "normal", "rootkit", "smurf"};
    const auto records = records_of(labels);
    std::vector<PhaseVerdict> verdicts;
    for (const auto& l : labels) {
        if (l == "normal") {
            verdicts.push_back(normal_verdict());
        } else {
            verdicts.push_back(attack_verdict(*taxonomy.categorize(l).category(), l));
        }
    }
    const auto report = phase_report(verdicts, records, taxonomy, Learner::C5, "partition");
    CHECK(report.test_count == 6);
    for (const auto* name : {"1", "2", "3", "final"}) {
        const auto& stage = report.stage(name);
        CHECK(stage.ccr == Rational(100, 1));
        CHECK(stage.detection_rate == Rational(100, 1));
        CHECK(stage.false_alarm_rate == Rational(0, 1));
    }
    CHECK(report.stage("1").population == 6);
    CHECK(report.stage("2").population == 4);
    CHECK(report.stage("3").population == 4);
    CHECK(report.stage("final").population == 6);
}

TEST_CASE("normals flagged at phase 1 count as errors where they land") {
    const auto taxonomy = small_taxonomy();
    const Labels labels{"normal", "normal", "neptune", "satan"};
    const auto records = records_of(labels);
    const std::vector<PhaseVerdict> verdicts{attack_verdict(Category::DoS, "smurf"),
                                             attack_verdict(Category::Probe, "satan"),
                                             attack_verdict(Category::DoS, "neptune"),
                                             attack_verdict(Category::Probe, "satan")};
    const auto report = phase_report(verdicts, records, taxonomy, Learner::CART, "partition");
    const auto& s1 = report.stage("1");
    CHECK(s1.detection_rate == Rational(100, 1));
    CHECK(s1.false_alarm_rate == Rational(100, 1));
    CHECK(s1.ccr == Rational(50, 1));
    const auto& s2 = report.stage("2");
    CHECK(s2.population == 4);
    CHECK(s2.ccr == Rational(50, 1));
    CHECK(s2.confusion.count("normal", "DoS") == 1);
    CHECK(s2.confusion.count("normal", "Probe") == 1);
    CHECK(report.stage("3").ccr == Rational(50, 1));
}

TEST_CASE("phase stage populations follow the stage trails") {
    const auto taxonomy = small_taxonomy();
    const Labels labels{"normal", "neptune", "satan", "rootkit", "smurf", "normal"};
    const auto records = records_of(labels);
    std::vector<PhaseVerdict> verdicts{normal_verdict(), attack_verdict(Category::DoS, "neptune"), normal_verdict(),
                                       attack_verdict(Category::U2R, "rootkit"), attack_verdict(Category::DoS, "smurf"),
                                       attack_verdict(Category::Probe, "satan")};
    verdicts[4].stage_trail.pop_back();
    verdicts[4].attack_type = std::string(kUnspecifiedType);
    const auto report = phase_report(verdicts, records, taxonomy, Learner::QUEST, "new-attack");
    CHECK(report.stage("2").population == 4);
    CHECK(report.stage("3").population == 3);
    CHECK(report.stage("1").detection_rate == Rational(75, 1));
    CHECK(report.stage("1").false_alarm_rate == Rational(50, 1));
    CHECK(report.stage("final").confusion.count("smurf", "unspecified") == 1);
    CHECK(report.stage("final").ccr == Rational(50, 1));

    auto broken = verdicts;
    broken[0].stage_trail.push_back(out("DoS"));
    CHECK_THROWS_AS(phase_report(broken, records, taxonomy, Learner::QUEST, "new-attack"), Error);
    CHECK_THROWS_AS(phase_report(std::span(verdicts).first(2), records, taxonomy, Learner::QUEST, "x"), Error);
}

TEST_CASE("level reports score every level over the full test set") {
    const auto taxonomy = small_taxonomy();
    const Labels labels{"normal", "neptune", "satan", "normal"};
    const auto records = records_of(labels);
    const std::vector<LevelVerdict> verdicts{
        {out("normal"), out("DoS"), out("normal")},
        {out("attack"), out("DoS"), out("neptune")},
        {out("normal"), out("Probe"), out("smurf")},
        {out("attack"), out("normal"), out("normal")},
    };
    const auto report = level_report(verdicts, records, taxonomy, Learner::CHAID, "partition");
    for (const auto* name : {"1", "2", "3"}) {
        CHECK(report.stage(name).population == 4);
    }
    CHECK(report.stage("1").ccr == Rational(50, 1));
    CHECK(report.stage("1").detection_rate == Rational(50, 1));
    CHECK(report.stage("1").false_alarm_rate == Rational(50, 1));
    CHECK(report.stage("2").ccr == Rational(75, 1));
    CHECK(report.stage("2").detection_rate == Rational(100, 1));
    CHECK(report.stage("2").false_alarm_rate == Rational(50, 1));
    CHECK(report.stage("3").ccr == Rational(75, 1));
    CHECK_THROWS_AS(report.stage("4"), Error);
}

TEST_CASE("metric tuples are sorted and mark undefined rates") {
    const auto taxonomy = small_taxonomy();
    const Labels labels{"normal", "normal"};
    const auto records = records_of(labels);
    const std::vector<PhaseVerdict> verdicts{normal_verdict(), normal_verdict()};
    const auto report = phase_report(verdicts, records, taxonomy, Learner::C5, "partition");
    const auto tuples = metric_tuples(report);
    bool saw_na = false;
    for (const auto& t : tuples) {
        CHECK(t.technique == "partition");
        CHECK(t.model == "phase");
        CHECK(t.learner == "C5");
        saw_na = saw_na || (t.stage == "1" && t.metric == "dr" && t.value == "NA");
    }
    CHECK(saw_na);
    std::ostringstream text;
    write_metric_tuples(text, tuples);
    std::istringstream lines(text.str());
    std::string line;
    std::getline(lines, line);
    CHECK(line == "technique,model,learner,stage,metric,value");
    std::vector<std::string> body;
    while (std::getline(lines, line)) {
        body.push_back(line);
    }
    CHECK(std::is_sorted(body.begin(), body.end()));
    CHECK(body.size() == tuples.size());
}

TEST_CASE("report tables put learners in columns") {
    const auto taxonomy = small_taxonomy();
    const Labels labels{"normal", "neptune"};
    const auto records = records_of(labels);
    const std::vector<PhaseVerdict> verdicts{normal_verdict(), attack_verdict(Category::DoS, "neptune")};
    std::vector<EvalReport> reports;
    for (auto learner : {Learner::C5, Learner::CART, Learner::CHAID, Learner::QUEST}) {
        reports.push_back(phase_report(verdicts, records, taxonomy, learner, "partition"));
    }
    std::ostringstream text;
    write_report_table(text, reports);
    const auto table = text.str();
    CHECK(table.find("# technique=partition model=phase") != std::string::npos);
    CHECK(table.find("stage,metric,C5,CRT,CHAID,QUEST") != std::string::npos);
    CHECK(table.find("1,ccr,100.00,100.00,100.00,100.00") != std::string::npos);
}

} // TEST_SUITE
