#include "doctest.h"

#include "fixtures.hpp"
#include "synthetic.hpp"

#include "nids/error.hpp"
#include "nids/preprocess.hpp"
#include "nids/stats.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

using namespace nids;
using nids::testing::make_record;

namespace {

double brute_entropy(const std::map<int, double>& counts) {
    double n = 0.0;
    for (const auto& [_, c] : counts) {
        n += c;
    }
    double h = 0.0;
    for (const auto& [_, c] : counts) {
        if (c > 0) {
            h -= c / n * std::log2(c / n);
        }
    }
    return h;
}

/// Information gain of a column by direct enumeration: every observed value as a
/// threshold for continuous columns, one group per value for nominal ones.
double brute_gain(const std::vector<double>& xs, const std::vector<int>& ys, bool nominal) {
    std::map<int, double> parent;
    for (auto y : ys) {
        parent[y] += 1.0;
    }
    const double h = brute_entropy(parent);
    const double n = static_cast<double>(ys.size());
    if (nominal) {
        std::map<double, std::map<int, double>> groups;
        for (std::size_t i = 0; i < xs.size(); ++i) {
            groups[xs[i]][ys[i]] += 1.0;
        }
        double cond = 0.0;
        for (const auto& [_, g] : groups) {
            double size = 0.0;
            for (const auto& [__, c] : g) {
                size += c;
            }
            cond += size / n * brute_entropy(g);
        }
        return h - cond;
    }
    double best = 0.0;
    for (double t : std::set<double>(xs.begin(), xs.end())) {
        std::map<int, double> left;
        std::map<int, double> right;
        double nl = 0.0;
        for (std::size_t i = 0; i < xs.size(); ++i) {
            if (xs[i] <= t) {
                left[ys[i]] += 1.0;
                nl += 1.0;
            } else {
                right[ys[i]] += 1.0;
            }
        }
        const double cond = nl / n * brute_entropy(left) + (nl < n ? (n - nl) / n * brute_entropy(right) : 0.0);
        best = std::max(best, h - cond);
    }
    return best;
}

std::vector<ConnectionRecord> protocols(std::initializer_list<const char*> tokens) {
    std::vector<ConnectionRecord> out;
    double x = 0.0;
    for (const char* t : tokens) {
        out.push_back(make_record("normal", x, t));
        x += 1.0;
    }
    return out;
}

} // namespace

TEST_SUITE("preprocess") {

TEST_CASE("encoding follows first appearance") {
    const auto train = protocols({"tcp", "udp", "tcp", "icmp", "udp"});
    const auto table = EncodingTable::fit(train);
    CHECK(table.code(0, "tcp") == 0);
    CHECK(table.code(0, "udp") == 1);
    CHECK(table.code(0, "icmp") == 2);
    CHECK(table.reserved_code(0) == 3);
    CHECK(table.code(0, "sctp") == 3);
    CHECK(table.code_count(0) == 4);
}

TEST_CASE("constant features record a degenerate range and map to 0") {
    std::vector<ConnectionRecord> train;
    for (int i = 0; i < 5; ++i) {
        auto r = make_record("normal", 7.0);
        r.numeric[0] = i;
        train.push_back(r);
    }
    const auto state = fit_preprocess(train);
    CHECK(state.normalizer().ranges[4] == FeatureRange{7.0, 7.0});
    auto probe = make_record("normal", 12.0);
    CHECK(state.transform(probe)[4] == 0.0);
}

TEST_CASE("scaling clamps to the fitted range") {
    const FeatureRange range{0.0, 10.0};
    CHECK(range.scale(5.0) == 0.5);
    CHECK(range.scale(20.0) == 1.0);
    CHECK(range.scale(-3.0) == 0.0);
    CHECK(range.scale(0.0) == 0.0);
    CHECK(range.scale(10.0) == 1.0);
}

TEST_CASE("unseen tokens take the reserved code before scaling") {
    std::vector<ConnectionRecord> train{make_record("normal", 0, "tcp", "http"), make_record("normal", 0, "tcp", "ftp"),
                                        make_record("normal", 0, "tcp", "smtp")};
    const auto state = fit_preprocess(train);
    const auto probe = make_record("normal", 0, "tcp", "newproto");
    const auto row = state.tree_row(probe, TreeView::Continuous);
    CHECK(row[2] == 3.0);
    CHECK(state.normalizer().ranges[2] == FeatureRange{0.0, 2.0});
    CHECK(state.transform(probe)[2] == 1.0);
    CHECK(state.tree_kinds(TreeView::Continuous)[2] == FeatureKind::categorical(4));
}

TEST_CASE("transform keeps every component in [0, 1]") {
    const auto train = nids::testing::synthetic_corpus({.records = 400, .seed = 3});
    const auto test = nids::testing::synthetic_corpus({.records = 400, .seed = 99, .novel_types = true, .noise = 0.3});
    const auto state = fit_preprocess(train);
    for (const auto& r : test) {
        auto wild = r;
        wild.numeric[0] = 1e12;
        wild.numeric[5] = -4.0;
        wild.tokens[1] = "unheard_of";
        for (const auto& record : {r, wild}) {
            const auto x = state.transform(record);
            REQUIRE(x.size() == kFeatureCount);
            for (double v : x) {
                CHECK(v >= 0.0);
                CHECK(v <= 1.0);
            }
        }
    }
}

TEST_CASE("training min and max map to 0 and 1") {
    const auto train = nids::testing::synthetic_corpus({.records = 300, .seed = 5});
    const auto state = fit_preprocess(train);
    for (std::size_t pos = 0; pos < kFeatureCount; ++pos) {
        const auto& range = state.normalizer().ranges[pos];
        if (range.min == range.max) {
            continue;
        }
        bool saw_zero = false;
        bool saw_one = false;
        for (const auto& r : train) {
            const double v = state.transform(r)[pos];
            saw_zero = saw_zero || v == 0.0;
            saw_one = saw_one || v == 1.0;
        }
        INFO(feature_names()[pos]);
        CHECK(saw_zero);
        CHECK(saw_one);
    }
}

TEST_CASE("distinct training tokens get distinct codes") {
    const auto train = nids::testing::synthetic_corpus({.records = 500, .seed = 6});
    const auto state = fit_preprocess(train);
    for (std::size_t slot = 0; slot < kCategoricalCount; ++slot) {
        std::map<std::string, int> codes;
        for (const auto& r : train) {
            const int code = state.encoding().code(slot, r.tokens[slot]);
            const auto [it, inserted] = codes.emplace(r.tokens[slot], code);
            CHECK(it->second == code);
        }
        std::set<int> seen;
        for (const auto& [_, code] : codes) {
            CHECK(seen.insert(code).second);
            CHECK(code < state.encoding().reserved_code(slot));
        }
    }
}

TEST_CASE("transform never changes the fitted state") {
    const auto train = nids::testing::synthetic_corpus({.records = 300, .seed = 7});
    const auto test = nids::testing::synthetic_corpus({.records = 300, .seed = 8, .novel_types = true});
    const auto state = fit_preprocess(train, {.top_k = 12});
    const auto before = state;
    for (const auto& r : test) {
        auto wild = r;
        wild.tokens = {"x", "y", "z"};
        (void)state.transform(wild);
        (void)state.tree_row(wild, TreeView::Continuous);
        (void)state.tree_row(wild, TreeView::Discretized);
    }
    CHECK(state == before);
}

TEST_CASE("fitting on an empty training set fails") {
    CHECK_THROWS_AS(fit_preprocess(std::vector<ConnectionRecord>{}), Error);
}

TEST_CASE("feature ranking matches the exhaustive oracle") {
    const auto data = nids::testing::read_matrix(
        nids::testing::data_path("rank_toy.csv"),
        {FeatureKind::continuous(), FeatureKind::continuous(), FeatureKind::categorical(3)}, {"a", "b"});
    std::ifstream in(nids::testing::data_path("rank_toy_expected.txt"));
    REQUIRE(in);
    std::string word;
    std::vector<double> gains(3);
    std::vector<std::size_t> order(3);
    in >> word >> gains[0] >> gains[1] >> gains[2] >> word >> order[0] >> order[1] >> order[2];
    const auto scores = rank_features(data);
    REQUIRE(scores.size() == 3);
    for (std::size_t f = 0; f < 3; ++f) {
        CHECK(scores[f] == doctest::Approx(gains[f]).epsilon(1e-9));
    }
    CHECK(ranking_order(scores) == order);
}

TEST_CASE("a perfect predictor scores the target entropy and a constant scores 0") {
    LabeledMatrix data({FeatureKind::continuous(), FeatureKind::categorical(2), FeatureKind::continuous()},
                       {"n", "a"});
    for (int i = 0; i < 12; ++i) {
        const int y = i % 3 == 0 ? 1 : 0;
        const double row[] = {0.5, static_cast<double>(y), static_cast<double>(i)};
        data.add_row(row, y);
    }
    const auto scores = rank_features(data);
    const double h = stats::entropy(data.class_counts());
    CHECK(scores[0] == 0.0);
    CHECK(scores[1] == doctest::Approx(h).epsilon(1e-12));
    CHECK(scores[2] <= h + 1e-12);
    CHECK(ranking_order(scores).front() == 1);
}

TEST_CASE("a single-class target gives all-zero scores") {
    LabeledMatrix data({FeatureKind::continuous(), FeatureKind::categorical(3)}, {"n", "a"});
    for (int i = 0; i < 6; ++i) {
        const double row[] = {static_cast<double>(i), static_cast<double>(i % 3)};
        data.add_row(row, 0);
    }
    CHECK(rank_features(data) == std::vector<double>{0.0, 0.0});
}

TEST_CASE("ranking ties break by index") {
    const std::vector<double> scores{0.2, 0.5, 0.2, 0.5, 0.0};
    CHECK(ranking_order(scores) == std::vector<std::size_t>{1, 3, 0, 2, 4});
}

TEST_CASE("top-k keeps the k highest-gain features against normal/attack") {
    const auto taxonomy = nids::testing::bundled_taxonomy();
    const auto train = nids::testing::synthetic_corpus({.records = 600, .seed = 21, .noise = 0.2});
    const auto state = fit_preprocess(train, {.top_k = 10}, taxonomy);
    const auto full = fit_preprocess(train, {}, taxonomy);
    REQUIRE(state.mask().indices.size() == 10);
    REQUIRE(state.mask().scores.size() == kFeatureCount);

    std::vector<int> ys;
    for (const auto& r : train) {
        ys.push_back(taxonomy.is_normal(r.label) ? 0 : 1);
    }
    std::vector<double> expected(kFeatureCount);
    for (std::size_t pos = 0; pos < kFeatureCount; ++pos) {
        std::vector<double> xs;
        for (const auto& r : train) {
            xs.push_back(full.transform(r)[pos]);
        }
        expected[pos] = brute_gain(xs, ys, is_categorical(pos));
        CHECK(state.mask().scores[pos] == doctest::Approx(expected[pos]).epsilon(1e-9));
    }
    auto top = ranking_order(expected);
    top.resize(10);
    std::sort(top.begin(), top.end());
    CHECK(state.mask().indices == top);
    CHECK(state.transform(train.front()).size() == 10);
    CHECK(state.retained_names().size() == 10);
    CHECK(state.retained_names().front() == feature_names()[top.front()]);
}

TEST_CASE("default mask keeps all 41 features") {
    const auto train = nids::testing::synthetic_corpus({.records = 100});
    const auto state = fit_preprocess(train);
    CHECK(state.mask().indices.size() == kFeatureCount);
    CHECK(state.mask().scores.empty());
}

TEST_CASE("quartile bins of 1..100 match the oracle") {
    std::vector<double> values;
    for (int i = 100; i >= 1; --i) {
        values.push_back(i);
    }
    std::ifstream in(nids::testing::data_path("bins_expected.txt"));
    REQUIRE(in);
    std::string word;
    std::vector<double> cuts(3);
    in >> word >> cuts[0] >> cuts[1] >> cuts[2];
    const auto bins = fit_bins(values, 4);
    CHECK(bins.cuts == cuts);
    CHECK(bins.bin_count() == 4);
    CHECK(apply_bins(bins, 25.0) == 0);
    CHECK(apply_bins(bins, 25.5) == 0);
    CHECK(apply_bins(bins, 26.0) == 1);
    CHECK(apply_bins(bins, 1000.0) == 3);
}

TEST_CASE("binning edge cases") {
    const std::vector<double> values{3, 1, 2, 5, 4};
    const auto single = fit_bins(values, 1);
    CHECK(single.cuts.empty());
    CHECK(apply_bins(single, -100.0) == 0);
    CHECK(apply_bins(single, 100.0) == 0);
    const auto bins = fit_bins(values, 2);
    CHECK(apply_bins(bins, -100.0) == 0);
    CHECK(apply_bins(bins, 0.5) == 0);
    const std::vector<double> ties{1, 1, 1, 1, 1, 1, 2, 3};
    const auto tied = fit_bins(ties, 4);
    CHECK(tied.cuts == std::vector<double>{1.5});
    CHECK(fit_bins(std::vector<double>{4, 4, 4}, 3).cuts.empty());
    CHECK_THROWS_AS(fit_bins(values, 0), ConfigError);
}

TEST_CASE("bins are fitted on raw training values for every continuous feature") {
    const auto train = nids::testing::synthetic_corpus({.records = 300, .seed = 12});
    const auto state = fit_preprocess(train, {.bin_count = 5});
    for (std::size_t pos = 0; pos < kFeatureCount; ++pos) {
        if (is_categorical(pos)) {
            CHECK(state.bins()[pos].cuts.empty());
            continue;
        }
        std::vector<double> raw;
        for (const auto& r : train) {
            raw.push_back(r.numeric[pos]);
        }
        CHECK(state.bins()[pos] == fit_bins(raw, 5));
        CHECK(state.bins()[pos].bin_count() <= 5);
    }
    const auto kinds = state.tree_kinds(TreeView::Discretized);
    for (std::size_t pos = 0; pos < kFeatureCount; ++pos) {
        CHECK(kinds[pos].nominal);
        const auto row = state.tree_row(train.front(), TreeView::Discretized);
        CHECK(row[pos] < kinds[pos].code_count);
    }
}

TEST_CASE("state round-trips through its text format") {
    const auto taxonomy = nids::testing::bundled_taxonomy();
    const auto train = nids::testing::synthetic_corpus({.records = 400, .seed = 13});
    for (const auto& options : {PreprocessOptions{}, PreprocessOptions{.top_k = 7, .bin_count = 6}}) {
        const auto state = fit_preprocess(train, options, taxonomy);
        std::stringstream text;
        state.write(text);
        const auto back = PreprocessState::read(text);
        CHECK(back == state);
        std::stringstream again;
        back.write(again);
        std::stringstream first;
        state.write(first);
        CHECK(again.str() == first.str());
    }
    std::istringstream garbage("nids-preprocess 2\n");
    CHECK_THROWS_AS(PreprocessState::read(garbage), Error);
}

} // TEST_SUITE
