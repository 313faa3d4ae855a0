#include "nids/preprocess.hpp"

#include "grow.hpp"
#include "nids/error.hpp"
#include "nids/stats.hpp"
#include "text_io.hpp"

#include <algorithm>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>

namespace nids {

namespace {

const std::string kContext = "preprocess";

double best_threshold_gain(const LabeledMatrix& data, std::span<const std::size_t> rows, std::size_t feature,
                           std::span<const std::int64_t> counts, double parent) {
    const double n = static_cast<double>(rows.size());
    double best = 0.0;
    detail::scan_thresholds(data, rows, feature, counts, [&](double, auto left, auto right) {
        const auto n_left = static_cast<double>(stats::total(left));
        const double h_left = n_left > 0 ? stats::entropy(left) : 0.0;
        const double h_right = n - n_left > 0 ? stats::entropy(right) : 0.0;
        best = std::max(best, parent - n_left / n * h_left - (n - n_left) / n * h_right);
    });
    return best;
}

double nominal_gain(const LabeledMatrix& data, std::span<const std::size_t> rows, std::size_t feature,
                    double parent) {
    const double n = static_cast<double>(rows.size());
    double remainder = 0.0;
    for (const auto& row : detail::code_class_table(data, rows, feature)) {
        const auto size = stats::total(row);
        if (size > 0) {
            remainder += static_cast<double>(size) / n * stats::entropy(row);
        }
    }
    return std::max(0.0, parent - remainder);
}

} // namespace

EncodingTable EncodingTable::fit(std::span<const ConnectionRecord> records) {
    EncodingTable table;
    for (const auto& record : records) {
        for (std::size_t slot = 0; slot < kCategoricalCount; ++slot) {
            auto& seen = table.tokens_[slot];
            if (std::find(seen.begin(), seen.end(), record.tokens[slot]) == seen.end()) {
                seen.push_back(record.tokens[slot]);
            }
        }
    }
    return table;
}

int EncodingTable::code(std::size_t slot, std::string_view token) const {
    const auto& seen = tokens_.at(slot);
    const auto it = std::find(seen.begin(), seen.end(), token);
    return static_cast<int>(it - seen.begin());
}

double FeatureRange::scale(double x) const {
    if (!(max > min)) {
        return 0.0;
    }
    return std::clamp((x - min) / (max - min), 0.0, 1.0);
}

std::size_t DiscretizationBins::bin(double value) const {
    return static_cast<std::size_t>(std::lower_bound(cuts.begin(), cuts.end(), value) - cuts.begin());
}

DiscretizationBins fit_bins(std::span<const double> values, std::size_t bin_count) {
    if (bin_count == 0) {
        throw ConfigError("bin count must be at least 1");
    }
    std::vector<double> sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end());
    DiscretizationBins bins;
    const std::size_t n = sorted.size();
    for (std::size_t i = 1; i < bin_count; ++i) {
        std::size_t p = i * n / bin_count;
        if (p == 0) {
            continue;
        }
        while (p < n && !(sorted[p - 1] < sorted[p])) {
            ++p;
        }
        if (p >= n) {
            break;
        }
        const double cut = sorted[p - 1] + (sorted[p] - sorted[p - 1]) / 2.0;
        if (bins.cuts.empty() || bins.cuts.back() < cut) {
            bins.cuts.push_back(cut);
        }
    }
    return bins;
}

std::size_t apply_bins(const DiscretizationBins& bins, double value) {
    return bins.bin(value);
}

std::vector<double> rank_features(const LabeledMatrix& data) {
    std::vector<double> scores(data.cols(), 0.0);
    if (data.rows() == 0) {
        return scores;
    }
    std::vector<std::size_t> rows(data.rows());
    std::iota(rows.begin(), rows.end(), std::size_t{0});
    const auto counts = data.class_counts();
    const double parent = stats::entropy(counts);
    if (parent == 0.0) {
        return scores;
    }
    for (std::size_t f = 0; f < data.cols(); ++f) {
        const double gain = data.kinds()[f].nominal ? nominal_gain(data, rows, f, parent)
                                                    : best_threshold_gain(data, rows, f, counts, parent);
        scores[f] = std::clamp(gain, 0.0, parent);
    }
    return scores;
}

std::vector<std::size_t> ranking_order(std::span<const double> scores) {
    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
    return order;
}

double PreprocessState::encoded(const ConnectionRecord& record, std::size_t position) const {
    if (is_categorical(position)) {
        const auto slot = categorical_slot(position);
        return static_cast<double>(encoding_.code(slot, record.tokens[slot]));
    }
    return record.numeric[position];
}

PreprocessState PreprocessState::fit(std::span<const ConnectionRecord> train, const PreprocessOptions& options,
                                     const LabelTaxonomy& taxonomy) {
    if (train.empty()) {
        throw Error("cannot fit preprocessing on an empty training set");
    }
    PreprocessState state;
    state.encoding_ = EncodingTable::fit(train);

    for (std::size_t pos = 0; pos < kFeatureCount; ++pos) {
        auto& range = state.normalizer_.ranges[pos];
        range.min = std::numeric_limits<double>::infinity();
        range.max = -std::numeric_limits<double>::infinity();
        for (const auto& record : train) {
            const double x = state.encoded(record, pos);
            range.min = std::min(range.min, x);
            range.max = std::max(range.max, x);
        }
    }

    for (std::size_t pos = 0; pos < kFeatureCount; ++pos) {
        if (is_categorical(pos)) {
            continue;
        }
        std::vector<double> values;
        values.reserve(train.size());
        for (const auto& record : train) {
            values.push_back(record.numeric[pos]);
        }
        state.bins_[pos] = fit_bins(values, options.bin_count);
    }

    state.mask_.indices.resize(kFeatureCount);
    std::iota(state.mask_.indices.begin(), state.mask_.indices.end(), std::size_t{0});
    if (options.top_k) {
        const auto k = *options.top_k;
        if (k == 0 || k > kFeatureCount) {
            throw ConfigError("top_k must be between 1 and " + std::to_string(kFeatureCount));
        }
        std::vector<FeatureKind> kinds;
        for (std::size_t pos = 0; pos < kFeatureCount; ++pos) {
            kinds.push_back(is_categorical(pos)
                                ? FeatureKind::categorical(state.encoding_.code_count(categorical_slot(pos)))
                                : FeatureKind::continuous());
        }
        LabeledMatrix matrix(kinds, {"normal", "attack"});
        std::vector<double> row(kFeatureCount);
        for (const auto& record : train) {
            for (std::size_t pos = 0; pos < kFeatureCount; ++pos) {
                row[pos] = is_categorical(pos) ? state.encoded(record, pos)
                                               : state.normalizer_.ranges[pos].scale(record.numeric[pos]);
            }
            matrix.add_row(row, taxonomy.is_normal(record.label) ? 0 : 1);
        }
        state.mask_.scores = rank_features(matrix);
        auto order = ranking_order(state.mask_.scores);
        order.resize(k);
        std::sort(order.begin(), order.end());
        state.mask_.indices = std::move(order);
    }
    return state;
}

std::vector<double> PreprocessState::transform(const ConnectionRecord& record) const {
    std::vector<double> out;
    out.reserve(mask_.indices.size());
    for (auto pos : mask_.indices) {
        out.push_back(normalizer_.ranges[pos].scale(encoded(record, pos)));
    }
    return out;
}

std::vector<double> PreprocessState::tree_row(const ConnectionRecord& record, TreeView view) const {
    std::vector<double> out;
    out.reserve(mask_.indices.size());
    for (auto pos : mask_.indices) {
        if (is_categorical(pos)) {
            out.push_back(encoded(record, pos));
        } else if (view == TreeView::Discretized) {
            out.push_back(static_cast<double>(bins_[pos].bin(record.numeric[pos])));
        } else {
            out.push_back(normalizer_.ranges[pos].scale(record.numeric[pos]));
        }
    }
    return out;
}

std::vector<FeatureKind> PreprocessState::tree_kinds(TreeView view) const {
    std::vector<FeatureKind> kinds;
    for (auto pos : mask_.indices) {
        if (is_categorical(pos)) {
            kinds.push_back(FeatureKind::categorical(encoding_.code_count(categorical_slot(pos))));
        } else if (view == TreeView::Discretized) {
            kinds.push_back(FeatureKind::categorical(static_cast<int>(bins_[pos].bin_count())));
        } else {
            kinds.push_back(FeatureKind::continuous());
        }
    }
    return kinds;
}

std::vector<std::string> PreprocessState::retained_names() const {
    std::vector<std::string> names;
    for (auto pos : mask_.indices) {
        names.emplace_back(feature_names()[pos]);
    }
    return names;
}

void PreprocessState::write(std::ostream& out) const {
    using detail::format_double;
    out << "nids-preprocess 1\n";
    out << "encoding " << kCategoricalCount << '\n';
    for (std::size_t slot = 0; slot < kCategoricalCount; ++slot) {
        out << "feature " << kCategoricalPositions[slot] << ' ' << encoding_.tokens_[slot].size() << '\n';
        for (const auto& token : encoding_.tokens_[slot]) {
            if (token.find_first_of(" \t\r\n") != std::string::npos || token.empty()) {
                throw Error("preprocess: token '" + token + "' cannot be serialized");
            }
            out << token << '\n';
        }
    }
    out << "ranges " << kFeatureCount << '\n';
    for (std::size_t pos = 0; pos < kFeatureCount; ++pos) {
        out << pos << ' ' << format_double(normalizer_.ranges[pos].min) << ' '
            << format_double(normalizer_.ranges[pos].max) << '\n';
    }
    out << "mask " << mask_.indices.size();
    for (auto index : mask_.indices) {
        out << ' ' << index;
    }
    out << "\nscores " << mask_.scores.size();
    for (double score : mask_.scores) {
        out << ' ' << format_double(score);
    }
    out << "\nbins " << kFeatureCount << '\n';
    for (std::size_t pos = 0; pos < kFeatureCount; ++pos) {
        out << pos << ' ' << bins_[pos].cuts.size();
        for (double cut : bins_[pos].cuts) {
            out << ' ' << format_double(cut);
        }
        out << '\n';
    }
    out << "end\n";
}

PreprocessState PreprocessState::read(std::istream& in) {
    using detail::expect_word;
    using detail::read_double;
    using detail::read_value;
    PreprocessState state;
    expect_word(in, kContext, "nids-preprocess");
    if (read_value<int>(in, kContext, "version") != 1) {
        throw ParseError(0, "preprocess: unsupported version");
    }
    expect_word(in, kContext, "encoding");
    if (read_value<std::size_t>(in, kContext, "feature count") != kCategoricalCount) {
        throw ParseError(0, "preprocess: wrong categorical feature count");
    }
    for (std::size_t slot = 0; slot < kCategoricalCount; ++slot) {
        expect_word(in, kContext, "feature");
        if (read_value<std::size_t>(in, kContext, "position") != kCategoricalPositions[slot]) {
            throw ParseError(0, "preprocess: categorical positions out of order");
        }
        const auto count = read_value<std::size_t>(in, kContext, "token count");
        for (std::size_t i = 0; i < count; ++i) {
            state.encoding_.tokens_[slot].push_back(read_value<std::string>(in, kContext, "token"));
        }
    }
    expect_word(in, kContext, "ranges");
    if (read_value<std::size_t>(in, kContext, "range count") != kFeatureCount) {
        throw ParseError(0, "preprocess: wrong range count");
    }
    for (std::size_t pos = 0; pos < kFeatureCount; ++pos) {
        if (read_value<std::size_t>(in, kContext, "position") != pos) {
            throw ParseError(0, "preprocess: ranges out of order");
        }
        state.normalizer_.ranges[pos].min = read_double(in, kContext, "min");
        state.normalizer_.ranges[pos].max = read_double(in, kContext, "max");
        if (state.normalizer_.ranges[pos].min > state.normalizer_.ranges[pos].max) {
            throw ParseError(0, "preprocess: min above max for feature " + std::to_string(pos));
        }
    }
    expect_word(in, kContext, "mask");
    const auto kept = read_value<std::size_t>(in, kContext, "mask size");
    for (std::size_t i = 0; i < kept; ++i) {
        const auto index = read_value<std::size_t>(in, kContext, "mask index");
        if (index >= kFeatureCount || (!state.mask_.indices.empty() && index <= state.mask_.indices.back())) {
            throw ParseError(0, "preprocess: mask indices must be ascending and in range");
        }
        state.mask_.indices.push_back(index);
    }
    if (state.mask_.indices.empty()) {
        throw ParseError(0, "preprocess: empty feature mask");
    }
    expect_word(in, kContext, "scores");
    const auto scored = read_value<std::size_t>(in, kContext, "score count");
    for (std::size_t i = 0; i < scored; ++i) {
        state.mask_.scores.push_back(read_double(in, kContext, "score"));
    }
    expect_word(in, kContext, "bins");
    if (read_value<std::size_t>(in, kContext, "bin feature count") != kFeatureCount) {
        throw ParseError(0, "preprocess: wrong bin feature count");
    }
    for (std::size_t pos = 0; pos < kFeatureCount; ++pos) {
        if (read_value<std::size_t>(in, kContext, "position") != pos) {
            throw ParseError(0, "preprocess: bins out of order");
        }
        const auto cuts = read_value<std::size_t>(in, kContext, "cut count");
        for (std::size_t i = 0; i < cuts; ++i) {
            const double cut = read_double(in, kContext, "cut");
            if (!state.bins_[pos].cuts.empty() && !(state.bins_[pos].cuts.back() < cut)) {
                throw ParseError(0, "preprocess: cuts must increase");
            }
            state.bins_[pos].cuts.push_back(cut);
        }
    }
    expect_word(in, kContext, "end");
    return state;
}

} // namespace nids
