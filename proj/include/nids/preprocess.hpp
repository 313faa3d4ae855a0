#ifndef NIDS_PREPROCESS_HPP
#define NIDS_PREPROCESS_HPP

#include "nids/dataset.hpp"
#include "nids/tree.hpp"

#include <array>
#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace nids {

/// Token -> code maps for the three categorical features, in first-appearance
/// order. The reserved code for unseen tokens is one past the last code.
class EncodingTable {
public:
    static EncodingTable fit(std::span<const ConnectionRecord> records);

    /// slot is 0, 1, 2 for protocol_type, service, flag.
    int code(std::size_t slot, std::string_view token) const;
    int reserved_code(std::size_t slot) const { return static_cast<int>(tokens_.at(slot).size()); }
    /// Trained codes plus the reserved one.
    int code_count(std::size_t slot) const { return reserved_code(slot) + 1; }
    const std::vector<std::string>& tokens(std::size_t slot) const { return tokens_.at(slot); }

    bool operator==(const EncodingTable&) const = default;

private:
    friend class PreprocessState;
    std::array<std::vector<std::string>, kCategoricalCount> tokens_;
};

struct FeatureRange {
    double min = 0.0;
    double max = 0.0;

    /// (x - min) / (max - min) clamped to [0, 1]; 0 for a constant feature.
    double scale(double x) const;

    bool operator==(const FeatureRange&) const = default;
};

struct Normalizer {
    std::array<FeatureRange, kFeatureCount> ranges{};

    bool operator==(const Normalizer&) const = default;
};

struct FeatureMask {
    /// Retained raw feature positions, ascending.
    std::vector<std::size_t> indices;
    /// Information gain per raw feature; empty when no ranking was run.
    std::vector<double> scores;

    bool operator==(const FeatureMask&) const = default;
};

struct DiscretizationBins {
    std::vector<double> cuts;

    std::size_t bin_count() const noexcept { return cuts.size() + 1; }
    /// Number of cuts strictly below value: values on a cut land in the lower bin.
    std::size_t bin(double value) const;

    bool operator==(const DiscretizationBins&) const = default;
};

/// Equal-frequency cuts. The i-th cut sits at the midpoint between sorted
/// positions floor(i n / k) - 1 and floor(i n / k); a boundary inside a run of
/// ties moves up to the next change of value, and duplicate cuts are dropped.
DiscretizationBins fit_bins(std::span<const double> values, std::size_t bin_count);
std::size_t apply_bins(const DiscretizationBins& bins, double value);

/// Information gain of each column against the labels. Nominal columns split
/// one way per code; continuous columns take their best threshold.
std::vector<double> rank_features(const LabeledMatrix& data);

/// Column indices ordered by descending score, ties by ascending index.
std::vector<std::size_t> ranking_order(std::span<const double> scores);

struct PreprocessOptions {
    /// Keep only the k highest-gain features against the normal/attack target.
    std::optional<std::size_t> top_k;
    std::size_t bin_count = 10;

    bool operator==(const PreprocessOptions&) const = default;
};

/// How categorical and continuous features reach a tree.
enum class TreeView {
    /// Codes stay nominal, continuous features are normalized reals.
    Continuous,
    /// Continuous features become nominal bin indices (for CHAID).
    Discretized,
};

class PreprocessState {
public:
    /// Throws nids::Error on an empty training set.
    static PreprocessState fit(std::span<const ConnectionRecord> train, const PreprocessOptions& options = {},
                               const LabelTaxonomy& taxonomy = LabelTaxonomy{});

    /// Codes for categorical features, then min-max scaling of every retained
    /// feature. Every component is in [0, 1].
    std::vector<double> transform(const ConnectionRecord& record) const;

    /// Input row for a tree. Categorical features carry their integer code so
    /// the reserved code stays distinct from trained codes.
    std::vector<double> tree_row(const ConnectionRecord& record, TreeView view) const;
    std::vector<FeatureKind> tree_kinds(TreeView view) const;

    const EncodingTable& encoding() const noexcept { return encoding_; }
    const Normalizer& normalizer() const noexcept { return normalizer_; }
    const FeatureMask& mask() const noexcept { return mask_; }
    /// Bins per raw feature position; empty for categorical positions.
    const std::array<DiscretizationBins, kFeatureCount>& bins() const noexcept { return bins_; }
    std::vector<std::string> retained_names() const;

    void write(std::ostream& out) const;
    static PreprocessState read(std::istream& in);

    bool operator==(const PreprocessState&) const = default;

private:
    double encoded(const ConnectionRecord& record, std::size_t position) const;

    EncodingTable encoding_;
    Normalizer normalizer_;
    FeatureMask mask_;
    std::array<DiscretizationBins, kFeatureCount> bins_{};
};

inline PreprocessState fit_preprocess(std::span<const ConnectionRecord> train, const PreprocessOptions& options = {},
                                      const LabelTaxonomy& taxonomy = LabelTaxonomy{}) {
    return PreprocessState::fit(train, options, taxonomy);
}

} // namespace nids

#endif // NIDS_PREPROCESS_HPP
