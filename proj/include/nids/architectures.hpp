#ifndef NIDS_ARCHITECTURES_HPP
#define NIDS_ARCHITECTURES_HPP

#include "nids/dataset.hpp"
#include "nids/preprocess.hpp"
#include "nids/tree.hpp"

#include <array>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace nids {

enum class Architecture { Phase, Level };

std::string_view to_string(Architecture architecture);

inline constexpr std::string_view kNormalClass = "normal";
inline constexpr std::string_view kAttackClass = "attack";
/// Attack type reported when phase 2 picks a category with no phase 3 module.
inline constexpr std::string_view kUnspecifiedType = "unspecified";

/// CHAID reads discretized continuous features, the other learners read them as reals.
TreeView view_for(Learner learner);

struct StageOutput {
    std::string label;
    double confidence = 0.0;

    bool operator==(const StageOutput&) const = default;
};

struct PhaseVerdict {
    bool is_attack = false;
    std::optional<Category> category;
    std::optional<std::string> attack_type;
    /// One entry per phase that ran, in order.
    std::vector<StageOutput> stage_trail;

    bool operator==(const PhaseVerdict&) const = default;
};

struct LevelVerdict {
    StageOutput level1;
    StageOutput level2;
    StageOutput level3;

    bool is_attack() const { return level1.label == kAttackClass; }

    bool operator==(const LevelVerdict&) const = default;
};

/// Wall-clock seconds per stage; not part of model equality or serialization.
using StageTimes = std::array<double, 3>;

/// Binary -> category -> attack type cascade. Phase 2 learns from attack
/// records only and each phase 3 module from its own category's records.
class PhaseModel {
public:
    /// Throws nids::Error unless train holds both normal and attack records.
    static PhaseModel train(std::span<const ConnectionRecord> train, const LabelTaxonomy& taxonomy, Learner learner,
                            const TreeParams& params, const PreprocessState& preprocess);
    static PhaseModel train(std::span<const ConnectionRecord> train, const LabelTaxonomy& taxonomy, Learner learner,
                            const TreeParams& params, const PreprocessOptions& options = {});

    PhaseVerdict classify(const ConnectionRecord& record) const;
    std::vector<PhaseVerdict> classify(std::span<const ConnectionRecord> records) const;

    Learner learner() const noexcept { return learner_; }
    const PreprocessState& preprocess() const noexcept { return preprocess_; }
    const TreeModel& phase1() const { return trees_.at(0); }
    const TreeModel& phase2() const { return trees_.at(1); }
    const std::map<Category, TreeModel>& phase3() const noexcept { return phase3_; }
    const StageTimes& stage_seconds() const noexcept { return times_; }
    std::size_t tree_count() const noexcept { return trees_.size() + phase3_.size(); }

    /// Writes manifest.txt, preprocess.txt and one file per tree into dir.
    void save(const std::filesystem::path& dir) const;
    static PhaseModel load(const std::filesystem::path& dir);

    bool operator==(const PhaseModel& other) const;

private:
    PhaseModel(Learner learner, PreprocessState preprocess, std::vector<TreeModel> trees,
               std::map<Category, TreeModel> phase3, StageTimes times);

    Learner learner_;
    PreprocessState preprocess_;
    std::vector<TreeModel> trees_;
    std::map<Category, TreeModel> phase3_;
    StageTimes times_{};
};

/// Three independent trees over the full training set: normal/attack,
/// normal plus the four categories, normal plus every attack type.
class LevelModel {
public:
    /// Throws nids::Error unless train holds both normal and attack records.
    static LevelModel train(std::span<const ConnectionRecord> train, const LabelTaxonomy& taxonomy, Learner learner,
                            const TreeParams& params, const PreprocessState& preprocess);
    static LevelModel train(std::span<const ConnectionRecord> train, const LabelTaxonomy& taxonomy, Learner learner,
                            const TreeParams& params, const PreprocessOptions& options = {});

    LevelVerdict classify(const ConnectionRecord& record) const;
    std::vector<LevelVerdict> classify(std::span<const ConnectionRecord> records) const;
    /// Output of one level (1, 2 or 3) alone.
    StageOutput classify_level(const ConnectionRecord& record, int level) const;

    Learner learner() const noexcept { return learner_; }
    const PreprocessState& preprocess() const noexcept { return preprocess_; }
    const TreeModel& level(int index) const { return trees_.at(static_cast<std::size_t>(index - 1)); }
    const StageTimes& stage_seconds() const noexcept { return times_; }
    std::size_t tree_count() const noexcept { return trees_.size(); }

    void save(const std::filesystem::path& dir) const;
    static LevelModel load(const std::filesystem::path& dir);

    bool operator==(const LevelModel& other) const;

private:
    LevelModel(Learner learner, PreprocessState preprocess, std::vector<TreeModel> trees, StageTimes times);

    Learner learner_;
    PreprocessState preprocess_;
    std::vector<TreeModel> trees_;
    StageTimes times_{};
};

inline PhaseModel train_phase_model(std::span<const ConnectionRecord> train, const LabelTaxonomy& taxonomy,
                                    Learner learner, const TreeParams& params, const PreprocessOptions& options = {}) {
    return PhaseModel::train(train, taxonomy, learner, params, options);
}

inline LevelModel train_level_model(std::span<const ConnectionRecord> train, const LabelTaxonomy& taxonomy,
                                    Learner learner, const TreeParams& params, const PreprocessOptions& options = {}) {
    return LevelModel::train(train, taxonomy, learner, params, options);
}

} // namespace nids

#endif // NIDS_ARCHITECTURES_HPP
