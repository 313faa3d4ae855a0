#ifndef NIDS_HARNESS_HPP
#define NIDS_HARNESS_HPP

#include "nids/architectures.hpp"
#include "nids/dataset.hpp"
#include "nids/eval.hpp"
#include "nids/kv_config.hpp"
#include "nids/preprocess.hpp"
#include "nids/tree.hpp"

#include <chrono>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace nids {

enum class ModelChoice { Phase, Level, Both };

std::string_view to_string(ModelChoice choice);
ModelChoice parse_model_choice(std::string_view text);

/// Every key of the flat config file maps to one field. Relative paths in a
/// config file resolve against the file's directory.
struct ExperimentConfig {
    std::vector<std::filesystem::path> corpus;
    std::filesystem::path taxonomy;
    SplitSpec split;
    ModelChoice model = ModelChoice::Both;
    std::vector<Learner> learners{kLearners[0], kLearners[1], kLearners[2], kLearners[3]};
    TreeParams params;
    PreprocessOptions preprocess;
    std::filesystem::path out = "nids-out";

    /// Keys: corpus, taxonomy, technique, train_fraction, unknown_attack_types,
    /// train_normal, train_attack, test_normal, test_known, seed, model,
    /// learners, min_node_size, max_depth, alpha, prune_cf, cc_holdout_fraction,
    /// bin_count, prune, top_k, out. Throws ConfigError on bad values.
    static ExperimentConfig from_config(const KeyValueConfig& config,
                                        const std::filesystem::path& base_dir = {});
    static ExperimentConfig load(const std::filesystem::path& path,
                                 const std::map<std::string, std::string>& overrides = {});

    /// Canonical key-value echo, suitable for from_config.
    KeyValueConfig to_config() const;

    /// Throws ConfigError when no learner is set or a path is missing.
    void validate() const;
};

struct Alert {
    std::size_t record_index = 0;
    Architecture architecture = Architecture::Phase;
    std::size_t stage = 0;
    std::string category;
    std::string attack_type;
    std::vector<double> confidences;
    std::string timestamp;
};

using TimestampSource = std::function<std::string()>;

/// Current UTC time as ISO 8601.
std::string utc_timestamp();

/// One tab-separated line per attack verdict, in record order:
/// index, model, stage, category, type, confidences, timestamp.
/// Throws nids::Error when the sink fails.
std::size_t emit_alerts(std::span<const PhaseVerdict> verdicts, std::ostream& sink,
                        const TimestampSource& now = utc_timestamp);
std::size_t emit_alerts(std::span<const LevelVerdict> verdicts, std::ostream& sink,
                        const TimestampSource& now = utc_timestamp);

std::vector<Alert> phase_alerts(std::span<const PhaseVerdict> verdicts, const TimestampSource& now = utc_timestamp);
std::vector<Alert> level_alerts(std::span<const LevelVerdict> verdicts, const TimestampSource& now = utc_timestamp);

/// Rates (percent) and training seconds of one trained architecture.
struct ModelSummary {
    std::string technique;
    Architecture architecture = Architecture::Phase;
    Learner learner = Learner::C5;
    std::int64_t test_count = 0;
    /// Keyed by stage then metric ("ccr", "dr", "far").
    std::map<std::string, std::map<std::string, std::optional<double>>> rates;
    double training_seconds = 0.0;
};

ModelSummary summarize(const EvalReport& report, const StageTimes& times);

struct ComparisonRow {
    std::string stage;
    std::string metric;
    std::optional<double> phase;
    std::optional<double> level;
    std::optional<double> delta;
};

struct Comparison {
    std::string technique;
    Learner learner = Learner::C5;
    std::vector<ComparisonRow> rows;
    /// Phase training time <= level training time.
    bool less_training_time = false;
    /// Phase end-to-end attack-type CCR >= level 3 CCR.
    bool higher_classification_rate = false;
    /// Phase stage 1 FAR <= level 1 FAR.
    bool lower_false_alarm_rate = false;
    /// Phase stage 1 DR >= level 1 DR.
    bool higher_detection_rate = false;
};

/// Throws nids::Error when the summaries come from different splits.
Comparison compare_models(const ModelSummary& phase, const ModelSummary& level);

void write_comparison(std::ostream& out, std::span<const Comparison> comparisons);

/// Reads the summaries back from a run directory (metrics.csv + manifest.txt).
std::vector<ModelSummary> load_summaries(const std::filesystem::path& run_dir);

struct RunResult {
    bool complete = false;
    std::string failed_stage;
    std::string error;
    std::vector<EvalReport> reports;
    std::vector<Comparison> comparisons;
};

/// Loads, splits, preprocesses, trains, classifies and reports. Writes
/// metrics.csv, report.csv, comparison.csv, manifest.txt, models/ and alerts/
/// under config.out. A failure names its stage and leaves the manifest
/// marked incomplete.
RunResult run_experiment(const ExperimentConfig& config, std::ostream* log = nullptr);

/// Records of every corpus file, in order.
std::vector<ConnectionRecord> load_corpus(std::span<const std::filesystem::path> paths);

struct ExperimentData {
    std::vector<ConnectionRecord> train;
    std::vector<ConnectionRecord> test;
    std::map<std::string, std::size_t> counts;
};

/// Split per config.split. NewAttack tests on held-back known records followed
/// by the unknown-type records.
ExperimentData split_corpus(std::span<const ConnectionRecord> corpus, const ExperimentConfig& config,
                            const LabelTaxonomy& taxonomy);

} // namespace nids

#endif // NIDS_HARNESS_HPP
