#ifndef NIDS_DATASET_HPP
#define NIDS_DATASET_HPP

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace nids {

class KeyValueConfig;

inline constexpr std::size_t kFeatureCount = 41;
inline constexpr std::size_t kCategoricalCount = 3;

/// 0-based positions of protocol_type, service and flag.
inline constexpr std::array<std::size_t, kCategoricalCount> kCategoricalPositions = {1, 2, 3};

constexpr bool is_categorical(std::size_t position) {
    return position >= 1 && position <= 3;
}

/// Index into ConnectionRecord::tokens for a categorical position.
constexpr std::size_t categorical_slot(std::size_t position) {
    return position - 1;
}

const std::array<std::string_view, kFeatureCount>& feature_names();

/// One NSL-KDD connection: 41 features, a label and the optional difficulty column.
/// Numeric features live in `numeric`; the three categorical features are kept as
/// tokens and their `numeric` slots stay 0.
struct ConnectionRecord {
    std::array<double, kFeatureCount> numeric{};
    std::array<std::string, kCategoricalCount> tokens;
    std::string label;
    std::optional<int> difficulty;

    const std::string& token(std::size_t position) const { return tokens.at(categorical_slot(position)); }

    bool operator==(const ConnectionRecord&) const = default;
};

/// Parses comma separated NSL-KDD text (42 or 43 fields per line, no header).
/// Blank lines are skipped. Throws ParseError naming the line on arity or number
/// errors, and for input holding no records at all.
std::vector<ConnectionRecord> load_records(std::istream& source);
std::vector<ConnectionRecord> load_records(const std::filesystem::path& path);

std::string format_record(const ConnectionRecord& record);
void write_records(std::ostream& out, std::span<const ConnectionRecord> records);

enum class Category { DoS, Probe, R2L, U2R };

inline constexpr std::array<Category, 4> kCategories = {Category::DoS, Category::Probe, Category::R2L, Category::U2R};

std::string_view to_string(Category category);
std::optional<Category> parse_category(std::string_view text);

/// Normal, or an attack with its category and type name.
class ClassLabel {
public:
    static ClassLabel normal() { return ClassLabel{}; }
    static ClassLabel attack(Category category, std::string attack_type) {
        ClassLabel label;
        label.category_ = category;
        label.attack_type_ = std::move(attack_type);
        return label;
    }

    bool is_attack() const noexcept { return category_.has_value(); }
    std::optional<Category> category() const noexcept { return category_; }
    const std::string& attack_type() const noexcept { return attack_type_; }

    bool operator==(const ClassLabel&) const = default;

private:
    ClassLabel() = default;

    std::optional<Category> category_;
    std::string attack_type_;
};

/// Attack-type name to category map plus the set of labels meaning "normal".
/// Loaded from a two column `attack_type,category` table; rows whose category is
/// `normal` add normal labels. "normal" is always a normal label.
class LabelTaxonomy {
public:
    LabelTaxonomy();

    static LabelTaxonomy parse(std::istream& in);
    static LabelTaxonomy load(const std::filesystem::path& path);

    void add_attack(std::string attack_type, Category category);
    void add_normal(std::string label);

    bool contains(std::string_view label) const;
    bool is_normal(std::string_view label) const;

    /// Throws UnknownLabelError for names absent from the table.
    ClassLabel categorize(std::string_view label) const;

    /// Throws UnknownLabelError for the first record whose label is not covered.
    void validate(std::span<const ConnectionRecord> records) const;

    const std::map<std::string, Category, std::less<>>& attacks() const noexcept { return attacks_; }

private:
    std::map<std::string, Category, std::less<>> attacks_;
    std::set<std::string, std::less<>> normals_;
};

ClassLabel categorize(std::string_view label, const LabelTaxonomy& taxonomy);

enum class SplitTechnique { NewAttack, Partition };

std::string_view to_string(SplitTechnique technique);
SplitTechnique parse_technique(std::string_view text);

/// Optional record-count targets for the new-attack split. When any is set the
/// split takes up to that many records of the kind and leaves the rest unused.
struct NewAttackTargets {
    std::optional<std::size_t> train_normal;
    std::optional<std::size_t> train_attack;
    std::optional<std::size_t> test_normal;
    std::optional<std::size_t> test_known_attack;

    bool any() const { return train_normal || train_attack || test_normal || test_known_attack; }
};

struct SplitSpec {
    SplitTechnique technique = SplitTechnique::Partition;
    double train_fraction = 0.0982;
    std::vector<std::string> unknown_attack_types;
    std::uint64_t seed = 1;
    NewAttackTargets targets;

    /// Reads technique, train_fraction, seed, unknown_attack_types and the
    /// train_normal/train_attack/test_normal/test_known targets.
    static SplitSpec from_config(const KeyValueConfig& config);
};

struct PartitionSplit {
    std::vector<ConnectionRecord> train;
    std::vector<ConnectionRecord> test;
};

struct NewAttackSplit {
    std::vector<ConnectionRecord> train;
    /// Held-back normals and attacks of types present in training.
    std::vector<ConnectionRecord> test_known;
    std::vector<ConnectionRecord> test_unknown;
    /// Records left out because count targets were reached.
    std::size_t unused = 0;
};

PartitionSplit split_partition(std::span<const ConnectionRecord> records, const SplitSpec& spec);

NewAttackSplit split_new_attack(std::span<const ConnectionRecord> records, const SplitSpec& spec,
                                const LabelTaxonomy& taxonomy);

} // namespace nids

#endif // NIDS_DATASET_HPP
