#include "nids/dataset.hpp"

#include "nids/error.hpp"
#include "nids/kv_config.hpp"
#include "nids/rng.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>

namespace nids {

namespace {

constexpr std::array<std::string_view, kFeatureCount> kFeatureNames = {
    "duration", "protocol_type", "service", "flag", "src_bytes", "dst_bytes", "land",
    "wrong_fragment", "urgent", "hot", "num_failed_logins", "logged_in", "num_compromised",
    "root_shell", "su_attempted", "num_root", "num_file_creations", "num_shells",
    "num_access_files", "num_outbound_cmds", "is_host_login", "is_guest_login", "count",
    "srv_count", "serror_rate", "srv_serror_rate", "rerror_rate", "srv_rerror_rate",
    "same_srv_rate", "diff_srv_rate", "srv_diff_host_rate", "dst_host_count",
    "dst_host_srv_count", "dst_host_same_srv_rate", "dst_host_diff_srv_rate",
    "dst_host_same_src_port_rate", "dst_host_srv_diff_host_rate", "dst_host_serror_rate",
    "dst_host_srv_serror_rate", "dst_host_rerror_rate", "dst_host_srv_rerror_rate",
};

std::string_view trim_view(std::string_view text) {
    while (!text.empty() && (text.front() == ' ' || text.front() == '\t' || text.front() == '\r')) {
        text.remove_prefix(1);
    }
    while (!text.empty() && (text.back() == ' ' || text.back() == '\t' || text.back() == '\r')) {
        text.remove_suffix(1);
    }
    return text;
}

std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        if (comma == std::string_view::npos) {
            fields.push_back(trim_view(line.substr(start)));
            break;
        }
        fields.push_back(trim_view(line.substr(start, comma - start)));
        start = comma + 1;
    }
    return fields;
}

double parse_number(std::string_view field, std::size_t line_no, std::size_t position) {
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
    if (field.empty() || ec != std::errc{} || ptr != field.data() + field.size() || !std::isfinite(value)) {
        throw ParseError(line_no, "feature " + std::to_string(position + 1) + " (" +
                                      std::string(kFeatureNames[position]) + "): cannot parse '" +
                                      std::string(field) + "' as a number");
    }
    return value;
}

std::string lower(std::string_view text) {
    std::string out(text);
    std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

std::string format_number(double value) {
    char buffer[64];
    const auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof buffer, value);
    return std::string(buffer, ptr);
}

} // namespace

const std::array<std::string_view, kFeatureCount>& feature_names() {
    return kFeatureNames;
}

std::vector<ConnectionRecord> load_records(std::istream& source) {
    std::vector<ConnectionRecord> records;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(source, line)) {
        ++line_no;
        if (trim_view(line).empty()) {
            continue;
        }
        const auto fields = split_fields(line);
        if (fields.size() != kFeatureCount + 1 && fields.size() != kFeatureCount + 2) {
            throw ParseError(line_no, "expected 42 or 43 fields, found " + std::to_string(fields.size()));
        }
        ConnectionRecord record;
        for (std::size_t i = 0; i < kFeatureCount; ++i) {
            if (is_categorical(i)) {
                if (fields[i].empty()) {
                    throw ParseError(line_no, "empty categorical field " + std::string(kFeatureNames[i]));
                }
                record.tokens[categorical_slot(i)] = std::string(fields[i]);
            } else {
                record.numeric[i] = parse_number(fields[i], line_no, i);
            }
        }
        record.label = std::string(fields[kFeatureCount]);
        if (record.label.empty()) {
            throw ParseError(line_no, "empty label");
        }
        if (fields.size() == kFeatureCount + 2) {
            int difficulty = 0;
            const auto field = fields[kFeatureCount + 1];
            const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), difficulty);
            if (ec != std::errc{} || ptr != field.data() + field.size()) {
                throw ParseError(line_no, "cannot parse difficulty '" + std::string(field) + "'");
            }
            record.difficulty = difficulty;
        }
        records.push_back(std::move(record));
    }
    if (records.empty()) {
        throw ParseError(0, "input holds no records");
    }
    return records;
}

std::vector<ConnectionRecord> load_records(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw Error("cannot open " + path.string());
    }
    try {
        return load_records(in);
    } catch (const ParseError& e) {
        throw ParseError(e.line(), path.string() + ": " + e.what());
    }
}

std::string format_record(const ConnectionRecord& record) {
    std::string line;
    for (std::size_t i = 0; i < kFeatureCount; ++i) {
        line += is_categorical(i) ? record.token(i) : format_number(record.numeric[i]);
        line += ',';
    }
    line += record.label;
    if (record.difficulty) {
        line += ',' + std::to_string(*record.difficulty);
    }
    return line;
}

void write_records(std::ostream& out, std::span<const ConnectionRecord> records) {
    for (const auto& record : records) {
        out << format_record(record) << '\n';
    }
}

std::string_view to_string(Category category) {
    switch (category) {
    case Category::DoS: return "DoS";
    case Category::Probe: return "Probe";
    case Category::R2L: return "R2L";
    case Category::U2R: return "U2R";
    }
    return "?";
}

std::optional<Category> parse_category(std::string_view text) {
    const auto key = lower(trim_view(text));
    for (auto category : kCategories) {
        if (key == lower(to_string(category))) {
            return category;
        }
    }
    return std::nullopt;
}

LabelTaxonomy::LabelTaxonomy() {
    normals_.insert("normal");
}

LabelTaxonomy LabelTaxonomy::parse(std::istream& in) {
    LabelTaxonomy taxonomy;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto text = trim_view(line);
        if (text.empty() || text.front() == '#') {
            continue;
        }
        const auto fields = split_fields(text);
        if (fields.size() != 2 || fields[0].empty()) {
            throw ParseError(line_no, "expected 'attack_type,category'");
        }
        if (lower(fields[1]) == "normal") {
            taxonomy.add_normal(std::string(fields[0]));
        } else if (auto category = parse_category(fields[1])) {
            taxonomy.add_attack(std::string(fields[0]), *category);
        } else {
            throw ParseError(line_no, "unknown category '" + std::string(fields[1]) + "'");
        }
    }
    return taxonomy;
}

LabelTaxonomy LabelTaxonomy::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw Error("cannot open taxonomy " + path.string());
    }
    return parse(in);
}

void LabelTaxonomy::add_attack(std::string attack_type, Category category) {
    if (normals_.contains(attack_type)) {
        throw ConfigError("label '" + attack_type + "' is already a normal label");
    }
    if (auto it = attacks_.find(attack_type); it != attacks_.end() && it->second != category) {
        throw ConfigError("attack type '" + attack_type + "' mapped to two categories");
    }
    attacks_[std::move(attack_type)] = category;
}

void LabelTaxonomy::add_normal(std::string label) {
    if (attacks_.contains(label)) {
        throw ConfigError("label '" + label + "' is already an attack type");
    }
    normals_.insert(std::move(label));
}

bool LabelTaxonomy::contains(std::string_view label) const {
    return normals_.contains(label) || attacks_.contains(label);
}

bool LabelTaxonomy::is_normal(std::string_view label) const {
    return normals_.contains(label);
}

ClassLabel LabelTaxonomy::categorize(std::string_view label) const {
    if (normals_.contains(label)) {
        return ClassLabel::normal();
    }
    if (auto it = attacks_.find(label); it != attacks_.end()) {
        return ClassLabel::attack(it->second, it->first);
    }
    throw UnknownLabelError(std::string(label));
}

void LabelTaxonomy::validate(std::span<const ConnectionRecord> records) const {
    for (const auto& record : records) {
        if (!contains(record.label)) {
            throw UnknownLabelError(record.label);
        }
    }
}

ClassLabel categorize(std::string_view label, const LabelTaxonomy& taxonomy) {
    return taxonomy.categorize(label);
}

std::string_view to_string(SplitTechnique technique) {
    return technique == SplitTechnique::NewAttack ? "new-attack" : "partition";
}

SplitTechnique parse_technique(std::string_view text) {
    const auto key = lower(trim_view(text));
    if (key == "new-attack" || key == "new_attack" || key == "newattack") {
        return SplitTechnique::NewAttack;
    }
    if (key == "partition") {
        return SplitTechnique::Partition;
    }
    throw ConfigError("unknown technique '" + std::string(text) + "' (expected new-attack or partition)");
}

SplitSpec SplitSpec::from_config(const KeyValueConfig& config) {
    SplitSpec spec;
    if (auto technique = config.get("technique")) {
        spec.technique = parse_technique(*technique);
    }
    spec.train_fraction = config.get_double("train_fraction", spec.train_fraction);
    const auto seed = config.get_int("seed", static_cast<long long>(spec.seed));
    if (seed < 0) {
        throw ConfigError("seed must be non-negative");
    }
    spec.seed = static_cast<std::uint64_t>(seed);
    spec.unknown_attack_types = config.get_list("unknown_attack_types");
    auto count = [&](const char* key) -> std::optional<std::size_t> {
        if (!config.has(key)) {
            return std::nullopt;
        }
        const auto value = config.get_int(key, 0);
        if (value < 0) {
            throw ConfigError(std::string("config key '") + key + "' must be non-negative");
        }
        return static_cast<std::size_t>(value);
    };
    spec.targets.train_normal = count("train_normal");
    spec.targets.train_attack = count("train_attack");
    spec.targets.test_normal = count("test_normal");
    spec.targets.test_known_attack = count("test_known");
    return spec;
}

PartitionSplit split_partition(std::span<const ConnectionRecord> records, const SplitSpec& spec) {
    if (spec.technique != SplitTechnique::Partition) {
        throw ConfigError("split_partition requires the partition technique");
    }
    if (!(spec.train_fraction > 0.0 && spec.train_fraction < 1.0)) {
        throw ConfigError("train_fraction must lie in (0, 1), got " + std::to_string(spec.train_fraction));
    }
    const auto n = records.size();
    const auto train_size = static_cast<std::size_t>(std::llround(spec.train_fraction * static_cast<double>(n)));
    auto order = seeded_permutation(n, spec.seed);
    std::vector<std::size_t> train_rows(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(train_size));
    std::vector<std::size_t> test_rows(order.begin() + static_cast<std::ptrdiff_t>(train_size), order.end());
    std::sort(train_rows.begin(), train_rows.end());
    std::sort(test_rows.begin(), test_rows.end());

    PartitionSplit split;
    split.train.reserve(train_rows.size());
    split.test.reserve(test_rows.size());
    for (auto row : train_rows) {
        split.train.push_back(records[row]);
    }
    for (auto row : test_rows) {
        split.test.push_back(records[row]);
    }
    return split;
}

namespace {

struct Allocation {
    std::vector<std::size_t> train;
    std::vector<std::size_t> test;
    std::size_t unused = 0;
};

Allocation allocate(std::vector<std::size_t> rows, std::mt19937_64& engine, const SplitSpec& spec,
                    std::optional<std::size_t> train_target, std::optional<std::size_t> test_target) {
    portable_shuffle(rows, engine);
    const auto n = rows.size();
    std::size_t train_count = 0;
    std::size_t test_count = 0;
    if (spec.targets.any()) {
        const auto test_cap = std::min(test_target.value_or(n), n);
        train_count = std::min(train_target.value_or(n - test_cap), n);
        test_count = std::min(test_target.value_or(n - train_count), n - train_count);
    } else {
        train_count = static_cast<std::size_t>(std::llround(spec.train_fraction * static_cast<double>(n)));
        test_count = n - train_count;
    }
    Allocation out;
    out.train.assign(rows.begin(), rows.begin() + static_cast<std::ptrdiff_t>(train_count));
    out.test.assign(rows.begin() + static_cast<std::ptrdiff_t>(train_count),
                    rows.begin() + static_cast<std::ptrdiff_t>(train_count + test_count));
    out.unused = n - train_count - test_count;
    return out;
}

} // namespace

NewAttackSplit split_new_attack(std::span<const ConnectionRecord> records, const SplitSpec& spec,
                                const LabelTaxonomy& taxonomy) {
    if (spec.technique != SplitTechnique::NewAttack) {
        throw ConfigError("split_new_attack requires the new-attack technique");
    }
    if (spec.unknown_attack_types.empty()) {
        throw ConfigError("new-attack split needs at least one unknown attack type");
    }
    if (!spec.targets.any() && !(spec.train_fraction > 0.0 && spec.train_fraction < 1.0)) {
        throw ConfigError("train_fraction must lie in (0, 1)");
    }
    const std::set<std::string, std::less<>> unknown(spec.unknown_attack_types.begin(), spec.unknown_attack_types.end());

    std::set<std::string, std::less<>> present_types;
    std::vector<std::size_t> normal_rows;
    std::vector<std::size_t> known_rows;
    std::vector<std::size_t> unknown_rows;
    for (std::size_t i = 0; i < records.size(); ++i) {
        const auto label = taxonomy.categorize(records[i].label);
        if (!label.is_attack()) {
            normal_rows.push_back(i);
            continue;
        }
        present_types.insert(label.attack_type());
        (unknown.contains(label.attack_type()) ? unknown_rows : known_rows).push_back(i);
    }
    for (const auto& type : unknown) {
        if (!present_types.contains(type)) {
            throw ConfigError("unknown attack type '" + type + "' does not occur in the corpus");
        }
    }
    if (known_rows.empty()) {
        throw ConfigError("unknown attack types cover every attack type in the corpus");
    }

    std::mt19937_64 engine(spec.seed);
    auto normals = allocate(std::move(normal_rows), engine, spec, spec.targets.train_normal, spec.targets.test_normal);
    auto attacks = allocate(std::move(known_rows), engine, spec, spec.targets.train_attack, spec.targets.test_known_attack);

    auto gather = [&](std::vector<std::size_t> rows) {
        std::sort(rows.begin(), rows.end());
        std::vector<ConnectionRecord> out;
        out.reserve(rows.size());
        for (auto row : rows) {
            out.push_back(records[row]);
        }
        return out;
    };

    NewAttackSplit split;
    auto train_rows = std::move(normals.train);
    train_rows.insert(train_rows.end(), attacks.train.begin(), attacks.train.end());
    auto test_rows = std::move(normals.test);
    test_rows.insert(test_rows.end(), attacks.test.begin(), attacks.test.end());
    split.train = gather(std::move(train_rows));
    split.test_known = gather(std::move(test_rows));
    split.test_unknown = gather(std::move(unknown_rows));
    split.unused = normals.unused + attacks.unused;
    return split;
}

} // namespace nids
