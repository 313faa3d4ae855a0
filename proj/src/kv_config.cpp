#include "nids/kv_config.hpp"

#include "nids/error.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>

namespace nids {

std::string trim(const std::string& text) {
    const auto first = text.find_first_not_of(" \t\r\n");
    if (first == std::string::npos) {
        return {};
    }
    const auto last = text.find_last_not_of(" \t\r\n");
    return text.substr(first, last - first + 1);
}

std::vector<std::string> split_list(const std::string& text, char delimiter) {
    std::vector<std::string> items;
    std::size_t start = 0;
    while (start <= text.size()) {
        auto end = text.find(delimiter, start);
        if (end == std::string::npos) {
            end = text.size();
        }
        auto item = trim(text.substr(start, end - start));
        if (!item.empty()) {
            items.push_back(std::move(item));
        }
        start = end + 1;
    }
    return items;
}

KeyValueConfig KeyValueConfig::parse(std::istream& in) {
    KeyValueConfig config;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto text = trim(line);
        if (text.empty() || text.front() == '#') {
            continue;
        }
        const auto eq = text.find('=');
        if (eq == std::string::npos) {
            throw ParseError(line_no, "expected 'key = value'");
        }
        auto key = trim(text.substr(0, eq));
        if (key.empty()) {
            throw ParseError(line_no, "empty key");
        }
        config.set(key, trim(text.substr(eq + 1)));
    }
    return config;
}

KeyValueConfig KeyValueConfig::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open config file " + path.string());
    }
    return parse(in);
}

void KeyValueConfig::set(const std::string& key, std::string value) {
    entries_[key] = std::move(value);
}

bool KeyValueConfig::has(const std::string& key) const {
    return entries_.contains(key);
}

std::optional<std::string> KeyValueConfig::get(const std::string& key) const {
    if (auto it = entries_.find(key); it != entries_.end()) {
        return it->second;
    }
    return std::nullopt;
}

std::string KeyValueConfig::get_or(const std::string& key, const std::string& fallback) const {
    return get(key).value_or(fallback);
}

double KeyValueConfig::get_double(const std::string& key, double fallback) const {
    const auto value = get(key);
    if (!value) {
        return fallback;
    }
    try {
        std::size_t used = 0;
        const double parsed = std::stod(*value, &used);
        if (used != value->size()) {
            throw ConfigError("");
        }
        return parsed;
    } catch (const std::exception&) {
        throw ConfigError("config key '" + key + "': expected a number, got '" + *value + "'");
    }
}

long long KeyValueConfig::get_int(const std::string& key, long long fallback) const {
    const auto value = get(key);
    if (!value) {
        return fallback;
    }
    long long parsed = 0;
    const auto* begin = value->data();
    const auto* end = begin + value->size();
    const auto [ptr, ec] = std::from_chars(begin, end, parsed);
    if (ec != std::errc{} || ptr != end) {
        throw ConfigError("config key '" + key + "': expected an integer, got '" + *value + "'");
    }
    return parsed;
}

std::vector<std::string> KeyValueConfig::get_list(const std::string& key) const {
    const auto value = get(key);
    return value ? split_list(*value) : std::vector<std::string>{};
}

void KeyValueConfig::write(std::ostream& out) const {
    for (const auto& [key, value] : entries_) {
        out << key << " = " << value << '\n';
    }
}

} // namespace nids
