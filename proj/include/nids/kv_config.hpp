#ifndef NIDS_KV_CONFIG_HPP
#define NIDS_KV_CONFIG_HPP

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace nids {

/// Flat `key = value` text configuration. Lines starting with '#' are comments,
/// list values are comma separated. Keys are stored sorted so write() is stable.
class KeyValueConfig {
public:
    static KeyValueConfig parse(std::istream& in);
    static KeyValueConfig load(const std::filesystem::path& path);

    void set(const std::string& key, std::string value);
    bool has(const std::string& key) const;
    std::optional<std::string> get(const std::string& key) const;

    std::string get_or(const std::string& key, const std::string& fallback) const;
    double get_double(const std::string& key, double fallback) const;
    long long get_int(const std::string& key, long long fallback) const;
    std::vector<std::string> get_list(const std::string& key) const;

    const std::map<std::string, std::string>& entries() const noexcept { return entries_; }

    void write(std::ostream& out) const;

private:
    std::map<std::string, std::string> entries_;
};

std::vector<std::string> split_list(const std::string& text, char delimiter = ',');
std::string trim(const std::string& text);

} // namespace nids

#endif // NIDS_KV_CONFIG_HPP
