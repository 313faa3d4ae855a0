#include "fixtures.hpp"

#include "nids/error.hpp"

#include <fstream>
#include <sstream>

namespace nids::testing {

std::filesystem::path data_path(const std::string& name) {
    return std::filesystem::path(NIDS_SOURCE_DIR) / "tests" / "data" / name;
}

ConnectionRecord make_record(const std::string& label, double src_bytes, const std::string& protocol,
                             const std::string& service, const std::string& flag) {
    ConnectionRecord record;
    record.numeric[4] = src_bytes;
    record.tokens = {protocol, service, flag};
    record.label = label;
    return record;
}

LabeledMatrix read_matrix(const std::filesystem::path& path, std::vector<FeatureKind> kinds,
                          std::vector<std::string> class_names) {
    std::ifstream in(path);
    if (!in) {
        throw Error("cannot open " + path.string());
    }
    const auto width = kinds.size();
    LabeledMatrix data(std::move(kinds), std::move(class_names));
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) {
            continue;
        }
        for (auto& c : line) {
            c = c == ',' ? ' ' : c;
        }
        std::istringstream fields(line);
        std::vector<double> values;
        double v = 0.0;
        while (fields >> v) {
            values.push_back(v);
        }
        if (values.size() != width + 1) {
            throw Error("bad row in " + path.string());
        }
        const int label = static_cast<int>(values.back());
        values.pop_back();
        data.add_row(values, label);
    }
    return data;
}

std::filesystem::path scratch_dir(const std::string& name) {
    auto dir = std::filesystem::temp_directory_path() / ("nids-test-" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

std::string slurp(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error("cannot open " + path.string());
    }
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

} // namespace nids::testing
