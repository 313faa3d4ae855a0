#ifndef NIDS_TESTS_FIXTURES_HPP
#define NIDS_TESTS_FIXTURES_HPP

#include "nids/dataset.hpp"
#include "nids/tree.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace nids::testing {

/// File under tests/data.
std::filesystem::path data_path(const std::string& name);

/// First line of the KDD'99 training file with the NSL-KDD difficulty column.
inline const std::string kSampleLine =
    "0,tcp,http,SF,181,5450,0,0,0,0,0,1,0,0,0,0,0,0,0,0,0,0,8,8,0.00,0.00,0.00,0.00,1.00,0.00,0.00,9,9,1.00,0.00,"
    "0.11,0.00,0.00,0.00,0.00,0.00,normal,20";

/// A record with every numeric feature 0 apart from src_bytes.
ConnectionRecord make_record(const std::string& label, double src_bytes = 0.0, const std::string& protocol = "tcp",
                             const std::string& service = "http", const std::string& flag = "SF");

/// Rows of whitespace or comma separated numbers; the last column is the class.
LabeledMatrix read_matrix(const std::filesystem::path& path, std::vector<FeatureKind> kinds,
                          std::vector<std::string> class_names);

/// Fresh empty directory under the system temp directory.
std::filesystem::path scratch_dir(const std::string& name);

/// Whole file as a string.
std::string slurp(const std::filesystem::path& path);

} // namespace nids::testing

#endif // NIDS_TESTS_FIXTURES_HPP
