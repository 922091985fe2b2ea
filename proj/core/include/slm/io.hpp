#pragma once

#include <filesystem>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

namespace slm {

/// RFC 4180 field quoting (quotes fields containing comma, quote, CR or LF).
std::string csv_field(std::string_view s);
/// Writes one LF-terminated record.
void write_csv_row(std::ostream& os, const std::vector<std::string>& fields);

nlohmann::json to_json(const Eigen::VectorXd& v);
Eigen::VectorXd vector_from_json(const nlohmann::json& j);

nlohmann::json read_json_file(const std::filesystem::path& path);
void write_json_file(const std::filesystem::path& path, const nlohmann::json& j);
/// Whitespace- or comma-separated numbers, or a JSON array.
Eigen::VectorXd read_vector_file(const std::filesystem::path& path);

/// FNV-1a 64 over the canonical JSON dump, as 16 hex digits.
std::string config_hash(const nlohmann::json& config);

}  // namespace slm
