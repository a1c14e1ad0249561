#pragma once

#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <nlohmann/json.hpp>
#include <string>
#include <string_view>
#include <vector>

#include "kfp/force_model.hpp"
#include "kfp/limit_lab.hpp"
#include "kfp/stat_suite.hpp"

namespace kfp {

/// Shortest decimal that round-trips to the same double.
std::string format_double(double x);

/// RFC 4180 field quoting: wraps in quotes when the field holds a comma, quote, CR or LF.
std::string csv_field(std::string_view s);

class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header);
  void row(const std::vector<std::string>& fields);
  void row(std::initializer_list<double> values);

 private:
  void write(const std::vector<std::string>& fields);
  std::ofstream out_;
  std::size_t width_;
};

/// Two-space indented UTF-8 with a trailing newline.
void write_json(const std::filesystem::path& path, const nlohmann::json& j);

void to_json(nlohmann::json& j, const TestReport& r);
void to_json(nlohmann::json& j, const ECFGrid& e);
void to_json(nlohmann::json& j, const RegimeSpec& r);
void to_json(nlohmann::json& j, const ScalingFit& f);

}  // namespace kfp
