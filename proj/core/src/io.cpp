#include "kfp/io.hpp"

#include <array>
#include <charconv>
#include <cmath>

#include "kfp/error.hpp"

namespace kfp {

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  std::array<char, 32> buf{};
  const auto r = std::to_chars(buf.data(), buf.data() + buf.size(), x);
  return std::string(buf.data(), r.ptr);
}

std::string csv_field(std::string_view s) {
  if (s.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

CsvWriter::CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header)
    : out_(path, std::ios::binary), width_(header.size()) {
  if (!out_) throw ConfigError("cannot open " + path.string() + " for writing");
  write(header);
}

void CsvWriter::write(const std::vector<std::string>& fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out_ << ',';
    out_ << csv_field(fields[i]);
  }
  out_ << "\r\n";
}

void CsvWriter::row(const std::vector<std::string>& fields) {
  if (fields.size() != width_) throw DomainError("CSV row width does not match the header");
  write(fields);
}

void CsvWriter::row(std::initializer_list<double> values) {
  std::vector<std::string> f;
  f.reserve(values.size());
  for (double v : values) f.push_back(format_double(v));
  row(f);
}

void write_json(const std::filesystem::path& path, const nlohmann::json& j) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot open " + path.string() + " for writing");
  out << j.dump(2) << '\n';
}

void to_json(nlohmann::json& j, const TestReport& r) {
  j = {{"test_kind", test_kind_name(r.test_kind)},
       {"statistic", r.statistic},
       {"critical_value_5pct", r.critical_value_5pct},
       {"critical_value_1pct", r.critical_value_1pct},
       {"n", r.n},
       {"level", r.level},
       {"verdict", r.passed() ? "pass" : "fail"}};
  if (r.test_kind == TestKind::chi_square_independence) j["dof"] = r.dof;
}

void to_json(nlohmann::json& j, const ECFGrid& e) {
  j = {{"xi", e.xi_grid}, {"real", e.real_part}, {"imag", e.imag_part}, {"n_samples", e.n_samples}};
}

void to_json(nlohmann::json& j, const RegimeSpec& r) {
  j = {{"beta", r.beta}, {"regime", regime_name(r.regime)}, {"c_beta", r.c_beta}, {"gamma", r.gamma}};
  j["alpha"] = r.alpha ? nlohmann::json(*r.alpha) : nlohmann::json(nullptr);
  j["delta"] = r.delta ? nlohmann::json(*r.delta) : nlohmann::json(nullptr);
  j["sigma_beta"] = r.sigma_beta ? nlohmann::json(*r.sigma_beta) : nlohmann::json(nullptr);
  j["sigma_beta_sq"] = r.sigma_beta ? nlohmann::json(*r.sigma_beta * *r.sigma_beta) : nlohmann::json(nullptr);
  j["kappa_alpha"] = r.kappa_alpha ? nlohmann::json(*r.kappa_alpha) : nlohmann::json(nullptr);
}

void to_json(nlohmann::json& j, const ScalingFit& f) {
  j = {{"slope", f.slope},
       {"intercept", f.intercept},
       {"r_squared", f.r_squared},
       {"epsilons", f.epsilons},
       {"iqrs", f.iqrs}};
}

}  // namespace kfp
