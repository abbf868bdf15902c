#pragma once
//
// File formats. Shapes are JSON; tables are plain text with "# key: value"
// header lines followed by whitespace-separated rows, numbers printed with
// 17 significant digits.
//

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "starscat/inverse.hpp"
#include "starscat/trace.hpp"

namespace starscat {

inline constexpr const char* convention_tag = "paper-(1.4)";

inline std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string read_text_file(const std::string& path) {
  if (!std::filesystem::is_regular_file(path)) fail(ErrorCategory::input_not_found, "no such file: " + path);
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCategory::input_not_found, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCategory::invalid_argument, "cannot write " + path);
  out << text;
  if (!out) fail(ErrorCategory::invalid_argument, "write failed: " + path);
}

// ---------------------------------------------------------------------------
// shapes

inline RadialShape parse_shape_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCategory::parse_error, std::string("malformed shape JSON: ") + e.what());
  }
  if (!j.is_object() || !j.contains("L") || !j.contains("coeffs"))
    fail(ErrorCategory::parse_error, "shape needs fields \"L\" and \"coeffs\"");
  if (!j["L"].is_number_integer() || j["L"].get<long long>() < 0 || j["L"].get<long long>() > 200)
    fail(ErrorCategory::parse_error, "\"L\" must be an integer in [0, 200]");
  const int L = j["L"].get<int>();
  if (!j["coeffs"].is_array()) fail(ErrorCategory::parse_error, "\"coeffs\" must be a list");
  std::vector<double> c(sh_count(L), 0.0);
  std::set<std::pair<int, int>> seen;
  for (const auto& rec : j["coeffs"]) {
    if (!rec.is_object() || !rec.contains("l") || !rec.contains("m") || !rec.contains("c") ||
        !rec["l"].is_number_integer() || !rec["m"].is_number_integer() || !rec["c"].is_number())
      fail(ErrorCategory::parse_error, "coefficient records need integer l, m and numeric c");
    const long long l = rec["l"].get<long long>(), m = rec["m"].get<long long>();
    if (l < 0 || l > L || std::llabs(m) > l)
      fail(ErrorCategory::parse_error, "coefficient (" + std::to_string(l) + "," + std::to_string(m) + ") outside L");
    if (!seen.insert({static_cast<int>(l), static_cast<int>(m)}).second)
      fail(ErrorCategory::duplicate_coefficient,
           "duplicate coefficient (" + std::to_string(l) + "," + std::to_string(m) + ")");
    const double v = rec["c"].get<double>();
    if (!std::isfinite(v)) fail(ErrorCategory::parse_error, "non-finite coefficient");
    c[sh_index(static_cast<int>(l), static_cast<int>(m))] = v;
  }
  RadialShape shape(L, std::move(c));
  if (!shape.is_valid()) fail(ErrorCategory::positivity_failure, "radial function is not positive on the validation grid");
  return shape;
}

inline RadialShape parse_shape_file(const std::string& path) { return parse_shape_json(read_text_file(path)); }

inline std::string shape_to_json(const RadialShape& shape) {
  nlohmann::ordered_json j;
  j["L"] = shape.max_degree();
  j["coeffs"] = nlohmann::ordered_json::array();
  for (int l = 0; l <= shape.max_degree(); ++l)
    for (int m = -l; m <= l; ++m) j["coeffs"].push_back({{"l", l}, {"m", m}, {"c", shape.coeff(l, m)}});
  return j.dump(2) + "\n";
}

inline void write_shape_file(const RadialShape& shape, const std::string& path) {
  write_text_file(path, shape_to_json(shape));
}

// ---------------------------------------------------------------------------
// text tables

struct TextTable {
  std::string kind;
  std::map<std::string, std::string> header;
  std::vector<std::vector<double>> rows;

  const std::string& field(const std::string& key) const {
    const auto it = header.find(key);
    if (it == header.end()) fail(ErrorCategory::parse_error, kind + ": missing header field \"" + key + "\"");
    return it->second;
  }
};

inline std::vector<double> parse_number_list(const std::string& s) {
  std::vector<double> v;
  std::istringstream in(s);
  std::string tok;
  while (in >> tok) {
    try {
      std::size_t pos = 0;
      v.push_back(std::stod(tok, &pos));
      if (pos != tok.size()) throw std::invalid_argument(tok);
    } catch (const std::exception&) {
      fail(ErrorCategory::parse_error, "bad number \"" + tok + "\"");
    }
  }
  return v;
}

inline int parse_int_field(const TextTable& t, const std::string& key) {
  const auto v = parse_number_list(t.field(key));
  if (v.size() != 1 || v[0] != std::floor(v[0])) fail(ErrorCategory::parse_error, key + " must be one integer");
  return static_cast<int>(v[0]);
}

inline BoundaryCondition parse_bc(const std::string& s) {
  if (s == "dirichlet") return BoundaryCondition::dirichlet;
  if (s == "neumann") return BoundaryCondition::neumann;
  fail(ErrorCategory::invalid_argument, "boundary condition must be dirichlet or neumann, got \"" + s + "\"");
}

/// First line "# starscat <kind>", then "# key: value" lines, then rows.
inline TextTable parse_text_table(const std::string& text, const std::string& expected_kind) {
  TextTable t;
  std::istringstream in(text);
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::string body = line.substr(1);
      body.erase(0, body.find_first_not_of(' '));
      if (first) {
        if (body.rfind("starscat ", 0) != 0) fail(ErrorCategory::parse_error, "not a starscat table");
        t.kind = body.substr(9);
        first = false;
        continue;
      }
      const auto colon = body.find(':');
      if (colon == std::string::npos) continue;
      std::string value = body.substr(colon + 1);
      value.erase(0, value.find_first_not_of(' '));
      t.header[body.substr(0, colon)] = value;
      continue;
    }
    if (first) fail(ErrorCategory::parse_error, "missing table header");
    t.rows.push_back(parse_number_list(line));
  }
  if (first) fail(ErrorCategory::parse_error, "empty table");
  if (t.kind != expected_kind)
    fail(ErrorCategory::parse_error, "expected a " + expected_kind + " table, found " + t.kind);
  return t;
}

inline std::string join_numbers(const std::vector<double>& v) {
  std::string s;
  for (std::size_t k = 0; k < v.size(); ++k) s += (k ? " " : "") + fmt17(v[k]);
  return s;
}

// FarFieldTable

inline std::string format_far_field_table(const FarFieldTable& t) {
  std::ostringstream o;
  o << "# starscat far-field-table\n";
  o << "# convention: " << convention_tag << "\n";
  o << "# bc: " << bc_name(t.bc) << "\n";
  o << "# solver_order: " << t.solver_order << "\n";
  o << "# observation_order: " << t.observation.order << "\n";
  o << "# incident_order: " << t.incident.order << "\n";
  o << "# lambdas: " << join_numbers(t.lambdas) << "\n";
  o << "# columns: lambda_index theta_index omega_index re_A im_A\n";
  for (std::size_t l = 0; l < t.lambdas.size(); ++l)
    for (std::size_t i = 0; i < t.n_obs(); ++i)
      for (std::size_t j = 0; j < t.n_inc(); ++j) {
        const Complex a = t.at(l, i, j);
        o << l << ' ' << i << ' ' << j << ' ' << fmt17(a.real()) << ' ' << fmt17(a.imag()) << '\n';
      }
  return o.str();
}

inline FarFieldTable parse_far_field_table(const std::string& text) {
  const TextTable tt = parse_text_table(text, "far-field-table");
  if (tt.field("convention") != convention_tag)
    fail(ErrorCategory::parse_error, "unsupported amplitude convention \"" + tt.field("convention") + "\"");
  FarFieldTable t;
  t.bc = parse_bc(tt.field("bc"));
  t.solver_order = parse_int_field(tt, "solver_order");
  t.observation = build_sphere_grid(parse_int_field(tt, "observation_order"));
  t.incident = build_sphere_grid(parse_int_field(tt, "incident_order"));
  t.lambdas = parse_number_list(tt.field("lambdas"));
  t.values.assign(t.lambdas.size() * t.n_obs() * t.n_inc(), Complex(std::nan(""), std::nan("")));
  for (const auto& r : tt.rows) {
    if (r.size() != 5) fail(ErrorCategory::parse_error, "far-field rows need 5 columns");
    const auto l = static_cast<std::size_t>(r[0]), i = static_cast<std::size_t>(r[1]), j = static_cast<std::size_t>(r[2]);
    if (r[0] < 0 || r[1] < 0 || r[2] < 0 || l >= t.lambdas.size() || i >= t.n_obs() || j >= t.n_inc())
      fail(ErrorCategory::parse_error, "far-field row index out of range");
    t.at(l, i, j) = {r[3], r[4]};
  }
  return t;
}

// CrossSectionData

inline std::string format_cross_section_data(const CrossSectionData& d) {
  std::ostringstream o;
  o << "# starscat cross-section\n";
  o << "# convention: " << convention_tag << "\n";
  o << "# provenance: " << d.provenance << "\n";
  o << "# bc: " << bc_name(d.bc) << "\n";
  o << "# solver_order: " << d.solver_order << "\n";
  o << "# direction_order: " << d.directions.order << "\n";
  o << "# incident_order: " << d.incident_order << "\n";
  o << "# lambdas: " << join_numbers(d.lambdas) << "\n";
  o << "# columns: lambda_index theta_index C\n";
  for (std::size_t l = 0; l < d.lambdas.size(); ++l)
    for (std::size_t i = 0; i < d.n_dir(); ++i) o << l << ' ' << i << ' ' << fmt17(d.at(l, i)) << '\n';
  return o.str();
}

inline CrossSectionData parse_cross_section_data(const std::string& text) {
  const TextTable tt = parse_text_table(text, "cross-section");
  CrossSectionData d;
  d.provenance = tt.header.count("provenance") ? tt.header.at("provenance") : "measured";
  d.bc = parse_bc(tt.field("bc"));
  d.solver_order = parse_int_field(tt, "solver_order");
  d.directions = build_sphere_grid(parse_int_field(tt, "direction_order"));
  d.incident_order = parse_int_field(tt, "incident_order");
  d.lambdas = parse_number_list(tt.field("lambdas"));
  d.values.assign(d.lambdas.size() * d.n_dir(), std::nan(""));
  for (const auto& r : tt.rows) {
    if (r.size() != 3) fail(ErrorCategory::parse_error, "cross-section rows need 3 columns");
    const auto l = static_cast<std::size_t>(r[0]), i = static_cast<std::size_t>(r[1]);
    if (r[0] < 0 || r[1] < 0 || l >= d.lambdas.size() || i >= d.n_dir())
      fail(ErrorCategory::parse_error, "cross-section row index out of range");
    d.at(l, i) = r[2];
  }
  for (double v : d.values)
    if (!std::isfinite(v)) fail(ErrorCategory::incomplete_data, "cross-section table has missing samples");
  return d;
}

// PhaseSamples

inline std::string format_phase_samples(const PhaseSamples& p) {
  std::ostringstream o;
  o << "# starscat phase-samples\n";
  o << "# method: " << phase_method_name(p.method) << "\n";
  o << "# bc: " << bc_name(p.bc) << "\n";
  o << "# columns: lambda sigma_prime\n";
  for (std::size_t k = 0; k < p.lambdas.size(); ++k) o << fmt17(p.lambdas[k]) << ' ' << fmt17(p.derivative[k]) << '\n';
  return o.str();
}

inline PhaseSamples parse_phase_samples(const std::string& text) {
  const TextTable tt = parse_text_table(text, "phase-samples");
  PhaseSamples p;
  const std::string& m = tt.field("method");
  if (m == "det-S") p.method = PhaseMethod::det_s;
  else if (m == "partial-wave") p.method = PhaseMethod::partial_wave;
  else fail(ErrorCategory::parse_error, "unknown phase method \"" + m + "\"");
  p.bc = parse_bc(tt.field("bc"));
  for (const auto& r : tt.rows) {
    if (r.size() != 2) fail(ErrorCategory::parse_error, "phase rows need 2 columns");
    p.lambdas.push_back(r[0]);
    p.derivative.push_back(r[1]);
  }
  try {
    p.validate();
  } catch (const Error& e) {
    fail(ErrorCategory::parse_error, e.what());
  }
  return p;
}

// HeatTraceFit

inline std::string format_heat_trace_fit(const HeatTraceFit& f) {
  std::ostringstream o;
  o << "# starscat heat-trace-fit\n";
  o << "# a0: " << fmt17(f.a0) << "\n";
  o << "# volume_estimate: " << fmt17(f.volume_estimate()) << "\n";
  o << "# b: " << fmt17(f.b) << "\n";
  o << "# c: " << fmt17(f.c) << "\n";
  o << "# fit_residual: " << fmt17(f.residual) << "\n";
  o << "# columns: t H\n";
  for (std::size_t k = 0; k < f.t.size(); ++k) o << fmt17(f.t[k]) << ' ' << fmt17(f.heat[k]) << '\n';
  return o.str();
}

// residual report, one named residual per line

inline std::string format_residual_report(const std::vector<ResidualReport>& reports) {
  std::ostringstream o;
  o << "# starscat identity-residuals\n";
  for (const auto& r : reports) {
    o << "# lambda: " << fmt17(r.lambda) << "\n";
    for (const auto& e : r.entries) o << e.name << ' ' << fmt17(e.value) << "  # " << e.note << '\n';
  }
  return o.str();
}

inline std::string format_convergence_log(const ReconstructionResult& r) {
  std::ostringstream o;
  o << "# starscat convergence-log\n";
  o << "# converged: " << (r.converged ? "true" : "false") << "\n";
  o << "# status: " << r.status << "\n";
  o << "# columns: iteration misfit gradient_norm damping\n";
  for (const auto& e : r.log)
    o << e.iteration << ' ' << fmt17(e.misfit) << ' ' << fmt17(e.gradient_norm) << ' ' << fmt17(e.damping) << '\n';
  return o.str();
}

}  // namespace starscat
