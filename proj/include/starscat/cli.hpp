#pragma once
//
// Command runner behind the starscat executable. Every command writes its
// outputs and a config.json record into the output directory.
//
// Exit codes: 0 success, 1 internal error, otherwise exit_code(category).
//

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "starscat/io.hpp"

namespace starscat {

enum class Command { forward, cross_section, verify, phase, heat, reconstruct, distinguish };

inline std::string_view command_name(Command c) {
  switch (c) {
    case Command::forward: return "forward";
    case Command::cross_section: return "cross-section";
    case Command::verify: return "verify";
    case Command::phase: return "phase";
    case Command::heat: return "heat";
    case Command::reconstruct: return "reconstruct";
    case Command::distinguish: return "distinguish";
  }
  return "unknown";
}

constexpr int exit_code(ErrorCategory c) {
  switch (c) {
    case ErrorCategory::invalid_argument: return 2;
    case ErrorCategory::domain_error: return 3;
    case ErrorCategory::invalid_shape: return 4;
    case ErrorCategory::solver_failure: return 5;
    case ErrorCategory::invalid_grid: return 6;
    case ErrorCategory::incomplete_data: return 7;
    case ErrorCategory::unreliable_s: return 8;
    case ErrorCategory::step_too_large: return 9;
    case ErrorCategory::insufficient_bandwidth: return 10;
    case ErrorCategory::invalid_iterate: return 11;
    case ErrorCategory::input_not_found: return 12;
    case ErrorCategory::parse_error: return 13;
    case ErrorCategory::duplicate_coefficient: return 14;
    case ErrorCategory::positivity_failure: return 15;
    case ErrorCategory::non_converged: return 16;
  }
  return 1;
}

struct RunConfig {
  Command command = Command::forward;
  std::string shape_path;
  std::string shape2_path;  // distinguish
  std::string data_path;    // reconstruct: cross sections; heat: phase samples
  std::string init_path;    // reconstruct
  std::string out_dir = ".";
  std::vector<double> lambdas;
  int order = 0;            // solver grid order, 0 = command default
  int dir_order = 0;        // direction grid order, 0 = command default
  BoundaryCondition bc = BoundaryCondition::dirichlet;
  int linv = 2;
  double alpha = 0.0;
  double noise_sigma = 0.0;
  std::uint64_t seed = 0;
  double t_lo = 0.02;
  double t_hi = 0.08;
  int t_count = 13;
  double lambda_max = 40.0;
  int lambda_samples = 4000;
  std::string phase_method = "auto";  // auto | partial-wave | det-s
  int max_iterations = 30;
};

namespace detail {

inline bool is_sphere(const RadialShape& s) {
  for (std::size_t k = 1; k < s.coeffs().size(); ++k)
    if (s.coeffs()[k] != 0.0) return false;
  return true;
}

inline std::string absolute_or_empty(const std::string& p) {
  return p.empty() ? p : std::filesystem::absolute(p).lexically_normal().string();
}

/// Fills command defaults and absolute paths.
inline RunConfig resolve(RunConfig c) {
  c.shape_path = absolute_or_empty(c.shape_path);
  c.shape2_path = absolute_or_empty(c.shape2_path);
  c.data_path = absolute_or_empty(c.data_path);
  c.init_path = absolute_or_empty(c.init_path);
  c.out_dir = absolute_or_empty(c.out_dir.empty() ? "." : c.out_dir);
  switch (c.command) {
    case Command::forward:
    case Command::cross_section:
      if (c.order == 0) c.order = 24;
      if (c.dir_order == 0) c.dir_order = 12;
      break;
    case Command::verify:
      if (c.order == 0) c.order = 24;
      if (c.dir_order == 0) c.dir_order = c.order;
      break;
    case Command::phase:
      if (c.order == 0) c.order = 16;
      if (c.dir_order == 0) c.dir_order = c.order;
      break;
    case Command::heat:
      break;
    case Command::reconstruct:
    case Command::distinguish: {
      const ForwardConfig f;
      if (c.order == 0) c.order = f.solver_order;
      if (c.dir_order == 0) c.dir_order = f.direction_order;
      break;
    }
  }
  if (c.command == Command::phase && c.phase_method == "auto") c.phase_method = "";  // decided once the shape is read
  return c;
}

inline nlohmann::ordered_json config_record(const RunConfig& c) {
  nlohmann::ordered_json j;
  j["command"] = command_name(c.command);
  j["shape"] = c.shape_path;
  j["shape2"] = c.shape2_path;
  j["data"] = c.data_path;
  j["init"] = c.init_path;
  j["out"] = c.out_dir;
  j["lambda"] = c.lambdas;
  j["order"] = c.order;
  j["dir_order"] = c.dir_order;
  j["bc"] = bc_name(c.bc);
  j["linv"] = c.linv;
  j["alpha"] = c.alpha;
  j["noise_sigma"] = c.noise_sigma;
  j["seed"] = c.seed;
  j["t_window"] = {c.t_lo, c.t_hi};
  j["t_count"] = c.t_count;
  j["lambda_max"] = c.lambda_max;
  j["lambda_samples"] = c.lambda_samples;
  j["phase_method"] = c.phase_method;
  j["max_iterations"] = c.max_iterations;
  j["convention"] = convention_tag;
  return j;
}

inline void require(bool ok, const std::string& msg) {
  if (!ok) fail(ErrorCategory::invalid_argument, msg);
}

inline void require_lambdas(const RunConfig& c) {
  require(!c.lambdas.empty(), "--lambda is required");
  for (double l : c.lambdas) require(l > 0.0 && std::isfinite(l), "wavenumbers must be positive");
}

class OutputDir {
 public:
  explicit OutputDir(const RunConfig& c) : dir_(c.out_dir) {
    for (const auto& p : {c.shape_path, c.shape2_path, c.data_path, c.init_path})
      if (!p.empty()) inputs_.push_back(std::filesystem::weakly_canonical(p));
    std::error_code ec;
    std::filesystem::create_directories(dir_, ec);
    if (!std::filesystem::is_directory(dir_)) fail(ErrorCategory::invalid_argument, "cannot create " + dir_.string());
  }

  void write(const std::string& name, const std::string& text) const {
    const auto path = std::filesystem::weakly_canonical(dir_ / name);
    for (const auto& in : inputs_)
      if (in == path) fail(ErrorCategory::invalid_argument, "refusing to overwrite input file " + path.string());
    write_text_file(path.string(), text);
  }

 private:
  std::filesystem::path dir_;
  std::vector<std::filesystem::path> inputs_;
};

inline ForwardConfig forward_config(const RunConfig& c) {
  ForwardConfig f;
  f.bc = c.bc;
  f.solver_order = c.order;
  f.incident_order = c.order;
  f.direction_order = c.dir_order;
  return f;
}

inline void run_forward(const RunConfig& c, const OutputDir& out) {
  require_lambdas(c);
  const RadialShape shape = parse_shape_file(c.shape_path);
  const SphereGrid dirs = build_sphere_grid(c.dir_order);
  const FarFieldTable t = compute_far_field_table(shape, c.lambdas, c.bc, build_sphere_grid(c.order), dirs, dirs);
  out.write("far_field.txt", format_far_field_table(t));
}

inline void run_cross_section(const RunConfig& c, const OutputDir& out) {
  require_lambdas(c);
  const RadialShape shape = parse_shape_file(c.shape_path);
  const std::string id = std::filesystem::path(c.shape_path).filename().string();
  const CrossSectionData d =
      synthesize_cross_section_data(shape, c.lambdas, forward_config(c), {c.noise_sigma, c.seed}, id);
  out.write("cross_section.txt", format_cross_section_data(d));
}

inline void run_verify(const RunConfig& c, const OutputDir& out) {
  require_lambdas(c);
  const RadialShape shape = parse_shape_file(c.shape_path);
  const SphereGrid dirs = build_sphere_grid(c.dir_order);
  const FarFieldTable t = compute_far_field_table(shape, c.lambdas, c.bc, build_sphere_grid(c.order), dirs, dirs);
  std::vector<ResidualReport> reps;
  for (std::size_t l = 0; l < c.lambdas.size(); ++l) reps.push_back(identity_residuals(t, l));
  out.write("residuals.txt", format_residual_report(reps));
}

inline void run_phase(RunConfig& c, const OutputDir& out) {
  const RadialShape shape = parse_shape_file(c.shape_path);
  if (c.phase_method.empty()) c.phase_method = is_sphere(shape) ? "partial-wave" : "det-s";
  std::vector<double> lambdas = c.lambdas;
  if (lambdas.empty()) lambdas = uniform_wavenumbers(c.lambda_max, c.lambda_samples);
  for (double l : lambdas) require(l > 0.0, "wavenumbers must be positive");
  PhaseSamples p;
  if (c.phase_method == "partial-wave") {
    require(is_sphere(shape), "partial-wave phase needs a sphere shape");
    p = sphere_phase_samples(shape.coeff(0, 0) / std::sqrt(4.0 * pi), lambdas, c.bc);
  } else if (c.phase_method == "det-s") {
    p.method = PhaseMethod::det_s;
    p.bc = c.bc;
    p.lambdas = lambdas;
    const SphereGrid solver = build_sphere_grid(c.order), dirs = build_sphere_grid(c.dir_order);
    for (double l : lambdas) p.derivative.push_back(phase_derivative_det(shape, l, c.bc, solver, dirs));
    p.validate();
  } else {
    fail(ErrorCategory::invalid_argument, "unknown phase method \"" + c.phase_method + "\"");
  }
  out.write("phase.txt", format_phase_samples(p));
}

inline void run_heat(const RunConfig& c, const OutputDir& out) {
  PhaseSamples p;
  if (!c.data_path.empty()) {
    p = parse_phase_samples(read_text_file(c.data_path));
  } else {
    const RadialShape shape = parse_shape_file(c.shape_path);
    require(is_sphere(shape), "heat without --data needs a sphere shape (partial-wave phase)");
    p = sphere_phase_samples(shape.coeff(0, 0) / std::sqrt(4.0 * pi),
                             uniform_wavenumbers(c.lambda_max, c.lambda_samples), c.bc);
  }
  const HeatTraceFit f = heat_trace_and_a0(p, heat_window(c.t_lo, c.t_hi, c.t_count));
  out.write("heat.txt", format_heat_trace_fit(f));
}

inline bool run_reconstruct(const RunConfig& c, const OutputDir& out) {
  require(!c.data_path.empty(), "--data is required");
  const CrossSectionData data = parse_cross_section_data(read_text_file(c.data_path));
  ReconstructionConfig rc;
  rc.max_degree = c.linv;
  rc.alpha = c.alpha;
  rc.max_iterations = c.max_iterations;
  rc.forward.bc = data.bc;
  rc.forward.solver_order = c.order;
  rc.forward.incident_order = c.order;
  rc.forward.direction_order = data.directions.order;
  const RadialShape init =
      c.init_path.empty() ? RadialShape::sphere(radius_from_cross_section(data)) : parse_shape_file(c.init_path);
  const ReconstructionResult r = reconstruct_shape(data, init, rc);
  out.write("shape.json", shape_to_json(r.shape));
  out.write("convergence.txt", format_convergence_log(r));
  CrossSectionData resid = compute_cross_sections(r.shape, data.lambdas, rc.forward, "residual C_model - C_data");
  for (std::size_t k = 0; k < resid.values.size(); ++k) resid.values[k] -= data.values[k];
  out.write("residuals.txt", format_cross_section_data(resid));
  return r.converged;
}

inline void run_distinguish(const RunConfig& c, const OutputDir& out) {
  require(c.lambdas.size() == 1, "--lambda must give the single centre wavenumber");
  const RadialShape s1 = parse_shape_file(c.shape_path);
  const RadialShape s2 = parse_shape_file(c.shape2_path);
  const ForwardConfig f = forward_config(c);
  const double sep = distinguishability(s1, s2, c.lambdas[0], f);
  const double floor = std::max(solver_noise_floor(s1, c.lambdas[0], f), solver_noise_floor(s2, c.lambdas[0], f));
  std::ostringstream o;
  o << "# starscat distinguishability\n";
  o << "# lambdas: " << join_numbers(frequency_window(c.lambdas[0])) << "\n";
  o << "separation " << fmt17(sep) << "\n";
  o << "noise_floor " << fmt17(floor) << "\n";
  o << "ratio " << fmt17(floor > 0.0 ? sep / floor : std::numeric_limits<double>::infinity()) << "\n";
  out.write("distinguish.txt", o.str());
}

}  // namespace detail

/// Runs one command; returns the process exit status. Errors are reported
/// on `err` as a single line "error: <category>: <message>".
inline int run(const RunConfig& config, std::ostream& err = std::cerr) {
  auto report = [&](std::string_view category, std::string msg) {
    for (char& ch : msg)
      if (ch == '\n' || ch == '\r') ch = ' ';
    err << "error: " << category << ": " << msg << '\n';
  };
  try {
    RunConfig c = detail::resolve(config);
    const detail::OutputDir out(c);
    bool converged = true;
    switch (c.command) {
      case Command::forward: detail::run_forward(c, out); break;
      case Command::cross_section: detail::run_cross_section(c, out); break;
      case Command::verify: detail::run_verify(c, out); break;
      case Command::phase: detail::run_phase(c, out); break;
      case Command::heat: detail::run_heat(c, out); break;
      case Command::reconstruct: converged = detail::run_reconstruct(c, out); break;
      case Command::distinguish: detail::run_distinguish(c, out); break;
    }
    out.write("config.json", detail::config_record(c).dump(2) + "\n");
    if (!converged) {
      report(category_name(ErrorCategory::non_converged), "reconstruction stopped before convergence");
      return exit_code(ErrorCategory::non_converged);
    }
    return 0;
  } catch (const Error& e) {
    const std::string what = e.what();
    const std::string prefix = std::string(category_name(e.category())) + ": ";
    report(category_name(e.category()), what.rfind(prefix, 0) == 0 ? what.substr(prefix.size()) : what);
    return exit_code(e.category());
  } catch (const std::exception& e) {
    report("internal", e.what());
    return 1;
  }
}

}  // namespace starscat
