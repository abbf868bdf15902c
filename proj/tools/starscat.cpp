// starscat: command-line driver.

#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "starscat/cli.hpp"

namespace {

std::vector<double> parse_lambda_list(const std::string& s) {
  std::vector<double> out;
  std::stringstream in(s);
  std::string tok;
  while (std::getline(in, tok, ',')) {
    std::size_t pos = 0;
    double v = 0.0;
    try {
      v = std::stod(tok, &pos);
    } catch (const std::exception&) {
      pos = std::string::npos;
    }
    if (pos != tok.size()) starscat::fail(starscat::ErrorCategory::invalid_argument, "bad --lambda entry \"" + tok + "\"");
    out.push_back(v);
  }
  return out;
}

void parse_window(const std::string& s, double& lo, double& hi) {
  const auto colon = s.find(':');
  try {
    if (colon == std::string::npos) throw std::invalid_argument(s);
    lo = std::stod(s.substr(0, colon));
    hi = std::stod(s.substr(colon + 1));
  } catch (const std::exception&) {
    starscat::fail(starscat::ErrorCategory::invalid_argument, "--t-window expects A:B, got \"" + s + "\"");
  }
}

}  // namespace

int main(int argc, char** argv) {
  using starscat::Command;
  CLI::App app{"Acoustic scattering by starlike obstacles"};
  app.require_subcommand(1);

  starscat::RunConfig cfg;
  std::string lambda_text, bc_text = "dirichlet", window_text;

  struct Sub {
    const char* name;
    Command cmd;
    const char* help;
  };
  const Sub subs[] = {
      {"forward", Command::forward, "far-field amplitude table"},
      {"cross-section", Command::cross_section, "cross-section table C(lambda, theta)"},
      {"verify", Command::verify, "amplitude and scattering-matrix identity residuals"},
      {"phase", Command::phase, "scattering-phase derivative samples"},
      {"heat", Command::heat, "heat-smoothed trace and volume invariant"},
      {"reconstruct", Command::reconstruct, "recover a radial function from cross-section data"},
      {"distinguish", Command::distinguish, "cross-section separation of two shapes"},
  };
  std::vector<std::pair<CLI::App*, Command>> apps;
  for (const Sub& s : subs) {
    CLI::App* sub = app.add_subcommand(s.name, s.help);
    sub->add_option("--shape", cfg.shape_path, "shape file (JSON)");
    sub->add_option("--lambda", lambda_text, "wavenumber list X[,Y,...]");
    sub->add_option("--order", cfg.order, "solver grid order");
    sub->add_option("--dir-order", cfg.dir_order, "direction grid order");
    sub->add_option("--bc", bc_text, "dirichlet | neumann");
    sub->add_option("--out", cfg.out_dir, "output directory");
    switch (s.cmd) {
      case Command::cross_section:
        sub->add_option("--noise-sigma", cfg.noise_sigma, "additive gaussian noise level");
        sub->add_option("--seed", cfg.seed, "noise seed");
        break;
      case Command::phase:
        sub->add_option("--method", cfg.phase_method, "auto | partial-wave | det-s");
        sub->add_option("--lambda-max", cfg.lambda_max, "band edge when --lambda is absent");
        sub->add_option("--samples", cfg.lambda_samples, "sample count when --lambda is absent");
        break;
      case Command::heat:
        sub->add_option("--data", cfg.data_path, "phase-samples file");
        sub->add_option("--t-window", window_text, "fit window A:B");
        sub->add_option("--t-count", cfg.t_count, "points in the fit window");
        sub->add_option("--lambda-max", cfg.lambda_max, "band edge of the partial-wave phase");
        sub->add_option("--samples", cfg.lambda_samples, "phase samples on (0, lambda-max]");
        break;
      case Command::reconstruct:
        sub->add_option("--data", cfg.data_path, "cross-section file")->required();
        sub->add_option("--init", cfg.init_path, "initial shape (default: sphere matched to the data level)");
        sub->add_option("--linv", cfg.linv, "harmonic degree of the recovered shape");
        sub->add_option("--alpha", cfg.alpha, "Tikhonov weight on l(l+1) c^2");
        sub->add_option("--max-iter", cfg.max_iterations, "iteration limit");
        break;
      case Command::distinguish:
        sub->add_option("--shape2", cfg.shape2_path, "second shape file")->required();
        break;
      default:
        break;
    }
    apps.emplace_back(sub, s.cmd);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << starscat::category_name(starscat::ErrorCategory::invalid_argument) << ": " << e.what()
              << '\n';
    return starscat::exit_code(starscat::ErrorCategory::invalid_argument);
  }

  try {
    for (const auto& [sub, cmd] : apps)
      if (sub->parsed()) cfg.command = cmd;
    if (!lambda_text.empty()) cfg.lambdas = parse_lambda_list(lambda_text);
    cfg.bc = starscat::parse_bc(bc_text);
    if (!window_text.empty()) parse_window(window_text, cfg.t_lo, cfg.t_hi);
  } catch (const starscat::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return starscat::exit_code(e.category());
  }
  return starscat::run(cfg);
}
