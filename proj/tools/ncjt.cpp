#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

#include "ncjt/analytic.hpp"
#include "ncjt/design.hpp"
#include "ncjt/error.hpp"
#include "ncjt/experiment.hpp"

namespace {

constexpr int kSpecError = 2;
constexpr int kNumericalError = 3;

struct Flags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<long> trials;
  std::string out;
  std::optional<double> alpha, lambda, r0, snr0_db, gamma_db;
  std::optional<int> n_a, n_p;
};

void add_flags(CLI::App* cmd, Flags& f) {
  cmd->add_option("--config", f.config, "JSON experiment spec or a previous output file; flags override its values");
  cmd->add_option("--seed", f.seed, "master seed");
  cmd->add_option("--trials", f.trials, "Monte Carlo trials per point");
  cmd->add_option("--out", f.out, "output file (default: spec output_path, else stdout)");
  cmd->add_option("--alpha", f.alpha, "path loss factor");
  cmd->add_option("--lambda", f.lambda, "AP density");
  cmd->add_option("--r0", f.r0, "reference distance (default 0.08 / (2 sqrt(lambda)))");
  cmd->add_option("--snr0-db", f.snr0_db, "single-AP perfect-CSI SNR in dB");
  cmd->add_option("--na", f.n_a, "cluster size");
  cmd->add_option("--np", f.n_p, "pilot length");
  cmd->add_option("--gamma-db", f.gamma_db, "allowed SNR degradation in dB");
}

ncjt::ExperimentSpec resolve_spec(const std::string& name, const Flags& f) {
  ncjt::ExperimentSpec spec = ncjt::preset(name);
  if (!f.config.empty()) {
    std::ifstream in(f.config);
    if (!in) throw std::invalid_argument("cannot read config file '" + f.config + "'");
    nlohmann::json j;
    if (in.peek() == '#') {
      // A previous output file: rerun what its header records.
      j = ncjt::spec_from_output(in).to_json();
    } else {
      try {
        j = nlohmann::json::parse(in);
      } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument("config file '" + f.config + "': " + e.what());
      }
    }
    if (j.contains("experiment") && j["experiment"] != name)
      throw std::invalid_argument("config file is for experiment " + j["experiment"].dump() + ", not " + name);
    j["experiment"] = name;
    spec = ncjt::ExperimentSpec::from_json(j);
  }
  if (f.seed) spec.seed = *f.seed;
  if (f.trials) spec.trials = *f.trials;
  if (!f.out.empty()) spec.output_path = f.out;
  const std::pair<const char*, std::optional<double>> overrides[] = {
      {"alpha", f.alpha},
      {"lambda", f.lambda},
      {"r0", f.r0},
      {"snr0_db", f.snr0_db},
      {"gamma_db", f.gamma_db},
      {"n_a", f.n_a ? std::optional<double>(*f.n_a) : std::nullopt},
      {"n_p", f.n_p ? std::optional<double>(*f.n_p) : std::nullopt},
  };
  for (const auto& [param, value] : overrides)
    if (value) ncjt::override_param(spec, param, *value);
  ncjt::canonicalize_series(spec);
  spec.validate();
  return spec;
}

int run_experiment(const std::string& name, const Flags& f) {
  const auto spec = resolve_spec(name, f);
  const auto out = ncjt::execute(spec);
  const std::string text = out.render();
  if (spec.output_path.empty()) {
    std::cout << text;
  } else {
    std::ofstream file(spec.output_path, std::ios::binary);
    if (!file) throw std::invalid_argument("cannot write '" + spec.output_path + "'");
    file << text;
    long errors = 0;
    for (const auto& r : out.rows) errors += r.status.rfind("error", 0) == 0 ? 1 : 0;
    std::cout << name << ": " << out.rows.size() << " rows (" << errors << " errors) written to "
              << spec.output_path << "\n";
  }
  return 0;
}

int run_summary(const Flags& f) {
  ncjt::SystemConfig cfg = ncjt::preset_config(f.lambda.value_or(1.0), f.alpha.value_or(3.67));
  if (f.r0) cfg.r0 = *f.r0;
  cfg.n_a = f.n_a.value_or(1);
  cfg.n_p = f.n_p.value_or(50);
  cfg.validate();
  const double snr0_db = f.snr0_db.value_or(40.0);
  cfg = ncjt::at_snr0_db(cfg, snr0_db);
  const auto s = ncjt::energy_summary(cfg);
  const double gamma = ncjt::db_to_linear(-f.gamma_db.value_or(1.0));

  auto line = [](const char* key, double v) { std::printf("%-22s %.10g\n", key, v); };
  std::printf("%-22s lambda=%g alpha=%g r0=%g n_a=%d n_p=%d snr0_db=%g\n", "config", cfg.lambda, cfg.alpha, cfg.r0,
              cfg.n_a, cfg.n_p, snr0_db);
  line("sigma_w_sq", cfg.sigma_w_sq);
  line("sigma_phi_sq", s.sigma_phi_sq);
  line("sigma_c_sq", s.sigma_c_sq);
  line("sigma_e_sq", s.sigma_e_sq);
  line("snr_db", ncjt::linear_to_db(s.snr));
  line("snr0_db", ncjt::linear_to_db(s.snr0));
  try {
    line("np_star", static_cast<double>(ncjt::np_star_numeric(cfg, gamma * s.snr0)));
  } catch (const ncjt::UnreachableTarget& e) {
    std::printf("%-22s unreachable (limit %.6g)\n", "np_star", e.limit());
  }
  const auto contamination = ncjt::na_star_contamination(cfg, ncjt::DesignQuery{});
  std::printf("%-22s %d%s\n", "na_star_contamination", contamination.n_a,
              contamination.cap_reached ? " (cap reached)" : "");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"NCJT pilot-contamination simulator and design calculator"};
  app.require_subcommand(1);
  std::map<std::string, Flags> flags;
  for (const auto& name : ncjt::experiment_names()) {
    auto* cmd = app.add_subcommand(name, "run the " + name + " experiment");
    add_flags(cmd, flags[name]);
  }
  auto* summary = app.add_subcommand("summary", "energies, SNR and design numbers for one configuration");
  add_flags(summary, flags["summary"]);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kSpecError;
  }

  try {
    if (summary->parsed()) return run_summary(flags["summary"]);
    for (const auto& name : ncjt::experiment_names())
      if (app.got_subcommand(name)) return run_experiment(name, flags[name]);
  } catch (const ncjt::NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << " (achieved " << e.achieved() << ")\n";
    return kNumericalError;
  } catch (const std::invalid_argument& e) {
    std::cerr << "spec error: " << e.what() << "\n";
    return kSpecError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kNumericalError;
  }
  return kSpecError;
}
