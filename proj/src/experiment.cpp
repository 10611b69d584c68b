#include "ncjt/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

#include "ncjt/analytic.hpp"
#include "ncjt/design.hpp"
#include "ncjt/error.hpp"
#include "ncjt/montecarlo.hpp"
#include "ncjt/rng.hpp"

namespace ncjt {

using nlohmann::json;

namespace {

const std::set<std::string> kParams = {"lambda",        "alpha",    "r0",     "n_a",
                                       "n_p",           "sigma_w_sq", "snr0_db", "epsilon_trunc",
                                       "gamma_db",      "scan_cap", "np_cap", "symbols_per_trial"};
const std::set<std::string> kIntegerParams = {"n_a", "n_p", "scan_cap", "np_cap", "symbols_per_trial"};

const std::map<std::string, std::vector<std::string>> kQuantities = {
    {"energy-gap", {"exact", "approx"}},
    {"mse-vs-np", {"analytic", "montecarlo"}},
    {"snr-vs-np", {"fixed", "best"}},
    {"crossover-region", {"crossing"}},
    {"min-pilot-length", {"numeric", "approx", "best"}},
    {"optimal-cluster", {"optimal", "suboptimal"}},
    {"ser", {"fixed", "adaptive", "adaptive-best"}},
};

std::string fmt(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", x);
  return buf;
}

std::string clean(std::string s) {
  for (char& c : s)
    if (c == ',' || c == '\n' || c == '\r') c = ';';
  return s;
}

void check_param(const std::string& where, const std::string& key, const json& v) {
  if (!kParams.count(key)) throw std::invalid_argument(where + ": unknown parameter '" + key + "'");
  if (!v.is_number()) throw std::invalid_argument(where + ": parameter '" + key + "' must be a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) throw std::invalid_argument(where + ": parameter '" + key + "' must be finite");
  if (kIntegerParams.count(key) && x != std::floor(x))
    throw std::invalid_argument(where + ": parameter '" + key + "' must be an integer");
}

// Parameters of one (sweep value, series) point.
struct Point {
  json params;
  std::string quantity;

  bool has(const char* k) const { return params.contains(k); }
  double num(const char* k, double fallback) const { return has(k) ? params[k].get<double>() : fallback; }

  SystemConfig config() const {
    SystemConfig c;
    c.lambda = num("lambda", 1.0);
    c.alpha = num("alpha", c.alpha);
    c.r0 = num("r0", reference_distance_preset(c.lambda));
    c.n_a = static_cast<int>(num("n_a", 1));
    c.n_p = static_cast<int>(num("n_p", 1));
    c.epsilon_trunc = num("epsilon_trunc", c.epsilon_trunc);
    c.sigma_w_sq = num("sigma_w_sq", 0.0);
    c.validate();
    if (has("snr0_db")) c.sigma_w_sq = noise_for_snr0(c, db_to_linear(params["snr0_db"].get<double>()));
    return c;
  }
  double gamma() const { return db_to_linear(-num("gamma_db", 1.0)); }
  int scan_cap() const { return static_cast<int>(num("scan_cap", 1000)); }
  long np_cap() const { return static_cast<long>(num("np_cap", 1e6)); }
  double snr0() const {
    if (!has("snr0_db")) throw std::invalid_argument("this experiment needs snr0_db");
    return db_to_linear(params["snr0_db"].get<double>());
  }
};

Point make_point(const ExperimentSpec& spec, const json& series, std::optional<double> sweep) {
  Point p;
  p.params = spec.fixed;
  for (auto it = series.begin(); it != series.end(); ++it) {
    if (it.key() == "quantity") continue;
    p.params[it.key()] = it.value();
  }
  if (sweep) p.params[spec.sweep_param] = *sweep;
  const auto& q = kQuantities.at(spec.experiment);
  p.quantity = series.contains("quantity") ? series["quantity"].get<std::string>() : q.front();
  if (p.has("snr0_db") && p.has("sigma_w_sq"))
    throw std::invalid_argument("give either snr0_db or sigma_w_sq, not both");
  return p;
}

std::string series_name(const json& s) {
  std::string name = s.contains("quantity") ? s["quantity"].get<std::string>() : "";
  for (auto it = s.begin(); it != s.end(); ++it) {
    if (it.key() == "quantity" || it.key() == "name") continue;
    if (!name.empty()) name += ' ';
    name += it.key() + "=" + fmt(it.value().get<double>());
  }
  return name.empty() ? "default" : name;
}

struct Value {
  std::optional<double> value;
  std::optional<double> std_error;
  std::string status = "ok";
};

// Energy profiles are the expensive part of several experiments; share them
// across points with the same geometry.
class ProfileCache {
 public:
  const std::vector<ClusterEnergy>& get(const SystemConfig& cfg, int cap) {
    char key[160];
    std::snprintf(key, sizeof key, "%.17g/%.17g/%.17g/%d", cfg.lambda, cfg.alpha, cfg.r0, cap);
    auto it = cache_.find(key);
    if (it == cache_.end()) it = cache_.emplace(key, energy_profile(cfg, cap)).first;
    return it->second;
  }

 private:
  std::map<std::string, std::vector<ClusterEnergy>> cache_;
};

struct Context {
  const ExperimentSpec& spec;
  ProfileCache profiles;
};

McOptions mc_options(const ExperimentSpec& spec, std::uint64_t seed, const Point& p) {
  McOptions o;
  o.trials = spec.trials;
  o.seed = seed;
  o.threads = spec.threads;
  o.symbols_per_trial = static_cast<int>(p.num("symbols_per_trial", 10));
  return o;
}

// Adaptive pilot length: reach gamma * SNR0 with the cluster in cfg.
long adaptive_np(const SystemConfig& cfg, const Point& p) {
  return np_star_numeric(cfg, cluster_energy(cfg), p.gamma() * p.snr0(), p.np_cap());
}

Value compute(Context& ctx, const Point& p, std::uint64_t seed) {
  const auto& exp = ctx.spec.experiment;
  SystemConfig cfg = p.config();
  Value v;

  if (exp == "energy-gap") {
    const double phi = sigma_phi_sq(cfg);
    v.value = p.quantity == "approx" ? 1.0 - sigma_c_sq_approx(cfg) / phi : out_of_cluster_energy(cfg) / phi;
  } else if (exp == "mse-vs-np") {
    if (p.quantity == "analytic") {
      v.value = sigma_e_sq_asymptotic(cfg, cluster_energy(cfg));
    } else {
      const auto s = run_mse_trials(cfg, mc_options(ctx.spec, seed, p));
      v.value = s.mse;
      v.std_error = s.mse_stderr;
    }
  } else if (exp == "snr-vs-np") {
    if (p.quantity == "best") {
      const auto best = best_cluster_snr(ctx.profiles.get(cfg, p.scan_cap()), cfg.n_p, cfg.sigma_w_sq);
      v.value = linear_to_db(best.snr);
      v.status = "ok n_a=" + std::to_string(best.n_a);
    } else {
      v.value = linear_to_db(snr_analytic(cfg, cluster_energy(cfg)));
    }
  } else if (exp == "crossover-region") {
    p.snr0();
    const auto c = ncjt_crossover(cfg, static_cast<double>(p.np_cap()));
    if (c.n_p) {
      v.value = *c.n_p;
    } else if (c.dominant == Dominance::two_ap) {
      v.value = 1.0;
      v.status = "ok n_a=2 better for every n_p";
    } else {
      v.status = "error: n_a=1 better for every n_p up to " + fmt(static_cast<double>(p.np_cap()));
    }
  } else if (exp == "min-pilot-length") {
    const double target = p.gamma() * p.snr0();
    if (p.quantity == "best") {
      const auto& profile = ctx.profiles.get(cfg, p.scan_cap());
      long best = -1;
      int best_n = 0;
      for (std::size_t i = 0; i < profile.size(); ++i) {
        const auto c = cfg.with_cluster(static_cast<int>(i) + 1);
        try {
          const long n = np_star_numeric(c, profile[i], target, p.np_cap());
          if (best < 0 || n < best) {
            best = n;
            best_n = c.n_a;
          }
        } catch (const UnreachableTarget&) {
        }
      }
      if (best < 0) throw UnreachableTarget("no cluster size reaches the target", 0.0);
      v.value = static_cast<double>(best);
      v.status = "ok n_a=" + std::to_string(best_n);
    } else if (p.quantity == "approx") {
      const auto e = cluster_energy(cfg);
      const double g = target * cfg.sigma_w_sq / e.sigma_c_sq;
      if (!(g < 1.0)) throw UnreachableTarget("target above the perfect-CSI SNR of this cluster", e.sigma_c_sq / cfg.sigma_w_sq);
      const auto a = np_star_approx(g, cfg.n_a, e, cfg.sigma_w_sq);
      v.value = a.value;
      if (!a.valid) v.status = "ok outside-validity";
    } else {
      v.value = static_cast<double>(np_star_numeric(cfg, cluster_energy(cfg), target, p.np_cap()));
    }
  } else if (exp == "optimal-cluster") {
    const auto& profile = ctx.profiles.get(cfg, p.scan_cap());
    if (p.quantity == "suboptimal") {
      v.value = na_suboptimal(profile, p.gamma());
    } else {
      const auto c = na_star_contamination(profile);
      v.value = c.n_a;
      if (c.cap_reached) v.status = "ok cap-reached";
    }
  } else if (exp == "ser") {
    if (p.quantity != "fixed") {
      const long n_p = adaptive_np(cfg.with_cluster(1), p);
      cfg.n_p = static_cast<int>(std::min<long>(n_p, std::numeric_limits<int>::max()));
      cfg.n_a = p.quantity == "adaptive-best"
                    ? best_cluster_snr(ctx.profiles.get(cfg, p.scan_cap()), cfg.n_p, cfg.sigma_w_sq).n_a
                    : 1;
    }
    const auto s = run_ser_trials(cfg, mc_options(ctx.spec, seed, p));
    v.value = s.ser;
    v.std_error = s.ser_stderr;
    v.status = "ok n_a=" + std::to_string(cfg.n_a) + " n_p=" + std::to_string(cfg.n_p);
  }
  return v;
}

json resolved_line(const ExperimentSpec& spec, const json& series) {
  const Point p = make_point(spec, series, std::nullopt);
  json r = p.params;
  const double lambda = p.num("lambda", 1.0);
  if (!r.contains("lambda")) r["lambda"] = lambda;
  if (!r.contains("alpha")) r["alpha"] = SystemConfig{}.alpha;
  if (!r.contains("r0")) r["r0"] = reference_distance_preset(lambda);
  if (!r.contains("epsilon_trunc")) r["epsilon_trunc"] = SystemConfig{}.epsilon_trunc;
  r.erase(spec.sweep_param);
  r["quantity"] = p.quantity;
  r["series"] = series_name(series);
  return r;
}

std::vector<double> range(double lo, double hi, double step) {
  std::vector<double> v;
  for (int i = 0; lo + i * step <= hi + 1e-9 * std::abs(step); ++i)
    v.push_back(std::round((lo + i * step) * 1e9) / 1e9);
  return v;
}

}  // namespace

const std::vector<std::string>& experiment_names() {
  static const std::vector<std::string> names = {"energy-gap",       "mse-vs-np",       "snr-vs-np", "crossover-region",
                                                 "min-pilot-length", "optimal-cluster", "ser"};
  return names;
}

void ExperimentSpec::validate() const {
  if (!kQuantities.count(experiment)) throw std::invalid_argument("experiment: unknown name '" + experiment + "'");
  if (!kParams.count(sweep_param)) throw std::invalid_argument("sweep.param: unknown parameter '" + sweep_param + "'");
  if (sweep_values.empty()) throw std::invalid_argument("sweep.values: grid is empty");
  for (std::size_t i = 0; i < sweep_values.size(); ++i) {
    check_param("sweep.values", sweep_param, sweep_values[i]);
    if (i > 0 && !(sweep_values[i] > sweep_values[i - 1]))
      throw std::invalid_argument("sweep.values: grid must be strictly increasing");
  }
  if (!fixed.is_object()) throw std::invalid_argument("fixed: must be an object");
  for (auto it = fixed.begin(); it != fixed.end(); ++it) check_param("fixed", it.key(), it.value());
  if (series.empty()) throw std::invalid_argument("series: at least one series is required");
  const auto& allowed = kQuantities.at(experiment);
  for (const auto& s : series) {
    if (!s.is_object()) throw std::invalid_argument("series: entries must be objects");
    for (auto it = s.begin(); it != s.end(); ++it) {
      if (it.key() == "quantity") {
        if (!it.value().is_string() ||
            std::find(allowed.begin(), allowed.end(), it.value().get<std::string>()) == allowed.end())
          throw std::invalid_argument("series.quantity: '" + it.value().dump() + "' is not valid for " + experiment);
      } else {
        check_param("series", it.key(), it.value());
      }
    }
  }
  if (trials < 1) throw std::invalid_argument("trials: must be at least 1");
  // Resolve every point once so that config errors surface as spec errors.
  for (double x : sweep_values)
    for (const auto& s : series) make_point(*this, s, x).config();
}

json ExperimentSpec::to_json() const {
  json j;
  j["experiment"] = experiment;
  j["sweep"] = {{"param", sweep_param}, {"values", sweep_values}};
  j["fixed"] = fixed;
  j["series"] = series;
  j["output_path"] = output_path;
  j["seed"] = seed;
  j["trials"] = trials;
  return j;
}

ExperimentSpec ExperimentSpec::from_json(const json& j) {
  if (!j.is_object()) throw std::invalid_argument("spec: top level must be an object");
  static const std::set<std::string> keys = {"experiment", "sweep", "fixed", "series", "output_path", "seed", "trials"};
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!keys.count(it.key())) throw std::invalid_argument("spec: unknown field '" + it.key() + "'");
  ExperimentSpec s;
  try {
    if (j.contains("experiment")) s = preset(j.at("experiment").get<std::string>());
    if (j.contains("sweep")) {
      s.sweep_param = j.at("sweep").at("param").get<std::string>();
      s.sweep_values = j.at("sweep").at("values").get<std::vector<double>>();
    }
    if (j.contains("fixed")) s.fixed = j.at("fixed");
    if (j.contains("series")) s.series = j.at("series").get<std::vector<json>>();
    if (j.contains("output_path")) s.output_path = j.at("output_path").get<std::string>();
    if (j.contains("seed")) s.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("trials")) s.trials = j.at("trials").get<long>();
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("spec: ") + e.what());
  }
  return s;
}

ExperimentSpec preset(const std::string& experiment) {
  ExperimentSpec s;
  s.experiment = experiment;
  s.fixed = json::object();
  auto quantities = [](std::vector<json> base, const std::vector<std::string>& qs) {
    std::vector<json> out;
    for (const auto& b : base)
      for (const auto& q : qs) {
        json x = b;
        x["quantity"] = q;
        out.push_back(x);
      }
    return out;
  };
  if (experiment == "energy-gap") {
    s.sweep_param = "n_a";
    s.sweep_values = {1, 2, 3, 5, 7, 10, 15, 20, 30, 50, 70, 100, 150, 200, 300, 500, 700, 1000};
    std::vector<json> base;
    for (double a : {2.1, 2.5, 3.0, 3.67, 4.0, 5.0}) base.push_back({{"alpha", a}});
    s.series = quantities(base, {"exact", "approx"});
  } else if (experiment == "mse-vs-np") {
    s.sweep_param = "n_p";
    s.sweep_values = {5, 10, 20, 30, 50, 70, 100};
    s.fixed = {{"alpha", 3.67}};
    s.trials = 100000;
    std::vector<json> base;
    for (double snr : {0.0, 40.0})
      for (int n : {1, 2, 4, 8}) base.push_back({{"snr0_db", snr}, {"n_a", n}});
    s.series = quantities(base, {"analytic", "montecarlo"});
  } else if (experiment == "snr-vs-np") {
    s.sweep_param = "n_p";
    s.sweep_values = {1, 2, 3, 5, 7, 10, 20, 30, 50, 70, 100, 200, 300, 500, 1000};
    s.fixed = {{"snr0_db", 50.0}};
    for (double a : {3.67, 5.0}) {
      for (int n : {1, 2, 4}) s.series.push_back({{"alpha", a}, {"n_a", n}, {"quantity", "fixed"}});
      s.series.push_back({{"alpha", a}, {"quantity", "best"}});
    }
  } else if (experiment == "crossover-region") {
    s.sweep_param = "snr0_db";
    s.sweep_values = range(-10.0, 60.0, 2.5);
    for (double a : {2.5, 3.0, 3.5, 3.67, 4.0, 4.5, 5.0}) s.series.push_back({{"alpha", a}});
  } else if (experiment == "min-pilot-length") {
    s.sweep_param = "snr0_db";
    s.sweep_values = range(0.0, 60.0, 2.5);
    s.fixed = {{"gamma_db", 1.0}};
    for (double a : {3.67, 5.0}) {
      for (int n : {1, 2}) {
        s.series.push_back({{"alpha", a}, {"n_a", n}, {"quantity", "numeric"}});
        s.series.push_back({{"alpha", a}, {"n_a", n}, {"quantity", "approx"}});
      }
      s.series.push_back({{"alpha", a}, {"quantity", "best"}});
    }
  } else if (experiment == "optimal-cluster") {
    s.sweep_param = "alpha";
    s.sweep_values = range(2.1, 5.0, 0.1);
    s.sweep_values.insert(std::upper_bound(s.sweep_values.begin(), s.sweep_values.end(), 3.67), 3.67);
    s.series = {{{"quantity", "optimal"}},
                {{"quantity", "suboptimal"}, {"gamma_db", 3.0}},
                {{"quantity", "suboptimal"}, {"gamma_db", 10.0}}};
  } else if (experiment == "ser") {
    s.sweep_param = "snr0_db";
    s.sweep_values = range(10.0, 50.0, 5.0);
    s.fixed = {{"alpha", 3.67}, {"gamma_db", 1.0}, {"symbols_per_trial", 10}};
    s.trials = 100000;
    s.series = {{{"quantity", "fixed"}, {"n_a", 1}, {"n_p", 50}},
                {{"quantity", "adaptive"}},
                {{"quantity", "adaptive-best"}}};
  } else {
    throw std::invalid_argument("experiment: unknown name '" + experiment + "'");
  }
  return s;
}

void override_param(ExperimentSpec& spec, const std::string& param, double value) {
  check_param("flag", param, value);
  spec.fixed[param] = value;
  // The two noise parameterizations are exclusive.
  if (param == "snr0_db") spec.fixed.erase("sigma_w_sq");
  if (param == "sigma_w_sq") spec.fixed.erase("snr0_db");
  for (auto& s : spec.series) {
    s.erase(param);
    if (param == "snr0_db") s.erase("sigma_w_sq");
    if (param == "sigma_w_sq") s.erase("snr0_db");
  }
  if (spec.sweep_param == param) {
    spec.sweep_values = {value};
    spec.fixed.erase(param);
  }
}

void canonicalize_series(ExperimentSpec& spec) {
  std::vector<json> unique;
  for (const auto& s : spec.series)
    if (std::find(unique.begin(), unique.end(), s) == unique.end()) unique.push_back(s);
  spec.series = std::move(unique);
}

CurveOutput execute(const ExperimentSpec& spec) {
  spec.validate();
  CurveOutput out;
  out.spec = spec;
  Context ctx{spec, {}};
  for (const auto& s : spec.series) out.resolved.push_back(resolved_line(spec, s).dump());
  std::uint64_t index = 0;
  for (double x : spec.sweep_values) {
    for (const auto& s : spec.series) {
      CurveRow row;
      row.sweep = x;
      row.series = series_name(s);
      const std::uint64_t seed = mix64(spec.seed ^ mix64(++index));
      try {
        const Value v = compute(ctx, make_point(spec, s, x), seed);
        row.value = v.value;
        row.std_error = v.std_error;
        row.status = v.status;
        if (row.value && !std::isfinite(*row.value)) {
          row.value.reset();
          row.status = "error: non-finite value";
        }
      } catch (const std::exception& e) {
        row.status = "error: " + std::string(e.what());
      }
      out.rows.push_back(std::move(row));
    }
  }
  return out;
}

std::string CurveOutput::render() const {
  std::ostringstream o;
  o << "# ncjt " << spec.experiment << "\n";
  o << "# version: " << kVersion << "\n";
  o << "# spec: " << spec.to_json().dump() << "\n";
  for (const auto& r : resolved) o << "# resolved: " << r << "\n";
  o << "sweep,series,value,stderr,status\n";
  for (const auto& r : rows) {
    o << fmt(r.sweep) << ',' << clean(r.series) << ',' << (r.value ? fmt(*r.value) : "") << ','
      << (r.std_error ? fmt(*r.std_error) : "") << ',' << clean(r.status) << "\n";
  }
  return o.str();
}

ExperimentSpec spec_from_output(std::istream& in) {
  const std::string tag = "# spec: ";
  for (std::string line; std::getline(in, line);) {
    if (line.rfind(tag, 0) == 0) {
      json j;
      try {
        j = json::parse(line.substr(tag.size()));
      } catch (const json::exception& e) {
        throw std::invalid_argument(std::string("output header: ") + e.what());
      }
      return ExperimentSpec::from_json(j);
    }
    if (line.empty() || line[0] != '#') break;
  }
  throw std::invalid_argument("output header: no spec line found");
}

}  // namespace ncjt
