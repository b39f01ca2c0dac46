#pragma once

// Run configuration, perturbation generators, single runs with modulation
// tracking and diagnostics, amplitude sweeps, and CSV/JSON output.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <future>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <openssl/evp.h>

#include <json.hpp>

#include "gplab/diagnostics.hpp"
#include "gplab/errors.hpp"
#include "gplab/hydro.hpp"
#include "gplab/modulation.hpp"
#include "gplab/soliton.hpp"

namespace gplab {

using Json = nlohmann::json;

/// Invalid run configuration.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct PerturbationSpec {
  /// gaussian_eta, gaussian_v, second_soliton or random_localized.
  std::string kind = "gaussian_eta";
  /// X-norm of the added perturbation (unused by second_soliton).
  double amplitude = 0.0;
  /// Gaussian width w in exp(-(x - x0)^2 / w^2), or envelope width.
  double width = 2.0;
  /// Offset of the perturbation from the soliton center.
  double offset = 3.0;
  std::uint64_t seed = 0;
  /// Speed and center of the added soliton (second_soliton only).
  double c2 = 1.35;
  double a2 = -25.0;
};

struct DiagnosticsSpec {
  bool monotonicity = true;
  std::vector<double> R_list{-10.0, -5.0, 0.0, 5.0, 10.0};
  /// Half-width of the window around a(t) for the local perturbation norm.
  double window = 20.0;
};

struct RunConfig {
  double c0 = 1.0;
  double a0 = 0.0;
  double L = 60.0;
  int N = 1024;
  double T = 10.0;
  std::optional<double> dt;
  double cadence = kDefaultCadence;
  double guard = kDefaultGuard;
  PerturbationSpec perturbation;
  DiagnosticsSpec diagnostics;
  std::string out;

  /// Range checks; throws ConfigError naming the offending field.
  void validate() const {
    auto fail = [](const std::string& m) { throw ConfigError("config: " + m); };
    if (!std::isfinite(c0) || c0 == 0.0 || std::abs(c0) >= kSqrt2) fail("c0 must satisfy 0 < |c0| < sqrt(2)");
    if (!std::isfinite(a0)) fail("a0 must be finite");
    if (!(L > 0.0) || !std::isfinite(L)) fail("grid.L must be positive");
    if (N < 16 || N % 2 != 0) fail("grid.N must be even and >= 16");
    if (!(T >= 0.0) || !std::isfinite(T)) fail("T must be finite and >= 0");
    if (dt && !(*dt > 0.0)) fail("dt must be positive");
    if (!(cadence > 0.0)) fail("cadence must be positive");
    if (!(guard > 0.0 && guard < 1.0)) fail("guard must lie in (0, 1)");
    const auto& p = perturbation;
    if (p.kind != "gaussian_eta" && p.kind != "gaussian_v" && p.kind != "second_soliton" &&
        p.kind != "random_localized")
      fail("perturbation.kind '" + p.kind + "' is not one of gaussian_eta, gaussian_v, second_soliton, random_localized");
    if (!(p.amplitude >= 0.0) || !std::isfinite(p.amplitude)) fail("perturbation.amplitude must be >= 0");
    if (!(p.width > 0.0)) fail("perturbation.width must be positive");
    if (!std::isfinite(p.offset)) fail("perturbation.offset must be finite");
    if (p.kind == "second_soliton" && (p.c2 == 0.0 || !(std::abs(p.c2) < kSqrt2)))
      fail("perturbation.c2 must satisfy 0 < |c2| < sqrt(2)");
    if (!(diagnostics.window > 0.0)) fail("diagnostics.window must be positive");
  }
};

inline Json to_json(const RunConfig& c) {
  Json j;
  j["c0"] = c.c0;
  j["a0"] = c.a0;
  j["grid"] = {{"L", c.L}, {"N", c.N}};
  j["T"] = c.T;
  j["dt"] = c.dt ? Json(*c.dt) : Json(nullptr);
  j["cadence"] = c.cadence;
  j["guard"] = c.guard;
  const auto& p = c.perturbation;
  j["perturbation"] = {{"kind", p.kind},     {"amplitude", p.amplitude}, {"width", p.width}, {"offset", p.offset},
                       {"seed", p.seed},     {"c2", p.c2},               {"a2", p.a2}};
  j["diagnostics"] = {{"monotonicity", c.diagnostics.monotonicity},
                      {"R_list", c.diagnostics.R_list},
                      {"window", c.diagnostics.window}};
  j["out"] = c.out;
  return j;
}

/// Parses a config object; missing fields take their defaults, unknown fields are rejected.
inline RunConfig config_from_json(const Json& j) {
  if (!j.is_object()) throw ConfigError("config: top level must be an object");
  RunConfig c;
  auto check_keys = [](const Json& obj, std::initializer_list<const char*> keys, const std::string& where) {
    for (auto it = obj.begin(); it != obj.end(); ++it)
      if (std::none_of(keys.begin(), keys.end(), [&](const char* k) { return it.key() == k; }))
        throw ConfigError("config: unknown field '" + where + it.key() + "'");
  };
  try {
    check_keys(j, {"c0", "a0", "grid", "T", "dt", "cadence", "guard", "perturbation", "diagnostics", "out"}, "");
    c.c0 = j.value("c0", c.c0);
    c.a0 = j.value("a0", c.a0);
    if (j.contains("grid")) {
      check_keys(j["grid"], {"L", "N"}, "grid.");
      c.L = j["grid"].value("L", c.L);
      c.N = j["grid"].value("N", c.N);
    }
    c.T = j.value("T", c.T);
    if (j.contains("dt") && !j["dt"].is_null()) c.dt = j["dt"].get<double>();
    c.cadence = j.value("cadence", c.cadence);
    c.guard = j.value("guard", c.guard);
    if (j.contains("perturbation")) {
      const Json& p = j["perturbation"];
      check_keys(p, {"kind", "amplitude", "width", "offset", "seed", "c2", "a2"}, "perturbation.");
      auto& q = c.perturbation;
      q.kind = p.value("kind", q.kind);
      q.amplitude = p.value("amplitude", q.amplitude);
      q.width = p.value("width", q.width);
      q.offset = p.value("offset", q.offset);
      q.seed = p.value("seed", q.seed);
      q.c2 = p.value("c2", q.c2);
      q.a2 = p.value("a2", q.a2);
    }
    if (j.contains("diagnostics")) {
      const Json& d = j["diagnostics"];
      check_keys(d, {"monotonicity", "R_list", "window"}, "diagnostics.");
      c.diagnostics.monotonicity = d.value("monotonicity", c.diagnostics.monotonicity);
      c.diagnostics.R_list = d.value("R_list", c.diagnostics.R_list);
      c.diagnostics.window = d.value("window", c.diagnostics.window);
    }
    c.out = j.value("out", c.out);
  } catch (const Json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  c.validate();
  return c;
}

inline RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open " + path.string());
  Json j;
  try {
    in >> j;
  } catch (const Json::exception& e) {
    throw ConfigError("config: " + path.string() + ": " + e.what());
  }
  return config_from_json(j);
}

/// First 16 hex digits of the SHA-256 of a canonical (sorted-key) JSON dump.
inline std::string json_hash(const Json& j) {
  const std::string text = j.dump();
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_Digest(text.data(), text.size(), digest, &len, EVP_sha256(), nullptr);
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned i = 0; i < 8; ++i) {
    out += hex[digest[i] >> 4];
    out += hex[digest[i] & 15];
  }
  return out;
}

/// Hash of the resolved config excluding the output directory.
inline std::string config_hash(const RunConfig& c) {
  Json j = to_json(c);
  j.erase("out");
  return json_hash(j);
}

// Perturbations.

namespace detail {

inline Field gaussian(const Grid& g, double center, double width) {
  Field f(g.size());
  for (int j = 0; j < g.size(); ++j) {
    const double y = g.wrapped_offset(g.node(j), center) / width;
    f[j] = std::exp(-y * y);
  }
  return f;
}

// Seeded random field with the top third of the spectrum removed, under a
// Gaussian envelope.
inline Field random_localized(const Grid& g, std::mt19937_64& rng, double center, double width) {
  std::normal_distribution<double> normal;
  Field f(g.size());
  for (int j = 0; j < g.size(); ++j) f[j] = normal(rng);
  f = dealias(g, f);
  return f.cwiseProduct(gaussian(g, center, width));
}

}  // namespace detail

/// Initial state Q_{c0, a0} plus the configured perturbation. Throws GuardError
/// if the result leaves max(eta) < 1 - guard.
inline HydroState initial_state(const RunConfig& cfg, const Grid& g) {
  const SolitonParams base(cfg.c0, cfg.a0);
  HydroState s = soliton_state(base, g);
  const auto& p = cfg.perturbation;
  const double center = cfg.a0 + p.offset;
  PairField add = PairField::zero(g.size());
  if (p.kind == "gaussian_eta") {
    add.first = detail::gaussian(g, center, p.width);
  } else if (p.kind == "gaussian_v") {
    add.second = detail::gaussian(g, center, p.width);
  } else if (p.kind == "random_localized") {
    std::mt19937_64 rng(p.seed);
    add.first = detail::random_localized(g, rng, center, p.width);
    add.second = detail::random_localized(g, rng, center, p.width);
  } else if (p.kind == "second_soliton") {
    add = soliton_state(SolitonParams(p.c2, p.a2), g).pair();
  }
  if (p.kind != "second_soliton") {
    const double n = norm_X(g, add);
    add *= (n > 0.0 && p.amplitude > 0.0) ? p.amplitude / n : 0.0;
  }
  s = HydroState(s.pair() + add, 0.0);
  const double top = s.eta.maxCoeff();
  if (!(top < 1.0 - cfg.guard)) throw GuardError("initial_state: perturbed state violates max(eta) < 1 - guard", top);
  return s;
}

// Output.

/// Fixed-format number with 17 significant digits.
inline std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, const std::string& hash, const std::vector<std::string>& columns)
      : out_(path) {
    if (!out_) throw std::runtime_error("cannot write " + path.string());
    out_ << "# config_hash=" << hash << "\n";
    for (std::size_t i = 0; i < columns.size(); ++i) out_ << (i ? "," : "") << columns[i];
    out_ << "\n";
  }
  void row(const std::vector<double>& v) {
    for (std::size_t i = 0; i < v.size(); ++i) out_ << (i ? "," : "") << fmt(v[i]);
    out_ << "\n";
  }

 private:
  std::ofstream out_;
};

inline void write_json(const std::filesystem::path& path, const Json& j) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << j.dump(2) << "\n";
}

struct RunSummary {
  /// ok, guard, non_finite or modulation_error.
  std::string status = "ok";
  std::string message;
  std::string config_hash;
  double t_final = 0.0;
  double max_drift_E = 0.0;
  double max_drift_P = 0.0;
  double sup_eps_X = 0.0;
  double sup_c_prime = 0.0;
  double sup_a_prime_minus_c = 0.0;
  double c_final = 0.0;
  /// Mean and standard deviation of c over the last quarter of the run.
  double c_tail_mean = 0.0;
  double c_tail_std = 0.0;
  /// Mean of a' over the last quarter.
  double a_prime_tail_mean = 0.0;
  /// Perturbation norm on |x - a| <= window at the final time and its maximum after the first eighth.
  double window_eps_final = 0.0;
  double window_eps_post_max = 0.0;
  long monotonicity_violations = 0;
  long monotonicity_pairs = 0;
  long differential_violations = 0;
  double identity_defect = 0.0;
  double localization_final = 0.0;

  Json to_json() const {
    return {{"status", status},
            {"message", message},
            {"config_hash", config_hash},
            {"t_final", t_final},
            {"max_drift_E", max_drift_E},
            {"max_drift_P", max_drift_P},
            {"sup_eps_X", sup_eps_X},
            {"sup_c_prime", sup_c_prime},
            {"sup_a_prime_minus_c", sup_a_prime_minus_c},
            {"c_final", c_final},
            {"c_tail_mean", c_tail_mean},
            {"c_tail_std", c_tail_std},
            {"a_prime_tail_mean", a_prime_tail_mean},
            {"window_eps_final", window_eps_final},
            {"window_eps_post_max", window_eps_post_max},
            {"monotonicity_violations", monotonicity_violations},
            {"monotonicity_pairs", monotonicity_pairs},
            {"differential_violations", differential_violations},
            {"identity_defect", identity_defect},
            {"localization_final", localization_final}};
  }
};

struct RunOutput {
  RunConfig config;
  Grid grid;
  Trajectory trajectory;
  ModulationTrack track;
  std::vector<double> window_eps;
  std::optional<MonotonicityReport> monotonicity;
  RunSummary summary;
};

namespace detail {

inline std::pair<double, double> mean_std(const std::vector<double>& v) {
  if (v.empty()) return {0.0, 0.0};
  double m = 0.0;
  for (double x : v) m += x;
  m /= static_cast<double>(v.size());
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return {m, std::sqrt(s / static_cast<double>(v.size()))};
}

inline void write_outputs(const RunOutput& r, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  const std::string& h = r.summary.config_hash;
  Json cfg = to_json(r.config);
  cfg["config_hash"] = h;
  write_json(dir / "config.json", cfg);

  CsvWriter cons(dir / "conservation.csv", h, {"t", "E", "P", "drift_E", "drift_P"});
  for (const auto& d : r.trajectory.drift) cons.row({d.t, d.E, d.P, d.drift_E, d.drift_P});

  CsvWriter mod(dir / "modulation.csv", h,
                {"t", "a", "c", "a_prime", "c_prime", "eps_norm_X", "eps_window_X", "r1", "r2"});
  const auto& tr = r.track;
  for (std::size_t i = 0; i < tr.points.size(); ++i) {
    const auto& p = tr.points[i];
    mod.row({p.t, p.a, p.c, tr.a_prime[i], tr.c_prime[i], p.eps_norm_X, r.window_eps[i], p.r1, p.r2});
  }

  if (r.monotonicity) {
    CsvWriter mom(dir / "momentum.csv", h, {"t", "R", "I_R"});
    const auto& m = *r.monotonicity;
    for (std::size_t i = 0; i < m.t.size(); ++i)
      for (std::size_t k = 0; k < m.R.size(); ++k) mom.row({m.t[i], m.R[k], m.I[k][i]});
    Json viol = Json::array();
    for (const auto& v : m.violations) viol.push_back({{"R", v.R}, {"t0", v.t0}, {"t1", v.t1}, {"gap", v.gap}});
    write_json(dir / "monotonicity.json", {{"config_hash", h},
                                           {"pairs_checked", m.pairs_checked},
                                           {"min_gap", m.min_gap},
                                           {"violations", viol},
                                           {"differential_checked", m.differential_checked},
                                           {"differential_violations", m.differential_violations},
                                           {"min_differential_margin", m.min_differential_margin}});
  }
  write_json(dir / "summary.json", r.summary.to_json());
}

}  // namespace detail

/// Builds the initial state, integrates, tracks (a, c), runs the enabled
/// diagnostics and, when config.out is set, writes config.json,
/// conservation.csv, modulation.csv, momentum.csv, monotonicity.json and
/// summary.json. Solver and modulation failures are reported in the summary
/// status with the outputs computed up to that point.
inline RunOutput run_simulation(const RunConfig& cfg) {
  cfg.validate();
  RunOutput r{cfg, Grid(cfg.L, cfg.N), {}, {}, {}, std::nullopt, {}};
  RunSummary& s = r.summary;
  s.config_hash = config_hash(cfg);
  const Grid& g = r.grid;

  IntegrateOptions io;
  io.dt = cfg.dt;
  io.cadence = cfg.cadence;
  io.sigma_guard = cfg.guard;
  r.trajectory = integrate(g, initial_state(cfg, g), cfg.T, io);
  const Trajectory& tr = r.trajectory;
  if (!tr.ok()) {
    s.status = tr.error->kind == RunError::Kind::guard ? "guard" : "non_finite";
    s.message = tr.error->message;
  }
  s.t_final = tr.final_state().t;
  s.max_drift_E = tr.max_drift_E();
  s.max_drift_P = tr.max_drift_P();

  try {
    r.track = track(g, tr.states);
  } catch (const ModulationError& e) {
    if (s.status == "ok") {
      s.status = "modulation_error";
      s.message = e.what();
    }
  }
  const auto& pts = r.track.points;
  if (!pts.empty()) {
    s.sup_eps_X = r.track.sup_eps_norm();
    s.sup_c_prime = r.track.sup_c_prime();
    s.sup_a_prime_minus_c = r.track.sup_a_prime_minus_c();
    s.c_final = pts.back().c;
    const double t_end = pts.back().t;
    std::vector<double> c_tail, ap_tail;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      // eps is stored in the frame co-moving with a(t).
      r.window_eps.push_back(norm_X_window(g, pts[i].eps, 0.0, cfg.diagnostics.window));
      if (pts[i].t >= 0.75 * t_end) {
        c_tail.push_back(pts[i].c);
        ap_tail.push_back(r.track.a_prime[i]);
      }
      if (pts[i].t >= 0.125 * t_end) s.window_eps_post_max = std::max(s.window_eps_post_max, r.window_eps.back());
    }
    s.window_eps_final = r.window_eps.back();
    std::tie(s.c_tail_mean, s.c_tail_std) = detail::mean_std(c_tail);
    s.a_prime_tail_mean = detail::mean_std(ap_tail).first;

    if (cfg.diagnostics.monotonicity && pts.size() == tr.states.size()) {
      MonotonicityConfig mc = MonotonicityConfig::for_speed(cfg.c0);
      mc.R_list = cfg.diagnostics.R_list;
      r.monotonicity = monotonicity_check(g, tr.states, r.track, mc);
      s.monotonicity_violations = static_cast<long>(r.monotonicity->violations.size());
      s.monotonicity_pairs = r.monotonicity->pairs_checked;
      s.differential_violations = r.monotonicity->differential_violations;
      if (tr.states.size() >= 5)
        for (double R : mc.R_list)
          s.identity_defect =
              std::max(s.identity_defect, didt_identity_check(g, tr.states, r.track, R, 0.0, mc.nu).max_defect);
      s.localization_final = weighted_norm(g, tr.final_state().pair(), mc.nu, pts.back().a);
    }
  }
  if (!cfg.out.empty()) detail::write_outputs(r, cfg.out);
  return r;
}

struct SweepRow {
  double amplitude;
  RunSummary summary;
};

struct SweepResult {
  std::vector<SweepRow> rows;
  /// Least-squares slopes of log sup ||eps||_X and log sup |c'| against log amplitude.
  double slope_eps = 0.0;
  double slope_c_prime = 0.0;
};

/// Least-squares slope of log y against log x.
inline double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += std::log(x[i]);
    my += std::log(y[i]);
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = std::log(x[i]) - mx;
    sxy += dx * (std::log(y[i]) - my);
    sxx += dx * dx;
  }
  return sxy / sxx;
}

/// Runs the base config at each amplitude (members concurrently) and fits the
/// scaling slopes. Members write to out/alpha_<i> when base.out is set.
inline SweepResult run_scaling_sweep(const RunConfig& base, const std::vector<double>& amplitudes) {
  if (amplitudes.size() < 3) throw DomainError("run_scaling_sweep: at least three amplitudes are required");
  for (double a : amplitudes)
    if (!(a > 0.0)) throw DomainError("run_scaling_sweep: amplitude " + fmt(a) + " is not a valid fit point");
  std::vector<std::future<RunOutput>> jobs;
  for (std::size_t i = 0; i < amplitudes.size(); ++i) {
    RunConfig c = base;
    c.perturbation.amplitude = amplitudes[i];
    if (!base.out.empty()) c.out = (std::filesystem::path(base.out) / ("alpha_" + std::to_string(i))).string();
    jobs.push_back(std::async(std::launch::async, [c] { return run_simulation(c); }));
  }
  SweepResult res;
  std::vector<double> eps, cp;
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    RunOutput r = jobs[i].get();
    if (r.summary.status != "ok")
      throw std::runtime_error("run_scaling_sweep: member alpha = " + fmt(amplitudes[i]) + " failed (" +
                               r.summary.status + "): " + r.summary.message);
    res.rows.push_back({amplitudes[i], r.summary});
    eps.push_back(r.summary.sup_eps_X);
    cp.push_back(r.summary.sup_c_prime);
  }
  res.slope_eps = loglog_slope(amplitudes, eps);
  res.slope_c_prime = loglog_slope(amplitudes, cp);
  if (!base.out.empty()) {
    std::filesystem::create_directories(base.out);
    CsvWriter w(std::filesystem::path(base.out) / "sweep.csv", config_hash(base),
                {"amplitude", "sup_eps_X", "sup_c_prime", "c_final"});
    for (const auto& row : res.rows)
      w.row({row.amplitude, row.summary.sup_eps_X, row.summary.sup_c_prime, row.summary.c_final});
  }
  return res;
}

}  // namespace gplab
