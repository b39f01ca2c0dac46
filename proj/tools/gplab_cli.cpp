// Command-line front end: soliton profiles, runs, modulation, spectra,
// coercivity, monotonicity, virial checks, sweeps and the acceptance battery.
// Exit status: 0 success, 1 failed run or criterion, 2 invalid input.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "gplab/gplab.hpp"

namespace fs = std::filesystem;
using namespace gplab;

namespace {

struct Common {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::string level = "fast";
};

RunConfig resolve_config(const Common& o) {
  RunConfig c = o.config.empty() ? RunConfig{} : load_config(o.config);
  if (!o.out.empty()) c.out = o.out;
  if (o.seed) c.perturbation.seed = *o.seed;
  c.validate();
  return c;
}

void emit(const Json& j, const std::string& out_dir, const std::string& name) {
  std::cout << j.dump(2) << std::endl;
  if (!out_dir.empty()) {
    fs::create_directories(out_dir);
    write_json(fs::path(out_dir) / name, j);
  }
}

int report_run(const RunOutput& r) {
  std::cout << r.summary.to_json().dump(2) << std::endl;
  return r.summary.status == "ok" ? 0 : 1;
}

int cmd_soliton(const Common& o, double c, double a, double L, int N) {
  const SolitonParams p(c, a);
  const Grid g(L, N);
  const SolitonProfile q = eval_hydro(p, g);
  const ProfileResidual res = profile_residual(p, g);
  const SolitonConserved cc = conserved_closed(c);
  const Json j{{"c", c},
               {"a", a},
               {"grid", {{"L", L}, {"N", N}}},
               {"energy_closed", cc.energy},
               {"energy_quadrature", conserved(g, soliton_state(p, g)).E},
               {"momentum", cc.momentum},
               {"dmomentum_dc", cc.dmomentum_dc},
               {"residual_second_order", res.second_order},
               {"residual_first_integral", res.first_integral},
               {"residual_travelling_wave", res.travelling_wave},
               {"under_resolved", res.under_resolved}};
  emit(j, o.out, "soliton.json");
  if (!o.out.empty()) {
    Json cfg{{"c", c}, {"a", a}, {"grid", {{"L", L}, {"N", N}}}};
    CsvWriter w(fs::path(o.out) / "profile.csv", json_hash(cfg), {"x", "eta", "v", "d_eta"});
    for (int i = 0; i < g.size(); ++i) w.row({g.node(i), q.eta[i], q.vee[i], q.d_eta[i]});
  }
  return 0;
}

int cmd_spectrum(const Common& o, double c, const std::string& op, double resolution) {
  const SolitonParams p(c);
  const Grid g = operator_grid(c, resolution);
  const SpectrumReport r = op == "T" ? spectrum_Tc(p, g) : spectrum_Hc(p, g);
  const Json j{{"operator", op},
               {"c", c},
               {"grid", {{"L", g.half_length()}, {"N", g.size()}}},
               {"count_negative", r.count_negative},
               {"zero_eigenvalue", r.zero_eigenvalue},
               {"kernel_alignment", r.kernel_alignment},
               {"kernel_residual", r.kernel_residual},
               {"essential_edge", r.essential_edge},
               {"first_positive", r.first_positive},
               {"gap", r.gap}};
  emit(j, o.out, "spectrum.json");
  if (!o.out.empty()) {
    CsvWriter w(fs::path(o.out) / "eigenvalues.csv", json_hash(j), {"index", "eigenvalue"});
    for (Eigen::Index i = 0; i < r.eigenvalues.size(); ++i) w.row({static_cast<double>(i), r.eigenvalues[i]});
  }
  return 0;
}

int cmd_coercivity(const Common& o, const std::vector<double>& speeds, bool inverse_bound) {
  Json arr = Json::array();
  bool all = true;
  for (double c : speeds) {
    const CoercivityReport r = coercivity_Lambda(SolitonParams(c), operator_grid(c), inverse_bound);
    Json e{{"c", c}, {"Lambda", r.Lambda}, {"unconstrained", r.unconstrained}, {"positive", r.positive}};
    if (r.inverse_bound) e["inverse_bound"] = *r.inverse_bound;
    arr.push_back(e);
    all = all && r.positive;
  }
  emit(Json{{"coercivity", arr}}, o.out, "coercivity.json");
  return all ? 0 : 1;
}

int cmd_virial(const Common& o, bool forced, double T, double dt) {
  const Grid g(40.0, 512);
  ComplexField u0(g.size());
  for (int j = 0; j < g.size(); ++j) {
    const double y = g.node(j) + 1.0;
    u0[j] = std::exp(-0.5 * y * y) * std::exp(std::complex<double>(0.0, 0.7 * g.node(j)));
  }
  const Forcing f = forced ? Forcing([](const Grid& gr, double t) {
    ComplexField v(gr.size());
    for (int j = 0; j < gr.size(); ++j) {
      const double y = gr.node(j) - 1.0;
      v[j] = std::complex<double>(0.3 * std::cos(2.0 * t), 0.1) * std::exp(-y * y);
    }
    return v;
  })
                           : no_forcing();
  VirialOptions opt;
  opt.dt = dt;
  const VirialResult r =
      virial_identity_check(g, u0, f, SpatialWeight::tanh_weight(2.0), TimeCutoff::parabola(0.0, T), opt);
  emit(Json{{"forced", forced},
            {"T", T},
            {"dt", dt},
            {"lhs", r.lhs},
            {"rhs", r.rhs},
            {"defect", r.defect},
            {"terms", r.terms},
            {"warnings", r.warnings}},
       o.out, "virial.json");
  return 0;
}

int cmd_sweep(const Common& o, const std::vector<double>& amplitudes) {
  const SweepResult r = run_scaling_sweep(resolve_config(o), amplitudes);
  Json rows = Json::array();
  for (const auto& row : r.rows)
    rows.push_back({{"amplitude", row.amplitude},
                    {"sup_eps_X", row.summary.sup_eps_X},
                    {"sup_c_prime", row.summary.sup_c_prime},
                    {"c_final", row.summary.c_final}});
  std::cout << Json{{"rows", rows}, {"slope_eps", r.slope_eps}, {"slope_c_prime", r.slope_c_prime}}.dump(2)
            << std::endl;
  return 0;
}

int cmd_verify(const Common& o) {
  const VerificationReport rep =
      run_verification_suite(parse_level(o.level), [](const CriterionResult& r) { std::cout << format_result(r) << std::endl; });
  int passed = 0;
  for (const auto& c : rep.criteria) passed += c.pass;
  std::printf("%d/%zu criteria passed at level %s in %.1f s\n", passed, rep.criteria.size(), o.level.c_str(),
              rep.seconds);
  if (!o.out.empty()) {
    fs::create_directories(o.out);
    write_json(fs::path(o.out) / "verification.json", rep.to_json());
  }
  return rep.all_pass() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"gplab: Gross-Pitaevskii dark soliton laboratory"};
  app.require_subcommand(1);
  Common o;
  std::uint64_t seed = 0;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", o.config, "JSON run configuration")->check(CLI::ExistingFile);
    sub->add_option("--out", o.out, "output directory");
    sub->add_option("--seed", seed, "seed for random perturbations");
    sub->add_option("--level", o.level, "verification level")->check(CLI::IsMember({"fast", "full"}));
  };

  double c = 1.0, a = 0.0, L = 60.0, resolution = 8.0, T = 2.0, dt = 2e-3;
  int N = 1024;
  std::string op = "H";
  bool inverse_bound = false, forced = false;
  std::vector<double> speeds{0.3, 0.7, 1.0, 1.3};
  std::vector<double> amplitudes{0.04, 0.02, 0.01};

  auto* soliton = app.add_subcommand("soliton", "profile, conserved quantities and residuals of Q_{c,a}");
  add_common(soliton);
  soliton->add_option("--c", c, "speed");
  soliton->add_option("--a", a, "center");
  soliton->add_option("--L", L, "half box length");
  soliton->add_option("--N", N, "grid points");

  auto* simulate = app.add_subcommand("simulate", "integrate a configured run with all diagnostics");
  add_common(simulate);
  auto* modulate = app.add_subcommand("modulate", "integrate a configured run and track (a, c) only");
  add_common(modulate);
  auto* mono = app.add_subcommand("monotonicity", "integrate a configured run and check the momentum bounds");
  add_common(mono);

  auto* spectrum = app.add_subcommand("spectrum", "discrete spectrum of H_c or T_c");
  add_common(spectrum);
  spectrum->add_option("--c", c, "speed");
  spectrum->add_option("--operator", op, "H or T")->check(CLI::IsMember({"H", "T"}));
  spectrum->add_option("--resolution", resolution, "grid points per pole distance");

  auto* coerc = app.add_subcommand("coercivity", "constrained coercivity constant of H_c");
  add_common(coerc);
  coerc->add_option("--c", speeds, "speeds");
  coerc->add_flag("--inverse-bound", inverse_bound, "also estimate the inverse bound constant");

  auto* vir = app.add_subcommand("virial", "virial identity for a Gaussian wave packet");
  add_common(vir);
  vir->add_flag("--forced", forced, "add a localized time-periodic forcing");
  vir->add_option("--T", T, "time cutoff support [0, T]");
  vir->add_option("--dt", dt, "time step");

  auto* sweep = app.add_subcommand("sweep", "amplitude sweep with log-log scaling fits");
  add_common(sweep);
  sweep->add_option("--amplitudes", amplitudes, "perturbation X-norms (at least three)");

  auto* ver = app.add_subcommand("verify", "run the acceptance battery");
  add_common(ver);

  CLI11_PARSE(app, argc, argv);
  for (auto* sub : app.get_subcommands())
    if (sub->count("--seed")) o.seed = seed;

  try {
    if (*soliton) return cmd_soliton(o, c, a, L, N);
    if (*simulate) return report_run(run_simulation(resolve_config(o)));
    if (*modulate) {
      RunConfig cfg = resolve_config(o);
      cfg.diagnostics.monotonicity = false;
      return report_run(run_simulation(cfg));
    }
    if (*mono) {
      RunConfig cfg = resolve_config(o);
      cfg.diagnostics.monotonicity = true;
      const RunOutput r = run_simulation(cfg);
      const int rc = report_run(r);
      return rc == 0 && r.summary.monotonicity_violations == 0 && r.summary.differential_violations == 0 ? 0 : 1;
    }
    if (*spectrum) return cmd_spectrum(o, c, op, resolution);
    if (*coerc) return cmd_coercivity(o, speeds, inverse_bound);
    if (*vir) return cmd_virial(o, forced, T, dt);
    if (*sweep) return cmd_sweep(o, amplitudes);
    if (*ver) return cmd_verify(o);
  } catch (const ConfigError& e) {
    std::cerr << e.what() << std::endl;
    return 2;
  } catch (const DomainError& e) {
    std::cerr << e.what() << std::endl;
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << std::endl;
    return 1;
  }
  return 0;
}
