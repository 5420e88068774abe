#pragma once

// Command-line front end: synth, simulate, compare, dispersal.
// Exit codes: 0 success, 1 usage/config error, 2 contract violation.

#include "mfopt/io.hpp"
#include "mfopt/oracle.hpp"
#include "mfopt/simulate.hpp"
#include "mfopt/synthesis.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace mfopt::cli {

enum ExitCode : int { ok = 0, usage_error = 1, contract_violation = 2 };

struct GlobalFlags {
  std::string config_path;
  std::string out_dir = ".";
  std::string formats = "csv,svg";
  bool strict = false;
  std::optional<double> horizon;
};

/// Default initial conditions: t0 ∈ {0, T/4, T/2} × m0 ∈ {0.25 … 4}·m̄.
inline std::vector<InitialCondition> default_battery(const SingularArc& arc) {
  std::vector<InitialCondition> ics;
  for (double ft : {0.0, 0.25, 0.5})
    for (double fm : {0.25, 0.6, 0.9, 1.0, 1.2, 1.6, 2.5, 4.0})
      ics.push_back({ft * arc.horizon, fm * arc.m_bar});
  return ics;
}

namespace detail {

inline RunConfig resolve_config(const GlobalFlags& g) {
  RunConfig cfg = g.config_path.empty() ? RunConfig{} : load_config(g.config_path);
  if (g.horizon) cfg.horizon = *g.horizon;
  if (!(cfg.horizon > 0.0)) throw ConfigError("horizon must be positive");
  cfg.out_dir = g.out_dir;
  cfg.strict = g.strict;
  cfg.csv = cfg.svg = false;
  std::stringstream ss(g.formats);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item == "csv") cfg.csv = true;
    else if (item == "svg") cfg.svg = true;
    else if (!item.empty()) throw ConfigError("unknown output format '" + item + "'");
  }
  if (!cfg.csv && !cfg.svg) throw ConfigError("output formats must not be empty");
  std::error_code ec;
  std::filesystem::create_directories(cfg.out_dir, ec);
  if (!std::filesystem::is_directory(cfg.out_dir)) {
    throw ConfigError("output directory " + cfg.out_dir + " is not writable");
  }
  return cfg;
}

inline void check_model(const FoulingModel& model, const RunConfig& cfg, std::ostream& err) {
  const auto report = check_hypotheses(model, 50.0, 2000);
  if (report.all_pass()) return;
  if (cfg.strict) throw ConfigError("hypothesis check failed:\n" + report.describe());
  err << "warning: hypothesis check failed (continuing without --strict)\n" << report.describe();
}

inline std::string path_in(const RunConfig& cfg, const std::string& name) {
  return (std::filesystem::path(cfg.out_dir) / name).string();
}

inline double view_mass(const RunConfig& cfg, const SingularArc& arc) {
  return cfg.m_view.value_or(default_view_mass(arc));
}

}  // namespace detail

inline int cmd_synth(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  const FoulingModel model = cfg.build();
  detail::check_model(model, cfg, err);
  const Synthesis syn = synthesize(model, cfg.horizon, cfg.curve_samples, cfg.m_view);
  const FeedbackLaw law = make_feedback(model, syn);
  out << summary_csv(syn.arc);
  if (cfg.csv) {
    write_file(detail::path_in(cfg, "summary.csv"), summary_csv(syn.arc));
    write_file(detail::path_in(cfg, "curve.csv"), curve_csv(syn.curve));
  }
  if (cfg.svg) {
    RegionMapOptions opt;
    opt.m_view = detail::view_mass(cfg, syn.arc);
    write_file(detail::path_in(cfg, "synthesis.svg"), region_map_svg(law, syn.curve, opt));
  }
  return ok;
}

inline int cmd_simulate(const RunConfig& cfg, double m0, double t0, const std::string& control,
                        const std::string& schedule_path, std::ostream& out, std::ostream& err) {
  const FoulingModel model = cfg.build();
  detail::check_model(model, cfg, err);
  const Synthesis syn = synthesize(model, cfg.horizon, cfg.curve_samples, cfg.m_view);
  const FeedbackLaw law = make_feedback(model, syn);

  Trajectory tr;
  if (!schedule_path.empty()) {
    std::ifstream in(schedule_path);
    if (!in) throw ConfigError("cannot open schedule file " + schedule_path);
    std::stringstream ss;
    ss << in.rdbuf();
    tr = integrate_state(model, parse_schedule(ss.str()), m0, t0, cfg.horizon);
  } else if (control == "feedback") {
    tr = integrate_feedback(law, m0, t0);
  } else if (control == "constant:+1" || control == "constant:1") {
    tr = integrate_constant(model, 1.0, m0, t0, cfg.horizon);
  } else if (control == "constant:-1") {
    tr = integrate_constant(model, -1.0, m0, t0, cfg.horizon);
  } else {
    throw ConfigError("unknown control mode '" + control + "'");
  }
  tr = integrate_adjoint(model, std::move(tr), cfg.horizon);
  out << "J=" << fmt_num(tr.total_cost) << " m(T)=" << fmt_num(tr.m_end())
      << " events=" << tr.events.size() << '\n';
  if (cfg.csv) {
    write_file(detail::path_in(cfg, "trajectory.csv"), trajectory_csv(tr));
    write_file(detail::path_in(cfg, "events.csv"), events_csv(tr));
  }
  if (cfg.svg) {
    RegionMapOptions opt;
    opt.m_view = std::max(detail::view_mass(cfg, syn.arc), 1.05 * m0);
    write_file(detail::path_in(cfg, "trajectory.svg"), region_map_svg(law, syn.curve, opt, &tr));
  }
  return ok;
}

inline int cmd_compare(const RunConfig& cfg, std::size_t n_random, std::ostream& out,
                       std::ostream& err) {
  const FoulingModel model = cfg.build();
  detail::check_model(model, cfg, err);
  const Synthesis syn = synthesize(model, cfg.horizon, cfg.curve_samples, cfg.m_view);
  const FeedbackLaw law = make_feedback(model, syn);
  const auto ics = default_battery(syn.arc);
  const ComparisonReport rep = compare_feedback_vs_dp(law, ics, cfg.grid);

  // dominance over random admissible schedules
  std::mt19937_64 rng(20240611);
  double worst_excess = -std::numeric_limits<double>::infinity();
  for (const auto& ic : ics) {
    const double J = integrate_feedback(law, ic.m0, ic.t0).total_cost;
    for (std::size_t k = 0; k < n_random; ++k) {
      const Schedule s = random_schedule(rng, ic.t0, cfg.horizon, syn.arc.u_bar);
      const double Jr = integrate_state(model, s, ic.m0, ic.t0, cfg.horizon).total_cost;
      worst_excess = std::max(worst_excess, Jr - J);
    }
  }
  const bool dominance = n_random == 0 || worst_excess <= 1e-9;
  const bool pass = rep.pass() && dominance;

  nlohmann::json summary{{"model", cfg.model},
                         {"horizon", cfg.horizon},
                         {"initial_conditions", ics.size()},
                         {"tol_dp", rep.tol_dp},
                         {"dp_agreement", rep.pass()},
                         {"random_schedules_per_ic", n_random},
                         {"random_schedule_max_excess", n_random ? worst_excess : 0.0},
                         {"dominance", dominance},
                         {"pass", pass}};
  if (cfg.csv) {
    write_file(detail::path_in(cfg, "compare.csv"), comparison_csv(rep));
  }
  write_file(detail::path_in(cfg, "compare_summary.json"), summary.dump(2) + "\n");
  out << summary.dump() << '\n';
  return pass ? ok : contract_violation;
}

inline int cmd_dispersal(const RunConfig& cfg, std::size_t n_points, double tol, std::ostream& out,
                         std::ostream& err) {
  const FoulingModel model = cfg.build();
  detail::check_model(model, cfg, err);
  const Synthesis syn = synthesize(model, cfg.horizon, cfg.curve_samples, cfg.m_view);
  const FeedbackLaw law = make_feedback(model, syn);
  const auto cd = syn.curve.of_kind(CurveKind::dispersal);
  std::vector<CurveSample> picks;
  if (!cd.empty() && n_points > 0) {
    const std::size_t n = std::min(n_points, cd.size());
    for (std::size_t i = 0; i < n; ++i) {
      picks.push_back(cd[n == 1 ? 0 : i * (cd.size() - 1) / (n - 1)]);
    }
  }
  const auto rows = dispersal_equality_check(law, picks);
  if (cfg.csv) write_file(detail::path_in(cfg, "dispersal.csv"), dispersal_csv(rows));
  if (rows.empty()) {
    out << "C_d empty: nothing to check\n";
    return ok;
  }
  double worst = 0.0;
  for (const auto& r : rows) worst = std::max(worst, r.diff);
  out << "points=" << rows.size() << " max|J_plus-J_minus|=" << fmt_num(worst) << " tol="
      << fmt_num(tol) << (worst <= tol ? " pass" : " FAIL") << '\n';
  return worst <= tol ? ok : contract_violation;
}

/// Parses and runs one command line. args excludes the program name.
inline int run(const std::vector<std::string>& args, std::ostream& out = std::cout,
               std::ostream& err = std::cerr) {
  CLI::App app{"Optimal backwash synthesis for membrane filtration"};
  app.require_subcommand(1);
  app.fallthrough();

  GlobalFlags g;
  double horizon = 0.0;
  app.add_option("--config", g.config_path, "JSON model configuration file");
  app.add_option("--out", g.out_dir, "Output directory");
  app.add_option("--format", g.formats, "Comma separated output formats (csv,svg)");
  app.add_flag("--strict", g.strict, "Reject models failing the hypothesis checks");
  auto* horizon_opt = app.add_option("--horizon", horizon, "Override the horizon T [h]");

  auto* synth = app.add_subcommand("synth", "Singular arc, switching curve and region map");

  auto* sim = app.add_subcommand("simulate", "Simulate a trajectory and its adjoint");
  double m0 = 0.0, t0 = 0.0;
  std::string control = "feedback", schedule_path;
  sim->add_option("--m0", m0, "Initial mass")->required();
  sim->add_option("--t0", t0, "Initial time");
  sim->add_option("--control", control, "feedback | constant:+1 | constant:-1");
  sim->add_option("--schedule", schedule_path, "CSV schedule file (t_start,u)");

  auto* cmp = app.add_subcommand("compare", "Feedback cost against the DP value function");
  std::size_t n_random = 50;
  std::size_t n_t = 0, n_m = 0;
  cmp->add_option("--random", n_random, "Random schedules per initial condition");
  cmp->add_option("--n-t", n_t, "DP time nodes");
  cmp->add_option("--n-m", n_m, "DP mass nodes");

  auto* disp = app.add_subcommand("dispersal", "Twin-strategy check on the dispersal locus");
  std::size_t n_points = 10;
  double tol = 1e-6;
  disp->add_option("--points", n_points, "Number of dispersal points");
  disp->add_option("--tol", tol, "Allowed cost difference");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    std::ostringstream o, er;
    const int code = app.exit(e, o, er);
    out << o.str();
    err << er.str();
    return code == 0 ? ok : usage_error;
  }
  if (horizon_opt->count() > 0) g.horizon = horizon;

  try {
    RunConfig cfg = detail::resolve_config(g);
    if (n_t) cfg.grid.n_t = n_t;
    if (n_m) cfg.grid.n_m = n_m;
    if (synth->parsed()) return cmd_synth(cfg, out, err);
    if (sim->parsed()) return cmd_simulate(cfg, m0, t0, control, schedule_path, out, err);
    if (cmp->parsed()) return cmd_compare(cfg, n_random, out, err);
    if (disp->parsed()) return cmd_dispersal(cfg, n_points, tol, out, err);
  } catch (const std::exception& ex) {
    err << "error: " << ex.what() << '\n';
    return usage_error;
  }
  return usage_error;
}

}  // namespace mfopt::cli
