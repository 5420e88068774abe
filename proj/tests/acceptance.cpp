// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails. All tolerances are fixed here.

#include "mfopt/cli.hpp"
#include "mfopt/mfopt.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

using namespace mfopt;

namespace {

using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass;
  std::string detail;
};

int failures = 0;

void criterion(int id, const char* title, double limit_s, const std::function<Outcome()>& body) {
  const auto t0 = Clock::now();
  Outcome r{false, ""};
  try {
    r = body();
  } catch (const std::exception& e) {
    r = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
  if (limit_s > 0.0 && secs >= limit_s) {
    r.pass = false;
    r.detail += " [runtime " + fmt_num(secs) + " s over " + fmt_num(limit_s) + " s]";
  }
  failures += r.pass ? 0 : 1;
  std::printf("[%s] C%d %s (%.3f s): %s\n", r.pass ? "PASS" : "FAIL", id, title, secs,
              r.detail.c_str());
  std::fflush(stdout);
}

FoulingModel unit_model(const char* name) {
  return build_model(name, {{"a", 1}, {"b", 1}, {"e", 1}});
}

long double benyahia_root_oracle() {
  long double x = 2.0L;
  for (int i = 0; i < 100; ++i) {
    const long double p = (((x + 2) * x - 3) * x - 6) * x - 3;
    const long double dp = ((4 * x + 6) * x - 6) * x - 6;
    x -= p / dp;
  }
  return x;
}

struct Case {
  const char* name;
  double horizon;
};
const Case kCases[] = {{"benyahia", 10.0}, {"cogan", 40.0}};

}  // namespace

int main() {
  criterion(1, "Cogan closed forms", 1.0, [] {
    const auto arc = find_singular_arc(unit_model("cogan"), 40.0);
    const double err = std::max({std::abs(arc.m_bar - 3.0), std::abs(arc.u_bar - 0.5),
                                 std::abs(arc.lambda_bar + 0.5), std::abs(*arc.m_bar_T - 7.0),
                                 std::abs(*arc.T_bar - 16.0)});
    return Outcome{err <= 1e-8, "max abs error " + fmt_num(err) + " (tol 1e-8)"};
  });

  criterion(2, "Benyahia root and switch-only curve", 5.0, [] {
    const auto m = unit_model("benyahia");
    const auto syn = synthesize(m, 10.0);
    const double err = std::abs(syn.arc.m_bar - static_cast<double>(benyahia_root_oracle()));
    const auto n_sw = syn.curve.of_kind(CurveKind::switching).size();
    const auto n_d = syn.curve.of_kind(CurveKind::dispersal).size();
    const bool ok = err <= 1e-10 && syn.arc.f_minus_at_m_bar < 0.0 && n_sw > 0 && n_d == 0;
    return Outcome{ok, "m_bar error " + fmt_num(err) + ", f-(m_bar)=" +
                           fmt_num(syn.arc.f_minus_at_m_bar) + ", switch=" +
                           std::to_string(n_sw) + ", dispersal=" + std::to_string(n_d)};
  });

  criterion(3, "Cogan curve has switch and dispersal parts", 5.0, [] {
    const auto syn = synthesize(unit_model("cogan"), 40.0);
    const auto n_sw = syn.curve.of_kind(CurveKind::switching).size();
    const auto n_d = syn.curve.of_kind(CurveKind::dispersal).size();
    return Outcome{n_sw > 0 && n_d > 0,
                   "switch=" + std::to_string(n_sw) + ", dispersal=" + std::to_string(n_d)};
  });

  criterion(4, "Curve tangent to filtration at m_bar", 0.0, [] {
    double worst = 0.0;
    for (const auto& c : kCases) {
      const auto m = unit_model(c.name);
      const auto arc = find_singular_arc(m, c.horizon);
      const double h = 1e-5;
      const double fd = (switching_time(m, arc, arc.m_bar + h).T_tilde -
                         switching_time(m, arc, arc.m_bar).T_tilde) / h;
      const double expected = 1.0 / m.f1(arc.m_bar);
      worst = std::max(worst, std::abs(fd - expected) / expected);
    }
    return Outcome{worst <= 1e-4, "max relative error " + fmt_num(worst) + " (tol 1e-4)"};
  });

  criterion(5, "PMP audit on feedback trajectories", 10.0, [] {
    double drift = 0.0, lam = -1e300, phi_sing = 0.0, sign = 0.0;
    int runs = 0;
    for (const auto& c : kCases) {
      const auto m = unit_model(c.name);
      const auto syn = synthesize(m, c.horizon);
      const auto law = make_feedback(m, syn);
      for (double ft : {0.0, 0.25})
        for (double fm : {0.3, 0.8, 1.0, 1.5, 3.0}) {
          const auto tr = integrate_adjoint(
              m, integrate_feedback(law, fm * syn.arc.m_bar, ft * c.horizon), c.horizon);
          const auto a = pmp_audit(tr, 1e-6);
          drift = std::max(drift, a.hamiltonian_drift);
          lam = std::max(lam, a.max_lambda_before_T);
          phi_sing = std::max(phi_sing, a.singular_phi);
          sign = std::max(sign, a.sign_violation);
          ++runs;
        }
    }
    const bool ok = drift <= 1e-6 && lam < 0.0 && sign == 0.0 && phi_sing <= 1e-7;
    return Outcome{ok, std::to_string(runs) + " runs, H drift " + fmt_num(drift) +
                           ", max lambda " + fmt_num(lam) + ", sign violation " +
                           fmt_num(sign) + ", singular |phi| " + fmt_num(phi_sing)};
  });

  criterion(6, "Singular exit beats later exits", 0.0, [] {
    double d0 = 0.0, s0 = 0.0, dmax = -1e300;
    for (const auto& c : kCases) {
      const auto m = unit_model(c.name);
      const auto arc = find_singular_arc(m, c.horizon);
      if (!arc.active()) continue;
      const double mT = *arc.m_bar_T;
      d0 = std::max(d0, std::abs(cost_difference_delta(m, arc, mT)));
      s0 = std::max(s0, std::abs(cost_difference_slope(m, arc, mT)));
      for (int i = 1; i <= 50; ++i)
        dmax = std::max(dmax, cost_difference_delta(m, arc, mT + 2.0 * mT * i / 50.0));
    }
    const bool ok = d0 <= 1e-12 && s0 <= 1e-8 && dmax < 0.0;
    return Outcome{ok, "|delta(m_bar_T)|=" + fmt_num(d0) + ", |delta'(m_bar_T)|=" + fmt_num(s0) +
                           ", max delta on grid " + fmt_num(dmax)};
  });

  criterion(7, "Feedback against DP and random schedules", 300.0, [] {
    std::size_t n_ic = 0, n_fail = 0, n_random_fail = 0;
    double worst_gap = 0.0, tol_max = 0.0, worst_random = -1e300;
    std::mt19937_64 rng(20240611);
    for (const auto& c : kCases) {
      const auto m = unit_model(c.name);
      const auto syn = synthesize(m, c.horizon);
      const auto law = make_feedback(m, syn);
      const auto ics = cli::default_battery(syn.arc);
      const auto rep = compare_feedback_vs_dp(law, ics);
      tol_max = std::max(tol_max, rep.tol_dp);
      for (const auto& r : rep.rows) {
        ++n_ic;
        n_fail += r.pass ? 0 : 1;
        worst_gap = std::max(worst_gap, std::abs(r.gap));
        for (int k = 0; k < 50; ++k) {
          const auto s = random_schedule(rng, r.t0, c.horizon, syn.arc.u_bar);
          const double J = integrate_state(m, s, r.m0, r.t0, c.horizon).total_cost;
          worst_random = std::max(worst_random, J - r.J_feedback);
          n_random_fail += J > r.J_feedback + 1e-9 ? 1 : 0;
        }
      }
    }
    const bool ok = n_ic >= 20 && n_fail == 0 && n_random_fail == 0;
    return Outcome{ok, std::to_string(n_ic) + " ICs, max |J-V| " + fmt_num(worst_gap) +
                           ", max tol_dp " + fmt_num(tol_max) + ", DP failures " +
                           std::to_string(n_fail) + ", max random-J_feedback " +
                           fmt_num(worst_random) + ", random failures " +
                           std::to_string(n_random_fail)};
  });

  criterion(8, "Dispersal twin strategies agree", 0.0, [] {
    const auto m = unit_model("cogan");
    const auto syn = synthesize(m, 40.0);
    const auto law = make_feedback(m, syn);
    const auto cd = syn.curve.of_kind(CurveKind::dispersal);
    std::vector<CurveSample> picks;
    for (std::size_t i = 0; i < 10 && cd.size() >= 10; ++i) picks.push_back(cd[i * (cd.size() - 1) / 9]);
    const auto rows = dispersal_equality_check(law, picks);
    double worst = 0.0, best = 1e300;
    for (const auto& r : rows) {
      worst = std::max(worst, r.diff);
      best = std::min(best, r.diff);
    }
    return Outcome{rows.size() >= 10 && worst <= 1e-6,
                   std::to_string(rows.size()) + " points, |J+ - J-| from " + fmt_num(best) +
                       " to " + fmt_num(worst) + " (tol 1e-6)"};
  });

  criterion(9, "Filtration from a clean membrane", 0.0, [] {
    const auto tr = integrate_constant(unit_model("benyahia"), 1.0, 0.0, 0.0, 10.0);
    double worst = 0.0;
    for (const auto& n : tr.nodes) worst = std::max(worst, std::abs(n.m - (std::sqrt(1 + 2 * n.t) - 1)));
    return Outcome{worst <= 1e-8, std::to_string(tr.nodes.size()) + " nodes, max error " +
                                      fmt_num(worst) + " (tol 1e-8)"};
  });

  // Diagnostic only: value gap just past the dispersal part of the curve,
  // where the feedback law filtrates.
  {
    const auto m = unit_model("cogan");
    const auto syn = synthesize(m, 40.0);
    const auto law = make_feedback(m, syn);
    const auto cd = syn.curve.of_kind(CurveKind::dispersal);
    if (!cd.empty()) {
      std::vector<InitialCondition> ics;
      for (std::size_t i = 0; i < 5; ++i) {
        const auto& p = cd[i * (cd.size() - 1) / 4];
        ics.push_back({std::round(p.T_tilde * 10.0) / 10.0 + 0.5, p.m_tilde});
      }
      DpGridParams params;
      params.store_every = 1;
      const auto grid = solve_dp(m, syn.arc, 40.0, params);
      std::printf("[INFO] DP minus feedback just past C_d (Cogan, T=40):\n");
      for (const auto& ic : ics) {
        const double t = std::round(ic.t0 / grid.dt) * grid.dt;
        const double J = integrate_feedback(law, ic.m0, t).total_cost;
        std::printf("[INFO]   t=%.4f m=%.4f  V_dp=%.6f  J_feedback=%.6f  diff=%.6f\n", t, ic.m0,
                    grid.value(t, ic.m0), J, grid.value(t, ic.m0) - J);
      }
    }
  }

  std::printf("%d criterion(s) failed\n", failures);
  return failures == 0 ? 0 : 1;
}
