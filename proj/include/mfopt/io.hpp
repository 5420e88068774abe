#pragma once

// File formats: run configuration, schedule CSV, result CSVs and the SVG
// region map.

#include "mfopt/model.hpp"
#include "mfopt/oracle.hpp"
#include "mfopt/simulate.hpp"
#include "mfopt/synthesis.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace mfopt {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// 12 significant digits; non-finite values spelled inf/-inf/nan.
inline std::string fmt_num(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

inline std::string fmt_opt(const std::optional<double>& x) { return x ? fmt_num(*x) : ""; }

// ---------------------------------------------------------------------------
// Run configuration

struct RunConfig {
  std::string model = "cogan";
  std::map<std::string, double> params{{"a", 1.0}, {"b", 1.0}, {"e", 1.0}};
  double horizon = 40.0;
  DpGridParams grid;
  std::size_t curve_samples = 401;
  std::optional<double> m_view;
  std::string out_dir = ".";
  bool csv = true;
  bool svg = true;
  bool strict = false;

  FoulingModel build() const { return build_model(model, params); }
};

/// Reads a JSON config: {"model": "cogan", "a": 1, "b": 1, "e": 1,
/// "horizon": 40} plus optional grid keys n_t, n_m, m_min, m_max,
/// curve_samples, m_view.
inline RunConfig parse_config(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& ex) {
    throw ConfigError(std::string("config is not valid JSON: ") + ex.what());
  }
  if (!j.is_object()) throw ConfigError("config must be a JSON object");

  RunConfig cfg;
  static const char* known[] = {"model", "a", "b", "e", "horizon", "n_t", "n_m", "m_min",
                                "m_max", "curve_samples", "m_view"};
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (const char* k : known) ok = ok || it.key() == k;
    if (!ok) throw ConfigError("unknown config key '" + it.key() + "'");
  }
  auto number = [&](const char* key) -> std::optional<double> {
    if (!j.contains(key)) return std::nullopt;
    if (!j[key].is_number()) throw ConfigError(std::string("config key ") + key + " must be a number");
    return j[key].get<double>();
  };
  if (j.contains("model")) {
    if (!j["model"].is_string()) throw ConfigError("config key model must be a string");
    cfg.model = j["model"].get<std::string>();
  }
  for (const char* p : {"a", "b", "e"}) {
    if (auto v = number(p)) cfg.params[p] = *v;
  }
  if (auto v = number("horizon")) cfg.horizon = *v;
  if (!(cfg.horizon > 0.0)) throw ConfigError("horizon must be positive");
  if (auto v = number("n_t")) cfg.grid.n_t = static_cast<std::size_t>(*v);
  if (auto v = number("n_m")) cfg.grid.n_m = static_cast<std::size_t>(*v);
  if (auto v = number("m_min")) cfg.grid.m_min = *v;
  if (auto v = number("m_max")) cfg.grid.m_max = *v;
  if (auto v = number("curve_samples")) cfg.curve_samples = static_cast<std::size_t>(*v);
  if (auto v = number("m_view")) cfg.m_view = *v;
  return cfg;
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

// ---------------------------------------------------------------------------
// Schedule file: rows "t_start,u", optional header line.

inline Schedule parse_schedule(const std::string& text) {
  Schedule s;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos || line[0] == '#') continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) {
      throw ConfigError("schedule line " + std::to_string(lineno) + ": expected t_start,u");
    }
    const std::string a = line.substr(0, comma), b = line.substr(comma + 1);
    double t = 0.0, u = 0.0;
    try {
      std::size_t pa = 0, pb = 0;
      t = std::stod(a, &pa);
      u = std::stod(b, &pb);
      if (a.find_first_not_of(" \t", pa) != std::string::npos ||
          b.find_first_not_of(" \t", pb) != std::string::npos)
        throw std::invalid_argument("trailing characters");
    } catch (const std::exception&) {
      if (s.empty() && lineno == 1) continue;  // header
      throw ConfigError("schedule line " + std::to_string(lineno) + ": not numeric");
    }
    if (!(u >= -1.0 && u <= 1.0)) {
      throw ConfigError("schedule line " + std::to_string(lineno) + ": u outside [-1, 1]");
    }
    if (!s.empty() && !(t > s.back().t_start)) {
      throw ConfigError("schedule line " + std::to_string(lineno) + ": times must increase");
    }
    s.push_back({t, u});
  }
  if (s.empty()) throw ConfigError("schedule is empty");
  return s;
}

// ---------------------------------------------------------------------------
// CSV writers

inline std::string summary_csv(const SingularArc& arc) {
  std::ostringstream os;
  os << "m_bar,u_bar,lambda_bar,m_bar_T,T_bar,branch\n"
     << fmt_num(arc.m_bar) << ',' << fmt_num(arc.u_bar) << ',' << fmt_num(arc.lambda_bar) << ','
     << fmt_opt(arc.m_bar_T) << ',' << fmt_opt(arc.T_bar) << ',' << arc.branch() << '\n';
  return os.str();
}

inline std::string curve_csv(const SwitchingCurve& curve) {
  std::ostringstream os;
  os << "m,Ttilde,mT,dTtilde,kind\n";
  for (const auto& s : curve.samples) {
    os << fmt_num(s.m_tilde) << ',' << fmt_num(s.T_tilde) << ',' << fmt_num(s.m_T) << ','
       << fmt_num(s.dT_tilde) << ',' << to_string(s.kind) << '\n';
  }
  return os.str();
}

inline std::string trajectory_csv(const Trajectory& tr) {
  std::ostringstream os;
  os << "t,m,u,lambda,phi,H,J\n";
  for (const auto& n : tr.nodes) {
    os << fmt_num(n.t) << ',' << fmt_num(n.m) << ',' << fmt_num(n.u) << ',' << fmt_opt(n.lambda)
       << ',' << fmt_opt(n.phi) << ',' << fmt_opt(n.H) << ',' << fmt_num(n.J) << '\n';
  }
  return os.str();
}

inline std::string events_csv(const Trajectory& tr) {
  std::ostringstream os;
  os << "t,kind,m\n";
  for (const auto& e : tr.events) {
    os << fmt_num(e.t) << ',' << to_string(e.kind) << ',' << fmt_num(e.m) << '\n';
  }
  return os.str();
}

inline std::string comparison_csv(const ComparisonReport& rep) {
  std::ostringstream os;
  os << "t0,m0,J_feedback,V_dp,gap,tol_dp\n";
  for (const auto& r : rep.rows) {
    os << fmt_num(r.t0) << ',' << fmt_num(r.m0) << ',' << fmt_num(r.J_feedback) << ','
       << fmt_num(r.V_dp) << ',' << fmt_num(r.gap) << ',' << fmt_num(r.tol_dp) << '\n';
  }
  return os.str();
}

inline std::string dispersal_csv(const std::vector<DispersalRow>& rows) {
  std::ostringstream os;
  os << "t,m,J_plus,J_minus,diff\n";
  for (const auto& r : rows) {
    os << fmt_num(r.t) << ',' << fmt_num(r.m) << ',' << fmt_num(r.J_plus) << ','
       << fmt_num(r.J_minus) << ',' << fmt_num(r.diff) << '\n';
  }
  return os.str();
}

// ---------------------------------------------------------------------------
// SVG region map of [0, T] x [0, m_view]

struct RegionMapOptions {
  double m_view = 0.0;
  int cols = 240;
  int rows = 160;
  double width = 720.0;
  double height = 480.0;
};

inline std::string region_map_svg(const FeedbackLaw& law, const SwitchingCurve& curve,
                                  const RegionMapOptions& opt,
                                  const Trajectory* overlay = nullptr) {
  const double T = law.horizon();
  const double m_view = opt.m_view;
  const double margin = 50.0;
  const double W = opt.width, H = opt.height;
  auto X = [&](double t) { return margin + t / T * W; };
  auto Y = [&](double m) { return margin + H - m / m_view * H; };

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fmt_num(W + 2 * margin)
     << "\" height=\"" << fmt_num(H + 2 * margin) << "\">\n"
     << "<rect x=\"" << margin << "\" y=\"" << margin << "\" width=\"" << W << "\" height=\"" << H
     << "\" fill=\"white\" stroke=\"black\"/>\n";

  // W cells (shaded at cell centres)
  os << "<g fill=\"#3b6fd4\" fill-opacity=\"0.55\">\n";
  const double cw = W / opt.cols, ch = H / opt.rows;
  for (int r = 0; r < opt.rows; ++r) {
    const double m = (r + 0.5) / opt.rows * m_view;
    for (int c = 0; c < opt.cols; ++c) {
      const double t = (c + 0.5) / opt.cols * T;
      if (law.in_backwash_region(t, m)) {
        os << "<rect x=\"" << fmt_num(margin + c * cw) << "\" y=\""
           << fmt_num(margin + H - (r + 1) * ch) << "\" width=\"" << fmt_num(cw)
           << "\" height=\"" << fmt_num(ch) << "\"/>\n";
      }
    }
  }
  os << "</g>\n";

  const auto& arc = law.arc();
  if (law.nontrivial() && arc.used()) {
    os << "<line x1=\"" << fmt_num(X(0)) << "\" y1=\"" << fmt_num(Y(arc.m_bar)) << "\" x2=\""
       << fmt_num(X(std::min(*arc.T_bar, T))) << "\" y2=\"" << fmt_num(Y(arc.m_bar))
       << "\" stroke=\"red\" stroke-width=\"3\"/>\n";
  } else {
    os << "<text x=\"" << fmt_num(margin + 10) << "\" y=\"" << fmt_num(margin + 20)
       << "\" font-size=\"14\">u = +1 everywhere (no singular segment)</text>\n";
  }

  // Curve C: one polyline per run of equal kind with T̃ > 0
  std::vector<std::pair<double, double>> run;
  CurveKind run_kind = CurveKind::switching;
  auto flush = [&]() {
    if (run.size() >= 2) {
      os << "<polyline fill=\"none\" stroke-width=\"3\" stroke=\""
         << (run_kind == CurveKind::switching ? "#f2c200" : "#888888") << "\" points=\"";
      for (const auto& [t, m] : run) os << fmt_num(X(t)) << ',' << fmt_num(Y(m)) << ' ';
      os << "\"/>\n";
    }
    run.clear();
  };
  for (const auto& s : curve.samples) {
    if (!s.on_curve() || s.m_tilde > m_view) {
      flush();
      continue;
    }
    if (!run.empty() && s.kind != run_kind) {
      const auto joint = run.back();
      flush();
      run.push_back(joint);
    }
    run_kind = s.kind;
    run.emplace_back(std::min(s.T_tilde, T), s.m_tilde);
  }
  flush();

  if (overlay && !overlay->nodes.empty()) {
    os << "<polyline fill=\"none\" stroke=\"black\" stroke-width=\"1.5\" points=\"";
    for (const auto& n : overlay->nodes)
      os << fmt_num(X(n.t)) << ',' << fmt_num(Y(std::min(n.m, m_view))) << ' ';
    os << "\"/>\n";
  }

  // axes labels
  os << "<text x=\"" << fmt_num(margin + W / 2) << "\" y=\"" << fmt_num(H + 1.8 * margin)
     << "\" font-size=\"14\">t [h] (0 to " << fmt_num(T) << ")</text>\n"
     << "<text x=\"10\" y=\"" << fmt_num(margin - 10) << "\" font-size=\"14\">m (0 to "
     << fmt_num(m_view) << ")</text>\n"
     << "</svg>\n";
  return os.str();
}

inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << content;
  if (!out) throw std::runtime_error("failed writing " + path);
}

}  // namespace mfopt
