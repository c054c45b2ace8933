#include "moolab/experiments.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

#include "moolab/chebyshev.hpp"
#include "moolab/polynomials.hpp"
#include "moolab/serialize.hpp"

namespace moolab::lab {

namespace fs = std::filesystem;
using nlohmann::json;
using Vec = Vector<double>;
using Mat = Matrix<double>;

namespace {

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[40];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

/// Anchors 0, e_1, ..., e_{m-1} in an (m-1)-dimensional W-block: pairwise
/// distinct and affinely independent, with the start anchored at column 0.
Mat canonical_anchors(int m) {
  Mat A = Mat::Zero(m - 1, m);
  for (int j = 1; j < m; ++j) A(j - 1, j) = 1.0;
  return A;
}

struct LabeledTrace {
  IterateTrace<double> trace;
  double f_star = 0.0;
  BoundCurve bounds;
};

void write_csv(const std::string& path, const std::vector<LabeledTrace>& runs) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "t,f_gap,grad_norm,pareto_gap,floor,ceiling,method\n";
  for (const auto& run : runs) {
    const auto& tr = run.trace;
    for (std::size_t t = 0; t < tr.points.size(); ++t) {
      const double f_gap = tr.fvals[t] - run.f_star;
      const double gap =
          t < tr.gaps.size() ? tr.gaps[t] : std::numeric_limits<double>::quiet_NaN();
      const double floor = t < run.bounds.floor.size()
                               ? run.bounds.floor[t]
                               : std::numeric_limits<double>::quiet_NaN();
      const double ceiling = t < run.bounds.ceiling.size()
                                 ? run.bounds.ceiling[t]
                                 : std::numeric_limits<double>::quiet_NaN();
      out << t << ',' << format_double(f_gap) << ',' << format_double(tr.grad_norms[t])
          << ',' << format_double(gap) << ',' << format_double(floor) << ','
          << format_double(ceiling) << ',' << tr.method_tag << '\n';
    }
  }
}

/// Log-scale gap chart drawn with bare polylines; no renderer dependency.
void write_svg(const std::string& path, const std::vector<LabeledTrace>& runs) {
  constexpr int W = 720, H = 420, ML = 70, MR = 160, MT = 20, MB = 40;
  const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#8c564b"};

  std::size_t T = 0;
  double ymin = std::numeric_limits<double>::infinity();
  double ymax = 0.0;
  const auto scan = [&](const std::vector<double>& ys) {
    for (double y : ys)
      if (std::isfinite(y) && y > 0.0) {
        ymin = std::min(ymin, y);
        ymax = std::max(ymax, y);
      }
  };
  for (const auto& run : runs) {
    T = std::max(T, run.trace.points.size() - 1);
    scan(run.trace.gaps.empty() ? run.trace.grad_norms : run.trace.gaps);
    scan(run.bounds.floor);
    scan(run.bounds.ceiling);
  }
  if (!(ymax > 0.0) || T == 0) return;
  ymin = std::max(ymin, ymax * 1e-18);
  const double ly0 = std::log10(ymin), ly1 = std::log10(ymax);

  const auto xmap = [&](double t) { return ML + (W - ML - MR) * t / static_cast<double>(T); };
  const auto ymap = [&](double y) {
    const double ly = std::log10(std::max(y, ymin));
    return MT + (H - MT - MB) * (ly1 - ly) / std::max(ly1 - ly0, 1e-12);
  };
  char buf[64];
  const auto coord = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return std::string(buf);
  };

  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\""
      << H << "\">\n"
      << "<rect width=\"" << W << "\" height=\"" << H << "\" fill=\"white\"/>\n"
      << "<line x1=\"" << ML << "\" y1=\"" << H - MB << "\" x2=\"" << W - MR
      << "\" y2=\"" << H - MB << "\" stroke=\"black\"/>\n"
      << "<line x1=\"" << ML << "\" y1=\"" << MT << "\" x2=\"" << ML << "\" y2=\""
      << H - MB << "\" stroke=\"black\"/>\n";

  int color_idx = 0;
  int legend_y = MT + 10;
  const auto polyline = [&](const std::vector<double>& ys, const std::string& color,
                            const std::string& dash, const std::string& label) {
    std::ostringstream pts;
    bool any = false;
    for (std::size_t t = 0; t < ys.size(); ++t) {
      if (!std::isfinite(ys[t]) || ys[t] <= 0.0) continue;
      pts << coord(xmap(static_cast<double>(t))) << ',' << coord(ymap(ys[t])) << ' ';
      any = true;
    }
    if (!any) return;
    out << "<polyline fill=\"none\" stroke=\"" << color << "\"" << dash
        << " points=\"" << pts.str() << "\"/>\n";
    out << "<text x=\"" << W - MR + 8 << "\" y=\"" << legend_y
        << "\" font-size=\"12\" fill=\"" << color << "\">" << label << "</text>\n";
    legend_y += 16;
  };

  for (const auto& run : runs) {
    const auto& ys = run.trace.gaps.empty() ? run.trace.grad_norms : run.trace.gaps;
    polyline(ys, colors[color_idx % 5], "", run.trace.method_tag);
    ++color_idx;
  }
  if (!runs.empty()) {
    polyline(runs.front().bounds.floor, "#555555", " stroke-dasharray=\"6 3\"",
             runs.front().bounds.floor_tag.empty() ? "floor" : runs.front().bounds.floor_tag);
    polyline(runs.front().bounds.ceiling, "#aaaaaa", " stroke-dasharray=\"3 3\"",
             runs.front().bounds.ceiling_tag.empty() ? "ceiling"
                                                     : runs.front().bounds.ceiling_tag);
  }
  out << "<text x=\"" << (W - MR + ML) / 2 << "\" y=\"" << H - 10
      << "\" font-size=\"12\">t</text>\n"
      << "<text x=\"8\" y=\"" << (H - MB + MT) / 2
      << "\" font-size=\"12\">log gap</text>\n</svg>\n";
}

json violations_to_json(const std::vector<Violation>& violations) {
  json a = json::array();
  for (const auto& v : violations) {
    json item = {{"quantity", v.quantity}, {"measured", v.measured}, {"bound", v.bound}};
    if (v.t >= 0) item["t"] = v.t;
    a.push_back(std::move(item));
  }
  return a;
}

void write_summary(const std::string& path, const RunReport& report) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << report.to_json().dump(2) << '\n';
}

void write_all(const fs::path& dir, const std::vector<LabeledTrace>& runs,
               const RunReport& report) {
  fs::create_directories(dir);
  write_csv((dir / "trace.csv").string(), runs);
  write_summary((dir / "summary.json").string(), report);
  bool multi_row = false;
  for (const auto& run : runs) multi_row |= run.trace.points.size() > 1;
  if (multi_row) write_svg((dir / "chart.svg").string(), runs);
}

void check_bound_curve(const BoundCurve& bounds, std::vector<Violation>& violations) {
  const std::size_t n = std::min(bounds.floor.size(), bounds.ceiling.size());
  for (std::size_t t = 0; t < n; ++t) {
    if (std::isfinite(bounds.floor[t]) && std::isfinite(bounds.ceiling[t]) &&
        bounds.floor[t] > bounds.ceiling[t])
      violations.push_back({"floor-exceeds-ceiling", static_cast<long>(t),
                            bounds.floor[t], bounds.ceiling[t]});
  }
}

void check_calibration(const MooLiftedInstance<double>& inst,
                       const ScalarizedOracle<double>& oracle_e1, double R,
                       std::vector<Violation>& violations) {
  const Point<double> x0 = inst.start_point();
  const double dist = dist_to_pareto(inst, x0);
  if (std::abs(dist - R) > 1e-12 * R)
    violations.push_back({"dist-x0-to-pareto", -1, dist, R});
  const double r_lambda = (x0.flat() - oracle_e1.minimizer()).norm();
  if (std::abs(r_lambda - R) > 1e-12 * R)
    violations.push_back({"R-lambda-e1", -1, r_lambda, R});
}

RunReport run_strongly_convex(const ExperimentConfig& cfg) {
  const double L = cfg.L, mu = cfg.mu, R = cfg.R;
  const double kappa = L / mu;
  const int T = cfg.T;
  const double rho = (std::sqrt(kappa) + 1.0) / (std::sqrt(kappa) - 1.0);

  const auto g = make_strongly_convex_hard(L, mu, T, R);
  const auto inst = lift_to_moo(g, canonical_anchors(cfg.m), true);
  const auto oracle = scalarize(inst, SimplexWeights<double>::unit(cfg.m, 0));
  const Vec x0 = inst.start_point().flat();

  BoundCurve bounds;
  bounds.floor_tag = "mu R 2/(rho^t+rho^-t)";
  bounds.ceiling_tag = "sqrt(L(L+mu)) R rho^-t";
  for (int t = 0; t <= T; ++t) {
    bounds.floor.push_back(mu * R * strong_convex_extremal_value(kappa, t));
    bounds.ceiling.push_back(std::sqrt(L * (L + mu)) * R * std::pow(rho, -t));
  }

  std::vector<LabeledTrace> runs;
  runs.push_back({run_oblivious_gd(oracle, StepSchedule<double>::constant_for(L, T),
                                   x0, T),
                  oracle.min_value(), bounds});
  runs.push_back({run_agd_strongly_convex(oracle, L, mu, x0, T), oracle.min_value(),
                  bounds});
  runs.push_back({run_chebyshev_iteration(oracle, mu, L, x0, T), oracle.min_value(),
                  bounds});
  for (auto& run : runs) attach_pareto_gaps(run.trace, inst, cfg.tol);

  RunReport report;
  report.experiment = cfg.experiment;
  check_calibration(inst, oracle, R, report.violations);
  check_bound_curve(bounds, report.violations);

  const double vT = strong_convex_extremal_value(kappa, T);
  const double floor_T = mu * R * vT;
  const double cheb_final = runs[2].trace.gaps.back();
  if (cheb_final < floor_T)
    report.violations.push_back({"chebyshev-final-gap-floor", T, cheb_final, floor_T});
  if (cheb_final > L * R * vT * (1.0 + 1e-6))
    report.violations.push_back(
        {"chebyshev-final-gap-ceiling", T, cheb_final, L * R * vT});
  const double gd_final = runs[0].trace.gaps.back();
  if (gd_final < floor_T)
    report.violations.push_back({"gd-final-gap-floor", T, gd_final, floor_T});
  const double agd_final = runs[1].trace.gaps.back();
  if (agd_final > bounds.ceiling[static_cast<std::size_t>(T)])
    report.violations.push_back({"agd-sc-final-gap-ceiling", T, agd_final,
                                 bounds.ceiling[static_cast<std::size_t>(T)]});

  report.metrics = {{"kappa", kappa},
                    {"rho", rho},
                    {"extremal_value_T", vT},
                    {"floor_T", floor_T},
                    {"ceiling_T", L * R * vT},
                    {"gd_final_gap", gd_final},
                    {"agd_final_gap", agd_final},
                    {"chebyshev_final_gap", cheb_final}};
  write_all(cfg.output_dir, runs, report);
  return report;
}

RunReport run_oblivious(const ExperimentConfig& cfg) {
  const double L = cfg.L, R = cfg.R;
  const int T = cfg.T;

  std::vector<double> alphas = cfg.schedule;
  const bool constant = alphas.empty();
  if (constant) alphas.assign(static_cast<std::size_t>(T), 1.0 / L);
  alphas.resize(static_cast<std::size_t>(T));  // the instance matches the run horizon
  const StepSchedule<double> schedule(alphas, 1.0 / L);

  const auto ext = product_extremal(schedule, L);
  const auto g = make_convex_hard_for_schedule(L, schedule, R);
  const auto inst = lift_to_moo(g, canonical_anchors(cfg.m), false);
  const auto oracle = scalarize(inst, SimplexWeights<double>::unit(cfg.m, 0));

  BoundCurve bounds;
  bounds.floor_tag = "L R / (4(t+1))";
  bounds.ceiling_tag = constant ? "R (L/(t+1))(1-1/(t+1))^t" : "";
  for (int t = 0; t <= T; ++t) {
    bounds.floor.push_back(L * R / (4.0 * (t + 1)));
    bounds.ceiling.push_back(
        constant ? R * (L / (t + 1)) * std::pow(1.0 - 1.0 / (t + 1), t)
                 : std::numeric_limits<double>::quiet_NaN());
  }

  std::vector<LabeledTrace> runs;
  runs.push_back({run_oblivious_gd(oracle, schedule, inst.start_point().flat(), T),
                  oracle.min_value(), bounds});
  attach_pareto_gaps(runs[0].trace, inst, cfg.tol);

  RunReport report;
  report.experiment = cfg.experiment;
  check_calibration(inst, oracle, R, report.violations);

  double min_gap = runs[0].trace.gaps.front();
  for (double gap : runs[0].trace.gaps) min_gap = std::min(min_gap, gap);
  const double floor = L * R / (4.0 * (T + 1));
  if (min_gap < floor * (1.0 - 1e-9))
    report.violations.push_back({"min-iterate-gap-floor", T, min_gap, floor});
  const double exact_ceiling = R * (L / (T + 1)) * std::pow(1.0 - 1.0 / (T + 1), T);
  if (constant && min_gap > exact_ceiling * (1.0 + 1e-9))
    report.violations.push_back({"min-iterate-gap-ceiling", T, min_gap, exact_ceiling});

  report.metrics = {{"zeta_star", ext.zeta_star},
                    {"extremal_value", ext.value},
                    {"min_iterate_gap", min_gap},
                    {"floor", floor},
                    {"constant_schedule", constant},
                    {"exact_ceiling", exact_ceiling},
                    {"e_ceiling_reference", L * R / (std::exp(1.0) * (T + 1))}};
  write_all(cfg.output_dir, runs, report);
  return report;
}

RunReport run_universal(const ExperimentConfig& cfg) {
  const double L = cfg.L, R = cfg.R;
  const int T = cfg.T;
  const Index n = Index(4) * Index(T + 1) * Index(T + 1);

  const auto g = make_markov_grid_instance(L, T, R, n);
  const auto inst = lift_to_moo(g, canonical_anchors(cfg.m), false);
  const auto oracle = scalarize(inst, SimplexWeights<double>::unit(cfg.m, 0));
  const Vec x0 = inst.start_point().flat();

  BoundCurve bounds;
  bounds.floor_tag = "L / (2(t+1)^2)";
  for (int t = 0; t <= T; ++t) {
    bounds.floor.push_back(markov_floor(L, t));
    bounds.ceiling.push_back(std::numeric_limits<double>::quiet_NaN());
  }

  std::vector<LabeledTrace> runs;
  runs.push_back({run_agd_convex(oracle, L, x0, T), oracle.min_value(), bounds});
  runs.push_back({run_mgda(inst, 1.0 / L, inst.start_point(), T, cfg.tol),
                  oracle.min_value(), bounds});
  runs.push_back({run_chebyshev_iteration(oracle, L / static_cast<double>(n), L, x0, T),
                  oracle.min_value(), bounds});
  attach_pareto_gaps(runs[0].trace, inst, cfg.tol);
  attach_pareto_gaps(runs[2].trace, inst, cfg.tol);

  RunReport report;
  report.experiment = cfg.experiment;
  check_calibration(inst, oracle, R, report.violations);

  json per_method = json::object();
  for (const auto& run : runs) {
    double min_margin = std::numeric_limits<double>::infinity();
    double max_fit_residual = 0.0;
    const int steps = static_cast<int>(run.trace.points.size()) - 1;
    for (int t = 1; t <= steps; ++t) {
      const Vec et = run.trace.points[static_cast<std::size_t>(t)].head(inst.dim_v());
      const auto fit = fit_residual_from_trace(g.eigs(), g.e0(), et, t);
      max_fit_residual = std::max(max_fit_residual, fit.fit_residual);
      double grid_max = 0.0;
      for (Index i = 0; i < g.dim(); ++i)
        grid_max =
            std::max(grid_max, std::abs(g.eigs()[i] * fit.poly(g.eigs()[i])));
      const double floor = markov_floor(L, t);
      min_margin = std::min(min_margin, grid_max / floor);
      if (grid_max < floor)
        report.violations.push_back(
            {run.trace.method_tag + "-markov-floor", t, grid_max, floor});
    }
    per_method[run.trace.method_tag] = {{"min_floor_margin", min_margin},
                                        {"max_fit_residual", max_fit_residual},
                                        {"steps", steps}};
  }
  report.metrics = {{"grid_nodes", n}, {"per_method", per_method}};
  write_all(cfg.output_dir, runs, report);
  return report;
}

RunReport run_upper_agd(const ExperimentConfig& cfg) {
  const double L = cfg.L, R = cfg.R;
  const int T = cfg.T;
  const bool strongly_convex = cfg.mu > 0.0;

  RunReport report;
  report.experiment = cfg.experiment;
  std::vector<LabeledTrace> runs;

  if (strongly_convex) {
    const double mu = cfg.mu;
    const double kappa = L / mu;
    const double rho = (std::sqrt(kappa) + 1.0) / (std::sqrt(kappa) - 1.0);
    const auto g = make_strongly_convex_hard(L, mu, T, R);
    const auto inst = lift_to_moo(g, canonical_anchors(cfg.m), true);
    const auto oracle = scalarize(inst, SimplexWeights<double>::unit(cfg.m, 0));
    const Vec x0 = inst.start_point().flat();

    BoundCurve bounds;
    bounds.ceiling_tag = "sqrt(L(L+mu)) R rho^-t";
    for (int t = 0; t <= T; ++t) {
      bounds.floor.push_back(std::numeric_limits<double>::quiet_NaN());
      bounds.ceiling.push_back(std::sqrt(L * (L + mu)) * R * std::pow(rho, -t));
    }
    runs.push_back({run_agd_strongly_convex(oracle, L, mu, x0, T),
                    oracle.min_value(), bounds});
    attach_pareto_gaps(runs[0].trace, inst, cfg.tol);
    check_calibration(inst, oracle, R, report.violations);

    const auto& tr = runs[0].trace;
    for (int t = 1; t <= T; ++t) {
      const double gap = tr.gaps[static_cast<std::size_t>(t)];
      const double gap_bound = bounds.ceiling[static_cast<std::size_t>(t)];
      if (gap > gap_bound * (1.0 + 1e-9))
        report.violations.push_back({"gap-ceiling-sc", t, gap, gap_bound});
      const double f_gap = tr.fvals[static_cast<std::size_t>(t)] - oracle.min_value();
      const double f_bound = 0.5 * (L + mu) * R * R * std::pow(rho, -2 * t);
      if (f_gap > f_bound * (1.0 + 1e-9))
        report.violations.push_back({"f-gap-ceiling-sc", t, f_gap, f_bound});
    }

    json complexity = json::array();
    for (double eps : cfg.epsilons) {
      const int t_suff = static_cast<int>(
          std::ceil(std::log(std::sqrt(L * (L + mu)) * R / eps) / std::log(rho)));
      const int t_run = std::max(t_suff, 0);
      IterateTrace<double> check_tr =
          t_run <= T ? tr : run_agd_strongly_convex(oracle, L, mu, x0, t_run);
      if (t_run > T) attach_pareto_gaps(check_tr, inst, cfg.tol);
      const double gap = check_tr.gaps[static_cast<std::size_t>(t_run)];
      complexity.push_back(
          {{"epsilon", eps}, {"sufficient_T", t_suff}, {"gap_at_T", gap}});
      if (gap > eps * (1.0 + 1e-9))
        report.violations.push_back({"cor1-sufficient-T-sc", t_run, gap, eps});
    }
    report.metrics = {{"mode", "strongly-convex"},
                      {"kappa", kappa},
                      {"rho", rho},
                      {"final_gap", tr.gaps.back()},
                      {"complexity", complexity}};
  } else {
    const int t_grid = std::min(T, 30);
    const auto g =
        make_markov_grid_instance(L, t_grid, R, Index(4) * (t_grid + 1) * (t_grid + 1));
    const auto inst = lift_to_moo(g, canonical_anchors(cfg.m), false);
    const auto oracle = scalarize(inst, SimplexWeights<double>::unit(cfg.m, 0));
    const Vec x0 = inst.start_point().flat();

    BoundCurve bounds;
    bounds.ceiling_tag = "2 L R / (t+1)";
    for (int t = 0; t <= T; ++t) {
      bounds.floor.push_back(std::numeric_limits<double>::quiet_NaN());
      bounds.ceiling.push_back(2.0 * L * R / (t + 1));
    }
    runs.push_back({run_agd_convex(oracle, L, x0, T), oracle.min_value(), bounds});
    attach_pareto_gaps(runs[0].trace, inst, cfg.tol);
    check_calibration(inst, oracle, R, report.violations);

    const auto& tr = runs[0].trace;
    for (int t = 1; t <= T; ++t) {
      const double f_gap = tr.fvals[static_cast<std::size_t>(t)] - oracle.min_value();
      const double f_bound = 2.0 * L * R * R / (static_cast<double>(t + 1) * (t + 1));
      if (f_gap > f_bound * (1.0 + 1e-9))
        report.violations.push_back({"f-gap-ceiling", t, f_gap, f_bound});
      const double gap = tr.gaps[static_cast<std::size_t>(t)];
      const double gap_bound = 2.0 * L * R / (t + 1);
      if (gap > gap_bound * (1.0 + 1e-9))
        report.violations.push_back({"gap-ceiling", t, gap, gap_bound});
    }

    json complexity = json::array();
    for (double eps : cfg.epsilons) {
      const int t_suff =
          static_cast<int>(std::ceil(2.0 * L * R / eps)) - 1;
      const int t_run = std::max(t_suff, 0);
      IterateTrace<double> check_tr =
          t_run <= T ? tr : run_agd_convex(oracle, L, x0, t_run);
      if (t_run > T) attach_pareto_gaps(check_tr, inst, cfg.tol);
      const double gap = check_tr.gaps[static_cast<std::size_t>(t_run)];
      complexity.push_back(
          {{"epsilon", eps}, {"sufficient_T", t_suff}, {"gap_at_T", gap}});
      if (gap > eps * (1.0 + 1e-9))
        report.violations.push_back({"cor1-sufficient-T", t_run, gap, eps});
    }
    report.metrics = {{"mode", "convex"},
                      {"final_gap", tr.gaps.back()},
                      {"final_f_gap", tr.fvals.back() - oracle.min_value()},
                      {"complexity", complexity}};
  }

  write_all(cfg.output_dir, runs, report);
  return report;
}

}  // namespace

ExperimentConfig ExperimentConfig::from_json(const json& j) {
  ExperimentConfig cfg;
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    try {
      if (key == "experiment")
        cfg.experiment = value.get<std::string>();
      else if (key == "L")
        cfg.L = value.get<double>();
      else if (key == "mu")
        cfg.mu = value.get<double>();
      else if (key == "kappa")
        cfg.kappa = value.get<double>();
      else if (key == "T")
        cfg.T = value.get<int>();
      else if (key == "R")
        cfg.R = value.get<double>();
      else if (key == "m")
        cfg.m = value.get<int>();
      else if (key == "seed")
        cfg.seed = value.get<std::uint64_t>();
      else if (key == "tol")
        cfg.tol = value.get<double>();
      else if (key == "output_dir")
        cfg.output_dir = value.get<std::string>();
      else if (key == "schedule")
        cfg.schedule = value.get<std::vector<double>>();
      else if (key == "epsilons")
        cfg.epsilons = value.get<std::vector<double>>();
      else
        throw ConfigError("unknown config key: " + key);
    } catch (const json::exception& e) {
      throw ConfigError("bad value for config key '" + key + "': " + e.what());
    }
  }
  return cfg;
}

ExperimentConfig ExperimentConfig::from_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  return from_json(j);
}

json ExperimentConfig::to_json() const {
  return {{"experiment", experiment},
          {"L", L},
          {"mu", mu},
          {"kappa", kappa},
          {"T", T},
          {"R", R},
          {"m", m},
          {"seed", seed},
          {"tol", tol},
          {"output_dir", output_dir},
          {"schedule", schedule},
          {"epsilons", epsilons}};
}

void ExperimentConfig::finalize() {
  const bool sc = experiment == "strongly-convex";
  const bool oblivious = experiment == "oblivious";
  const bool universal = experiment == "universal";
  const bool upper = experiment == "upper-agd";
  if (!sc && !oblivious && !universal && !upper)
    throw ConfigError("unknown experiment tag: '" + experiment + "'");

  if (L == 0.0) L = sc ? 9.0 : 1.0;
  if (!(std::isfinite(L) && L > 0.0)) throw ConfigError("L must be positive");

  if (mu < 0.0) {
    if (kappa > 0.0)
      mu = L / kappa;
    else
      mu = sc ? 1.0 : 0.0;
  }
  if (!(std::isfinite(mu) && mu >= 0.0)) throw ConfigError("mu must be nonnegative");
  if (mu > L) throw ConfigError("mu must not exceed L");
  if (kappa > 0.0) {
    if (mu == 0.0) throw ConfigError("kappa given but the problem is not strongly convex");
    if (std::abs(kappa - L / mu) > 1e-9 * kappa)
      throw ConfigError("inconsistent kappa: it must equal L/mu");
  } else if (mu > 0.0) {
    kappa = L / mu;
  }

  if (sc && !(mu > 0.0 && L > mu))
    throw ConfigError("strongly-convex experiment needs kappa > 1");
  if ((oblivious || universal) && mu != 0.0)
    throw ConfigError(experiment + " experiment is a convex construction; mu must be 0");
  if (upper && mu > 0.0 && L == mu)
    throw ConfigError("upper-agd strongly convex mode needs kappa > 1");

  if (T == 0) T = sc ? 8 : (oblivious ? 4 : (universal ? 20 : 100));
  if (T < 1) throw ConfigError("T must be at least 1");
  if (universal && T > 49)
    throw ConfigError("universal experiment caps T at 49 (grid dimension limit)");

  if (!(std::isfinite(R) && R > 0.0)) throw ConfigError("R must be positive");
  if (m < 2) throw ConfigError("m must be at least 2");
  if (!(std::isfinite(tol) && tol > 0.0)) throw ConfigError("tol must be positive");
  for (double eps : epsilons)
    if (!(std::isfinite(eps) && eps > 0.0)) throw ConfigError("epsilons must be positive");

  if (!schedule.empty()) {
    if (!oblivious) throw ConfigError("schedule is only used by the oblivious experiment");
    if (static_cast<int>(schedule.size()) < T)
      throw ConfigError("schedule shorter than T");
    for (double a : schedule)
      if (!(std::isfinite(a) && a >= 0.0 && a <= 1.0 / L))
        throw ConfigError("schedule steps must lie in [0, 1/L]");
  }
}

json RunReport::to_json() const {
  return {{"experiment", experiment},
          {"config", config},
          {"metrics", metrics},
          {"violations", violations_to_json(violations)},
          {"runtime_ms", runtime_ms}};
}

RunReport run_experiment(const ExperimentConfig& cfg_in) {
  ExperimentConfig cfg = cfg_in;
  cfg.finalize();
  const auto start = std::chrono::steady_clock::now();
  RunReport report;
  if (cfg.experiment == "strongly-convex")
    report = run_strongly_convex(cfg);
  else if (cfg.experiment == "oblivious")
    report = run_oblivious(cfg);
  else if (cfg.experiment == "universal")
    report = run_universal(cfg);
  else
    report = run_upper_agd(cfg);
  report.config = cfg.to_json();
  report.runtime_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                          std::chrono::steady_clock::now() - start)
                          .count();
  // Rewrite the summary with config and timing attached.
  write_summary((fs::path(cfg.output_dir) / "summary.json").string(), report);
  return report;
}

void write_report(const IterateTrace<double>& trace, const BoundCurve& bounds,
                  const std::string& dir, double f_star) {
  require(trace.points.size() == trace.fvals.size() &&
              trace.points.size() == trace.grad_norms.size(),
          "write_report: trace arrays out of step");
  std::vector<LabeledTrace> runs;
  runs.push_back({trace, f_star, bounds});
  RunReport report;
  report.experiment = "trace";
  report.metrics = {{"rows", trace.points.size()}};
  check_bound_curve(bounds, report.violations);
  write_all(dir, runs, report);
}

int verify_appendix(int trials, std::ostream& out) {
  require(trials > 0, "verify-appendix: trials must be positive");
  std::mt19937_64 rng(12907);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  bool all_ok = true;
  const auto report = [&](const char* name, bool ok, const std::string& detail) {
    out << (ok ? "[PASS] " : "[FAIL] ") << name;
    if (!detail.empty()) out << " (" << detail << ")";
    out << '\n';
    all_ok &= ok;
  };

  {  // prod(1 - x_i) >= 1 - sum x_i on [0,1] tuples
    bool ok = true;
    for (int rep = 0; rep < trials * 100 && ok; ++rep) {
      const int r = 1 + static_cast<int>(u(rng) * 50);
      double prod = 1.0, sum = 0.0;
      for (int i = 0; i < r; ++i) {
        const double x = u(rng);
        prod *= 1.0 - x;
        sum += x;
      }
      ok = prod >= 1.0 - sum - 1e-12;
    }
    report("product inequality", ok, std::to_string(trials * 100) + " tuples");
  }

  {  // capped-schedule extremal floor L/(4(T+1))
    bool ok = true;
    double min_margin = std::numeric_limits<double>::infinity();
    const double L = 1.0;
    for (int T = 1; T <= 50 && ok; ++T) {
      for (int rep = 0; rep < trials && ok; ++rep) {
        std::vector<double> alphas(static_cast<std::size_t>(T));
        for (double& a : alphas) a = u(rng) / L;
        const auto ext = product_extremal(StepSchedule<double>(alphas, 1.0 / L), L);
        const double floor = L / (4.0 * (T + 1));
        min_margin = std::min(min_margin, ext.value / floor);
        ok = ext.value >= floor;
      }
    }
    report("product extremal floor", ok,
           "min margin " + format_double(min_margin));
  }

  {  // constant schedule: exact value identity and the e-scaled envelope
    bool ok = true;
    double worst_ratio = 0.0;
    const double L = 1.0;
    for (int T = 1; T <= 50 && ok; ++T) {
      const auto ext = product_extremal(StepSchedule<double>::constant_for(L, T), L);
      const double formula = (L / (T + 1)) * std::pow(1.0 - 1.0 / (T + 1), T);
      ok = std::abs(ext.value - formula) <= 1e-12 * formula;
      ok = ok && ext.value <= L / (std::exp(1.0) * T);
      worst_ratio = std::max(worst_ratio, ext.value * std::exp(1.0) * (T + 1) / L);
    }
    report("constant schedule ceiling", ok,
           "value*e*(T+1)/L approaches 1 from above; max " +
               format_double(worst_ratio));
  }

  {  // Markov floor for random residual polynomials
    bool ok = true;
    const double L = 1.0;
    std::uniform_real_distribution<double> root(-2.0 * L, 2.0 * L);
    std::normal_distribution<double> coeff(0.0, 1.0);
    for (int t = 1; t <= 20 && ok; ++t) {
      const double floor = markov_floor(L, t);
      const int n_grid = 4 * (t + 1) * (t + 1);
      for (int rep = 0; rep < trials * 5 && ok; ++rep) {
        Vec c = Vec::Zero(t + 1);
        if (rep % 2 == 0) {
          c[0] = 1.0;
          Index deg = 0;
          for (int k = 0; k < t; ++k) {
            double z = root(rng);
            if (std::abs(z) < 1e-3) z = (z >= 0 ? 1e-3 : -1e-3);
            ++deg;
            for (Index j = deg; j >= 1; --j) c[j] -= c[j - 1] / z;
          }
        } else {
          for (int k = 0; k <= t; ++k) c[k] = coeff(rng);
          if (c[0] == 0.0) c[0] = 1.0;
          c /= c[0];
        }
        const ResidualPolynomial<double> p(c);
        double grid_max = 0.0;
        for (int i = 0; i <= n_grid; ++i) {
          const double zeta = L * i / n_grid;
          grid_max = std::max(grid_max, std::abs(zeta * p(zeta)));
        }
        ok = grid_max >= floor;
      }
    }
    report("markov floor for random residuals", ok,
           std::to_string(trials * 5) + " polynomials per degree");
  }

  {  // zeta prod_{k<s}(1 - alpha_k zeta) is nonincreasing in s
    bool ok = true;
    const double L = 2.0;
    for (int rep = 0; rep < trials * 10 && ok; ++rep) {
      const double zeta = u(rng) * L;
      double prev = zeta, prod = 1.0;
      for (int k = 0; k < 40 && ok; ++k) {
        prod *= 1.0 - (u(rng) / L) * zeta;
        const double cur = zeta * std::abs(prod);
        ok = cur <= prev * (1.0 + 1e-12);
        prev = cur;
      }
    }
    report("monotone decay in the step count", ok, "");
  }

  {  // rho identity and the two Chebyshev evaluation paths
    bool ok = true;
    for (int rep = 0; rep < trials * 10 && ok; ++rep) {
      const double mu = 0.1 + u(rng);
      const double kappa = 1.0 + 1e-3 + 100.0 * u(rng);
      const ChebyshevFrame<double> frame(mu, kappa * mu);
      const double direct = (std::sqrt(kappa) + 1.0) / (std::sqrt(kappa) - 1.0);
      ok = std::abs(frame.rho - direct) <= 1e-12 * direct;
    }
    for (int rep = 0; rep < trials * 10 && ok; ++rep) {
      const int t = static_cast<int>(u(rng) * 200);
      const double x = (1.0 + 999.0 * u(rng)) * (rep % 2 == 0 ? 1.0 : -1.0);
      if (t * std::log(std::abs(x) + std::sqrt(x * x - 1.0)) > 690.0) continue;
      const double a = chebyshev_T_recurrence(t, x);
      const double b = chebyshev_T_closed_form(t, x);
      ok = std::abs(a - b) <= 1e-10 * std::max(1.0, std::abs(b));
    }
    report("chebyshev identities", ok, "");
  }

  return all_ok ? 0 : 2;
}

}  // namespace moolab::lab
