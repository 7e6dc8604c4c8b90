#pragma once

// End-to-end orchestration: generator or file -> measurement -> constants ->
// bounds report, plus the plot-ready CSV curves and the annulus sweep.

#include <atomic>
#include <chrono>
#include <filesystem>
#include <mutex>
#include <sstream>
#include <thread>

#include "voltbound/bounds.hpp"
#include "voltbound/fields.hpp"
#include "voltbound/io.hpp"
#include "voltbound/quadrature.hpp"
#include "voltbound/scan.hpp"

namespace voltbound {

struct PipelineResult {
  PhaseConductivities cond;
  BoundaryMeasurement meas;
  DerivedConstants consts;
  BoundsReport report;
  std::optional<BoundaryTrace> trace;  // present when a disk generator ran
  double runtime_ms = 0.0;
};

namespace detail {

inline PhaseConductivities config_conductivities(const RunConfig& cfg) {
  if (!cfg.sigma1 || !cfg.sigma2)
    throw Error(ErrorCode::InvalidInput, "config needs sigma1 and sigma2");
  return {*cfg.sigma1, *cfg.sigma2};
}

inline FieldSolution solve_generator(const RunConfig& cfg,
                                     const PhaseConductivities& cond) {
  if (cfg.layered_disk)
    return solve_layered_disk(cfg.layered_disk->geom, cond,
                              cfg.layered_disk->bc);
  if (cfg.coreshell)
    return coreshell_solution(cfg.coreshell->R1, cfg.coreshell->R2, cond,
                              cfg.coreshell->k);
  throw Error(ErrorCode::InvalidInput, "no disk generator in config");
}

}  // namespace detail

// Forward mode: produce the measurement artifact for later ingestion.  Disk
// generators emit a boundary trace; the laminate has no circular boundary,
// so it emits a measurement document instead.
inline void run_forward(const RunConfig& cfg) {
  cfg.validate();
  const PhaseConductivities cond = detail::config_conductivities(cfg);
  namespace fs = std::filesystem;
  fs::create_directories(cfg.out_dir);
  if (cfg.laminate) {
    const ExactMoments mom = laminate_moments(
        cfg.laminate->f1, cond, cfg.laminate->field, cfg.laminate->normal);
    detail::save_json_file(
        (fs::path(cfg.out_dir) / "measurement.json").string(),
        measurement_to_json(cond, mom.measurement()));
    return;
  }
  const FieldSolution sol = detail::solve_generator(cfg, cond);
  const BoundaryTrace trace = boundary_trace(sol, cfg.quadrature_n);
  detail::save_json_file((fs::path(cfg.out_dir) / "trace.json").string(),
                         trace_to_json(trace));
}

inline PipelineResult run_pipeline(const RunConfig& cfg) {
  cfg.validate();
  const auto t0 = std::chrono::steady_clock::now();

  std::optional<PhaseConductivities> cond;
  BoundaryMeasurement meas;
  std::optional<BoundaryTrace> trace;

  if (cfg.measurement_file) {
    MeasurementFile mf =
        measurement_from_json(detail::load_json_file(*cfg.measurement_file));
    cond = mf.cond;
    meas = mf.meas;
  } else if (cfg.trace_file) {
    cond = detail::config_conductivities(cfg);
    trace = trace_from_json(detail::load_json_file(*cfg.trace_file));
    meas = null_lagrangians(*trace);
  } else if (cfg.laminate) {
    cond = detail::config_conductivities(cfg);
    meas = laminate_moments(cfg.laminate->f1, *cond, cfg.laminate->field,
                            cfg.laminate->normal)
               .measurement();
  } else {
    cond = detail::config_conductivities(cfg);
    const FieldSolution sol = detail::solve_generator(cfg, *cond);
    trace = boundary_trace(sol, cfg.quadrature_n);
    meas = null_lagrangians(*trace);
  }

  DerivedConstants consts = derive_constants(*cond, meas);
  const ScanOptions opt{cfg.grid_n, cfg.refine_tol};
  BoundsReport report = full_bounds(consts, opt);

  const auto t1 = std::chrono::steady_clock::now();
  PipelineResult res{*cond, meas, std::move(consts), std::move(report),
                     std::move(trace)};
  res.runtime_ms =
      std::chrono::duration<double, std::milli>(t1 - t0).count();
  return res;
}

// ---------------------------------------------------------------------------
// CSV curves mirroring the diagnostic plots: rectangle bounds, discriminant
// and center values, closed-form maxima, and sampled ellipse boundaries.

namespace detail {

inline void write_text_file(const std::string& path, const std::string& data) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::InvalidInput, "cannot write " + path);
  out << data;
}

inline std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

// boundary of {p >= level} sampled uniformly in the principal-axis angle
inline std::vector<Vec2> sample_ellipse_boundary(const EllipseQuadratic& q,
                                                 double level, int n) {
  const Vec2 c = ellipse_center(q);
  const double pmax = q.eval(c.x, c.y);
  std::vector<Vec2> pts;
  if (pmax < level) return pts;
  // p = pmax + d' A d with A = [[a1,a2],[a2,a3]] negative definite
  const double tr = -(q.a1 + q.a3);
  const double det = q.discriminant();
  const double disc = std::sqrt(std::max(0.0, tr * tr / 4.0 - det));
  const double l1 = tr / 2.0 + disc;  // eigenvalues of -A
  const double l2 = tr / 2.0 - disc;
  // eigenvector of -A for l1
  Vec2 v1{-q.a2, l1 + q.a1};
  if (v1.norm2() == 0.0) v1 = Vec2{l1 + q.a3, -q.a2};
  if (v1.norm2() == 0.0) v1 = Vec2{1.0, 0.0};
  const double inv = 1.0 / v1.norm();
  v1 = inv * v1;
  const Vec2 v2 = rperp(v1);
  const double s1 = std::sqrt((pmax - level) / l1);
  const double s2 = std::sqrt((pmax - level) / l2);
  for (int i = 0; i < n; ++i) {
    const double t = 2.0 * kPi * double(i) / double(n);
    pts.push_back(c + (s1 * std::cos(t)) * v1 + (s2 * std::sin(t)) * v2);
  }
  return pts;
}

}  // namespace detail

inline void emit_curves(const RunConfig& cfg, const PipelineResult& res,
                        const std::string& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  const DerivedConstants& c = res.consts;
  const BoundsReport& r = res.report;
  const int n = std::max(cfg.grid_n, 3);

  {  // feasibility rectangle edges over the open unit interval
    std::ostringstream os;
    os << "f,x_lo,x_hi,y_lo,y_hi\n";
    for (int i = 0; i < n; ++i) {
      const double f = (double(i) + 0.5) / double(n);
      const FeasibleRectangle rect = feasible_rectangle(c, f);
      os << detail::fmt(f) << ',' << detail::fmt(rect.x_lo) << ','
         << detail::fmt(rect.x_hi) << ',' << detail::fmt(rect.y_lo) << ','
         << detail::fmt(rect.y_hi) << '\n';
    }
    detail::write_text_file((fs::path(dir) / "rectangle_bounds.csv").string(),
                            os.str());
  }

  auto discriminant_curve = [&](bool tilde, double lo, double hi,
                                const std::string& name) {
    std::ostringstream os;
    os << "f,Delta" << (tilde ? "_tilde" : "") << ",p1_at_r2,p2_at_r1\n";
    for (int i = 0; i < n; ++i) {
      const double f = lo + (hi - lo) * double(i) / double(n - 1);
      const AdmissibilityVerdict v = intersection_verdict(c, f, tilde);
      os << detail::fmt(f) << ',' << detail::fmt(v.delta) << ','
         << detail::fmt(v.p1_at_r2) << ',' << detail::fmt(v.p2_at_r1) << '\n';
    }
    detail::write_text_file((fs::path(dir) / name).string(), os.str());
  };
  if (r.f_eu > r.f_el)
    discriminant_curve(false, r.f_el, r.f_eu, "delta_curve.csv");

  if (c.has_b12()) {
    std::ostringstream os;
    os << "f,ptilde1_max,ptilde2_max\n";
    for (int i = 0; i < n; ++i) {
      const double f = r.f_el + (r.f_eu - r.f_el) * double(i) / double(n - 1);
      os << detail::fmt(f) << ',' << detail::fmt(ellipse_pmax(c, f, 1, true))
         << ',' << detail::fmt(ellipse_pmax(c, f, 2, true)) << '\n';
    }
    detail::write_text_file((fs::path(dir) / "ptildemax_curve.csv").string(),
                            os.str());
    if (r.f_tilde_eu && r.f_tilde_el && *r.f_tilde_eu > *r.f_tilde_el)
      discriminant_curve(true, *r.f_tilde_el, *r.f_tilde_eu,
                         "delta_tilde_curve.csv");
  }

  {  // sampled ellipse boundaries at requested test values
    std::vector<double> fvals = cfg.curve_f_values;
    if (fvals.empty()) {
      for (int i = 0; i < 8; ++i)
        fvals.push_back(r.f_el +
                        (r.f_eu - r.f_el) * double(i) / 7.0);
    }
    std::ostringstream os;
    os << "f,phase,tilde,x,y\n";
    for (double f : fvals) {
      for (int phase = 1; phase <= 2; ++phase) {
        for (int tilde = 0; tilde <= (c.has_b12() ? 1 : 0); ++tilde) {
          const EllipseQuadratic q =
              ellipse_quadratic(c, f, phase, tilde != 0);
          for (const Vec2& p :
               detail::sample_ellipse_boundary(q, 0.0, 256)) {
            os << detail::fmt(f) << ',' << phase << ',' << tilde << ','
               << detail::fmt(p.x) << ',' << detail::fmt(p.y) << '\n';
          }
        }
      }
    }
    detail::write_text_file((fs::path(dir) / "ellipses.csv").string(),
                            os.str());
  }
}

// ---------------------------------------------------------------------------
// Report document assembly + file outputs

inline Json pipeline_report_json(const RunConfig& cfg,
                                 const PipelineResult& res) {
  Json inputs;
  inputs["mode"] = run_mode_name(cfg.mode);
  inputs["sigma1"] = detail::to_json(res.cond.sigma1());
  inputs["sigma2"] = detail::to_json(res.cond.sigma2());
  inputs["measurement"] = measurement_to_json(res.cond, res.meas);
  if (cfg.layered_disk) {
    inputs["generator"] = "layered-disk";
    inputs["radii"] = cfg.layered_disk->geom.radii;
    inputs["layer_phase"] = cfg.layered_disk->geom.layer_phase;
  } else if (cfg.coreshell) {
    inputs["generator"] = "core-shell";
  } else if (cfg.laminate) {
    inputs["generator"] = "laminate";
  } else if (cfg.trace_file) {
    inputs["trace_file"] = *cfg.trace_file;
  } else if (cfg.measurement_file) {
    inputs["measurement_file"] = *cfg.measurement_file;
  }

  Json diagnostics;
  diagnostics["quadrature_n"] = cfg.quadrature_n;
  diagnostics["grid_n"] = cfg.grid_n;
  diagnostics["refine_tol"] = cfg.refine_tol;
  diagnostics["runtime_ms"] = res.runtime_ms;

  return report_to_json(res.report, res.consts, inputs, diagnostics);
}

inline void write_pipeline_outputs(const RunConfig& cfg,
                                   const PipelineResult& res) {
  namespace fs = std::filesystem;
  fs::create_directories(cfg.out_dir);
  detail::save_json_file((fs::path(cfg.out_dir) / "report.json").string(),
                         pipeline_report_json(cfg, res));
  if (res.trace && cfg.mode == RunMode::Pipeline)
    detail::save_json_file((fs::path(cfg.out_dir) / "trace.json").string(),
                           trace_to_json(*res.trace));
  if (cfg.emit_curves) emit_curves(cfg, res, cfg.out_dir);
}

// ---------------------------------------------------------------------------
// Annulus sweep: for each conductivity pair and each target volume fraction,
// size the middle radius so the core+exterior phase hits the target exactly,
// run the pipeline, and emit all eight bounds normalized by the target.

struct SweepRow {
  int pair_index = 0;
  double f1 = 0.0;
  double f_el = 0.0, inf_A = 0.0, f_tilde_el = 0.0, inf_Atilde = 0.0;
  double f_tilde_eu = 0.0, sup_Atilde = 0.0, f_eu = 0.0, sup_A = 0.0;
};

inline SweepRow sweep_row(const SweepConfig& sw, int pair_index, double f1,
                          const ScanOptions& opt, int quadrature_n) {
  const auto& [s1, s2] = sw.pairs[std::size_t(pair_index)];
  const PhaseConductivities cond{s1, s2};
  const double R2 = std::sqrt(sw.R1 * sw.R1 + sw.R3 * sw.R3 * (1.0 - f1));
  if (!(sw.R1 < R2 && R2 < sw.R3))
    throw Error(ErrorCode::InvalidRadii,
                "target volume fraction incompatible with sweep radii");
  LayeredDiskGeometry geom{{sw.R1, R2, sw.R3}, {1, 2, 1}};
  const FieldSolution sol =
      solve_layered_disk(geom, cond, FourierBC::affine(sw.u, sw.R3));
  const BoundaryTrace trace = boundary_trace(sol, quadrature_n);
  const DerivedConstants consts =
      derive_constants(cond, null_lagrangians(trace));
  const BoundsReport rep = full_bounds(consts, opt);
  if (!rep.f_tilde_el || !rep.setAtilde || rep.setAtilde->empty() ||
      rep.setA.empty())
    throw Error(ErrorCode::EmptySet, "sweep row produced an empty set");

  SweepRow row;
  row.pair_index = pair_index;
  row.f1 = f1;
  row.f_el = rep.f_el;
  row.f_eu = rep.f_eu;
  row.f_tilde_el = *rep.f_tilde_el;
  row.f_tilde_eu = *rep.f_tilde_eu;
  std::tie(row.inf_A, row.sup_A) = bounds_of(rep.setA);
  std::tie(row.inf_Atilde, row.sup_Atilde) = bounds_of(*rep.setAtilde);
  return row;
}

inline std::vector<SweepRow> run_sweep(const RunConfig& cfg) {
  cfg.validate();
  const SweepConfig& sw = *cfg.sweep;
  const ScanOptions opt{cfg.grid_n, cfg.refine_tol};

  struct Task {
    int pair;
    double f1;
  };
  std::vector<Task> tasks;
  for (int p = 0; p < int(sw.pairs.size()); ++p)
    for (double f1 : sw.f_grid) tasks.push_back({p, f1});

  std::vector<SweepRow> rows(tasks.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  auto worker = [&]() {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= tasks.size()) return;
      try {
        rows[i] = sweep_row(sw, tasks[i].pair, tasks[i].f1, opt,
                            cfg.quadrature_n);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
        return;
      }
    }
  };
  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < std::min<unsigned>(hw, 8); ++t)
    pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
  return rows;
}

inline std::string sweep_csv(const std::vector<SweepRow>& rows) {
  std::ostringstream os;
  os << "pair,f1,f_el_norm,inf_A_norm,f_tilde_el_norm,inf_Atilde_norm,"
        "f_tilde_eu_norm,sup_Atilde_norm,f_eu_norm,sup_A_norm\n";
  for (const SweepRow& r : rows) {
    os << r.pair_index << ',' << detail::fmt(r.f1) << ','
       << detail::fmt(r.f_el / r.f1) << ',' << detail::fmt(r.inf_A / r.f1)
       << ',' << detail::fmt(r.f_tilde_el / r.f1) << ','
       << detail::fmt(r.inf_Atilde / r.f1) << ','
       << detail::fmt(r.f_tilde_eu / r.f1) << ','
       << detail::fmt(r.sup_Atilde / r.f1) << ',' << detail::fmt(r.f_eu / r.f1)
       << ',' << detail::fmt(r.sup_A / r.f1) << '\n';
  }
  return os.str();
}

inline void write_sweep_outputs(const RunConfig& cfg,
                                const std::vector<SweepRow>& rows) {
  namespace fs = std::filesystem;
  fs::create_directories(cfg.out_dir);
  detail::write_text_file((fs::path(cfg.out_dir) / "sweep.csv").string(),
                          sweep_csv(rows));
}

// CLI exit codes: 1 config/input, 2 degeneracy, 3 numerical trouble.
inline int exit_code_for(const Error& e) {
  switch (e.code()) {
    case ErrorCode::InvalidInput:
    case ErrorCode::InvalidRadii:
      return 1;
    case ErrorCode::BetaZero:
    case ErrorCode::EtaDegenerate:
    case ErrorCode::EqualConductivities:
    case ErrorCode::EqualModuli:
    case ErrorCode::MissingRotData:
      return 2;
    default:
      return 3;
  }
}

}  // namespace voltbound
