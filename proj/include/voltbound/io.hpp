#pragma once

// File formats: measurement documents, boundary traces, run configuration,
// and the bounds report.  Everything is JSON; numbers survive a
// serialize/parse round trip exactly.

#include <fstream>
#include <json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "voltbound/bounds.hpp"
#include "voltbound/fields.hpp"
#include "voltbound/measurement.hpp"
#include "voltbound/quadrature.hpp"

namespace voltbound {

using Json = nlohmann::json;

namespace detail {

inline Json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in)
    throw Error(ErrorCode::InvalidInput, "cannot open file: " + path);
  try {
    Json j;
    in >> j;
    return j;
  } catch (const std::exception& e) {
    throw Error(ErrorCode::InvalidInput,
                "malformed JSON in " + path + ": " + e.what());
  }
}

inline void save_json_file(const std::string& path, const Json& j) {
  std::ofstream out(path);
  if (!out)
    throw Error(ErrorCode::InvalidInput, "cannot write file: " + path);
  out << j.dump(2) << '\n';
}

inline Complex complex_from(const Json& j, const char* key) {
  if (!j.contains(key) || !j[key].is_array() || j[key].size() != 2)
    throw Error(ErrorCode::InvalidInput,
                std::string(key) + " must be a [re, im] pair");
  return {j[key][0].get<double>(), j[key][1].get<double>()};
}

// 2x2 array, component x re/im: [[x_re, x_im], [y_re, y_im]]
inline CVec2 cvec2_from(const Json& j, const char* key) {
  if (!j.contains(key) || !j[key].is_array() || j[key].size() != 2 ||
      j[key][0].size() != 2 || j[key][1].size() != 2)
    throw Error(ErrorCode::InvalidInput,
                std::string(key) + " must be a 2x2 array (component x re/im)");
  return {Complex(j[key][0][0].get<double>(), j[key][0][1].get<double>()),
          Complex(j[key][1][0].get<double>(), j[key][1][1].get<double>())};
}

inline Json to_json(const CVec2& v) {
  return Json::array({Json::array({v.x.real(), v.x.imag()}),
                      Json::array({v.y.real(), v.y.imag()})});
}

inline Json to_json(Complex z) { return Json::array({z.real(), z.imag()}); }

}  // namespace detail

// ---------------------------------------------------------------------------
// Measurement document

struct MeasurementFile {
  PhaseConductivities cond;
  BoundaryMeasurement meas;
};

inline Json measurement_to_json(const PhaseConductivities& cond,
                                const BoundaryMeasurement& m) {
  Json j;
  j["sigma1"] = detail::to_json(cond.sigma1());
  j["sigma2"] = detail::to_json(cond.sigma2());
  j["avgE"] = detail::to_json(m.avgE());
  j["avgJ"] = detail::to_json(m.avgJ());
  j["power"] = Json::array({m.e1j1, m.e1j2, m.e2j1, m.e2j2});
  if (m.rot_available) {
    j["rotE"] = m.rotE;
    j["rotJ"] = m.rotJ;
  }
  return j;
}

inline MeasurementFile measurement_from_json(const Json& j) {
  PhaseConductivities cond{detail::complex_from(j, "sigma1"),
                           detail::complex_from(j, "sigma2")};
  BoundaryMeasurement m;
  const CVec2 e = detail::cvec2_from(j, "avgE");
  const CVec2 jj = detail::cvec2_from(j, "avgJ");
  m.avgE1 = e.re();
  m.avgE2 = e.im();
  m.avgJ1 = jj.re();
  m.avgJ2 = jj.im();
  if (!j.contains("power") || !j["power"].is_array() || j["power"].size() != 4)
    throw Error(ErrorCode::InvalidInput,
                "power must be [E1J1, E1J2, E2J1, E2J2]");
  m.e1j1 = j["power"][0].get<double>();
  m.e1j2 = j["power"][1].get<double>();
  m.e2j1 = j["power"][2].get<double>();
  m.e2j2 = j["power"][3].get<double>();
  if (j.contains("rotE") && j.contains("rotJ")) {
    m.rotE = j["rotE"].get<double>();
    m.rotJ = j["rotJ"].get<double>();
    m.rot_available = true;
  } else {
    m.rot_available = false;
  }
  if (!m.finite())
    throw Error(ErrorCode::InvalidInput, "measurement contains non-finite data");
  return {cond, m};
}

// ---------------------------------------------------------------------------
// Boundary trace document

inline Json trace_to_json(const BoundaryTrace& t) {
  Json j;
  j["theta_count"] = t.size();
  j["radius"] = t.radius;
  Json vre = Json::array(), vim = Json::array();
  Json dre = Json::array(), dim = Json::array();
  for (std::size_t i = 0; i < t.size(); ++i) {
    vre.push_back(t.V[i].real());
    vim.push_back(t.V[i].imag());
    dre.push_back(t.sdVdn[i].real());
    dim.push_back(t.sdVdn[i].imag());
  }
  j["V_re"] = std::move(vre);
  j["V_im"] = std::move(vim);
  j["sdVdn_re"] = std::move(dre);
  j["sdVdn_im"] = std::move(dim);
  return j;
}

inline BoundaryTrace trace_from_json(const Json& j) {
  BoundaryTrace t;
  for (const char* key : {"theta_count", "radius", "V_re", "V_im", "sdVdn_re",
                          "sdVdn_im"})
    if (!j.contains(key))
      throw Error(ErrorCode::InvalidInput,
                  std::string("trace file missing key: ") + key);
  const std::size_t n = j["theta_count"].get<std::size_t>();
  t.radius = j["radius"].get<double>();
  auto arr = [&](const char* key) {
    const Json& a = j[key];
    if (!a.is_array() || a.size() != n)
      throw Error(ErrorCode::InvalidInput,
                  std::string(key) + " must have theta_count entries");
    std::vector<double> v;
    v.reserve(n);
    for (const auto& x : a) v.push_back(x.get<double>());
    return v;
  };
  const auto vre = arr("V_re"), vim = arr("V_im");
  const auto dre = arr("sdVdn_re"), dim = arr("sdVdn_im");
  t.V.resize(n);
  t.sdVdn.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    t.V[i] = Complex(vre[i], vim[i]);
    t.sdVdn[i] = Complex(dre[i], dim[i]);
  }
  t.validate();
  return t;
}

// ---------------------------------------------------------------------------
// Run configuration

enum class RunMode { Forward, Bounds, Pipeline, Sweep };

struct LayeredDiskConfig {
  LayeredDiskGeometry geom;
  FourierBC bc;
};

struct CoreShellConfig {
  double R1 = 0.0, R2 = 0.0, k = 0.0;
};

struct LaminateConfig {
  double f1 = 0.5;
  CVec2 field;
  Vec2 normal{1.0, 0.0};
};

struct SweepConfig {
  double R1 = 0.45;
  double R3 = 5.0;
  CVec2 u;  // Dirichlet data V0 = u . x for every row
  std::vector<std::pair<Complex, Complex>> pairs;
  std::vector<double> f_grid;
};

struct RunConfig {
  RunMode mode = RunMode::Pipeline;
  std::optional<Complex> sigma1, sigma2;
  std::optional<LayeredDiskConfig> layered_disk;
  std::optional<CoreShellConfig> coreshell;
  std::optional<LaminateConfig> laminate;
  std::optional<std::string> trace_file;
  std::optional<std::string> measurement_file;
  int quadrature_n = 2048;
  int grid_n = 2001;
  double refine_tol = 1e-10;
  bool emit_curves = false;
  std::vector<double> curve_f_values;
  std::optional<SweepConfig> sweep;
  std::string out_dir = ".";

  int generator_count() const {
    return int(layered_disk.has_value()) + int(coreshell.has_value()) +
           int(laminate.has_value());
  }
  void validate() const {
    if (quadrature_n < 16 || quadrature_n % 2 != 0)
      throw Error(ErrorCode::InvalidInput, "quadrature_n must be even, >= 16");
    if (grid_n < 3)
      throw Error(ErrorCode::InvalidInput, "grid_n must be >= 3");
    if (!(refine_tol > 0.0))
      throw Error(ErrorCode::InvalidInput, "refine_tol must be positive");
    const int sources = generator_count() + int(trace_file.has_value()) +
                        int(measurement_file.has_value());
    if (mode == RunMode::Sweep) {
      if (!sweep) throw Error(ErrorCode::InvalidInput, "sweep mode needs a sweep section");
      return;
    }
    if (sources != 1)
      throw Error(ErrorCode::InvalidInput,
                  "config needs exactly one generator or trace/measurement source");
    if (mode == RunMode::Forward && generator_count() != 1)
      throw Error(ErrorCode::InvalidInput, "forward mode needs a generator");
  }
};

inline RunMode run_mode_from(const std::string& s) {
  if (s == "forward") return RunMode::Forward;
  if (s == "bounds") return RunMode::Bounds;
  if (s == "pipeline") return RunMode::Pipeline;
  if (s == "sweep") return RunMode::Sweep;
  throw Error(ErrorCode::InvalidInput, "unknown mode: " + s);
}

inline const char* run_mode_name(RunMode m) {
  switch (m) {
    case RunMode::Forward: return "forward";
    case RunMode::Bounds: return "bounds";
    case RunMode::Pipeline: return "pipeline";
    case RunMode::Sweep: return "sweep";
  }
  return "?";
}

inline RunConfig config_from_json(const Json& j) {
  RunConfig c;
  try {
    if (j.contains("mode")) c.mode = run_mode_from(j["mode"].get<std::string>());
    if (j.contains("sigma1")) c.sigma1 = detail::complex_from(j, "sigma1");
    if (j.contains("sigma2")) c.sigma2 = detail::complex_from(j, "sigma2");

    if (j.contains("radii")) {
      LayeredDiskConfig ld;
      ld.geom.radii = j["radii"].get<std::vector<double>>();
      ld.geom.layer_phase = j["layer_phase"].get<std::vector<int>>();
      if (!j.contains("bc_modes") || !j["bc_modes"].is_array())
        throw Error(ErrorCode::InvalidInput, "layered disk needs bc_modes");
      for (const auto& m : j["bc_modes"])
        ld.bc.modes[m["n"].get<int>()] =
            Complex(m["re"].get<double>(), m["im"].get<double>());
      c.layered_disk = std::move(ld);
    }
    if (j.contains("coreshell")) {
      const Json& cs = j["coreshell"];
      c.coreshell = CoreShellConfig{cs["R1"].get<double>(),
                                    cs["R2"].get<double>(),
                                    cs.value("k", 0.0)};
    }
    if (j.contains("laminate")) {
      const Json& la = j["laminate"];
      LaminateConfig lc;
      lc.f1 = la["f1"].get<double>();
      lc.field = detail::cvec2_from(la, "field");
      if (!la.contains("normal") || la["normal"].size() != 2)
        throw Error(ErrorCode::InvalidInput, "laminate needs normal: [nx, ny]");
      lc.normal = Vec2{la["normal"][0].get<double>(),
                       la["normal"][1].get<double>()};
      c.laminate = lc;
    }
    if (j.contains("trace_file"))
      c.trace_file = j["trace_file"].get<std::string>();
    if (j.contains("measurement_file"))
      c.measurement_file = j["measurement_file"].get<std::string>();
    c.quadrature_n = j.value("quadrature_n", c.quadrature_n);
    c.grid_n = j.value("grid_n", c.grid_n);
    c.refine_tol = j.value("refine_tol", c.refine_tol);
    c.emit_curves = j.value("emit_curves", c.emit_curves);
    if (j.contains("curve_f_values"))
      c.curve_f_values = j["curve_f_values"].get<std::vector<double>>();

    if (j.contains("sweep")) {
      const Json& sw = j["sweep"];
      SweepConfig s;
      s.R1 = sw.value("R1", s.R1);
      s.R3 = sw.value("R3", s.R3);
      if (!sw.contains("u"))
        throw Error(ErrorCode::InvalidInput,
                    "sweep needs u (boundary data V0 = u . x)");
      s.u = detail::cvec2_from(sw, "u");
      if (sw.contains("pairs")) {
        for (const auto& p : sw["pairs"])
          s.pairs.emplace_back(detail::complex_from(p, "sigma1"),
                               detail::complex_from(p, "sigma2"));
      } else if (c.sigma1 && c.sigma2) {
        s.pairs.emplace_back(*c.sigma1, *c.sigma2);
      } else {
        throw Error(ErrorCode::InvalidInput, "sweep needs conductivity pairs");
      }
      if (sw.contains("f_grid") && sw["f_grid"].is_array()) {
        s.f_grid = sw["f_grid"].get<std::vector<double>>();
      } else {
        double start = 0.01, stop = 0.99;
        int count = 99;
        if (sw.contains("f_grid")) {
          start = sw["f_grid"].value("start", start);
          stop = sw["f_grid"].value("stop", stop);
          count = sw["f_grid"].value("count", count);
        }
        for (int i = 0; i < count; ++i)
          s.f_grid.push_back(start + (stop - start) * double(i) /
                                         double(std::max(1, count - 1)));
      }
      c.sweep = std::move(s);
    }
  } catch (const Error&) {
    throw;
  } catch (const std::exception& e) {
    throw Error(ErrorCode::InvalidInput,
                std::string("bad config: ") + e.what());
  }
  return c;
}

inline RunConfig load_config(const std::string& path) {
  return config_from_json(detail::load_json_file(path));
}

// ---------------------------------------------------------------------------
// Bounds report document

inline Json admissible_set_to_json(const AdmissibleSet& s) {
  Json intervals = Json::array();
  for (const auto& [lo, hi] : s.intervals)
    intervals.push_back(Json::array({lo, hi}));
  return Json{{"predicate", s.tag == PredicateTag::Ellipse ? "ellipse"
                                                           : "tilde_ellipse"},
              {"intervals", intervals},
              {"disconnected", s.disconnected()},
              {"grid_n", s.grid_n},
              {"refine_tol", s.refine_tol}};
}

inline AdmissibleSet admissible_set_from_json(const Json& j) {
  AdmissibleSet s;
  s.tag = j["predicate"].get<std::string>() == "ellipse"
              ? PredicateTag::Ellipse
              : PredicateTag::TildeEllipse;
  for (const auto& iv : j["intervals"])
    s.intervals.emplace_back(iv[0].get<double>(), iv[1].get<double>());
  s.grid_n = j["grid_n"].get<int>();
  s.refine_tol = j["refine_tol"].get<double>();
  return s;
}

inline Json report_to_json(const BoundsReport& r, const DerivedConstants& c,
                           const Json& inputs, const Json& diagnostics) {
  Json constants;
  constants["beta"] = c.beta;
  constants["gamma"] = c.gamma;
  constants["psi1"] = c.psi[0];
  constants["psi2"] = c.psi[1];
  constants["xi1"] = c.xi[0];
  constants["xi2"] = c.xi[1];
  constants["eta1"] = c.eta[0];
  constants["eta2"] = c.eta[1];
  constants["B12_1"] = c.b12_1 ? Json(*c.b12_1) : Json(nullptr);
  constants["B12_2"] = c.b12_2 ? Json(*c.b12_2) : Json(nullptr);
  Json avg = Json::array();
  for (int a = 1; a <= 2; ++a)
    for (int m = 1; m <= 2; ++m) {
      const Vec2 v = c.avgE(a, m);
      avg.push_back(Json{{"phase", a}, {"m", m}, {"value", {v.x, v.y}}});
    }
  constants["avgE_phase"] = std::move(avg);

  Json bounds;
  bounds["f_el"] = r.f_el;
  bounds["f_eu"] = r.f_eu;
  bounds["f_tilde_el"] = r.f_tilde_el ? Json(*r.f_tilde_el) : Json(nullptr);
  bounds["f_tilde_eu"] = r.f_tilde_eu ? Json(*r.f_tilde_eu) : Json(nullptr);
  bounds["Q1"] = r.q1 ? Json(*r.q1) : Json(nullptr);
  bounds["Q2"] = r.q2 ? Json(*r.q2) : Json(nullptr);

  Json sets;
  sets["ellipse"] = admissible_set_to_json(r.setA);
  sets["tilde_ellipse"] =
      r.setAtilde ? admissible_set_to_json(*r.setAtilde) : Json(nullptr);

  Json degeneracy;
  degeneracy["beta_zero"] = r.degeneracy.beta_zero;
  degeneracy["eta1_zero"] = r.degeneracy.eta_zero[0];
  degeneracy["eta2_zero"] = r.degeneracy.eta_zero[1];
  degeneracy["vplus1_zero"] = r.degeneracy.vplus_zero[0];
  degeneracy["vplus2_zero"] = r.degeneracy.vplus_zero[1];
  degeneracy["vminus1_zero"] = r.degeneracy.vminus_zero[0];
  degeneracy["vminus2_zero"] = r.degeneracy.vminus_zero[1];
  degeneracy["equal_moduli"] = r.degeneracy.equal_moduli;
  degeneracy["rot_available"] = r.degeneracy.rot_available;

  return Json{{"inputs", inputs},
              {"constants", constants},
              {"bounds", bounds},
              {"admissible_sets", sets},
              {"degeneracy", degeneracy},
              {"diagnostics", diagnostics}};
}

}  // namespace voltbound
