#ifndef PULSES_IO_HPP
#define PULSES_IO_HPP

#include <json.hpp>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include "pulses/bench.hpp"
#include "pulses/shaped.hpp"

namespace pulses {

using json = nlohmann::json;

// Value rounded to 12 significant digits, so printed JSON re-parses to
// the same text.
inline double sig12(double x) {
  if (!std::isfinite(x)) return x;
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return std::strtod(buf, nullptr) + 0.0;
}

inline std::string fmt12(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

inline json vec_to_json(const Vec3& v) { return json::array({sig12(v.x()), sig12(v.y()), sig12(v.z())}); }

template <class M>
json matrix_to_json(const Eigen::MatrixBase<M>& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      row.push_back(json::array({sig12(m(i, j).real()), sig12(m(i, j).imag())}));
    rows.push_back(row);
  }
  return rows;
}

inline MatrixC matrix_from_json(const json& j) {
  if (!j.is_array() || j.empty()) throw Failure(Fault::parse_error, "matrix must be a list of rows");
  const size_t n = j.size();
  MatrixC m(n, n);
  for (size_t r = 0; r < n; ++r) {
    if (!j[r].is_array() || j[r].size() != n) throw Failure(Fault::parse_error, "matrix must be square");
    for (size_t c = 0; c < n; ++c) {
      const json& e = j[r][c];
      if (!e.is_array() || e.size() != 2) throw Failure(Fault::parse_error, "matrix entries are [re, im] pairs");
      m(r, c) = cplx(e[0].get<double>(), e[1].get<double>());
    }
  }
  return m;
}

inline const char* axis_name(Axis a) {
  switch (a) {
    case Axis::planar: return "planar";
    case Axis::z: return "z";
    case Axis::lifted: return "lifted";
  }
  return "planar";
}

inline json pulse_to_json(const Pulse& p) {
  json j = {{"theta", sig12(p.theta)}, {"phi", sig12(p.phi)}, {"axis", axis_name(p.axis)}};
  if (p.axis == Axis::lifted) j["elevation"] = sig12(p.elevation);
  if (p.exact) j["exact"] = true;
  return j;
}

inline Pulse pulse_from_json(const json& j) {
  if (!j.is_object() || !j.contains("theta")) throw Failure(Fault::parse_error, "pulse needs a theta field");
  Pulse p;
  p.theta = j.at("theta").get<double>();
  p.phi = j.value("phi", 0.0);
  std::string ax = j.value("axis", std::string("planar"));
  if (ax == "planar")
    p.axis = Axis::planar;
  else if (ax == "z")
    p.axis = Axis::z;
  else if (ax == "lifted")
    p.axis = Axis::lifted;
  else
    throw Failure(Fault::parse_error, "unknown pulse axis '" + ax + "'");
  p.elevation = j.value("elevation", 0.0);
  p.exact = j.value("exact", false);
  if (!std::isfinite(p.theta) || !std::isfinite(p.phi)) throw Failure(Fault::parse_error, "pulse angles must be finite");
  return p;
}

inline json sequence_to_json(const Sequence& s) {
  json pulses = json::array();
  for (const auto& p : s.pulses) pulses.push_back(pulse_to_json(p));
  json declared = json::object();
  for (const auto& [m, n] : s.declared) declared[m] = n;
  return {{"family", s.family},
          {"target", matrix_to_json(s.target)},
          {"order_claim", s.order_claim},
          {"declared", declared},
          {"pulses", pulses}};
}

inline Sequence sequence_from_json(const json& j) {
  if (!j.is_object() || !j.contains("pulses")) throw Failure(Fault::parse_error, "sequence needs a pulses list");
  Sequence s;
  s.family = j.value("family", std::string("custom"));
  s.order_claim = j.value("order_claim", 0);
  for (const auto& p : j.at("pulses")) s.pulses.push_back(pulse_from_json(p));
  if (j.contains("target")) {
    MatrixC m = matrix_from_json(j.at("target"));
    if (m.rows() != 2) throw Failure(Fault::dimension_mismatch, "sequence target must be 2x2");
    s.target = m;
  } else {
    s.target = s.ideal_product();
  }
  if (j.contains("declared"))
    for (const auto& [k, v] : j.at("declared").items()) s.declared.push_back({k, v.get<int>()});
  return s;
}

// "theta@phi theta@phi ..." in radians; a bare number is a phase-0 pulse.
inline Sequence parse_text_sequence(const std::string& text) {
  std::istringstream is(text);
  std::string tok;
  Sequence s;
  s.family = "custom";
  while (is >> tok) {
    size_t at = tok.find('@');
    try {
      size_t used = 0;
      Pulse p;
      p.theta = std::stod(tok.substr(0, at), &used);
      if (used != (at == std::string::npos ? tok.size() : at)) throw std::invalid_argument(tok);
      if (at != std::string::npos) {
        std::string ph = tok.substr(at + 1);
        p.phi = std::stod(ph, &used);
        if (used != ph.size()) throw std::invalid_argument(tok);
      }
      if (!std::isfinite(p.theta) || !std::isfinite(p.phi)) throw std::invalid_argument(tok);
      s.pulses.push_back(p);
    } catch (const std::exception&) {
      throw Failure(Fault::parse_error, "bad pulse token '" + tok + "'");
    }
  }
  if (s.pulses.empty()) throw Failure(Fault::parse_error, "empty pulse list");
  s.target = s.ideal_product();
  return s;
}

inline std::string format_text_sequence(const Sequence& s) {
  std::string out;
  for (const auto& p : s.pulses) {
    if (p.axis != Axis::planar) throw Failure(Fault::unsupported_pulse, "text format holds planar pulses only");
    if (!out.empty()) out += ' ';
    out += fmt12(p.theta) + "@" + fmt12(p.phi);
  }
  return out;
}

// Sequence JSON or text, detected by the first non-blank character.
inline Sequence parse_sequence(const std::string& text) {
  size_t k = text.find_first_not_of(" \t\r\n");
  if (k == std::string::npos) throw Failure(Fault::parse_error, "empty sequence input");
  if (text[k] == '{') {
    json j;
    try {
      j = json::parse(text);
    } catch (const json::exception& e) {
      throw Failure(Fault::parse_error, e.what());
    }
    try {
      return sequence_from_json(j);
    } catch (const json::exception& e) {
      throw Failure(Fault::parse_error, e.what());
    }
  }
  return parse_text_sequence(text);
}

inline json model_to_json(const ErrorModel& m) {
  json p = json::object();
  switch (m.kind) {
    case ModelKind::amplitude:
    case ModelKind::pulse_length:
    case ModelKind::ising: p["eps"] = sig12(m.eps); break;
    case ModelKind::addressing:
      p["eps"] = sig12(m.eps);
      p["addressed"] = m.addressed;
      break;
    case ModelKind::detuning: p["delta"] = sig12(m.delta); break;
    case ModelKind::amplitude_detuning:
    case ModelKind::pulse_length_detuning:
      p["eps"] = sig12(m.eps);
      p["delta"] = sig12(m.delta);
      break;
  }
  return {{"model", model_name(m.kind)}, {"params", p}};
}

inline ModelKind model_kind_from_name(const std::string& n) {
  for (ModelKind k : {ModelKind::amplitude, ModelKind::pulse_length, ModelKind::addressing, ModelKind::detuning,
                      ModelKind::amplitude_detuning, ModelKind::pulse_length_detuning, ModelKind::ising})
    if (n == model_name(k)) return k;
  throw Failure(Fault::parse_error, "unknown error model '" + n + "'");
}

inline ErrorModel model_from_json(const json& j) {
  if (!j.is_object() || !j.contains("model")) throw Failure(Fault::parse_error, "error model needs a model field");
  ErrorModel m;
  m.kind = model_kind_from_name(j.at("model").get<std::string>());
  json p = j.value("params", json::object());
  m.eps = p.value("eps", 0.0);
  m.delta = p.value("delta", 0.0);
  m.addressed = p.value("addressed", false);
  return m;
}

inline json waveform_to_json(const Waveform& w) {
  if (w.kind == Waveform::Kind::fourier) {
    json a = json::array(), b = json::array();
    for (double x : w.a) a.push_back(sig12(x));
    for (double x : w.b) b.push_back(sig12(x));
    return {{"tau", sig12(w.tau)}, {"a", a}, {"b", b}};
  }
  json t = json::array(), u = json::array();
  for (double x : w.t) t.push_back(sig12(x));
  for (double x : w.u) u.push_back(sig12(x));
  return {{"t", t}, {"u_x", u}};
}

inline Waveform waveform_from_json(const json& j) {
  try {
    if (j.contains("tau"))
      return Waveform::from_fourier(j.at("tau").get<double>(), j.value("a", std::vector<double>{}),
                                    j.value("b", std::vector<double>{}));
    if (j.contains("t") && j.contains("u_x"))
      return Waveform::from_samples(j.at("t").get<std::vector<double>>(), j.at("u_x").get<std::vector<double>>());
  } catch (const json::exception& e) {
    throw Failure(Fault::parse_error, e.what());
  }
  throw Failure(Fault::parse_error, "waveform JSON needs tau/a/b or t/u_x");
}

// JSON when the text starts with '{', CSV "t,u_x" otherwise.
inline Waveform parse_waveform(const std::string& text) {
  size_t k = text.find_first_not_of(" \t\r\n");
  if (k != std::string::npos && text[k] == '{') {
    try {
      return waveform_from_json(json::parse(text));
    } catch (const json::exception& e) {
      throw Failure(Fault::parse_error, e.what());
    }
  }
  std::istringstream is(text);
  return read_waveform_csv(is);
}

inline json terms_to_json(const MagnusTerms& t) {
  json j = {{"omega1", vec_to_json(t.omega1)},
            {"omega2", vec_to_json(t.omega2)},
            {"truncation_estimate", sig12(t.truncation_estimate)}};
  if (t.has_omega3) j["omega3"] = vec_to_json(t.omega3);
  return j;
}

inline json fit_to_json(const SlopeFit& f) {
  return {{"slope", sig12(f.slope)},
          {"intercept", sig12(f.intercept)},
          {"r_squared", sig12(f.r_squared)},
          {"window", json::array({sig12(f.window_lo), sig12(f.window_hi)})},
          {"points", f.points}};
}

inline json scan_to_json(const ScanResult& r) {
  json e = json::array(), f = json::array();
  for (double x : r.epsilons) e.push_back(sig12(x));
  for (double x : r.infidelities) f.push_back(sig12(x));
  return {{"sequence", r.sequence_label}, {"model", model_to_json(r.model)}, {"epsilons", e}, {"infidelities", f}};
}

// Defaults read from the JSON file named by PULSE_CONFIG, if any.
struct Config {
  double grid_min = 1e-4;
  double grid_max = 1e-1;
  int grid_points = 25;
  FitOptions fit;
  int steps = 2048;
  unsigned threads = default_threads();
};

inline Config load_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw Failure(Fault::parse_error, "cannot open config file " + path);
  json j;
  try {
    j = json::parse(f);
  } catch (const json::exception& e) {
    throw Failure(Fault::parse_error, std::string("config: ") + e.what());
  }
  Config c;
  try {
    if (j.contains("grid")) {
      const json& g = j.at("grid");
      c.grid_min = g.value("min", c.grid_min);
      c.grid_max = g.value("max", c.grid_max);
      c.grid_points = g.value("points", c.grid_points);
    }
    if (j.contains("window")) {
      c.fit.window_lo = j.at("window").at(0).get<double>();
      c.fit.window_hi = j.at("window").at(1).get<double>();
    }
    c.fit.floor = j.value("floor", c.fit.floor);
    c.fit.min_points = j.value("min_points", c.fit.min_points);
    c.steps = j.value("steps", c.steps);
    c.threads = j.value("threads", c.threads);
  } catch (const json::exception& e) {
    throw Failure(Fault::parse_error, std::string("config: ") + e.what());
  }
  return c;
}

inline Config config_from_env() {
  const char* p = std::getenv("PULSE_CONFIG");
  if (!p || !*p) return Config{};
  return load_config(p);
}

}  // namespace pulses

#endif
