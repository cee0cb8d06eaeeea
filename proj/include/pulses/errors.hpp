#ifndef PULSES_ERRORS_HPP
#define PULSES_ERRORS_HPP

#include <cmath>
#include <string>

#include "pulses/pulse.hpp"

namespace pulses {

enum class ModelKind {
  amplitude,
  pulse_length,
  addressing,
  detuning,
  amplitude_detuning,
  pulse_length_detuning,
  ising,
};

// Systematic deformation of ideal pulses. eps is the rotation-angle error
// (amplitude, pulse length, addressing ratio or Ising coupling), delta the
// dimensionless detuning offset/Rabi frequency.
struct ErrorModel {
  ModelKind kind = ModelKind::amplitude;
  double eps = 0.0;
  double delta = 0.0;
  bool addressed = false;

  static ErrorModel amplitude(double e) { return {ModelKind::amplitude, e, 0.0, false}; }
  static ErrorModel pulse_length(double e) { return {ModelKind::pulse_length, e, 0.0, false}; }
  static ErrorModel addressing(double e, bool addressed) {
    return {ModelKind::addressing, e, 0.0, addressed};
  }
  static ErrorModel detuning(double d) { return {ModelKind::detuning, 0.0, d, false}; }
  static ErrorModel amplitude_detuning(double e, double d) {
    return {ModelKind::amplitude_detuning, e, d, false};
  }
  static ErrorModel pulse_length_detuning(double e, double d) {
    return {ModelKind::pulse_length_detuning, e, d, false};
  }
  static ErrorModel ising(double e) { return {ModelKind::ising, e, 0.0, false}; }

  bool two_parameter() const {
    return kind == ModelKind::amplitude_detuning || kind == ModelKind::pulse_length_detuning;
  }
  bool planar_only() const { return kind == ModelKind::addressing; }
  bool unaddressed() const { return kind == ModelKind::addressing && !addressed; }
  // Series expansions assume |eps|, |delta| < 1.
  bool out_of_regime() const { return std::abs(eps) >= 1.0 || std::abs(delta) >= 1.0; }

  // Same variant with its single error strength replaced.
  ErrorModel with_strength(double s) const {
    ErrorModel m = *this;
    if (kind == ModelKind::detuning)
      m.delta = s;
    else
      m.eps = s;
    return m;
  }
  double strength() const { return kind == ModelKind::detuning ? delta : eps; }
};

inline const char* model_name(ModelKind k) {
  switch (k) {
    case ModelKind::amplitude: return "amplitude";
    case ModelKind::pulse_length: return "pulse_length";
    case ModelKind::addressing: return "addressing";
    case ModelKind::detuning: return "detuning";
    case ModelKind::amplitude_detuning: return "amplitude_detuning";
    case ModelKind::pulse_length_detuning: return "pulse_length_detuning";
    case ModelKind::ising: return "ising";
  }
  return "unknown";
}

inline void check_compatible(const Pulse& p, const ErrorModel& m) {
  if (m.kind == ModelKind::ising)
    throw Failure(Fault::incompatible_model, "ising coupling applies to two-qubit gates only");
  if (m.planar_only() && p.axis != Axis::planar && p.theta != 0.0 && !p.exact)
    throw Failure(Fault::unsupported_pulse,
                  std::string("non-planar pulse under ") + model_name(m.kind) + " model");
}

// Generator of the reference evolution the error is measured against.
// Unaddressed spins ideally see nothing at all.
inline Vec3 frame_generator(const Pulse& p, const ErrorModel& m) {
  if (m.unaddressed() && !p.exact) return Vec3::Zero();
  return p.generator();
}

// Imperfect generator minus frame generator.
inline Vec3 error_generator(const Pulse& p, const ErrorModel& m) {
  check_compatible(p, m);
  if (p.exact) return Vec3::Zero();
  const Vec3 g = p.generator();
  const Vec3 z(0, 0, p.theta);
  switch (m.kind) {
    case ModelKind::amplitude:
    case ModelKind::pulse_length: return m.eps * g;
    case ModelKind::addressing: return m.addressed ? Vec3::Zero().eval() : (m.eps * g).eval();
    case ModelKind::detuning: return m.delta * z;
    case ModelKind::amplitude_detuning: return m.eps * g + m.delta * z;
    case ModelKind::pulse_length_detuning: return m.eps * g + (1.0 + m.eps) * m.delta * z;
    case ModelKind::ising: break;
  }
  return Vec3::Zero();
}

inline Unitary2 imperfect(const Pulse& p, const ErrorModel& m) {
  check_compatible(p, m);
  if (p.exact) return p.ideal();
  if (p.axis == Axis::planar) {
    switch (m.kind) {
      case ModelKind::amplitude:
      case ModelKind::pulse_length: return rotation(p.theta * (1.0 + m.eps), p.phi);
      case ModelKind::addressing:
        return m.addressed ? rotation(p.theta, p.phi) : rotation(p.theta * m.eps, p.phi);
      default: break;
    }
  }
  return exp_su2(frame_generator(p, m) + error_generator(p, m));
}

// exp(a)^dag exp(a + d) with the vector part accurate relative to |d|.
inline Spin spin_relative(const Vec3& a, const Vec3& d) {
  const double th = a.norm();
  const Vec3 b = a + d;
  const double thp = b.norm();
  if (th == 0.0) return spin_exp(d);
  if (thp == 0.0) return spin_exp(-a);
  const Vec3 n = a / th;
  const double c = std::cos(0.5 * th), s = std::sin(0.5 * th);
  const double dth = (2.0 * a.dot(d) + d.squaredNorm()) / (thp + th);
  const double mid = 0.25 * (thp + th);
  const double sq = std::sin(0.25 * dth);
  const double dc = -2.0 * std::sin(mid) * sq;
  const double ds = 2.0 * std::cos(mid) * sq;
  const Vec3 dn = (d - dth * n) / thp;
  const double sp = std::sin(0.5 * thp);
  const Vec3 x = s * n;
  const Vec3 dx = sp * dn + ds * n;
  Spin e;
  e.v = c * dx - dc * x - x.cross(dx);
  e.w = c * (c + dc) + x.dot(x + dx);
  return e;
}

// Imperfect propagator split as frame * error with the error factor carried
// in the interaction frame, so tiny deviations keep full relative precision.
struct Tracked {
  Spin frame;
  Spin error;
  Spin total() const { return frame * error; }
};

inline Tracked track_sequence(const Sequence& s, const ErrorModel& m) {
  Tracked t;
  int k = 0;
  for (const auto& p : s.pulses) {
    Vec3 a = frame_generator(p, m);
    Spin e = spin_relative(a, error_generator(p, m));
    Spin toggled{e.w, t.frame.unrotate(e.v)};
    t.error = toggled * t.error;
    t.frame = spin_exp(a) * t.frame;
    if (++k % renormalize_every == 0) {
      t.error = t.error.normalized();
      t.frame = t.frame.normalized();
    }
  }
  return t;
}

inline Unitary2 apply_sequence(const Sequence& s, const ErrorModel& m) {
  Spin acc;
  int k = 0;
  for (const auto& p : s.pulses) {
    acc = Spin::from_matrix(imperfect(p, m)) * acc;
    if (++k % renormalize_every == 0) acc = acc.normalized();
  }
  return acc.matrix();
}

// Gate the sequence should realize under this model.
inline Unitary2 model_target(const Sequence& s, const ErrorModel& m) {
  if (m.unaddressed()) return Unitary2::Identity();
  return s.target;
}

inline Spin special_part(const Unitary2& u) {
  cplx det = u.determinant();
  return Spin::from_matrix(u / std::sqrt(det)).normalized();
}

// Interaction-frame propagator target^dag * imperfect, up to sign.
inline Spin interaction_spin(const Sequence& s, const ErrorModel& m, const Unitary2& target) {
  Tracked t = track_sequence(s, m);
  Spin lead = special_part(target).inverse() * t.frame;
  // lead is +-I for a sequence that reaches its target; keep its residual.
  return lead * t.error;
}

inline double sequence_infidelity(const Sequence& s, const ErrorModel& m, const Unitary2& target) {
  Spin w = interaction_spin(s, m, target);
  return w.v.squaredNorm() / (1.0 + std::abs(w.w));
}
inline double sequence_infidelity(const Sequence& s, const ErrorModel& m) {
  return sequence_infidelity(s, m, model_target(s, m));
}

}  // namespace pulses

#endif
