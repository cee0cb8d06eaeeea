#ifndef PULSES_SEQUENCES_HPP
#define PULSES_SEQUENCES_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <optional>
#include <string>
#include <vector>

#include "pulses/expansion.hpp"

namespace pulses {

using PulseList = std::vector<Pulse>;

namespace detail {

inline void require_theta(double theta, double max, const char* what) {
  if (!std::isfinite(theta) || theta < 0.0 || theta > max * (1.0 + 1e-15))
    throw Failure(Fault::out_of_range, std::string(what) + ": theta must lie in [0, " +
                                           std::to_string(max) + "], got " + std::to_string(theta));
}

// Planar pulse, negative angles folded into a phase advance of pi.
inline Pulse signed_pulse(double theta, double phi) {
  if (theta < 0) return Pulse::planar(-theta, phi + pi);
  return Pulse::planar(theta, phi);
}

inline PulseList shifted(PulseList l, double dphi) {
  for (auto& p : l)
    if (p.axis != Axis::z) p.phi += dphi;
  return l;
}

// Exact inverse for errors proportional to the pulse rotation.
inline PulseList inverted(const PulseList& l) {
  PulseList r(l.rbegin(), l.rend());
  for (auto& p : r) {
    if (p.axis == Axis::planar)
      p.phi += pi;
    else
      p.theta = -p.theta;
  }
  return r;
}

inline void append(PulseList& a, const PulseList& b) { a.insert(a.end(), b.begin(), b.end()); }

inline Sequence make(PulseList pulses, const Unitary2& target, std::string family, int order,
                     std::vector<std::pair<std::string, int>> declared) {
  Sequence s;
  s.pulses = std::move(pulses);
  s.target = target;
  s.family = std::move(family);
  s.order_claim = order;
  s.declared = std::move(declared);
  return s;
}

inline std::vector<std::pair<std::string, int>> passband(int n) {
  return {{"amplitude", n}, {"pulse_length", n}, {"addressing", n}};
}

}  // namespace detail

// Pair of 2*pi*a pulses whose first-order vector is alpha along phase psi.
inline PulseList s_block(double alpha, double psi) {
  double a = std::max(1.0, std::ceil(std::abs(alpha) / (2.0 * two_pi)));
  double ph = std::acos(std::clamp(alpha / (2.0 * two_pi * a), -1.0, 1.0));
  return {Pulse::planar(two_pi * a, psi + ph), Pulse::planar(two_pi * a, psi - ph)};
}
inline PulseList s_x(double alpha) { return s_block(alpha, 0.0); }
inline PulseList s_y(double beta) { return s_block(beta, 0.5 * pi); }

inline Sequence sk1(double theta, double phi = 0.0) {
  detail::require_theta(theta, 2.0 * two_pi, "sk1");
  double ps = std::acos(-theta / (2.0 * two_pi));
  return detail::make({Pulse::planar(theta, phi), Pulse::planar(two_pi, phi + ps),
                       Pulse::planar(two_pi, phi - ps)},
                      rotation(theta, phi), "sk1", 1, detail::passband(1));
}

enum class Sk2Variant { standard, rhombus };

inline Sequence sk2(double theta, Sk2Variant variant = Sk2Variant::standard) {
  Sequence s = sk1(theta, 0.0);
  double ps = std::acos(-theta / (2.0 * two_pi));
  PulseList b;
  if (variant == Sk2Variant::standard) {
    double cx = two_pi * std::cos(ps), sy = two_pi * std::sin(ps);
    detail::append(b, s_y(-sy));
    detail::append(b, s_x(cx));
    detail::append(b, s_y(sy));
    detail::append(b, s_x(-cx));
  } else {
    double pg = std::asin(0.5 * std::sin(2.0 * ps));
    b = {Pulse::planar(two_pi, pg + pi), Pulse::planar(two_pi, 0.0), Pulse::planar(two_pi, pg),
         Pulse::planar(two_pi, pi)};
  }
  detail::append(s.pulses, b);
  s.family = variant == Sk2Variant::standard ? "sk2" : "sk2-rhombus";
  s.order_claim = 2;
  s.declared = detail::passband(2);
  return s;
}

// Pulse list whose error propagator is exp(eps^order c) + O(eps^(order+1))
// under amplitude-type errors. Odd orders lie in the xy-plane, even along z.
inline PulseList pure_term(int order, const Vec3& c) {
  if (order < 1) throw Failure(Fault::out_of_range, "pure_term order must be >= 1");
  if (order == 1) return s_block(std::hypot(c.x(), c.y()), std::atan2(c.y(), c.x()));
  Vec3 u, w;
  if (order % 2 == 0) {
    double r = std::sqrt(std::abs(c.z()));
    u = Vec3(r, 0, 0);
    w = Vec3(0, std::copysign(r, c.z()), 0);
  } else {
    double mag = std::hypot(c.x(), c.y());
    double r = std::sqrt(mag);
    double psi = std::atan2(c.y(), c.x()) - 0.5 * pi;
    u = Vec3(0, 0, r);
    w = Vec3(r * std::cos(psi), r * std::sin(psi), 0);
  }
  // Application order Y, X, Y^-1, X^-1 gives exp(eps^order u x w).
  PulseList x = pure_term(order - 1, u);
  PulseList y = pure_term(1, w);
  PulseList out = y;
  detail::append(out, x);
  detail::append(out, detail::inverted(y));
  detail::append(out, detail::inverted(x));
  return out;
}

inline constexpr std::array<double, 3> richardson_steps = {1e-3, 2e-3, 4e-3};

// Leading interaction-frame term of the given order, by Richardson
// extrapolation of log(interaction propagator) / eps^order. The ideal
// frame is left out so its rounding residue does not scale up with 1/eps^order.
inline Vec3 leading_term(const Sequence& s, const ErrorModel& m, int order,
                         double base = richardson_steps[0]) {
  auto g = [&](double e) {
    Spin w = track_sequence(s, m.with_strength(e)).error;
    return Vec3(spin_log(w) / std::pow(e, order));
  };
  return (8.0 / 3.0) * g(base) - 2.0 * g(2.0 * base) + (1.0 / 3.0) * g(4.0 * base);
}

inline constexpr int sk_n_cap = 4;

// Terms up to third order come from the Magnus quadrature; the fourth-order
// term is extrapolated.
inline Sequence sk_n(int n, double theta) {
  if (n < 1 || n > sk_n_cap)
    throw Failure(Fault::out_of_range, "sk_n level must be 1.." + std::to_string(sk_n_cap));
  Sequence w = sk1(theta, 0.0);
  const ErrorModel model = ErrorModel::amplitude(0.0);
  const Spin target = special_part(w.target);
  for (int k = 1; k < n; ++k) {
    int order = k + 1;
    Vec3 om;
    double scale = 0.0;
    if (order <= 3) {
      om = order == 2 ? interaction_terms(w, model, 2).omega2 : interaction_terms(w, model, 3).omega3;
      scale = om.norm();
    } else {
      om = leading_term(w, model, order);
      Vec3 check = leading_term(w, model, order, 2.0 * richardson_steps[0]);
      scale = om.norm();
      if (!om.allFinite() || (om - check).norm() > 1e-3 * scale + 1e-9) {
        char buf[200];
        std::snprintf(buf, sizeof buf,
                      "order-%d term did not converge: |term| = %.6g, step disagreement %.3g",
                      order, om.norm(), (om - check).norm());
        throw Failure(Fault::extraction_failed, buf);
      }
    }
    Vec3 c = -target.rotate(om);
    double off = order % 2 == 0 ? std::hypot(c.x(), c.y()) : std::abs(c.z());
    if (off > 1e-4 * scale + 1e-9) {
      char buf[200];
      std::snprintf(buf, sizeof buf, "order-%d term has wrong-parity component %.3g of %.6g",
                    order, off, c.norm());
      throw Failure(Fault::extraction_failed, buf);
    }
    detail::append(w.pulses, pure_term(order, c));
  }
  w.family = "sk" + std::to_string(n);
  w.order_claim = n;
  w.declared = {{"amplitude", n}, {"pulse_length", n}, {"addressing", n}};
  return w;
}

enum class WimperisKind { B2, N2, P2 };

inline Sequence wimperis(WimperisKind kind, double theta) {
  const double lim = kind == WimperisKind::P2 ? 4.0 * two_pi : 2.0 * two_pi;
  detail::require_theta(theta, lim, "wimperis");
  const double ph = std::acos(-theta / lim);
  PulseList l{Pulse::planar(theta, 0.0)};
  std::string fam;
  std::vector<std::pair<std::string, int>> declared;
  switch (kind) {
    case WimperisKind::B2:
      detail::append(l, {Pulse::planar(pi, ph), Pulse::planar(two_pi, 3 * ph), Pulse::planar(pi, ph)});
      fam = "b2";
      declared = {{"amplitude", 2}, {"pulse_length", 2}};
      break;
    case WimperisKind::N2:
      detail::append(l, {Pulse::planar(pi, ph), Pulse::planar(two_pi, -ph), Pulse::planar(pi, ph)});
      fam = "n2";
      declared = {{"addressing", 2}};
      break;
    case WimperisKind::P2:
      detail::append(l, {Pulse::planar(two_pi, ph), Pulse::planar(two_pi, -ph),
                         Pulse::planar(two_pi, -ph), Pulse::planar(two_pi, ph)});
      fam = "p2";
      declared = detail::passband(2);
      break;
  }
  return detail::make(std::move(l), rotation(theta, 0.0), fam, 2, std::move(declared));
}

enum class TsKind { B, N, P };
// Odd-multiplier B motif: M(k pi, phi) M(k pi, 3 phi) M(k pi, 3 phi), or the balanced form.
enum class BOddMotif { balanced, repeated };

inline constexpr int ts_cap = 3;

// Phase scale factor f_j; `minus_one` uses the (2^(2j-1) - 1) recursion.
inline double ts_factor(TsKind kind, int j, bool minus_one = false) {
  if (j < 1 || j > ts_cap) throw Failure(Fault::out_of_range, "trotter_suzuki j must be 1..3");
  double f = kind == TsKind::P ? 4.0 : 2.0;
  for (int i = 2; i <= j; ++i) f *= std::ldexp(1.0, 2 * i - 1) - (minus_one ? 1.0 : 2.0);
  return f;
}

namespace detail {

inline PulseList ts_t1(double k, double ph) {
  return {signed_pulse(two_pi * k, ph), signed_pulse(two_pi * k, -ph)};
}

inline PulseList ts_t2(TsKind kind, double k, double ph, BOddMotif motif) {
  PulseList l;
  switch (kind) {
    case TsKind::P:
      append(l, ts_t1(k, ph));
      append(l, ts_t1(k, -ph));
      break;
    case TsKind::N:
      append(l, ts_t1(0.5 * k, -ph));
      append(l, ts_t1(0.5 * k, ph));
      break;
    case TsKind::B:
      if (std::fmod(std::abs(k), 2.0) == 0.0) {
        append(l, ts_t1(0.5 * k, ph));
        append(l, ts_t1(0.5 * k, -ph));
      } else if (motif == BOddMotif::balanced) {
        l = {signed_pulse(pi * k, ph), signed_pulse(two_pi * k, 3 * ph), signed_pulse(pi * k, ph)};
      } else {
        l = {signed_pulse(pi * k, 3 * ph), signed_pulse(pi * k, 3 * ph), signed_pulse(pi * k, ph)};
      }
      break;
  }
  return l;
}

inline PulseList ts_level(TsKind kind, int j, double k, double ph, BOddMotif motif) {
  if (j == 1) return ts_t2(kind, k, ph, motif);
  PulseList inner = ts_level(kind, j - 1, k, ph, motif);
  PulseList mid = ts_level(kind, j - 1, -2.0 * k, ph, motif);
  long reps = 1L << (2 * j - 2);
  PulseList l;
  for (long r = 0; r < reps; ++r) append(l, inner);
  append(l, mid);
  for (long r = 0; r < reps; ++r) append(l, inner);
  return l;
}

}  // namespace detail

inline Sequence trotter_suzuki(TsKind kind, int j, double theta,
                               BOddMotif motif = BOddMotif::balanced) {
  const double f = ts_factor(kind, j);
  detail::require_theta(theta, two_pi * f, "trotter_suzuki");
  const double ph = std::acos(-theta / (two_pi * f));
  PulseList l{Pulse::planar(theta, 0.0)};
  detail::append(l, detail::ts_level(kind, j, 1.0, ph, motif));
  const char* letter = kind == TsKind::P ? "p" : kind == TsKind::N ? "n" : "b";
  std::vector<std::pair<std::string, int>> declared;
  if (kind == TsKind::P) declared = detail::passband(2 * j);
  if (kind == TsKind::N) declared = {{"addressing", 2 * j}};
  if (kind == TsKind::B) declared = {{"amplitude", 2 * j}, {"pulse_length", 2 * j}};
  return detail::make(std::move(l), rotation(theta, 0.0), letter + std::to_string(2 * j), 2 * j,
                      std::move(declared));
}

struct CorpseAngles {
  double theta1, theta2, theta3;
};

inline CorpseAngles corpse_angles(double theta, int n1 = 1, int n2 = 1, int n3 = 0) {
  double k = std::asin(std::sin(0.5 * theta) / 2.0);
  return {two_pi * n1 + 0.5 * theta - k, two_pi * n2 - 2.0 * k, two_pi * n3 + 0.5 * theta - k};
}

inline Sequence corpse(double theta, int n1 = 1, int n2 = 1, int n3 = 0) {
  if (!std::isfinite(theta)) throw Failure(Fault::out_of_range, "corpse: theta must be finite");
  CorpseAngles a = corpse_angles(theta, n1, n2, n3);
  if (a.theta1 < 0 || a.theta2 < 0 || a.theta3 < 0)
    throw Failure(Fault::out_of_range, "corpse: negative pulse angle for these offsets");
  return detail::make({Pulse::planar(a.theta1, 0.0), Pulse::planar(a.theta2, pi),
                       Pulse::planar(a.theta3, 0.0)},
                      rotation(theta, 0.0), "corpse", 1, {{"detuning", 1}});
}

// Planar rotation R(theta, phi), theta >= 0, whose adjoint action maps the
// unit vector e onto the unit vector d.
inline std::pair<double, double> planar_map(const Vec3& e, const Vec3& d) {
  const Vec3 z(0, 0, 1);
  Vec3 a = z.cross(d - e);
  if (a.norm() < 1e-14) {
    a = z.cross(e);
    if (a.norm() < 1e-14) a = Vec3(1, 0, 0);
  }
  a.normalize();
  Vec3 ep = e - a.dot(e) * a, dp = d - a.dot(d) * a;
  double ang = std::atan2(a.dot(ep.cross(dp)), ep.dot(dp));
  double ph = std::atan2(a.y(), a.x());
  if (ang < 0) {
    ang = -ang;
    ph += pi;
  }
  return {ang, ph};
}

enum class FrameMode { physical, exact };

namespace detail {

inline PulseList sz_block(double a) { return {Pulse::planar(0.5 * a, 0.0), Pulse::planar(0.5 * a, pi)}; }

inline PulseList frame_rotation(double t, double ph, FrameMode mode) {
  if (t == 0.0) return {};
  if (mode == FrameMode::exact) {
    Pulse p = Pulse::planar(t, ph);
    p.exact = true;
    return {p};
  }
  return shifted(corpse(t).pulses, ph);
}

// Detuning correction whose first-order vector is alpha along d.
inline PulseList p1_along(const Vec3& d, double alpha, FrameMode mode) {
  int copies = std::max(1, static_cast<int>(std::ceil(alpha / 3.9)));
  double a = 4.0 * std::asin(alpha / (4.0 * copies));
  PulseList blk;
  for (int i = 0; i < copies; ++i) append(blk, sz_block(a));
  Sequence probe;
  probe.pulses = blk;
  Vec3 g = interaction_terms(probe, ErrorModel::detuning(0.0), 1).omega1;
  auto [t, ph] = planar_map(g.normalized(), d);
  PulseList l = frame_rotation(t, ph + pi, mode);
  append(l, blk);
  append(l, frame_rotation(t, ph, mode));
  return l;
}

inline PulseList corpse2_block(const Vec3& c, FrameMode mode) {
  double xi = c.norm();
  if (xi == 0.0) return {};
  Vec3 zp = c / xi;
  Vec3 xp = std::abs(zp.z()) < 0.9 ? zp.cross(Vec3(0, 0, 1)) : zp.cross(Vec3(1, 0, 0));
  xp.normalize();
  Vec3 yp = zp.cross(xp);
  double al = std::sqrt(xi);
  PulseList b = p1_along(yp, al, mode);
  append(b, p1_along(xp, al, mode));
  append(b, p1_along(-yp, al, mode));
  append(b, p1_along(-xp, al, mode));
  return b;
}

}  // namespace detail

// CORPSE seed followed by a balanced-commutator detuning correction that
// cancels the seed's second-order term. The physical mode realizes the frame
// rotations with CORPSE pulses; the result is then refined by fixed-point
// iteration so the remaining second-order term is at quadrature level.
inline Sequence corpse2(double theta, FrameMode mode = FrameMode::physical) {
  Sequence seed = corpse(theta);
  const ErrorModel det = ErrorModel::detuning(0.0);
  const Spin target = special_part(seed.target);
  Vec3 om = interaction_terms(seed, det, 2).omega2;
  if (!om.allFinite()) throw Failure(Fault::extraction_failed, "corpse2: seed term not finite");
  const Vec3 want = -target.rotate(om);
  Vec3 c = want;
  Sequence s = seed;
  for (int it = 0; it < 8; ++it) {
    s.pulses = seed.pulses;
    detail::append(s.pulses, detail::corpse2_block(c, mode));
    Vec3 rest = target.rotate(interaction_terms(s, det, 2).omega2);
    if (rest.norm() < 1e-11) break;
    c -= rest;
  }
  s.family = mode == FrameMode::exact ? "corpse2-exact" : "corpse2";
  s.order_claim = 2;
  s.declared = {{"detuning", 2}};
  return s;
}

inline Sequence b2corpse(double theta) {
  CorpseAngles a = corpse_angles(theta);
  if (a.theta1 < 0 || a.theta2 < 0 || a.theta3 < 0)
    throw Failure(Fault::out_of_range, "b2corpse: negative pulse angle");
  PulseList l = wimperis(WimperisKind::B2, a.theta1).pulses;
  detail::append(l, detail::shifted(wimperis(WimperisKind::B2, a.theta2).pulses, pi));
  detail::append(l, wimperis(WimperisKind::B2, a.theta3).pulses);
  return detail::make(std::move(l), rotation(theta, 0.0), "b2corpse", 2,
                      {{"amplitude", 2}, {"pulse_length", 2}, {"detuning", 1}});
}

// Conjugate every pulse axis so the ideal product becomes u_target. The
// rotation angle of u_target must match that of the sequence's own target.
inline Sequence retarget(const Sequence& s, const Unitary2& u_target,
                         std::optional<ErrorModel> model = std::nullopt) {
  Spin src = special_part(s.target);
  Spin dst = special_part(u_target);
  if (std::abs(std::abs(dst.w) - std::abs(src.w)) > 1e-9)
    throw Failure(Fault::out_of_range, "retarget: rotation angle differs from the sequence target");
  if (std::abs(dst.w - src.w) > 1e-9) dst = -dst;
  Sequence out = s;
  out.target = u_target;
  double ns = src.v.norm(), nd = dst.v.norm();
  if (ns < 1e-12 || nd < 1e-12) return out;
  // Rotation q with q.rotate(src axis) = dst axis, z-only when possible.
  Vec3 m = src.v / ns, n = dst.v / nd;
  if (std::abs(m.z()) < 1e-12 && std::abs(n.z()) < 1e-12) {
    double ang = std::atan2(n.y(), n.x()) - std::atan2(m.y(), m.x());
    for (auto& p : out.pulses)
      if (p.axis != Axis::z) p.phi += ang;
    return out;
  }
  Vec3 ax = m.cross(n);
  double ang = std::atan2(ax.norm(), m.dot(n));
  if (ax.norm() < 1e-14) {
    ax = std::abs(m.x()) < 0.9 ? m.cross(Vec3(1, 0, 0)) : m.cross(Vec3(0, 1, 0));
  }
  const Spin q = spin_exp(ang * ax.normalized());
  bool planar = true;
  for (auto& p : out.pulses) {
    if (p.theta == 0.0) continue;
    Vec3 a = q.rotate(p.unit_axis());
    if (std::abs(a.z()) < 1e-12) {
      p.axis = Axis::planar;
      p.elevation = 0.0;
      p.phi = std::atan2(a.y(), a.x());
    } else {
      planar = false;
      p.axis = Axis::lifted;
      p.elevation = std::asin(std::clamp(a.z(), -1.0, 1.0));
      p.phi = std::atan2(a.y(), a.x());
    }
  }
  if (!planar && model && model->planar_only())
    throw Failure(Fault::unsupported_retarget,
                  std::string("retarget lifts pulse axes out of the xy-plane under ") +
                      model_name(model->kind) + " model");
  return out;
}

// Family sequence for rotation(theta, 0) by catalog name.
inline Sequence synthesize(const std::string& name, double theta) {
  if (name == "sk1") return sk1(theta);
  if (name == "sk2") return sk2(theta, Sk2Variant::standard);
  if (name == "sk2-rhombus") return sk2(theta, Sk2Variant::rhombus);
  if (name == "sk3") return sk_n(3, theta);
  if (name == "sk4") return sk_n(4, theta);
  if (name == "b2") return wimperis(WimperisKind::B2, theta);
  if (name == "n2") return wimperis(WimperisKind::N2, theta);
  if (name == "p2") return wimperis(WimperisKind::P2, theta);
  if (name.size() == 2 && (name[0] == 'p' || name[0] == 'n' || name[0] == 'b') &&
      (name[1] == '4' || name[1] == '6')) {
    TsKind k = name[0] == 'p' ? TsKind::P : name[0] == 'n' ? TsKind::N : TsKind::B;
    return trotter_suzuki(k, (name[1] - '0') / 2, theta);
  }
  if (name == "corpse") return corpse(theta);
  if (name == "corpse2") return corpse2(theta);
  if (name == "corpse2-exact") return corpse2(theta, FrameMode::exact);
  if (name == "b2corpse") return b2corpse(theta);
  if (name == "plain")
    return detail::make({Pulse::planar(theta, 0.0)}, rotation(theta, 0.0), "plain", 0, {});
  throw Failure(Fault::parse_error, "unknown sequence family '" + name + "'");
}

inline const std::vector<std::string>& catalog() {
  static const std::vector<std::string> names = {
      "sk1", "sk2", "sk2-rhombus", "sk3", "b2", "n2", "p2", "p4", "n4", "b4",
      "corpse", "corpse2", "b2corpse"};
  return names;
}

// Euler X-Y-X decomposition with one family sequence per angle.
inline Sequence euler_compensated(const Unitary2& u_target, const std::string& family = "sk1") {
  EulerAngles e = euler_decompose(u_target);
  Sequence a = synthesize(family, e.alpha1);
  Sequence b = synthesize(family, e.alpha2);
  Sequence c = synthesize(family, e.alpha3);
  Sequence s = a;
  detail::append(s.pulses, detail::shifted(b.pulses, 0.5 * pi));
  detail::append(s.pulses, c.pulses);
  s.target = u_target;
  s.family = "euler-" + family;
  return s;
}

}  // namespace pulses

#endif
