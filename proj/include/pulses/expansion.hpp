#ifndef PULSES_EXPANSION_HPP
#define PULSES_EXPANSION_HPP

#include <array>
#include <cmath>
#include <functional>
#include <ostream>
#include <string>
#include <vector>

#include "pulses/errors.hpp"

namespace pulses {

// Coefficients v of -i v.H for the first three Magnus terms of the
// interaction-frame propagator, per power of the error strength.
struct MagnusTerms {
  Vec3 omega1 = Vec3::Zero();
  Vec3 omega2 = Vec3::Zero();
  Vec3 omega3 = Vec3::Zero();
  bool has_omega3 = false;
  double truncation_estimate = 0.0;
};

// Interaction-frame error vector h(s) on one smooth piece, s in [0, duration].
struct ErrorSegment {
  double duration = 0.0;
  std::function<Vec3(double)> h;
};

namespace detail {

inline const std::array<double, 10>& gl_nodes() {
  static const std::array<double, 10> x = {
      -0.9739065285171717, -0.8650633666889845, -0.6794095682990244, -0.4333953941292472,
      -0.1488743389816312, 0.1488743389816312,  0.4333953941292472,  0.6794095682990244,
      0.8650633666889845,  0.9739065285171717};
  return x;
}
inline const std::array<double, 10>& gl_weights() {
  static const std::array<double, 10> w = {
      0.0666713443086881, 0.1494513491505806, 0.2190863625159820, 0.2692667193099963,
      0.2955242247147529, 0.2955242247147529, 0.2692667193099963, 0.2190863625159820,
      0.1494513491505806, 0.0666713443086881};
  return w;
}

template <class T, class F>
T gauss(F&& f, double a, double b, T zero) {
  const auto& x = gl_nodes();
  const auto& w = gl_weights();
  const double half = 0.5 * (b - a), mid = 0.5 * (a + b);
  T acc = zero;
  for (int i = 0; i < 10; ++i) acc += (w[i] * half) * f(mid + half * x[i]);
  return acc;
}

template <class F>
Vec3 adaptive_gauss(F&& f, double a, double b, double tol, int depth = 0) {
  const Vec3 zero = Vec3::Zero();
  Vec3 whole = gauss(f, a, b, zero);
  double mid = 0.5 * (a + b);
  Vec3 both = gauss(f, a, mid, zero) + gauss(f, mid, b, zero);
  if ((whole - both).norm() <= tol) return both;
  if (depth > 40) throw Failure(Fault::quadrature_failed, "adaptive quadrature did not converge");
  return adaptive_gauss(f, a, mid, 0.5 * tol, depth + 1) +
         adaptive_gauss(f, mid, b, 0.5 * tol, depth + 1);
}

// Cumulative quantities carried across panels.
struct MagnusState {
  Vec3 g = Vec3::Zero();   // integral of h
  Vec3 k = Vec3::Zero();   // integral of h x g
  Mat3 m = Mat3::Zero();   // integral of h g^T
  Vec3 o3 = Vec3::Zero();  // third-order accumulator
};

inline MagnusState panel_step(const std::function<Vec3(double)>& h, double a, double b,
                              const MagnusState& s, bool third) {
  auto g_at = [&](double t) -> Vec3 { return s.g + gauss(h, a, t, Vec3::Zero().eval()); };
  MagnusState out = s;
  out.g = g_at(b);
  auto hxg = [&](double t) -> Vec3 { return h(t).cross(g_at(t)); };
  out.k = s.k + gauss(hxg, a, b, Vec3::Zero().eval());
  if (third) {
    auto hgt = [&](double t) -> Mat3 { return h(t) * g_at(t).transpose(); };
    out.m = s.m + gauss(hgt, a, b, Mat3::Zero().eval());
    auto k_at = [&](double t) -> Vec3 { return s.k + gauss(hxg, a, t, Vec3::Zero().eval()); };
    auto m_at = [&](double t) -> Mat3 { return s.m + gauss(hgt, a, t, Mat3::Zero().eval()); };
    auto f3 = [&](double t) -> Vec3 {
      Vec3 ht = h(t);
      Vec3 gt = g_at(t);
      return ht.cross(k_at(t)) + m_at(t) * ht - 0.5 * gt.squaredNorm() * ht;
    };
    out.o3 = s.o3 + gauss(f3, a, b, Vec3::Zero().eval()) / 6.0;
  }
  return out;
}

inline double state_gap(const MagnusState& x, const MagnusState& y, bool third) {
  double d = std::max((x.g - y.g).norm(), 0.5 * (x.k - y.k).norm());
  if (third) d = std::max(d, (x.o3 - y.o3).norm());
  return d;
}

inline MagnusState adaptive_panel(const std::function<Vec3(double)>& h, double a, double b,
                                  const MagnusState& s, bool third, double tol, int depth,
                                  double& err) {
  MagnusState whole = panel_step(h, a, b, s, third);
  double mid = 0.5 * (a + b);
  MagnusState left = panel_step(h, a, mid, s, third);
  MagnusState both = panel_step(h, mid, b, left, third);
  double gap = state_gap(whole, both, third);
  if (gap <= tol) {
    err += gap;
    return both;
  }
  if (depth > 40) throw Failure(Fault::quadrature_failed, "Magnus quadrature did not converge");
  MagnusState l = adaptive_panel(h, a, mid, s, third, 0.5 * tol, depth + 1, err);
  return adaptive_panel(h, mid, b, l, third, 0.5 * tol, depth + 1, err);
}

}  // namespace detail

inline constexpr double magnus_tolerance = 1e-10;
inline constexpr double magnus_panel = 0.5;

// Omega terms of a piecewise-smooth error path by nested Gauss-Legendre
// quadrature with breakpoints at segment boundaries.
inline MagnusTerms magnus_from_segments(const std::vector<ErrorSegment>& segs, int depth = 2,
                                        double tol = magnus_tolerance) {
  int panels = 0;
  for (const auto& s : segs)
    if (s.duration > 0) panels += std::max(1, static_cast<int>(std::ceil(s.duration / magnus_panel)));
  const double per_panel = tol / std::max(1, panels);
  const bool third = depth >= 3;
  detail::MagnusState st;
  double err = 0.0;
  for (const auto& s : segs) {
    if (!(s.duration > 0)) continue;
    int n = std::max(1, static_cast<int>(std::ceil(s.duration / magnus_panel)));
    double step = s.duration / n;
    for (int i = 0; i < n; ++i) {
      double a = i * step, b = (i + 1 == n) ? s.duration : (i + 1) * step;
      st = detail::adaptive_panel(s.h, a, b, st, third, per_panel, 0, err);
    }
  }
  MagnusTerms t;
  t.omega1 = st.g;
  t.omega2 = 0.5 * st.k;
  t.omega3 = st.o3;
  t.has_omega3 = third;
  t.truncation_estimate = err;
  return t;
}

// Only single-parameter models that are linear in their strength.
inline void check_linear(const ErrorModel& m) {
  if (m.two_parameter() || m.kind == ModelKind::ising)
    throw Failure(Fault::incompatible_model,
                  std::string("Magnus terms need a single linear error parameter, got ") +
                      model_name(m.kind));
}

// Per-pulse interaction-frame error segments for a unit error strength.
inline std::vector<ErrorSegment> error_segments(const Sequence& s, const ErrorModel& m) {
  check_linear(m);
  const ErrorModel unit = m.with_strength(1.0);
  std::vector<ErrorSegment> segs;
  Spin frame;
  for (const auto& p : s.pulses) {
    Vec3 a = frame_generator(p, unit);
    Vec3 d = error_generator(p, unit);
    double dur = std::abs(p.theta);
    if (dur > 0) {
      Vec3 rate = d / dur;
      double th = a.norm();
      Vec3 n = th > 0 ? Vec3(a / th) : Vec3::Zero();
      double w = th / dur;
      Vec3 par = n * n.dot(rate);
      Vec3 perp = rate - par;
      Vec3 cr = n.cross(perp);
      Spin f0 = frame;
      segs.push_back({dur, [f0, par, perp, cr, w](double t) -> Vec3 {
                        double c = std::cos(w * t), sn = std::sin(w * t);
                        return f0.unrotate(par + c * perp - sn * cr);
                      }});
    }
    frame = spin_exp(a) * frame;
  }
  return segs;
}

inline MagnusTerms interaction_terms(const Sequence& s, const ErrorModel& m, int depth = 2) {
  return magnus_from_segments(error_segments(s, m), depth);
}

// Truncated log(exp(a) exp(b)).
inline Vec3 bch_pair(const Vec3& a, const Vec3& b, int order) {
  if (order < 1 || order > 3) throw Failure(Fault::out_of_range, "bch order must be 1..3");
  Vec3 r = a + b;
  if (order >= 2) r += 0.5 * a.cross(b);
  if (order >= 3) r += (a.cross(a.cross(b)) + b.cross(b.cross(a))) / 12.0;
  return r;
}

struct PathSample {
  double t;
  Vec3 v;
};

struct AlgebraPath {
  std::vector<PathSample> samples;
  double closure_residual = 0.0;
  Vec3 signed_area = Vec3::Zero();
};

// Cumulative error vector along the sequence. Straight segments contribute
// their end points only; curved ones are subdivided for plotting.
inline AlgebraPath path(const Sequence& s, const ErrorModel& m, int arc_samples = 32) {
  auto segs = error_segments(s, m);
  AlgebraPath p;
  p.samples.push_back({0.0, Vec3::Zero()});
  Vec3 g = Vec3::Zero();
  double t0 = 0.0;
  for (const auto& seg : segs) {
    Vec3 h0 = seg.h(0.0), h1 = seg.h(seg.duration), hm = seg.h(0.5 * seg.duration);
    bool straight = (h0 - h1).norm() < 1e-14 && (h0 - hm).norm() < 1e-14;
    int n = straight ? 1 : arc_samples;
    double step = seg.duration / n;
    for (int i = 0; i < n; ++i) {
      g += detail::gauss(seg.h, i * step, (i + 1) * step, Vec3::Zero().eval());
      p.samples.push_back({t0 + (i + 1) * step, g});
    }
    t0 += seg.duration;
  }
  MagnusTerms t = magnus_from_segments(segs, 2);
  p.closure_residual = t.omega1.norm();
  p.signed_area = -t.omega2;
  return p;
}

// Polygon area 1/2 sum S_{k-1} x dS_k of the sampled path.
inline Vec3 polygon_area(const AlgebraPath& p) {
  Vec3 a = Vec3::Zero();
  for (size_t k = 1; k < p.samples.size(); ++k)
    a += 0.5 * p.samples[k - 1].v.cross(p.samples[k].v - p.samples[k - 1].v);
  return a;
}

inline void write_path_csv(std::ostream& os, const AlgebraPath& p) {
  char buf[160];
  os << "t,vx,vy,vz\n";
  for (const auto& s : p.samples) {
    std::snprintf(buf, sizeof buf, "%.12g,%.12g,%.12g,%.12g\n", s.t, s.v.x(), s.v.y(), s.v.z());
    os << buf;
  }
}

// (exp(a/n) exp(b/n))^n
inline Unitary2 trotter(const Vec3& a, const Vec3& b, int n) {
  if (n < 1) throw Failure(Fault::out_of_range, "trotter needs n >= 1");
  Spin step = spin_exp(a / n) * spin_exp(b / n);
  Spin acc;
  for (int k = 0; k < n; ++k) {
    acc = step * acc;
    if ((k + 1) % renormalize_every == 0) acc = acc.normalized();
  }
  return acc.matrix();
}

// (exp(a/n) exp(b/n) exp(-a/n) exp(-b/n))^(n^2), tends to exp(a x b).
inline Unitary2 balanced_commutator(const Vec3& a, const Vec3& b, int n) {
  if (n < 1) throw Failure(Fault::out_of_range, "balanced_commutator needs n >= 1");
  Spin step = spin_exp(a / n) * spin_exp(b / n) * spin_exp(-a / n) * spin_exp(-b / n);
  Spin acc;
  long reps = static_cast<long>(n) * n;
  for (long k = 0; k < reps; ++k) {
    acc = step * acc;
    if ((k + 1) % renormalize_every == 0) acc = acc.normalized();
  }
  return acc.matrix();
}

}  // namespace pulses

#endif
