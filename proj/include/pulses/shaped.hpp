#ifndef PULSES_SHAPED_HPP
#define PULSES_SHAPED_HPP

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <memory>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "pulses/expansion.hpp"

namespace pulses {

// Control amplitude u_x(t) on [0, tau]. Samples are joined linearly; a
// repeated time stamp encodes a jump. Fourier amplitudes follow
// u_x(t) = w sum_n a_n cos(n w (t - tau/2)) + b_n sin(n w (t - tau/2)), w = 2 pi / tau.
struct Waveform {
  enum class Kind { samples, fourier };
  Kind kind = Kind::samples;
  double tau = 0.0;
  std::vector<double> t, u;
  std::vector<double> a, b;
  // Trapezoid angle accumulated up to each sample time.
  std::vector<double> cumulative;

  static Waveform from_samples(std::vector<double> t, std::vector<double> u) {
    if (t.size() != u.size() || t.size() < 2)
      throw Failure(Fault::parse_error, "waveform needs at least two (t, u) samples");
    if (t.front() != 0.0) throw Failure(Fault::out_of_range, "waveform samples must start at t = 0");
    for (size_t k = 1; k < t.size(); ++k)
      if (!(t[k] >= t[k - 1])) throw Failure(Fault::out_of_range, "waveform times must be monotone");
    for (size_t k = 0; k < t.size(); ++k)
      if (!std::isfinite(t[k]) || !std::isfinite(u[k]))
        throw Failure(Fault::out_of_range, "waveform samples must be finite");
    Waveform w;
    w.kind = Kind::samples;
    w.tau = t.back();
    w.t = std::move(t);
    w.u = std::move(u);
    w.cumulative.assign(w.t.size(), 0.0);
    for (size_t k = 1; k < w.t.size(); ++k)
      w.cumulative[k] = w.cumulative[k - 1] + 0.5 * (w.u[k - 1] + w.u[k]) * (w.t[k] - w.t[k - 1]);
    return w;
  }

  static Waveform from_fourier(double tau, std::vector<double> a, std::vector<double> b) {
    if (!(tau > 0) || !std::isfinite(tau)) throw Failure(Fault::out_of_range, "tau must be positive");
    size_t n = std::max(a.size(), b.size());
    a.resize(n, 0.0);
    b.resize(n, 0.0);
    Waveform w;
    w.kind = Kind::fourier;
    w.tau = tau;
    w.a = std::move(a);
    w.b = std::move(b);
    return w;
  }

  double omega() const { return two_pi / tau; }

  double value(double s) const {
    if (kind == Kind::fourier) {
      const double w = omega(), x = s - 0.5 * tau;
      double acc = 0.0;
      for (size_t n = 0; n < a.size(); ++n)
        acc += a[n] * std::cos(n * w * x) + b[n] * std::sin(n * w * x);
      return w * acc;
    }
    if (s <= t.front()) return u.front();
    if (s >= t.back()) return u.back();
    size_t k = std::upper_bound(t.begin(), t.end(), s) - t.begin();
    double t0 = t[k - 1], t1 = t[k];
    if (t1 == t0) return u[k];
    return u[k - 1] + (u[k] - u[k - 1]) * (s - t0) / (t1 - t0);
  }
};

// Smooth pieces of a waveform: knot intervals for samples, uniform panels
// for Fourier series.
inline std::vector<std::pair<double, double>> waveform_pieces(const Waveform& w) {
  std::vector<std::pair<double, double>> out;
  if (w.kind == Waveform::Kind::samples) {
    for (size_t k = 1; k < w.t.size(); ++k)
      if (w.t[k] > w.t[k - 1]) out.push_back({w.t[k - 1], w.t[k]});
    return out;
  }
  int n = std::max<int>(static_cast<int>(std::ceil(w.tau / magnus_panel)),
                        4 * static_cast<int>(std::max<size_t>(1, w.a.size())));
  for (int i = 0; i < n; ++i) out.push_back({w.tau * i / n, i + 1 == n ? w.tau : w.tau * (i + 1) / n});
  return out;
}

inline double accumulated_angle(const Waveform& w, double s) {
  if (!(s >= 0.0) || s > w.tau * (1.0 + 1e-15))
    throw Failure(Fault::out_of_range, "accumulated_angle: t outside [0, tau]");
  if (w.kind == Waveform::Kind::fourier) {
    const double om = w.omega(), x = s - 0.5 * w.tau, x0 = -0.5 * w.tau;
    double acc = w.a.empty() ? 0.0 : om * w.a[0] * s;
    for (size_t n = 1; n < w.a.size(); ++n) {
      double k = static_cast<double>(n);
      acc += w.a[n] / k * (std::sin(k * om * x) - std::sin(k * om * x0));
      acc -= w.b[n] / k * (std::cos(k * om * x) - std::cos(k * om * x0));
    }
    return acc;
  }
  if (s >= w.tau) return w.cumulative.back();
  size_t k = std::upper_bound(w.t.begin(), w.t.end(), s) - w.t.begin();
  if (k == 0) return 0.0;
  double t0 = w.t[k - 1];
  return w.cumulative[k - 1] + 0.5 * (w.u[k - 1] + w.value(s)) * (s - t0);
}

// (integral of cos theta(t), integral of sin theta(t)) over [0, tau].
inline std::pair<double, double> first_order_residuals(const Waveform& w,
                                                       double tol = magnus_tolerance) {
  auto f = [&](double s) -> Vec3 {
    double th = accumulated_angle(w, std::min(s, w.tau));
    return Vec3(std::cos(th), std::sin(th), 0.0);
  };
  auto pieces = waveform_pieces(w);
  Vec3 acc = Vec3::Zero();
  const double per = tol / std::max<size_t>(1, pieces.size());
  for (auto [a, b] : pieces) acc += detail::adaptive_gauss(f, a, b, per);
  return {acc.x(), acc.y()};
}

// Time-ordered propagator of u_x(t) Hx + delta Hz by midpoint sampling.
// Sample pieces get steps in proportion to their length, so piecewise
// constant controls are integrated exactly.
inline Unitary2 propagate(const Waveform& w, double delta, int steps = 2048) {
  if (steps < 1) throw Failure(Fault::out_of_range, "propagate needs steps >= 1");
  Spin acc;
  long count = 0;
  auto advance = [&](double a, double b, int n) {
    double h = (b - a) / n;
    for (int i = 0; i < n; ++i) {
      double mid = a + (i + 0.5) * h;
      acc = spin_exp(Vec3(w.value(mid) * h, 0.0, delta * h)) * acc;
      if (++count % renormalize_every == 0) acc = acc.normalized();
    }
  };
  if (w.kind == Waveform::Kind::fourier) {
    advance(0.0, w.tau, steps);
  } else {
    for (auto [a, b] : waveform_pieces(w)) {
      int n = std::max(1, static_cast<int>(std::lround(steps * (b - a) / w.tau)));
      advance(a, b, n);
    }
  }
  return acc.matrix();
}

struct Propagation {
  Unitary2 u;
  // Distance to the propagator at half the steps.
  double defect = 0.0;
  int steps = 0;
};

// Propagator at `steps` and 2 * steps; returns the finer one with the
// change as a discretization estimate.
inline Propagation propagate_checked(const Waveform& w, double delta, int steps = 2048) {
  Unitary2 coarse = propagate(w, delta, steps);
  Unitary2 fine = propagate(w, delta, 2 * steps);
  return {fine, (fine - coarse).norm(), 2 * steps};
}

// Fourier series evaluated on n + 1 uniform samples.
inline Waveform render(const Waveform& w, int n = 4096) {
  if (n < 1) throw Failure(Fault::out_of_range, "render needs n >= 1");
  if (w.kind == Waveform::Kind::samples) return w;
  std::vector<double> t(n + 1), u(n + 1);
  for (int i = 0; i <= n; ++i) {
    t[i] = i == n ? w.tau : w.tau * i / n;
    u[i] = w.value(t[i]);
  }
  return Waveform::from_samples(std::move(t), std::move(u));
}

// Square pulses at phase 0 or pi as a unit-amplitude step waveform.
inline Waveform square_waveform(const Sequence& s) {
  std::vector<double> t, u;
  double now = 0.0;
  for (const auto& p : s.pulses) {
    if (p.theta == 0.0) continue;
    if (p.axis != Axis::planar || std::abs(std::sin(p.phi)) > 1e-12)
      throw Failure(Fault::unsupported_pulse, "waveform rendering needs x-axis pulses (phase 0 or pi)");
    double sign = std::cos(p.phi) > 0 ? 1.0 : -1.0;
    t.push_back(now);
    u.push_back(sign);
    now += p.theta;
    t.push_back(now);
    u.push_back(sign);
  }
  if (t.empty()) return Waveform::from_samples({0.0, 0.0}, {0.0, 0.0});
  return Waveform::from_samples(std::move(t), std::move(u));
}

// Interaction-frame detuning error path of a waveform, per unit delta.
inline std::vector<ErrorSegment> waveform_segments(const Waveform& w) {
  std::vector<ErrorSegment> segs;
  auto shared = std::make_shared<const Waveform>(w);
  for (auto [a, b] : waveform_pieces(w)) {
    segs.push_back({b - a, [shared, a](double s) -> Vec3 {
                      double th = accumulated_angle(*shared, std::min(a + s, shared->tau));
                      return Vec3(0.0, std::sin(th), std::cos(th));
                    }});
  }
  return segs;
}

inline MagnusTerms waveform_terms(const Waveform& w, int depth = 2) {
  return magnus_from_segments(waveform_segments(w), depth);
}

inline void write_waveform_csv(std::ostream& os, const Waveform& w) {
  Waveform s = render(w);
  char buf[80];
  os << "t,u_x\n";
  for (size_t k = 0; k < s.t.size(); ++k) {
    std::snprintf(buf, sizeof buf, "%.12g,%.12g\n", s.t[k], s.u[k]);
    os << buf;
  }
}

inline Waveform read_waveform_csv(std::istream& is) {
  std::string line;
  std::vector<double> t, u;
  bool first = true;
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream ls(line);
    double a, b;
    bool ok = static_cast<bool>(ls >> a >> b);
    if (first && !ok) {
      first = false;
      continue;
    }
    first = false;
    if (!ok) throw Failure(Fault::parse_error, "bad waveform CSV line: " + line);
    t.push_back(a);
    u.push_back(b);
  }
  return Waveform::from_samples(std::move(t), std::move(u));
}

}  // namespace pulses

#endif
