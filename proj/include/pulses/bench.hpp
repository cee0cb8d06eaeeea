#ifndef PULSES_BENCH_HPP
#define PULSES_BENCH_HPP

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <exception>
#include <functional>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

#include "pulses/twoqubit.hpp"

namespace pulses {

struct ScanResult {
  std::vector<double> epsilons;
  std::vector<double> infidelities;
  ErrorModel model;
  std::string sequence_label;
};

struct SlopeFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  double window_lo = 0.0, window_hi = 0.0;
  int points = 0;
};

struct FitOptions {
  double window_lo = 1e-4;
  double window_hi = 1e-2;
  // Infidelities at or below this are treated as rounding floor.
  double floor = 1e-26;
  double ceiling = 1e-2;
  int min_points = 5;
};

inline std::vector<double> log_grid(double lo, double hi, int n) {
  if (!(lo > 0) || !(hi > lo) || n < 2) throw Failure(Fault::out_of_range, "log_grid needs 0 < lo < hi, n >= 2");
  std::vector<double> g(n);
  for (int i = 0; i < n; ++i) g[i] = std::pow(10.0, std::log10(lo) + (std::log10(hi) - std::log10(lo)) * i / (n - 1));
  return g;
}
inline std::vector<double> default_grid() { return log_grid(1e-4, 1e-1, 25); }

namespace detail {
inline void check_grid(const std::vector<double>& g) {
  for (size_t i = 0; i < g.size(); ++i) {
    if (!(g[i] > 0) || !std::isfinite(g[i])) throw Failure(Fault::out_of_range, "scan grid must be positive and finite");
    if (i > 0 && !(g[i] > g[i - 1])) throw Failure(Fault::out_of_range, "scan grid must be ascending");
  }
}
}  // namespace detail

// Infidelity of an arbitrary error-to-gate map on a grid.
inline ScanResult scan_function(const std::string& label, const ErrorModel& model,
                                const std::function<double(double)>& infid,
                                const std::vector<double>& grid) {
  detail::check_grid(grid);
  ScanResult r;
  r.epsilons = grid;
  r.model = model;
  r.sequence_label = label;
  r.infidelities.reserve(grid.size());
  for (double e : grid) r.infidelities.push_back(std::clamp(infid(e), 0.0, 1.0));
  return r;
}

inline ScanResult scan(const Sequence& s, const ErrorModel& model,
                       const std::vector<double>& grid = default_grid()) {
  if (model.two_parameter())
    throw Failure(Fault::incompatible_model, "scan varies a single error strength");
  for (const auto& p : s.pulses) check_compatible(p, model);
  return scan_function(s.family, model,
                       [&](double e) { return sequence_infidelity(s, model.with_strength(e)); }, grid);
}

// Least-squares slope of log10 infidelity against log10 eps over the
// asymptotic window. The window moves up by factors of 2 while too few
// points clear the floor.
inline SlopeFit fit_order(const ScanResult& r, const FitOptions& opt = {}) {
  if (r.epsilons.size() != r.infidelities.size())
    throw Failure(Fault::dimension_mismatch, "scan lists differ in length");
  auto in_window = [&](double lo, double hi, bool usable_only) {
    std::vector<int> idx;
    for (size_t i = 0; i < r.epsilons.size(); ++i) {
      double e = std::abs(r.epsilons[i]), f = r.infidelities[i];
      if (e < lo * (1 - 1e-12) || e > hi * (1 + 1e-12)) continue;
      if (usable_only && (!(f > opt.floor) || !(f < opt.ceiling))) continue;
      idx.push_back(static_cast<int>(i));
    }
    return idx;
  };
  int total = static_cast<int>(in_window(opt.window_lo, opt.window_hi, false).size());
  if (total < opt.min_points)
    throw Failure(Fault::too_few_points, "fit window holds " + std::to_string(total) + " grid points");
  double lo = opt.window_lo, hi = opt.window_hi;
  std::vector<int> idx = in_window(lo, hi, true);
  while (static_cast<int>(idx.size()) < opt.min_points && hi < 0.1) {
    lo *= 2.0;
    hi *= 2.0;
    idx = in_window(lo, hi, true);
  }
  if (static_cast<int>(idx.size()) < opt.min_points)
    throw Failure(Fault::floor_dominated,
                  "only " + std::to_string(idx.size()) + " points above the infidelity floor");
  double n = static_cast<double>(idx.size()), sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
  for (int i : idx) {
    double x = std::log10(std::abs(r.epsilons[i])), y = std::log10(r.infidelities[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    syy += y * y;
  }
  double den = n * sxx - sx * sx;
  if (!(den > 0)) throw Failure(Fault::too_few_points, "fit window has no spread in eps");
  SlopeFit f;
  f.slope = (n * sxy - sx * sy) / den;
  f.intercept = (sy - f.slope * sx) / n;
  double ss_tot = syy - sy * sy / n;
  double ss_res = 0.0;
  for (int i : idx) {
    double x = std::log10(std::abs(r.epsilons[i])), y = std::log10(r.infidelities[i]);
    double d = y - (f.intercept + f.slope * x);
    ss_res += d * d;
  }
  f.r_squared = ss_tot > 0 ? 1.0 - ss_res / ss_tot : 1.0;
  f.window_lo = lo;
  f.window_hi = hi;
  f.points = static_cast<int>(idx.size());
  return f;
}

struct GridResult {
  std::vector<double> eps1, eps2;
  // Row-major: value(i, j) at (eps1[i], eps2[j]).
  std::vector<double> values;
  std::vector<bool> mask;
  double contour = 0.01;
  std::string label;

  double value(size_t i, size_t j) const { return values[i * eps2.size() + j]; }
  bool inside(size_t i, size_t j) const { return mask[i * eps2.size() + j]; }
};

inline unsigned default_threads() { return std::max(1u, std::thread::hardware_concurrency()); }

// Cells are evaluated concurrently into position-indexed storage.
inline GridResult grid_function(const std::string& label,
                                const std::function<double(double, double)>& infid,
                                const std::vector<double>& g1, const std::vector<double>& g2,
                                unsigned threads = default_threads(), double contour = 0.01) {
  for (double x : g1)
    if (!std::isfinite(x)) throw Failure(Fault::out_of_range, "grid values must be finite");
  for (double x : g2)
    if (!std::isfinite(x)) throw Failure(Fault::out_of_range, "grid values must be finite");
  GridResult r;
  r.eps1 = g1;
  r.eps2 = g2;
  r.label = label;
  r.contour = contour;
  const size_t cells = g1.size() * g2.size();
  r.values.assign(cells, 0.0);
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::max<size_t>(1, cells))));
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errs(threads);
  for (unsigned w = 0; w < threads; ++w)
    pool.emplace_back([&, w] {
      try {
        for (size_t c = w; c < cells; c += threads)
          r.values[c] = std::clamp(infid(g1[c / g2.size()], g2[c % g2.size()]), 0.0, 1.0);
      } catch (...) {
        errs[w] = std::current_exception();
      }
    });
  for (auto& t : pool) t.join();
  for (auto& e : errs)
    if (e) std::rethrow_exception(e);
  r.mask.resize(cells);
  for (size_t c = 0; c < cells; ++c) r.mask[c] = r.values[c] < contour;
  return r;
}

// Simultaneous (eps, delta) errors for a two-parameter model kind.
inline GridResult grid2(const Sequence& s, ModelKind kind, const std::vector<double>& g1,
                        const std::vector<double>& g2, unsigned threads = default_threads()) {
  if (kind != ModelKind::amplitude_detuning && kind != ModelKind::pulse_length_detuning)
    throw Failure(Fault::incompatible_model, "grid2 needs a simultaneous amplitude or pulse-length and detuning model");
  for (const auto& p : s.pulses) check_compatible(p, ErrorModel{kind, 0.0, 0.0, false});
  return grid_function(
      s.family,
      [&](double e, double d) { return sequence_infidelity(s, ErrorModel{kind, e, d, false}); }, g1, g2,
      threads);
}

inline void write_scan_csv(std::ostream& os, const ScanResult& r) {
  char buf[80];
  os << "epsilon,infidelity\n";
  for (size_t i = 0; i < r.epsilons.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.12g,%.12g\n", r.epsilons[i], r.infidelities[i]);
    os << buf;
  }
}

inline void write_grid_csv(std::ostream& os, const GridResult& g) {
  char buf[100];
  os << "eps1,eps2,infidelity\n";
  for (size_t i = 0; i < g.eps1.size(); ++i)
    for (size_t j = 0; j < g.eps2.size(); ++j) {
      std::snprintf(buf, sizeof buf, "%.12g,%.12g,%.12g\n", g.eps1[i], g.eps2[j], g.value(i, j));
      os << buf;
    }
}

}  // namespace pulses

#endif
