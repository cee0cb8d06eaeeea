#include <gtest/gtest.h>

#include <sstream>

#include "expect_fault.hpp"
#include "pulses/bench.hpp"

using namespace pulses;

namespace {

Sequence plain(double th) { return synthesize("plain", th); }

ErrorModel declared_model(const Sequence& s) {
  const std::string m = s.declared.empty() ? "amplitude" : s.declared.front().first;
  if (m == "detuning") return ErrorModel::detuning(0);
  if (m == "addressing") return ErrorModel::addressing(0, false);
  return ErrorModel::amplitude(0);
}

}  // namespace

TEST(Bench, LogGrid) {
  auto g = default_grid();
  ASSERT_EQ(g.size(), 25u);
  EXPECT_DOUBLE_EQ(g.front(), 1e-4);
  EXPECT_NEAR(g.back(), 1e-1, 1e-16);
  for (size_t i = 1; i < g.size(); ++i) EXPECT_NEAR(g[i] / g[i - 1], std::pow(10.0, 0.125), 1e-12);
  EXPECT_FAULT(log_grid(0.0, 1.0, 5), Fault::out_of_range);
  EXPECT_FAULT(log_grid(1e-3, 1e-4, 5), Fault::out_of_range);
}

TEST(Bench, PlainPulseScanClosedForm) {
  const double th = pi / 2;
  ScanResult r = scan(plain(th), ErrorModel::amplitude(0));
  for (size_t i = 0; i < r.epsilons.size(); ++i) {
    double exact = 2 * std::pow(std::sin(th * r.epsilons[i] / 4), 2);
    EXPECT_NEAR(r.infidelities[i] / exact, 1.0, 1e-10);
  }
  SlopeFit f = fit_order(r);
  EXPECT_NEAR(f.slope, 2.0, 0.1);
  EXPECT_GT(f.r_squared, 0.9999);
  EXPECT_EQ(f.window_lo, 1e-4);
  EXPECT_EQ(f.window_hi, 1e-2);
  EXPECT_EQ(f.points, 17);
}

TEST(Bench, PlainPulseIsEven) {
  for (double e : {1e-3, 0.05, 0.2})
    EXPECT_DOUBLE_EQ(sequence_infidelity(plain(1.1), ErrorModel::amplitude(e)),
                     sequence_infidelity(plain(1.1), ErrorModel::amplitude(-e)));
}

TEST(Bench, ZeroErrorFloor) { EXPECT_LT(sequence_infidelity(sk1(pi / 2), ErrorModel::amplitude(0)), 1e-14); }

TEST(Bench, ScansAreMonotone) {
  for (const auto& name : catalog()) {
    Sequence s = synthesize(name, pi / 2);
    ScanResult r = scan(s, declared_model(s));
    // Order-10 sequences sit at the rounding floor for eps < 3e-4; noise there is below FitOptions::floor.
    const double floor = FitOptions{}.floor;
    for (size_t i = 1; i < r.infidelities.size(); ++i)
      EXPECT_GE(r.infidelities[i], r.infidelities[i - 1] - floor) << name << " at " << r.epsilons[i];
    for (double f : r.infidelities) {
      EXPECT_GE(f, 0.0);
      EXPECT_LE(f, 1.0);
    }
  }
}

TEST(Bench, SlopeStableUnderWindowShift) {
  for (const char* name : {"sk1", "b2", "sk2"}) {
    ScanResult r = scan(synthesize(name, pi / 2), ErrorModel::amplitude(0), log_grid(1e-4, 1e-1, 49));
    FitOptions a, b;
    b.window_lo = 2e-4;
    b.window_hi = 2e-2;
    EXPECT_LT(std::abs(fit_order(r, a).slope - fit_order(r, b).slope), 0.1) << name;
  }
}

TEST(Bench, HighOrderWindowShiftsAboveFloor) {
  // sk4 reaches the rounding floor near eps = 1e-3; the fit window moves up.
  ScanResult r = scan(sk_n(4, pi / 2), ErrorModel::amplitude(0));
  SlopeFit f = fit_order(r);
  EXPECT_GE(f.points, 5);
  EXPECT_NEAR(f.slope, 10.0, 0.3);
}

TEST(Bench, FitErrors) {
  ScanResult r = scan(sk1(1.0), ErrorModel::amplitude(0), log_grid(1e-4, 1e-2, 4));
  EXPECT_FAULT(fit_order(r), Fault::too_few_points);
  // Unaddressed spins under a zero-angle sequence never see an error.
  ScanResult z = scan(sk1(1.0), ErrorModel::addressing(0, true));
  EXPECT_FAULT(fit_order(z), Fault::floor_dominated);
  ScanResult bad = r;
  bad.infidelities.pop_back();
  EXPECT_FAULT(fit_order(bad), Fault::dimension_mismatch);
}

TEST(Bench, ScanValidation) {
  EXPECT_FAULT(scan(sk1(1.0), ErrorModel::amplitude(0), {1e-3, 1e-4}), Fault::out_of_range);
  EXPECT_FAULT(scan(sk1(1.0), ErrorModel::amplitude(0), {0.0, 1e-4}), Fault::out_of_range);
  EXPECT_FAULT(scan(sk1(1.0), ErrorModel::amplitude_detuning(0, 0)), Fault::incompatible_model);
  EXPECT_FAULT(scan(retarget(sk1(1.0), exp_su2(Vec3(0.6, 0, 0.8))), ErrorModel::addressing(0, true)),
               Fault::unsupported_pulse);
}

TEST(Bench, ScanIsDeterministic) {
  ScanResult a = scan(sk2(0.7), ErrorModel::amplitude(0)), b = scan(sk2(0.7), ErrorModel::amplitude(0));
  EXPECT_EQ(a.infidelities, b.infidelities);
}

TEST(Bench, GridOriginAndThreadIndependence) {
  std::vector<double> g = {-0.2, -0.1, 0.0, 0.1, 0.2};
  for (const auto& name : catalog()) {
    GridResult r = grid2(synthesize(name, pi / 2), ModelKind::amplitude_detuning, g, g, 1);
    EXPECT_LT(r.value(2, 2), 1e-14) << name;
  }
  Sequence s = b2corpse(pi / 2);
  GridResult one = grid2(s, ModelKind::pulse_length_detuning, g, g, 1);
  GridResult many = grid2(s, ModelKind::pulse_length_detuning, g, g, 4);
  EXPECT_EQ(one.values, many.values);
  EXPECT_EQ(one.mask, many.mask);
}

TEST(Bench, GridRowMatchesOneDimensionalScan) {
  Sequence s = wimperis(WimperisKind::B2, pi / 2);
  auto eps = default_grid();
  GridResult r = grid2(s, ModelKind::amplitude_detuning, eps, {0.0}, 2);
  ScanResult line = scan(s, ErrorModel::amplitude(0), eps);
  for (size_t i = 0; i < eps.size(); ++i) EXPECT_EQ(r.value(i, 0), line.infidelities[i]);
}

TEST(Bench, GridValidation) {
  EXPECT_FAULT(grid2(sk1(1.0), ModelKind::amplitude, {0.0}, {0.0}), Fault::incompatible_model);
  EXPECT_FAULT(grid2(sk1(1.0), ModelKind::amplitude_detuning, {std::nan("")}, {0.0}), Fault::out_of_range);
  EXPECT_THROW(grid_function(
                   "x", [](double, double) -> double { throw Failure(Fault::quadrature_failed, "boom"); }, {0.0, 1.0},
                   {0.0}, 2),
               Failure);
}

TEST(Bench, ContourMask) {
  GridResult r = grid_function("f", [](double a, double b) { return a * a + b * b; }, {0.0, 0.2}, {0.0, 0.05}, 1);
  EXPECT_TRUE(r.inside(0, 0));
  EXPECT_TRUE(r.inside(0, 1));
  EXPECT_FALSE(r.inside(1, 0));
}

TEST(Bench, CsvFormats) {
  std::ostringstream a, b;
  write_scan_csv(a, scan(plain(1.0), ErrorModel::amplitude(0), {1e-3, 1e-2}));
  EXPECT_EQ(a.str().substr(0, 19), "epsilon,infidelity\n");
  EXPECT_NE(a.str().find("0.001,"), std::string::npos);
  write_grid_csv(b, grid_function("f", [](double x, double y) { return x + y; }, {0.0}, {0.5}, 1));
  EXPECT_EQ(b.str(), "eps1,eps2,infidelity\n0,0.5,0.5\n");
}
