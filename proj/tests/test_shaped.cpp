#include <gtest/gtest.h>

#include <sstream>

#include "expect_fault.hpp"
#include "pulses/shaped.hpp"
#include "pulses/sequences.hpp"

using namespace pulses;

namespace {

double phase_distance(const Unitary2& a, const Unitary2& b) {
  cplx ph = (a.adjoint() * b).trace();
  ph /= std::abs(ph);
  return (a * ph - b).norm();
}

Waveform constant(double theta, double tau) { return Waveform::from_samples({0.0, tau}, {theta / tau, theta / tau}); }

}  // namespace

TEST(Shaped, AccumulatedAngleBasics) {
  Waveform c = constant(pi / 2, 3.0);
  EXPECT_NEAR(accumulated_angle(c, 3.0), pi / 2, 1e-15);
  EXPECT_EQ(accumulated_angle(c, 0.0), 0.0);
  EXPECT_NEAR(accumulated_angle(c, 1.5), pi / 4, 1e-15);
  Waveform f = Waveform::from_fourier(5.0, {1.3 / two_pi}, {});
  EXPECT_NEAR(accumulated_angle(f, 5.0), 1.3, 1e-14);
  EXPECT_EQ(accumulated_angle(f, 0.0), 0.0);
  EXPECT_FAULT(accumulated_angle(c, 3.5), Fault::out_of_range);
  EXPECT_FAULT(accumulated_angle(c, -0.1), Fault::out_of_range);
}

TEST(Shaped, FourierAntiderivativeMatchesQuadrature) {
  Waveform f = Waveform::from_fourier(4.0, {0.2, 0.5, -0.3}, {0.0, 0.1, 0.4});
  for (double t : {0.3, 1.7, 2.0, 3.9}) {
    Vec3 q = detail::adaptive_gauss([&](double s) { return Vec3(f.value(s), 0, 0); }, 0.0, t, 1e-13);
    EXPECT_NEAR(accumulated_angle(f, t), q.x(), 1e-12) << t;
  }
}

TEST(Shaped, SamplesInterpolateAndJump) {
  Waveform w = Waveform::from_samples({0, 1, 1, 2}, {1, 1, -1, -1});
  EXPECT_DOUBLE_EQ(w.value(0.5), 1.0);
  EXPECT_DOUBLE_EQ(w.value(1.5), -1.0);
  EXPECT_DOUBLE_EQ(accumulated_angle(w, 2.0), 0.0);
  Waveform r = Waveform::from_samples({0, 2}, {0, 2});
  EXPECT_DOUBLE_EQ(r.value(0.5), 0.5);
  EXPECT_DOUBLE_EQ(accumulated_angle(r, 1.0), 0.5);
}

TEST(Shaped, SampleValidation) {
  EXPECT_FAULT(Waveform::from_samples({0, 2, 1}, {0, 1, 1}), Fault::out_of_range);
  EXPECT_FAULT(Waveform::from_samples({0.5, 2}, {0, 1}), Fault::out_of_range);
  EXPECT_FAULT(Waveform::from_samples({0}, {0}), Fault::parse_error);
  EXPECT_FAULT(Waveform::from_fourier(0.0, {1}, {}), Fault::out_of_range);
}

TEST(Shaped, ResidualsOfCorpseVanish) {
  for (double th : {pi / 2, pi}) {
    auto [c, s] = first_order_residuals(square_waveform(corpse(th)));
    EXPECT_LT(std::abs(c), 1e-10);
    EXPECT_LT(std::abs(s), 1e-10);
  }
}

TEST(Shaped, ResidualsOfPlainPulseClosedForm) {
  const double th = pi / 2, tau = 2.0;
  auto [c, s] = first_order_residuals(constant(th, tau));
  EXPECT_NEAR(c, tau / th * std::sin(th), 1e-12);
  EXPECT_NEAR(s, tau / th * (1 - std::cos(th)), 1e-12);
  auto [c0, s0] = first_order_residuals(Waveform::from_samples({0, 3}, {0, 0}));
  EXPECT_NEAR(c0, 3.0, 1e-14);
  EXPECT_NEAR(s0, 0.0, 1e-14);
}

TEST(Shaped, ResidualsAgreeWithFirstOrderTerm) {
  std::vector<Waveform> ws = {square_waveform(corpse(1.0)), constant(2.0, 1.5),
                              Waveform::from_fourier(two_pi, {0.25, 0.3, -0.2}, {0, 0.1, 0}),
                              Waveform::from_fourier(3.0, {0.0}, {0.0, 0.5})};
  for (const auto& w : ws) {
    auto [c, s] = first_order_residuals(w);
    Vec3 o1 = waveform_terms(w, 1).omega1;
    EXPECT_LT((o1 - Vec3(0, s, c)).norm(), 1e-9);
    EXPECT_EQ(std::hypot(c, s) < 1e-8, o1.norm() < 1e-8);
  }
}

TEST(Shaped, PropagateAtZeroDetuningIsRotation) {
  Unitary2 u = propagate(constant(pi / 2, 1.0), 0.0, 1000);
  EXPECT_LT((u - rotation(pi / 2, 0.0)).norm(), 1e-6);
  Waveform f = Waveform::from_fourier(two_pi, {0.25, 0.3}, {0, 0.2});
  Unitary2 v = propagate(f, 0.0, 4096);
  EXPECT_LT(phase_distance(v, rotation(accumulated_angle(f, f.tau), 0.0)), 1e-6);
  EXPECT_FAULT(propagate(f, 0.0, 0), Fault::out_of_range);
}

TEST(Shaped, PropagateConvergesAtSecondOrder) {
  Waveform f = Waveform::from_fourier(two_pi, {0.25, 0.3, -0.2}, {0, 0.1, 0});
  Unitary2 ref = propagate(f, 0.2, 1 << 16);
  double e1 = (propagate(f, 0.2, 512) - ref).norm();
  double e2 = (propagate(f, 0.2, 1024) - ref).norm();
  EXPECT_NEAR(e1 / e2, 4.0, 1.2);
  Propagation p = propagate_checked(f, 0.2, 1024);
  EXPECT_EQ(p.steps, 2048);
  EXPECT_GT(p.defect, 0.0);
  EXPECT_LT((p.u - ref).norm(), p.defect);
}

TEST(Shaped, CorpseWaveformMatchesSquarePulses) {
  Sequence s = corpse(pi / 2);
  Waveform w = square_waveform(s);
  for (double d : {0.0, 0.1, 0.3}) {
    Unitary2 a = propagate(w, d, 2048), b = apply_sequence(s, ErrorModel::detuning(d));
    EXPECT_LT(phase_distance(a, b), 1e-8) << d;
    EXPECT_NEAR(fidelity(s.target, a), fidelity(s.target, b), 1e-8);
  }
}

TEST(Shaped, SquareWaveformNeedsXAxisPulses) {
  EXPECT_FAULT(square_waveform(sk1(1.0)), Fault::unsupported_pulse);
  Waveform w = square_waveform(corpse(pi));
  EXPECT_NEAR(w.tau, 13 * pi / 3, 1e-13);
}

TEST(Shaped, RenderedFourierAgreesWithSeries) {
  Waveform f = Waveform::from_fourier(two_pi, {0.25, 0.3, -0.2}, {0, 0.1, 0});
  const int steps = 1 << 16;
  Unitary2 a = propagate(f, 0.2, steps);
  Waveform r = render(f, 16384);
  EXPECT_EQ(r.kind, Waveform::Kind::samples);
  EXPECT_LT(phase_distance(a, propagate(r, 0.2, steps)), 1e-8);
  EXPECT_LT(infidelity(a, propagate(render(f, 4096), 0.2, steps)), 1e-12);
}

TEST(Shaped, AntisymmetricControlCancelsSecondOrder) {
  // u_x odd about tau/2 (only b_n) gives a time-symmetric detuning path.
  for (double b1 : {0.2, 0.5})
    for (double b2 : {0.0, -0.3}) {
      Waveform w = Waveform::from_fourier(two_pi, {0.0}, {0.0, b1, b2});
      EXPECT_LT(waveform_terms(w, 2).omega2.norm(), 1e-9);
    }
}

TEST(Shaped, EvenControlKeepsSecondOrder) {
  // Constant 2 pi pulse: Omega2 = (1/2) int (t - sin t) over [0, 2 pi] = pi along x.
  Vec3 o2 = waveform_terms(Waveform::from_fourier(two_pi, {1.0}, {}), 2).omega2;
  EXPECT_LT((o2 - Vec3(pi, 0, 0)).norm(), 1e-9);
}

TEST(Shaped, CsvRoundTrip) {
  Waveform w = Waveform::from_samples({0, 0.5, 0.5, 2}, {1, 1, -0.5, 0.25});
  std::ostringstream os;
  write_waveform_csv(os, w);
  std::istringstream is(os.str());
  Waveform r = read_waveform_csv(is);
  EXPECT_EQ(r.t, w.t);
  EXPECT_EQ(r.u, w.u);
  std::istringstream bad("t,u_x\n0,1\nzz,1\n");
  EXPECT_FAULT(read_waveform_csv(bad), Fault::parse_error);
}
