#include <gtest/gtest.h>
#include <unsupported/Eigen/MatrixFunctions>

#include <random>

#include "expect_fault.hpp"
#include "pulses/bench.hpp"

using namespace pulses;

namespace {

Unitary4 ref_exp(const Unitary4& h) { return (cplx(0, -1) * h).exp(); }

double slope_of(const std::function<double(double)>& f) {
  return fit_order(scan_function("t", ErrorModel::ising(0), f, default_grid())).slope;
}

}  // namespace

TEST(TwoQubit, GramMatrixIsIdentity) {
  EXPECT_EQ(product_basis().size(), 15u);
  EXPECT_LT((gram_matrix() - Eigen::MatrixXd::Identity(15, 15)).cwiseAbs().maxCoeff(), 1e-14);
  EXPECT_EQ(product_basis().front().name, "1x");
  EXPECT_EQ(product_basis().back().name, "zz");
  EXPECT_FAULT(basis_op("q1"), Fault::parse_error);
}

TEST(TwoQubit, CartanBracketClosure) {
  auto k = cartan_k(), m = cartan_m();
  EXPECT_EQ(k.size(), 6u);
  EXPECT_EQ(m.size(), 9u);
  for (int i : k)
    for (int j : k) EXPECT_LT(bracket_leak(i, j, k), 1e-12);
  for (int i : m)
    for (int j : m) EXPECT_LT(bracket_leak(i, j, k), 1e-12);
  for (int i : m)
    for (int j : k) EXPECT_LT(bracket_leak(i, j, m), 1e-12);
}

TEST(TwoQubit, UzzIsExponentialOfHzz) {
  for (double th : {0.0, 0.4, pi, 5.0}) EXPECT_LT((u_zz(th) - ref_exp(th * basis_op("zz"))).norm(), 1e-13);
  EXPECT_LT((u_zz(0.3) * u_zz(0.9) - u_zz(1.2)).norm(), 1e-14);
  Unitary4 d = u_zz(0.8);
  EXPECT_NEAR(std::arg(d(0, 0)), -0.4, 1e-15);
  EXPECT_NEAR(std::arg(d(1, 1)), 0.4, 1e-15);
}

TEST(TwoQubit, LocalsEmbedAndCommute) {
  EXPECT_LT((local(1, 0.0, 0.3) - Unitary4::Identity()).norm(), 1e-15);
  Unitary4 a = local(1, 0.7, 0.2), b = local(2, 1.1, -0.5);
  EXPECT_LT((a * b - b * a).norm(), 1e-14);
  EXPECT_LT((local(1, 0.7, 0.0) - ref_exp(0.7 * basis_op("x1"))).norm(), 1e-14);
  Eigen::VectorXd c = basis_coeffs(cplx(0, 1) * local(1, 0.7, 0.0).log());
  for (int i = 0; i < 15; ++i)
    if (product_basis()[i].name != "x1") EXPECT_LT(std::abs(c[i]), 1e-12);
  EXPECT_FAULT(local(3, 1.0, 0.0), Fault::out_of_range);
}

TEST(TwoQubit, CartanFactorsFromConjugation) {
  EXPECT_LT((cartan_a(0, 0, 0) - Unitary4::Identity()).norm(), 1e-14);
  for (double a : {0.3, 1.7}) {
    EXPECT_LT((u_xx(a) - ref_exp(a * basis_op("xx"))).norm(), 1e-13);
    EXPECT_LT((u_yy(a) - ref_exp(a * basis_op("yy"))).norm(), 1e-13);
    EXPECT_LT((cartan_a(a, 0, 0) - k_y() * u_zz(a) * k_y().adjoint()).norm(), 1e-14);
  }
  Unitary4 p = u_xx(0.3) * u_yy(-0.8) * u_zz(1.1);
  Unitary4 q = u_zz(1.1) * u_xx(0.3) * u_yy(-0.8);
  Unitary4 r = u_yy(-0.8) * u_zz(1.1) * u_xx(0.3);
  EXPECT_LT((p - q).norm(), 1e-12);
  EXPECT_LT((p - r).norm(), 1e-12);
  EXPECT_LT((cartan_a(0.3, -0.8, 1.1) - p).norm(), 1e-12);
}

TEST(TwoQubit, KakSynthesis) {
  LocalLayer id{};
  EXPECT_LT((kak_synthesize(id, {0, 0, 0}, id) - Unitary4::Identity()).norm(), 1e-14);
  std::mt19937 rng(17);
  std::uniform_real_distribution<double> d(0, 4 * pi);
  for (int i = 0; i < 20; ++i) {
    LocalLayer k2{EulerAngles{d(rng), d(rng), d(rng)}, EulerAngles{d(rng), d(rng), d(rng)}};
    LocalLayer k1{EulerAngles{d(rng), d(rng), d(rng)}, EulerAngles{d(rng), d(rng), d(rng)}};
    Unitary4 u = kak_synthesize(k2, {d(rng), d(rng), d(rng)}, k1);
    EXPECT_LT(unitarity_defect(u), 1e-12);
    // Local layers alone are tensor products of Euler rotations.
    Unitary4 l = kak_synthesize(k2, {0, 0, 0}, id);
    EXPECT_LT((l - kron(euler_compose(k2[0]), euler_compose(k2[1]))).norm(), 1e-13);
  }
  EXPECT_FAULT(kak_synthesize(id, {0, std::nan(""), 0}, id), Fault::out_of_range);
}

TEST(TwoQubit, IsingRotation) {
  EXPECT_LT((cal_r(0.9, 0.0) - u_zz(0.9)).norm(), 1e-14);
  for (double ph : {0.3, 1.2, -2.0}) {
    double th = 0.8;
    Unitary4 want = ref_exp(th * (std::cos(ph) * basis_op("zz") + std::sin(ph) * basis_op("yz")));
    EXPECT_LT((cal_r(th, ph) - want).norm(), 1e-13);
    Eigen::VectorXd c = basis_coeffs(cplx(0, 1) * cal_r(th, ph).log());
    int yz = 0;
    while (product_basis()[yz].name != "yz") ++yz;
    EXPECT_NEAR(c[yz], th * std::sin(ph), 1e-12);
  }
  // 2 pi inside the subgroup is -I, like a 2 pi spin rotation.
  EXPECT_LT((cal_r(two_pi, 0.7) + Unitary4::Identity()).norm(), 1e-13);
}

TEST(TwoQubit, SubalgebraIsomorphism) {
  // Hx -> H_zz, Hy -> H_yz, Hz -> -H_x1 preserves brackets.
  std::array<Unitary4, 3> img = {basis_op("zz"), basis_op("yz"), Unitary4(-basis_op("x1"))};
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b) {
      Unitary2 c2 = spin_op(a) * spin_op(b) - spin_op(b) * spin_op(a);
      Vec3 v = algebra_coeffs(c2);  // [Ha, Hb] = -i v.H
      Unitary4 want = Unitary4::Zero();
      for (int k = 0; k < 3; ++k) want += cplx(0, -1) * v[k] * img[k];
      Unitary4 got = img[a] * img[b] - img[b] * img[a];
      EXPECT_LT((got - want).norm(), 1e-12);
    }
}

TEST(TwoQubit, TransplantedSequencesKeepOrder) {
  for (const char* name : {"sk1", "b2"}) {
    Sequence s = synthesize(name, pi / 2);
    Unitary4 t = u_zz(pi / 2);
    EXPECT_GE(fidelity(t, ising_sequence(s, 0.0)), 1 - 1e-12);
    double slope = slope_of([&](double e) { return infidelity(t, ising_sequence(s, e)); });
    EXPECT_NEAR(slope, 2.0 * (s.order_claim + 1), 0.2) << name;
  }
  EXPECT_FAULT(ising_sequence(retarget(sk1(1.0), exp_su2(Vec3(0.6, 0, 0.8))), 0.0), Fault::unsupported_pulse);
}

TEST(TwoQubit, B2jIsTransplantedB2) {
  for (double e : {0.0, 0.05}) {
    Unitary4 a = b2j(1.3, e), b = ising_sequence(wimperis(WimperisKind::B2, 1.3), e);
    EXPECT_LT((a - b).norm(), 1e-13);
  }
  EXPECT_FAULT(b2j(13.0, 0.0), Fault::out_of_range);
}

TEST(TwoQubit, B2jMatchesHighPrecisionOracle) {
  // tests/oracle/gen_oracles.py
  EXPECT_NEAR(infidelity(u_zz(pi), b2j(pi, 0.02)) / 3.002488562013141e-10, 1.0, 1e-7);
}

TEST(TwoQubit, B2jIdealAndSlope) {
  EXPECT_GE(fidelity(u_zz(pi), b2j(pi, 0.0)), 1 - 1e-12);
  EXPECT_NEAR(slope_of([](double e) { return infidelity(u_zz(pi), b2j(pi, e)); }), 6.0, 0.2);
}

TEST(TwoQubit, B2wjSlopesInEachError) {
  const double th = pi;
  EXPECT_GE(fidelity(u_zz(th), b2wj(th, 0, 0)), 1 - 1e-12);
  EXPECT_NEAR(slope_of([&](double e) { return infidelity(u_zz(th), b2wj(th, e, 0)); }), 6.0, 0.2);
  EXPECT_NEAR(slope_of([&](double e) { return infidelity(u_zz(th), b2wj(th, 0, e)); }), 6.0, 0.2);
}

TEST(TwoQubit, B2wjBeatsBareRotations) {
  const double th = pi / 2;
  double comp = infidelity(u_zz(th), b2wj(th, 0.1, 0.1));
  // Same block structure with bare, amplitude-deformed conjugations.
  auto blocks = detail::b2_blocks(th);
  Unitary4 bare = Unitary4::Identity();
  for (auto [t, f] : blocks) bare = bare_ising(t, f, 0.1, 0.1) * bare;
  EXPECT_LT(comp, infidelity(u_zz(th), bare));
  EXPECT_LT(comp, infidelity(u_zz(th), u_zz(th * 1.1)));
}

TEST(TwoQubit, B2wSingleBlock) {
  EXPECT_LT((b2w(0.8, 0.0, 0.0, 0.0) - u_zz(0.8)).norm(), 1e-14);
  EXPECT_GE(fidelity(cal_r(0.8, 1.1), b2w(0.8, 1.1, 0.0, 0.0)), 1 - 1e-12);
  // Compensated conjugation beats bare pulses under amplitude error.
  double w = infidelity(cal_r(0.8, 1.1), b2w(0.8, 1.1, 0.0, 0.05));
  double b = infidelity(cal_r(0.8, 1.1), bare_ising(0.8, 1.1, 0.0, 0.05));
  EXPECT_LT(w, 1e-3 * b);
}

TEST(TwoQubit, FidelityPhaseInvariance) {
  Unitary4 u = b2j(1.0, 0.03);
  EXPECT_NEAR(fidelity(u, std::exp(cplx(0, 0.9)) * u), 1.0, 1e-15);
  EXPECT_NEAR(fidelity(u_zz(1.0), u_zz(1.3)), std::abs(std::cos(0.15)), 1e-15);
  Unitary4 n = normalize_phase(std::exp(cplx(0, 0.4)) * u);
  EXPECT_NEAR(std::abs(n.determinant() - 1.0), 0.0, 1e-13);
}
