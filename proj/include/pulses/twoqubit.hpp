#ifndef PULSES_TWOQUBIT_HPP
#define PULSES_TWOQUBIT_HPP

#include <unsupported/Eigen/KroneckerProduct>

#include <algorithm>
#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "pulses/sequences.hpp"

namespace pulses {

// Product operators H_{mu nu} = 2 H_mu (x) H_nu with H_1 = I/2, in the order
// 1x 1y 1z x1 xx xy xz y1 yx yy yz z1 zx zy zz.
struct ProductOperator {
  std::string name;
  int mu, nu;  // 0 = identity, 1..3 = x, y, z
  Unitary4 matrix;
};

inline Unitary2 single_basis(int k) {
  if (k == 0) return 0.5 * Unitary2::Identity();
  return spin_op(k - 1);
}

inline Unitary4 kron(const Unitary2& a, const Unitary2& b) {
  return Eigen::kroneckerProduct(a, b).eval();
}

inline const std::vector<ProductOperator>& product_basis() {
  static const std::vector<ProductOperator> basis = [] {
    const char names[] = {'1', 'x', 'y', 'z'};
    std::vector<ProductOperator> out;
    for (int mu = 0; mu < 4; ++mu)
      for (int nu = 0; nu < 4; ++nu) {
        if (mu == 0 && nu == 0) continue;
        out.push_back({std::string{names[mu], names[nu]}, mu, nu,
                       2.0 * kron(single_basis(mu), single_basis(nu))});
      }
    return out;
  }();
  return basis;
}

inline const Unitary4& basis_op(const std::string& name) {
  for (const auto& b : product_basis())
    if (b.name == name) return b.matrix;
  throw Failure(Fault::parse_error, "unknown product operator '" + name + "'");
}

inline Eigen::MatrixXd gram_matrix() {
  const auto& b = product_basis();
  Eigen::MatrixXd g(b.size(), b.size());
  for (size_t i = 0; i < b.size(); ++i)
    for (size_t j = 0; j < b.size(); ++j) g(i, j) = hs_inner(b[i].matrix, b[j].matrix).real();
  return g;
}

// Real coefficients c with m = sum c_k H_k for Hermitian traceless m.
inline Eigen::VectorXd basis_coeffs(const Unitary4& m) {
  const auto& b = product_basis();
  Eigen::VectorXd c(b.size());
  for (size_t i = 0; i < b.size(); ++i) c[i] = hs_inner(b[i].matrix, m).real();
  return c;
}

// exp(-i G) for Hermitian G.
inline Unitary4 exp_hermitian(const Unitary4& g) {
  Eigen::SelfAdjointEigenSolver<Unitary4> es(g);
  Eigen::Vector4cd ph;
  for (int i = 0; i < 4; ++i) ph[i] = std::exp(cplx(0, -es.eigenvalues()[i]));
  return es.eigenvectors() * ph.asDiagonal() * es.eigenvectors().adjoint();
}

inline Unitary4 exp_su4(const Eigen::VectorXd& coeffs) {
  const auto& b = product_basis();
  if (coeffs.size() != static_cast<Eigen::Index>(b.size()))
    throw Failure(Fault::dimension_mismatch, "exp_su4 needs 15 coefficients");
  Unitary4 g = Unitary4::Zero();
  for (size_t i = 0; i < b.size(); ++i) g += coeffs[i] * b[i].matrix;
  return exp_hermitian(g);
}

inline Unitary4 u_zz(double theta) {
  Unitary4 u = Unitary4::Zero();
  const cplx m = std::exp(cplx(0, -0.5 * theta)), p = std::exp(cplx(0, 0.5 * theta));
  u(0, 0) = m;
  u(1, 1) = p;
  u(2, 2) = p;
  u(3, 3) = m;
  return u;
}

inline Unitary4 local(int qubit, double theta, double phi) {
  if (qubit != 1 && qubit != 2) throw Failure(Fault::out_of_range, "qubit must be 1 or 2");
  const Unitary2 r = rotation(theta, phi);
  return qubit == 1 ? kron(r, Unitary2::Identity()) : kron(Unitary2::Identity(), r);
}

inline Unitary4 embed(int qubit, const Unitary2& u) {
  if (qubit != 1 && qubit != 2) throw Failure(Fault::out_of_range, "qubit must be 1 or 2");
  return qubit == 1 ? kron(u, Unitary2::Identity()) : kron(Unitary2::Identity(), u);
}

inline Unitary4 k_x() { return local(1, 0.5 * pi, 0.0) * local(2, 0.5 * pi, 0.0); }
inline Unitary4 k_y() { return local(1, 0.5 * pi, 0.5 * pi) * local(2, 0.5 * pi, 0.5 * pi); }

inline Unitary4 u_xx(double a) { return conjugate(k_y(), u_zz(a)); }
inline Unitary4 u_yy(double a) { return conjugate(k_x(), u_zz(a)); }

inline Unitary4 cartan_a(double axx, double ayy, double azz) { return u_xx(axx) * u_yy(ayy) * u_zz(azz); }

// Euler angles per qubit.
using LocalLayer = std::array<EulerAngles, 2>;

inline Unitary4 local_layer(const LocalLayer& k) {
  return kron(euler_compose(k[0]), euler_compose(k[1]));
}

inline Unitary4 kak_synthesize(const LocalLayer& k2, const std::array<double, 3>& a,
                               const LocalLayer& k1) {
  for (const auto& layer : {k2, k1})
    for (const auto& e : layer)
      if (!std::isfinite(e.alpha1) || !std::isfinite(e.alpha2) || !std::isfinite(e.alpha3))
        throw Failure(Fault::out_of_range, "kak_synthesize: non-finite local parameter");
  for (double x : a)
    if (!std::isfinite(x)) throw Failure(Fault::out_of_range, "kak_synthesize: non-finite Cartan parameter");
  return local_layer(k2) * cartan_a(a[0], a[1], a[2]) * local_layer(k1);
}

// R1(phi,0)^dag U_zz(theta) R1(phi,0) = exp(-i theta (cos phi H_zz + sin phi H_yz)).
inline Unitary4 cal_r(double theta, double phi) {
  const Unitary4 r = local(1, phi, 0.0);
  return r.adjoint() * u_zz(theta) * r;
}

// Ising image of a planar single-qubit sequence: pulse (theta, phi) becomes
// cal_r(theta (1 + eps_j), phi), mapping Hx -> H_zz, Hy -> H_yz, Hz -> -H_x1.
inline Unitary4 ising_sequence(const Sequence& s, double eps_j) {
  Unitary4 acc = Unitary4::Identity();
  for (const auto& p : s.pulses) {
    if (p.axis != Axis::planar && p.theta != 0.0)
      throw Failure(Fault::unsupported_pulse, "only planar pulses map to Ising rotations");
    acc = cal_r(p.theta * (1.0 + eps_j), p.phi) * acc;
  }
  return acc;
}

// Global phase removed by the principal fourth root of the determinant.
inline Unitary4 normalize_phase(const Unitary4& u) { return u / std::pow(u.determinant(), 0.25); }

namespace detail {

inline double b2_phase(double theta) {
  require_theta(theta, 2.0 * two_pi, "b2j");
  return std::acos(-theta / (2.0 * two_pi));
}

// Ising blocks (theta_k, phi_k) of the B2 pattern in application order.
inline std::array<std::pair<double, double>, 4> b2_blocks(double theta) {
  double f = b2_phase(theta);
  return {{{theta, 0.0}, {pi, f}, {two_pi, 3.0 * f}, {pi, f}}};
}

// Qubit-1 B2 sequence for rotation(angle, phase) under amplitude error eps_a.
inline Unitary4 b2_local(double angle, double phase, double eps_a) {
  Sequence s = wimperis(WimperisKind::B2, angle);
  for (auto& p : s.pulses) p.phi += phase;
  return embed(1, apply_sequence(s, ErrorModel::amplitude(eps_a)));
}

}  // namespace detail

// Compensated Ising rotation with exact single-qubit pulses.
inline Unitary4 b2j(double theta, double eps_j) {
  Unitary4 acc = Unitary4::Identity();
  for (auto [t, f] : detail::b2_blocks(theta)) {
    Unitary4 v = u_zz(t * (1.0 + eps_j));
    if (f != 0.0) {
      Unitary4 r = local(1, f, 0.0);
      v = r.adjoint() * v * r;
    }
    acc = v * acc;
  }
  return acc;
}

// b2j with each conjugating rotation realized by a B2 sequence of
// amplitude-deformed pulses: R1(phi,0) -> B2(phi,0), R1(phi,0)^dag -> B2(phi,pi).
inline Unitary4 b2wj(double theta, double eps_j, double eps_a) {
  Unitary4 acc = Unitary4::Identity();
  for (auto [t, f] : detail::b2_blocks(theta)) {
    Unitary4 v = u_zz(t * (1.0 + eps_j));
    if (f != 0.0) v = detail::b2_local(f, pi, eps_a) * v * detail::b2_local(f, 0.0, eps_a);
    acc = v * acc;
  }
  return acc;
}

// Single Ising rotation cal_r(theta, phi) with B2-compensated conjugations
// around a bare, uncompensated coupling block.
inline Unitary4 b2w(double theta, double phi, double eps_j, double eps_a) {
  detail::require_theta(phi, 2.0 * two_pi, "b2w");
  Unitary4 v = u_zz(theta * (1.0 + eps_j));
  if (phi == 0.0) return v;
  return detail::b2_local(phi, pi, eps_a) * v * detail::b2_local(phi, 0.0, eps_a);
}

// Uncompensated Ising rotation with bare amplitude-deformed conjugations.
inline Unitary4 bare_ising(double theta, double phi, double eps_j, double eps_a) {
  Unitary4 v = u_zz(theta * (1.0 + eps_j));
  if (phi == 0.0) return v;
  return local(1, phi * (1.0 + eps_a), pi) * v * local(1, phi * (1.0 + eps_a), 0.0);
}

// Largest coefficient of [A, B] outside the allowed index set, for
// A, B in the product basis.
inline double bracket_leak(int i, int j, const std::vector<int>& allowed) {
  const auto& b = product_basis();
  Unitary4 c = b[i].matrix * b[j].matrix - b[j].matrix * b[i].matrix;
  Eigen::VectorXd k = basis_coeffs(cplx(0, -1) * c);
  double leak = 0.0;
  for (int n = 0; n < k.size(); ++n)
    if (std::find(allowed.begin(), allowed.end(), n) == allowed.end()) leak = std::max(leak, std::abs(k[n]));
  return leak;
}

// Local (k) and non-local (m) index sets of the Cartan split.
inline std::vector<int> cartan_k() {
  std::vector<int> out;
  const auto& b = product_basis();
  for (size_t i = 0; i < b.size(); ++i)
    if (b[i].mu == 0 || b[i].nu == 0) out.push_back(static_cast<int>(i));
  return out;
}
inline std::vector<int> cartan_m() {
  std::vector<int> out;
  const auto& b = product_basis();
  for (size_t i = 0; i < b.size(); ++i)
    if (b[i].mu != 0 && b[i].nu != 0) out.push_back(static_cast<int>(i));
  return out;
}

}  // namespace pulses

#endif
