#ifndef PULSES_PULSE_HPP
#define PULSES_PULSE_HPP

#include <string>
#include <utility>
#include <vector>

#include "pulses/linalg.hpp"

namespace pulses {

enum class Axis { planar, z, lifted };

// Square pulse: rotation by theta about an axis with azimuth phi and
// elevation out of the xy-plane (lifted axes only).
struct Pulse {
  double theta = 0.0;
  double phi = 0.0;
  Axis axis = Axis::planar;
  double elevation = 0.0;
  // Error-free pulse; used where a construction assumes perfect controls.
  bool exact = false;

  static Pulse planar(double theta, double phi) { return {theta, phi, Axis::planar, 0.0, false}; }
  static Pulse about_z(double theta) { return {theta, 0.0, Axis::z, 0.0, false}; }

  Vec3 unit_axis() const {
    switch (axis) {
      case Axis::planar: return {std::cos(phi), std::sin(phi), 0.0};
      case Axis::z: return {0.0, 0.0, 1.0};
      case Axis::lifted:
        return {std::cos(elevation) * std::cos(phi), std::cos(elevation) * std::sin(phi),
                std::sin(elevation)};
    }
    return Vec3::Zero();
  }
  Vec3 generator() const { return theta * unit_axis(); }
  Unitary2 ideal() const {
    if (axis == Axis::planar) return rotation(theta, phi);
    return exp_su2(generator());
  }
};

// Pulses are listed in application order; the propagator is the
// left-ordered product U_m ... U_1.
struct Sequence {
  std::vector<Pulse> pulses;
  Unitary2 target = Unitary2::Identity();
  std::string family;
  int order_claim = 0;
  // Error models the sequence compensates, with the order for each.
  std::vector<std::pair<std::string, int>> declared;

  int claim_for(const std::string& model) const {
    for (const auto& [m, n] : declared)
      if (m == model) return n;
    return 0;
  }

  Unitary2 ideal_product() const {
    Spin acc;
    int k = 0;
    for (const auto& p : pulses) {
      acc = spin_exp(p.generator()) * acc;
      if (++k % renormalize_every == 0) acc = acc.normalized();
    }
    return acc.matrix();
  }
  // Pulses whose axis leaves the xy-plane.
  bool planar() const {
    for (const auto& p : pulses)
      if (p.axis != Axis::planar && p.theta != 0.0) return false;
    return true;
  }
};

inline Sequence concat(const Sequence& first, const Sequence& second) {
  Sequence s = first;
  s.pulses.insert(s.pulses.end(), second.pulses.begin(), second.pulses.end());
  return s;
}

}  // namespace pulses

#endif
