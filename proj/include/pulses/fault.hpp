#ifndef PULSES_FAULT_HPP
#define PULSES_FAULT_HPP

#include <stdexcept>
#include <string>

namespace pulses {

enum class Fault {
  dimension_mismatch,
  ambiguous_branch,
  unsupported_pulse,
  unsupported_retarget,
  out_of_range,
  extraction_failed,
  quadrature_failed,
  too_few_points,
  floor_dominated,
  incompatible_model,
  parse_error,
};

inline const char* fault_name(Fault f) {
  switch (f) {
    case Fault::dimension_mismatch: return "dimension-mismatch";
    case Fault::ambiguous_branch: return "ambiguous-branch";
    case Fault::unsupported_pulse: return "unsupported-pulse";
    case Fault::unsupported_retarget: return "unsupported-retarget";
    case Fault::out_of_range: return "out-of-range";
    case Fault::extraction_failed: return "extraction-failed";
    case Fault::quadrature_failed: return "quadrature-failed";
    case Fault::too_few_points: return "too-few-points";
    case Fault::floor_dominated: return "floor-dominated";
    case Fault::incompatible_model: return "incompatible-model";
    case Fault::parse_error: return "parse-error";
  }
  return "unknown";
}

// Every library error carries a machine-readable kind.
class Failure : public std::runtime_error {
 public:
  Failure(Fault f, const std::string& what)
      : std::runtime_error(std::string(fault_name(f)) + ": " + what), fault_(f) {}
  Fault fault() const noexcept { return fault_; }

 private:
  Fault fault_;
};

}  // namespace pulses

#endif
