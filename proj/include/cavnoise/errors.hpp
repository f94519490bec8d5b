#pragma once

#include <stdexcept>
#include <string>

namespace cavnoise {

/// Out-of-range or inconsistent input (mirror reflectivities, noise powers, grids).
class InvalidParameter : public std::invalid_argument {
 public:
  explicit InvalidParameter(const std::string& what) : std::invalid_argument(what) {}
};

/// Base for failures that arise while evaluating otherwise valid inputs.
class NumericalFailure : public std::runtime_error {
 public:
  explicit NumericalFailure(const std::string& what) : std::runtime_error(what) {}
};

/// R1*R2 too close to 1, or a round-trip denominator that vanishes.
class DegenerateCavity : public NumericalFailure {
 public:
  explicit DegenerateCavity(const std::string& what) : NumericalFailure(what) {}
};

/// The reflected carrier vanishes, so its phase (the local oscillator) is undefined.
class CarrierExtinguished : public NumericalFailure {
 public:
  explicit CarrierExtinguished(const std::string& what) : NumericalFailure(what) {}
};

}  // namespace cavnoise
