#pragma once

#include <stdexcept>
#include <string>

namespace catalyx {

/// Thrown when a concentration that carries a negative exponent in a surface
/// constraint is at or below the positivity floor. Carries enough context to
/// map the failure onto the degeneration branch of the run-status trichotomy.
class DegenerateConcentration : public std::runtime_error {
public:
  DegenerateConcentration(int species, int location, double value)
      : std::runtime_error("degenerate concentration: species " + std::to_string(species) +
                           " at location " + std::to_string(location) + " has value " +
                           std::to_string(value)),
        species_(species),
        location_(location),
        value_(value) {}

  int species() const { return species_; }
  int location() const { return location_; }
  double value() const { return value_; }

private:
  int species_;
  int location_;
  double value_;
};

class ShapeMismatch : public std::invalid_argument {
public:
  explicit ShapeMismatch(const std::string& what) : std::invalid_argument(what) {}
};

}  // namespace catalyx
