#pragma once

namespace footsim {

// Parameters of a univariate normal.  `std` of zero is legal and means a
// point mass; sampling then returns the mean exactly.
struct NormalSpec {
  double mean = 0.0;
  double std = 0.0;

  bool operator==(const NormalSpec&) const = default;
};

}  // namespace footsim
