#pragma once

#include "hominv/numerics.hpp"

namespace hominv {

// x' = A x + B u + D w  with admissible disturbances w' Q w <= 1.
struct LinearPlant {
  Mat A;
  Mat B;
  Mat D;
  Mat Q;

  Eigen::Index n() const { return A.rows(); }
  Eigen::Index m() const { return B.cols(); }
  Eigen::Index p() const { return D.cols(); }

  /// Throws kDimension / kInput / kPrecondition (Q not positive definite).
  void validate() const;
};

}  // namespace hominv
