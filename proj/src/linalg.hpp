#pragma once

// Internal SVD entry points. Every SVD in the library goes through here so
// the instrumentation counters stay exact.

#include <Eigen/SVD>

#include "ctvrpca/errors.hpp"
#include "ctvrpca/instrumentation.hpp"
#include "ctvrpca/tensor.hpp"

namespace ctvrpca::detail {

struct ThinSvd {
  Matrix u;
  Vector sigma;
  Matrix v;
};

inline void require_finite(const Matrix& x, const char* what) {
  if (!x.allFinite()) {
    throw NumericalError(std::string(what) + ": non-finite input to SVD");
  }
}

inline ThinSvd thin_svd(const Matrix& x) {
  require_finite(x, "thin_svd");
  ++thread_op_counts().svd;
  Eigen::BDCSVD<Matrix> svd(x, Eigen::ComputeThinU | Eigen::ComputeThinV);
  if (svd.info() != Eigen::Success || !svd.singularValues().allFinite()) {
    throw NumericalError("thin_svd: SVD did not converge");
  }
  return {svd.matrixU(), svd.singularValues(), svd.matrixV()};
}

inline Vector svd_values(const Matrix& x) {
  require_finite(x, "singular_values");
  ++thread_op_counts().svd;
  Eigen::BDCSVD<Matrix> svd(x);
  if (svd.info() != Eigen::Success || !svd.singularValues().allFinite()) {
    throw NumericalError("singular_values: SVD did not converge");
  }
  return svd.singularValues();
}

}  // namespace ctvrpca::detail
