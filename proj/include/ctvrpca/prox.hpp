#pragma once

#include "ctvrpca/tensor.hpp"

namespace ctvrpca {

/// Entrywise sign(x) * max(|x| - tau, 0): the prox of tau * ||.||_1.
/// Throws ArgumentError for negative tau.
Matrix soft_threshold(const Matrix& x, double tau);
UnfoldedMatrix soft_threshold(const UnfoldedMatrix& x, double tau);

struct SvtResult {
  UnfoldedMatrix value;
  /// Number of singular values strictly above the threshold.
  Index effective_rank = 0;
  /// Shrunk singular values max(sigma - tau, 0), decreasing. Their sum is
  /// the nuclear norm of `value`.
  Vector shrunk_singular_values;
};

/// Singular value thresholding, the prox of tau * ||.||_*. Singular values
/// equal to tau shrink to zero. Always one economy SVD.
SvtResult svt(const UnfoldedMatrix& x, double tau);
SvtResult svt(const Matrix& x, double tau);

}  // namespace ctvrpca
