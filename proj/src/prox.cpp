#include "ctvrpca/prox.hpp"

#include <cmath>
#include <string>

#include "ctvrpca/errors.hpp"
#include "linalg.hpp"

namespace ctvrpca {

namespace {

void check_tau(double tau, const char* who) {
  if (!(tau >= 0.0) || !std::isfinite(tau)) {
    throw ArgumentError(std::string(who) +
                        ": threshold must be finite and nonnegative");
  }
}

}  // namespace

Matrix soft_threshold(const Matrix& x, double tau) {
  check_tau(tau, "soft_threshold");
  return x.unaryExpr([tau](double v) {
    const double mag = std::abs(v) - tau;
    if (mag <= 0.0) return 0.0;
    return v > 0.0 ? mag : -mag;
  });
}

UnfoldedMatrix soft_threshold(const UnfoldedMatrix& x, double tau) {
  Matrix y = soft_threshold(x.values(), tau);
  if (x.dims()) return UnfoldedMatrix(*x.dims(), std::move(y));
  return UnfoldedMatrix(std::move(y));
}

SvtResult svt(const Matrix& x, double tau) {
  check_tau(tau, "svt");
  detail::ThinSvd svd = detail::thin_svd(x);
  Vector shrunk = (svd.sigma.array() - tau).cwiseMax(0.0).matrix();
  const Index rank = (shrunk.array() > 0.0).count();
  // Singular values are sorted, so the surviving ones are a leading block.
  Matrix value = svd.u.leftCols(rank) * shrunk.head(rank).asDiagonal() *
                 svd.v.leftCols(rank).transpose();
  if (rank == 0) value = Matrix::Zero(x.rows(), x.cols());
  return {UnfoldedMatrix(std::move(value)), rank, std::move(shrunk)};
}

SvtResult svt(const UnfoldedMatrix& x, double tau) {
  SvtResult r = svt(x.values(), tau);
  if (x.dims()) r.value = UnfoldedMatrix(*x.dims(), std::move(r.value.values()));
  return r;
}

}  // namespace ctvrpca
