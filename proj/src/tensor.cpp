#include "ctvrpca/tensor.hpp"

#include <cmath>
#include <string>

#include "ctvrpca/errors.hpp"
#include "linalg.hpp"

namespace ctvrpca {

namespace {

std::string describe(const Dims& d) {
  return std::to_string(d.h) + "x" + std::to_string(d.w) + "x" +
         std::to_string(d.s);
}

}  // namespace

void validate(const Dims& dims) {
  if (dims.h <= 0 || dims.w <= 0 || dims.s <= 0) {
    throw ShapeError("tensor extents must be positive, got " + describe(dims));
  }
}

Tensor3::Tensor3(Dims dims) : dims_(dims) {
  validate(dims_);
  data_.assign(static_cast<std::size_t>(dims_.size()), 0.0);
}

Tensor3::Tensor3(Dims dims, std::vector<double> data)
    : dims_(dims), data_(std::move(data)) {
  validate(dims_);
  if (static_cast<Index>(data_.size()) != dims_.size()) {
    throw ShapeError("tensor buffer holds " + std::to_string(data_.size()) +
                     " values, " + describe(dims_) + " needs " +
                     std::to_string(dims_.size()));
  }
  for (double v : data_) {
    if (!std::isfinite(v)) throw ArgumentError("tensor entries must be finite");
  }
}

UnfoldedMatrix::UnfoldedMatrix(Dims dims)
    : dims_(dims), values_(Matrix::Zero(dims.pixels(), dims.s)) {
  validate(dims);
}

UnfoldedMatrix::UnfoldedMatrix(Dims dims, Matrix values)
    : dims_(dims), values_(std::move(values)) {
  validate(dims);
  if (values_.rows() != dims.pixels() || values_.cols() != dims.s) {
    throw ShapeError("matrix is " + std::to_string(values_.rows()) + "x" +
                     std::to_string(values_.cols()) + ", tensor " +
                     describe(dims) + " unfolds to " +
                     std::to_string(dims.pixels()) + "x" +
                     std::to_string(dims.s));
  }
}

UnfoldedMatrix::UnfoldedMatrix(Matrix values) : values_(std::move(values)) {}

const Dims& UnfoldedMatrix::require_dims() const {
  if (!dims_) throw ShapeError("matrix carries no tensor extents");
  if (values_.rows() != dims_->pixels() || values_.cols() != dims_->s) {
    throw ShapeError("matrix shape no longer matches its tensor extents " +
                     describe(*dims_));
  }
  return *dims_;
}

UnfoldedMatrix unfold(const Tensor3& t) {
  const Dims& d = t.dims();
  Matrix m(d.pixels(), d.s);
  std::copy(t.data().begin(), t.data().end(), m.data());
  return UnfoldedMatrix(d, std::move(m));
}

Tensor3 fold(const UnfoldedMatrix& m) {
  const Dims& d = m.require_dims();
  const Matrix& v = m.values();
  return Tensor3(d, std::vector<double>(v.data(), v.data() + v.size()));
}

DiffOperator::DiffOperator(Mode mode, Dims dims) : mode_(mode), dims_(dims) {
  validate(dims_);
}

void DiffOperator::check(const Matrix& x) const {
  if (x.rows() != dims_.pixels() || x.cols() != dims_.s) {
    throw ShapeError("difference operator for " + describe(dims_) +
                     " applied to a " + std::to_string(x.rows()) + "x" +
                     std::to_string(x.cols()) + " matrix");
  }
}

Matrix DiffOperator::apply(const Matrix& x) const {
  Matrix out;
  apply(x, out);
  return out;
}

Matrix DiffOperator::apply_adjoint(const Matrix& y) const {
  Matrix out;
  apply_adjoint(y, out);
  return out;
}

// Both kernels compute out(p) = sign * (in(p + step) - in(p)) with the index
// wrapped inside the current tensor fibre; the adjoint of the forward
// difference is the negated backward difference.
namespace {

void periodic_difference(const Dims& d, Mode mode, bool forward,
                         const Matrix& in, Matrix& out) {
  out.resize(in.rows(), in.cols());
  const Index h = d.h;
  const Index w = d.w;
  const Index s = d.s;
  const Index n1 = d.pixels();
  switch (mode) {
    case Mode::Height:
      for (Index k = 0; k < s; ++k) {
        for (Index j = 0; j < w; ++j) {
          const double* src = in.data() + k * n1 + j * h;
          double* dst = out.data() + k * n1 + j * h;
          for (Index i = 0; i < h; ++i) {
            if (forward) {
              const Index next = (i + 1 == h) ? 0 : i + 1;
              dst[i] = src[next] - src[i];
            } else {
              const Index prev = (i == 0) ? h - 1 : i - 1;
              dst[i] = src[prev] - src[i];
            }
          }
        }
      }
      break;
    case Mode::Width:
      for (Index k = 0; k < s; ++k) {
        const double* src = in.data() + k * n1;
        double* dst = out.data() + k * n1;
        for (Index p = 0; p < n1; ++p) {
          const Index q = forward ? (p + h) % n1 : (p + n1 - h) % n1;
          dst[p] = src[q] - src[p];
        }
      }
      break;
    case Mode::Band:
      for (Index k = 0; k < s; ++k) {
        const Index other = forward ? (k + 1) % s : (k + s - 1) % s;
        out.col(k) = in.col(other) - in.col(k);
      }
      break;
  }
}

}  // namespace

void DiffOperator::apply(const Matrix& x, Matrix& out) const {
  check(x);
  periodic_difference(dims_, mode_, true, x, out);
}

void DiffOperator::apply_adjoint(const Matrix& y, Matrix& out) const {
  check(y);
  periodic_difference(dims_, mode_, false, y, out);
}

namespace {

const Dims& matching_dims(const DiffOperator& op, const UnfoldedMatrix& x) {
  const Dims& d = x.require_dims();
  if (!(d == op.dims())) {
    throw ShapeError("operand extents " + describe(d) +
                     " differ from operator extents " + describe(op.dims()));
  }
  return d;
}

}  // namespace

UnfoldedMatrix grad(const DiffOperator& op, const UnfoldedMatrix& x) {
  const Dims& d = matching_dims(op, x);
  return UnfoldedMatrix(d, op.apply(x.values()));
}

UnfoldedMatrix grad_adjoint(const DiffOperator& op, const UnfoldedMatrix& y) {
  const Dims& d = matching_dims(op, y);
  return UnfoldedMatrix(d, op.apply_adjoint(y.values()));
}

Vector singular_values(const Matrix& x) { return detail::svd_values(x); }

Index numerical_rank(const Matrix& x, double rel_tol) {
  const Vector sigma = singular_values(x);
  if (sigma.size() == 0 || sigma(0) == 0.0) return 0;
  const double cut = rel_tol * sigma(0);
  return (sigma.array() > cut).count();
}

double nuclear_norm(const Matrix& x) { return singular_values(x).sum(); }

double nuclear_norm(const UnfoldedMatrix& x) { return nuclear_norm(x.values()); }

double l1_norm(const Matrix& x) { return x.cwiseAbs().sum(); }

double l1_norm(const UnfoldedMatrix& x) { return l1_norm(x.values()); }

double tv3d_norm(const Tensor3& t) {
  const UnfoldedMatrix x = unfold(t);
  double total = 0.0;
  for (Mode m : kModes) {
    total += l1_norm(DiffOperator(m, t.dims()).apply(x.values()));
  }
  return total;
}

double ctv_norm(const UnfoldedMatrix& x, Mode mode) {
  const Dims& d = x.require_dims();
  return nuclear_norm(DiffOperator(mode, d).apply(x.values()));
}

double ctv3d_norm(const UnfoldedMatrix& x) {
  double total = 0.0;
  for (Mode m : kModes) total += ctv_norm(x, m);
  return total;
}

}  // namespace ctvrpca
