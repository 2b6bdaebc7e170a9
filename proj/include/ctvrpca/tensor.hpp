#pragma once

// Dense 3-way tensors, the mode-3 unfolding used by the solvers, periodic
// difference operators and the norms built on top of them.
//
// Layout: element (i, j, k) of an h x w x s tensor lives at offset
// (k * w + j) * h + i. The unfolded hw x s matrix is column-major, so its
// buffer is byte-for-byte the tensor buffer and row p = j * h + i.

#include <array>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace ctvrpca {

using Index = Eigen::Index;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

struct Dims {
  Index h = 0;
  Index w = 0;
  Index s = 0;

  Index pixels() const { return h * w; }
  Index size() const { return h * w * s; }
  friend bool operator==(const Dims&, const Dims&) = default;
};

/// Throws ShapeError unless every extent is positive.
void validate(const Dims& dims);

class Tensor3 {
 public:
  /// Zero tensor.
  explicit Tensor3(Dims dims);
  /// Takes ownership of `data`; its length must be h*w*s and all entries
  /// finite.
  Tensor3(Dims dims, std::vector<double> data);

  const Dims& dims() const { return dims_; }

  static Index offset(const Dims& d, Index i, Index j, Index k) {
    return (k * d.w + j) * d.h + i;
  }
  double operator()(Index i, Index j, Index k) const {
    return data_[offset(dims_, i, j, k)];
  }
  double& operator()(Index i, Index j, Index k) {
    return data_[offset(dims_, i, j, k)];
  }

  std::span<const double> data() const { return data_; }
  std::span<double> data() { return data_; }

  friend bool operator==(const Tensor3&, const Tensor3&) = default;

 private:
  Dims dims_;
  std::vector<double> data_;
};

/// hw x s matrix view of a Tensor3. The tensor extents travel with the
/// matrix so it can be folded back; a matrix built from raw values alone
/// has no extents and refuses to fold.
class UnfoldedMatrix {
 public:
  UnfoldedMatrix() = default;
  /// Zero matrix of shape hw x s.
  explicit UnfoldedMatrix(Dims dims);
  UnfoldedMatrix(Dims dims, Matrix values);
  /// No tensor provenance.
  explicit UnfoldedMatrix(Matrix values);

  const Matrix& values() const { return values_; }
  Matrix& values() { return values_; }
  const std::optional<Dims>& dims() const { return dims_; }
  /// Extents, or ShapeError when the matrix has no provenance.
  const Dims& require_dims() const;

  Index rows() const { return values_.rows(); }
  Index cols() const { return values_.cols(); }

 private:
  std::optional<Dims> dims_;
  Matrix values_;
};

UnfoldedMatrix unfold(const Tensor3& t);
Tensor3 fold(const UnfoldedMatrix& m);

/// Tensor mode a difference is taken along: Height is i (mode 1), Width is
/// j (mode 2), Band is k (mode 3).
enum class Mode { Height = 0, Width = 1, Band = 2 };
inline constexpr std::array<Mode, 3> kModes = {Mode::Height, Mode::Width,
                                               Mode::Band};
inline int mode_number(Mode m) { return static_cast<int>(m) + 1; }

/// Forward difference with periodic wrap along one mode:
///   (D x)(p) = x(p + e_mode) - x(p).
class DiffOperator {
 public:
  DiffOperator(Mode mode, Dims dims);

  Mode mode() const { return mode_; }
  const Dims& dims() const { return dims_; }

  /// Raw-matrix kernels; `x` must be hw x s for this operator's dims.
  Matrix apply(const Matrix& x) const;
  Matrix apply_adjoint(const Matrix& y) const;
  void apply(const Matrix& x, Matrix& out) const;
  void apply_adjoint(const Matrix& y, Matrix& out) const;

 private:
  void check(const Matrix& x) const;

  Mode mode_;
  Dims dims_;
};

UnfoldedMatrix grad(const DiffOperator& op, const UnfoldedMatrix& x);
UnfoldedMatrix grad_adjoint(const DiffOperator& op, const UnfoldedMatrix& y);

/// Singular values in decreasing order (one SVD).
Vector singular_values(const Matrix& x);
/// Count of singular values above rel_tol * sigma_1.
Index numerical_rank(const Matrix& x, double rel_tol = 1e-8);

double nuclear_norm(const Matrix& x);
double nuclear_norm(const UnfoldedMatrix& x);
double l1_norm(const Matrix& x);
double l1_norm(const UnfoldedMatrix& x);
/// Anisotropic 3D total variation: sum over modes of ||G_i||_1.
double tv3d_norm(const Tensor3& t);
/// Correlated total variation along one mode: ||G_mode||_*.
double ctv_norm(const UnfoldedMatrix& x, Mode mode);
/// Sum of ctv_norm over the three modes.
double ctv3d_norm(const UnfoldedMatrix& x);

}  // namespace ctvrpca
