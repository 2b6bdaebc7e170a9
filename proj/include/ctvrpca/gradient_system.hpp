#pragma once

// Exact solve of (mu I + mu sum_n D_n^T D_n) X = B for the periodic forward
// differences D_n. The operator is block circulant, so the 3D DFT
// diagonalizes it: X = F^-1( F(B) / (mu (1 + Tx)) ) with
// Tx = sum_n |F(d_n)|^2.

#include <array>
#include <complex>
#include <memory>
#include <vector>

#include "ctvrpca/tensor.hpp"

namespace ctvrpca {

namespace detail {
struct Fft3d;
}

/// Complex array with the Tensor3 index layout.
struct ComplexTensor3 {
  Dims dims;
  std::vector<std::complex<double>> data;

  std::complex<double> operator()(Index i, Index j, Index k) const {
    return data[static_cast<std::size_t>(Tensor3::offset(dims, i, j, k))];
  }
};

/// Transfer functions of the three difference kernels.
///
/// d_n is the convolution kernel of the forward difference along mode n:
/// -1 at the origin and +1 at the unit shift -e_n (wrapped to the last
/// index), so F(D_n x) = dhat[n] .* F(x) and F(D_n^T y) = conj(dhat[n]) .* F(y).
struct KernelSpectra {
  Dims dims;
  /// sum_n |dhat[n]|^2; zero at the DC bin.
  Tensor3 tx;
  std::array<ComplexTensor3, 3> dhat;
};

KernelSpectra build_spectra(Index h, Index w, Index s);
KernelSpectra build_spectra(const Dims& dims);

/// Frequency-domain application of D_mode (or its adjoint). Agrees with
/// DiffOperator to rounding; used to pin the kernel orientation.
Matrix spectral_grad(const KernelSpectra& spectra, Mode mode, const Matrix& x);
Matrix spectral_grad_adjoint(const KernelSpectra& spectra, Mode mode,
                             const Matrix& y);

/// Owns the spectra plus FFT plans and scratch buffers for one tensor shape.
/// Not safe for concurrent use of one instance; create one per thread.
class GradientSystemSolver {
 public:
  explicit GradientSystemSolver(KernelSpectra spectra);
  explicit GradientSystemSolver(const Dims& dims);
  ~GradientSystemSolver();
  GradientSystemSolver(GradientSystemSolver&&) noexcept;
  GradientSystemSolver& operator=(GradientSystemSolver&&) noexcept;

  const KernelSpectra& spectra() const { return spectra_; }

  /// Solves (mu I + mu sum_n D_n^T D_n) X = rhs with exactly one forward and
  /// one inverse 3D FFT.
  Matrix solve_assembled(const Matrix& rhs, double mu);

  /// The ADMM X-update: the right-hand side is
  ///   mu (M - S) + Gamma_4 + sum_n D_n^T (mu G_n - Gamma_n).
  /// The gradient terms are folded in the spatial domain via the adjoint
  /// difference, which by linearity equals sum_n conj(dhat_n) .* F(mu G_n -
  /// Gamma_n) and keeps the transform count at one pair per call.
  Matrix solve(const Matrix& m_minus_s, const std::array<const Matrix*, 3>& g,
               const std::array<const Matrix*, 4>& gamma, double mu);

  /// max |imag| / max(||X||_inf, tiny) observed in the most recent solve
  /// before the imaginary part was dropped.
  double last_imag_residue() const { return last_imag_residue_; }

 private:
  KernelSpectra spectra_;
  std::unique_ptr<detail::Fft3d> fft_;
  double last_imag_residue_ = 0.0;
};

/// One-shot form of GradientSystemSolver::solve. `gamma` is ordered
/// Gamma_1..Gamma_3, Gamma_4. Throws ArgumentError when mu <= 0 and
/// ShapeError when an operand does not match the spectra's extents.
UnfoldedMatrix solve_x(const KernelSpectra& spectra,
                       const UnfoldedMatrix& m_minus_s,
                       const std::array<UnfoldedMatrix, 3>& g,
                       const std::array<UnfoldedMatrix, 4>& gamma, double mu);

}  // namespace ctvrpca
