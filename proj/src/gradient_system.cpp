#include "ctvrpca/gradient_system.hpp"

#include <fftw3.h>

#include <cmath>
#include <limits>
#include <mutex>
#include <string>

#include "ctvrpca/errors.hpp"
#include "ctvrpca/instrumentation.hpp"

namespace ctvrpca {

namespace {

// The FFTW planner is not reentrant; execution on distinct plans is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

}  // namespace

namespace detail {

// In-place 3D complex transform over one h x w x s buffer. FFTW is
// row-major, so the extents are passed slowest-first: (s, w, h).
struct Fft3d {
  explicit Fft3d(const Dims& d) : size(d.size()) {
    buf = fftw_alloc_complex(static_cast<std::size_t>(size));
    if (buf == nullptr) throw std::bad_alloc();
    std::lock_guard lock(planner_mutex());
    forward_plan = fftw_plan_dft_3d(static_cast<int>(d.s), static_cast<int>(d.w),
                                    static_cast<int>(d.h), buf, buf,
                                    FFTW_FORWARD, FFTW_ESTIMATE);
    inverse_plan = fftw_plan_dft_3d(static_cast<int>(d.s), static_cast<int>(d.w),
                                    static_cast<int>(d.h), buf, buf,
                                    FFTW_BACKWARD, FFTW_ESTIMATE);
    if (forward_plan == nullptr || inverse_plan == nullptr) {
      release();
      throw NumericalError("FFTW could not plan a 3D transform");
    }
  }
  ~Fft3d() { release(); }
  Fft3d(const Fft3d&) = delete;
  Fft3d& operator=(const Fft3d&) = delete;

  void release() {
    std::lock_guard lock(planner_mutex());
    if (forward_plan != nullptr) fftw_destroy_plan(forward_plan);
    if (inverse_plan != nullptr) fftw_destroy_plan(inverse_plan);
    forward_plan = inverse_plan = nullptr;
    if (buf != nullptr) fftw_free(buf);
    buf = nullptr;
  }

  std::complex<double>* data() {
    return reinterpret_cast<std::complex<double>*>(buf);
  }

  void load_real(const double* src) {
    std::complex<double>* z = data();
    for (Index p = 0; p < size; ++p) z[p] = {src[p], 0.0};
  }

  void forward() {
    ++thread_op_counts().fft_forward;
    fftw_execute(forward_plan);
  }
  // Unnormalized; callers divide by `size`.
  void inverse() {
    ++thread_op_counts().fft_inverse;
    fftw_execute(inverse_plan);
  }

  Index size;
  fftw_complex* buf = nullptr;
  fftw_plan forward_plan = nullptr;
  fftw_plan inverse_plan = nullptr;
};

}  // namespace detail

KernelSpectra build_spectra(Index h, Index w, Index s) {
  return build_spectra(Dims{h, w, s});
}

KernelSpectra build_spectra(const Dims& dims) {
  validate(dims);
  detail::Fft3d fft(dims);
  std::vector<double> tx(static_cast<std::size_t>(dims.size()), 0.0);
  std::array<ComplexTensor3, 3> dhat;
  for (Mode m : kModes) {
    std::vector<double> kernel(static_cast<std::size_t>(dims.size()), 0.0);
    // +1 at -e_m, wrapped; when the extent is 1 it lands on the origin and
    // the kernel vanishes, matching the identically-zero difference.
    Index i = 0, j = 0, k = 0;
    if (m == Mode::Height) i = dims.h - 1;
    if (m == Mode::Width) j = dims.w - 1;
    if (m == Mode::Band) k = dims.s - 1;
    kernel[static_cast<std::size_t>(Tensor3::offset(dims, i, j, k))] += 1.0;
    kernel[0] -= 1.0;
    fft.load_real(kernel.data());
    fft.forward();
    auto& out = dhat[static_cast<std::size_t>(m)];
    out.dims = dims;
    out.data.assign(fft.data(), fft.data() + dims.size());
    for (std::size_t p = 0; p < tx.size(); ++p) tx[p] += std::norm(out.data[p]);
  }
  return KernelSpectra{dims, Tensor3(dims, std::move(tx)), std::move(dhat)};
}

namespace {

void check_matrix(const Dims& d, const Matrix& x, const char* what) {
  if (x.rows() != d.pixels() || x.cols() != d.s) {
    throw ShapeError(std::string(what) + " is " + std::to_string(x.rows()) +
                     "x" + std::to_string(x.cols()) + ", expected " +
                     std::to_string(d.pixels()) + "x" + std::to_string(d.s));
  }
}

Matrix spectral_apply(const KernelSpectra& spectra, Mode mode, const Matrix& x,
                      bool adjoint) {
  const Dims& d = spectra.dims;
  check_matrix(d, x, "operand");
  detail::Fft3d fft(d);
  fft.load_real(x.data());
  fft.forward();
  const auto& kernel = spectra.dhat[static_cast<std::size_t>(mode)].data;
  std::complex<double>* z = fft.data();
  for (Index p = 0; p < d.size(); ++p) {
    z[p] *= adjoint ? std::conj(kernel[static_cast<std::size_t>(p)])
                    : kernel[static_cast<std::size_t>(p)];
  }
  fft.inverse();
  Matrix out(d.pixels(), d.s);
  const double scale = 1.0 / static_cast<double>(d.size());
  for (Index p = 0; p < d.size(); ++p) out.data()[p] = z[p].real() * scale;
  return out;
}

}  // namespace

Matrix spectral_grad(const KernelSpectra& spectra, Mode mode, const Matrix& x) {
  return spectral_apply(spectra, mode, x, false);
}

Matrix spectral_grad_adjoint(const KernelSpectra& spectra, Mode mode,
                             const Matrix& y) {
  return spectral_apply(spectra, mode, y, true);
}

GradientSystemSolver::GradientSystemSolver(KernelSpectra spectra)
    : spectra_(std::move(spectra)), fft_(std::make_unique<detail::Fft3d>(spectra_.dims)) {}

GradientSystemSolver::GradientSystemSolver(const Dims& dims)
    : GradientSystemSolver(build_spectra(dims)) {}

GradientSystemSolver::~GradientSystemSolver() = default;
GradientSystemSolver::GradientSystemSolver(GradientSystemSolver&&) noexcept =
    default;
GradientSystemSolver& GradientSystemSolver::operator=(
    GradientSystemSolver&&) noexcept = default;

Matrix GradientSystemSolver::solve_assembled(const Matrix& rhs, double mu) {
  if (!(mu > 0.0) || !std::isfinite(mu)) {
    throw ArgumentError("penalty mu must be positive and finite");
  }
  const Dims& d = spectra_.dims;
  check_matrix(d, rhs, "right-hand side");
  fft_->load_real(rhs.data());
  fft_->forward();
  std::complex<double>* z = fft_->data();
  const auto tx = spectra_.tx.data();
  for (Index p = 0; p < d.size(); ++p) {
    z[p] /= mu * (1.0 + tx[static_cast<std::size_t>(p)]);
  }
  fft_->inverse();
  Matrix x(d.pixels(), d.s);
  const double scale = 1.0 / static_cast<double>(d.size());
  double max_imag = 0.0;
  double max_real = 0.0;
  for (Index p = 0; p < d.size(); ++p) {
    const double re = z[p].real() * scale;
    x.data()[p] = re;
    max_real = std::max(max_real, std::abs(re));
    max_imag = std::max(max_imag, std::abs(z[p].imag() * scale));
  }
  last_imag_residue_ =
      max_imag / std::max(max_real, std::numeric_limits<double>::min());
  if (!x.allFinite()) throw NumericalError("X-update produced non-finite values");
  return x;
}

Matrix GradientSystemSolver::solve(const Matrix& m_minus_s,
                                   const std::array<const Matrix*, 3>& g,
                                   const std::array<const Matrix*, 4>& gamma,
                                   double mu) {
  if (!(mu > 0.0) || !std::isfinite(mu)) {
    throw ArgumentError("penalty mu must be positive and finite");
  }
  const Dims& d = spectra_.dims;
  check_matrix(d, m_minus_s, "M - S");
  check_matrix(d, *gamma[3], "Gamma_4");
  Matrix rhs = mu * m_minus_s + *gamma[3];
  Matrix combo;
  Matrix back;
  for (Mode m : kModes) {
    const auto n = static_cast<std::size_t>(m);
    check_matrix(d, *g[n], "G");
    check_matrix(d, *gamma[n], "Gamma");
    combo = mu * *g[n] - *gamma[n];
    DiffOperator(m, d).apply_adjoint(combo, back);
    rhs += back;
  }
  return solve_assembled(rhs, mu);
}

UnfoldedMatrix solve_x(const KernelSpectra& spectra,
                       const UnfoldedMatrix& m_minus_s,
                       const std::array<UnfoldedMatrix, 3>& g,
                       const std::array<UnfoldedMatrix, 4>& gamma, double mu) {
  if (!(mu > 0.0) || !std::isfinite(mu)) {
    throw ArgumentError("penalty mu must be positive and finite");
  }
  auto same = [&](const UnfoldedMatrix& a, const char* what) {
    if (a.dims() && !(*a.dims() == spectra.dims)) {
      throw ShapeError(std::string(what) + " extents differ from the spectra");
    }
  };
  same(m_minus_s, "M - S");
  for (const auto& x : g) same(x, "G");
  for (const auto& x : gamma) same(x, "Gamma");
  GradientSystemSolver solver(spectra);
  Matrix x = solver.solve(m_minus_s.values(),
                          {&g[0].values(), &g[1].values(), &g[2].values()},
                          {&gamma[0].values(), &gamma[1].values(),
                           &gamma[2].values(), &gamma[3].values()},
                          mu);
  return UnfoldedMatrix(spectra.dims, std::move(x));
}

}  // namespace ctvrpca
