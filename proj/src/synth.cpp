#include "ctvrpca/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "ctvrpca/errors.hpp"

namespace ctvrpca {

void SyntheticSpec::validate() const {
  if (h <= 0 || w <= 0 || s <= 0) {
    throw ArgumentError("synthetic extents must be positive");
  }
  if (r < 1 || r > h * w || r > s) {
    throw ArgumentError("rank r=" + std::to_string(r) +
                        " must lie in [1, min(hw, s)]");
  }
  if (!(rho_s >= 0.0 && rho_s < 1.0)) {
    throw ArgumentError("rho_s must lie in [0, 1)");
  }
  if (!(gaussian_sigma >= 0.0) || !std::isfinite(gaussian_sigma)) {
    throw ArgumentError("gaussian_sigma must be finite and nonnegative");
  }
  if (smoother_window < 1 || smoother_window % 2 == 0) {
    throw ArgumentError("smoother_window must be a positive odd integer");
  }
}

std::vector<Index> sample_without_replacement(Prng& rng, Index n, Index count) {
  if (count < 0 || count > n) {
    throw ArgumentError("cannot draw " + std::to_string(count) +
                        " distinct values from " + std::to_string(n));
  }
  std::vector<Index> pool(static_cast<std::size_t>(n));
  std::iota(pool.begin(), pool.end(), Index{0});
  for (Index t = 0; t < count; ++t) {
    const auto pick =
        t + static_cast<Index>(rng.below(static_cast<std::uint64_t>(n - t)));
    std::swap(pool[static_cast<std::size_t>(t)],
              pool[static_cast<std::size_t>(pick)]);
  }
  pool.resize(static_cast<std::size_t>(count));
  return pool;
}

Vector moving_average(const Vector& v, Index window) {
  if (window < 1 || window % 2 == 0) {
    throw ArgumentError("moving average window must be a positive odd integer");
  }
  const Index n = v.size();
  const Index half = window / 2;
  Vector out(n);
  for (Index c = 0; c < n; ++c) {
    double acc = 0.0;
    for (Index o = -half; o <= half; ++o) {
      acc += v(std::clamp(c + o, Index{0}, n - 1));
    }
    out(c) = acc / static_cast<double>(window);
  }
  return out;
}

SyntheticInstance generate(const SyntheticSpec& spec) {
  spec.validate();
  const Dims d = spec.dims();
  const Index n1 = d.pixels();
  const Index n2 = d.s;
  const Index r = spec.r;
  Prng rng(spec.seed);

  // Voronoi partition of the pixel grid.
  const std::vector<Index> seeds = sample_without_replacement(rng, n1, r);
  std::vector<Index> region(static_cast<std::size_t>(n1));
  for (Index p = 0; p < n1; ++p) {
    const Index i = p % d.h;
    const Index j = p / d.h;
    Index best = 0;
    Index best_dist = -1;
    for (Index t = 0; t < r; ++t) {
      const Index si = seeds[static_cast<std::size_t>(t)] % d.h;
      const Index sj = seeds[static_cast<std::size_t>(t)] / d.h;
      const Index dist = (i - si) * (i - si) + (j - sj) * (j - sj);
      if (best_dist < 0 || dist < best_dist) {
        best = t;
        best_dist = dist;
      }
    }
    region[static_cast<std::size_t>(p)] = best;
  }

  const double coef_sd = 1.0 / std::sqrt(static_cast<double>(n1));
  Matrix u(n1, r);
  if (spec.piecewise_regions) {
    Matrix coef(r, r);
    for (Index t = 0; t < r; ++t) {
      for (Index c = 0; c < r; ++c) coef(t, c) = coef_sd * rng.normal();
    }
    for (Index p = 0; p < n1; ++p) {
      u.row(p) = coef.row(region[static_cast<std::size_t>(p)]);
    }
  } else {
    for (Index p = 0; p < n1; ++p) {
      for (Index c = 0; c < r; ++c) u(p, c) = coef_sd * rng.normal();
    }
  }

  Matrix v(r, n2);
  for (Index t = 0; t < r; ++t) {
    Vector row(n2);
    for (Index c = 0; c < n2; ++c) row(c) = rng.normal();
    v.row(t) = moving_average(row, spec.smoother_window).transpose();
  }

  Matrix x0 = u * v;
  for (Index c = 0; c < n2; ++c) {
    const double lo = x0.col(c).minCoeff();
    const double hi = x0.col(c).maxCoeff();
    if (hi > lo) {
      x0.col(c) = (x0.col(c).array() - lo) / (hi - lo);
    } else {
      x0.col(c).setZero();
    }
  }

  const auto count = static_cast<Index>(
      std::llround(spec.rho_s * static_cast<double>(n1 * n2)));
  std::vector<Index> support = sample_without_replacement(rng, n1 * n2, count);
  Matrix s0 = Matrix::Zero(n1, n2);
  for (Index idx : support) {
    s0.data()[idx] = rng.uniform() < 0.5 ? -1.0 : 1.0;
  }
  std::sort(support.begin(), support.end());

  Matrix m = x0 + s0;
  if (spec.gaussian_sigma > 0.0) {
    for (Index p = 0; p < m.size(); ++p) {
      m.data()[p] += spec.gaussian_sigma * rng.normal();
    }
  }

  SyntheticInstance inst;
  inst.spec = spec;
  inst.x0 = UnfoldedMatrix(d, std::move(x0));
  inst.s0 = UnfoldedMatrix(d, std::move(s0));
  inst.m = UnfoldedMatrix(d, std::move(m));
  inst.support = std::move(support);
  inst.region = std::move(region);
  inst.true_rank_upper = std::min({r + 1, n1, n2});
  return inst;
}

}  // namespace ctvrpca
