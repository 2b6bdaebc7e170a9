#pragma once

#include <cstdint>
#include <vector>

#include "ctvrpca/prng.hpp"
#include "ctvrpca/tensor.hpp"

namespace ctvrpca {

struct SyntheticSpec {
  Index h = 20;
  Index w = 20;
  /// Number of bands, n2.
  Index s = 200;
  /// Target rank.
  Index r = 20;
  /// Fraction of corrupted entries, in [0, 1).
  double rho_s = 0.05;
  double gaussian_sigma = 0.0;
  std::uint64_t seed = 0;
  /// Width of the centered moving average applied to each row of V; odd.
  Index smoother_window = 5;
  /// When false every pixel draws its own coefficient vector instead of
  /// sharing one per Voronoi region (an unsmoothed control).
  bool piecewise_regions = true;

  Dims dims() const { return {h, w, s}; }
  /// Throws ArgumentError for degenerate extents, r outside [1, min(hw, s)],
  /// rho_s outside [0, 1), negative sigma or an even/zero window.
  void validate() const;
};

struct SyntheticInstance {
  SyntheticSpec spec;
  UnfoldedMatrix x0;
  UnfoldedMatrix s0;
  UnfoldedMatrix m;
  /// Corrupted entries as column-major linear indices into the hw x s
  /// matrix, ascending.
  std::vector<Index> support;
  /// Voronoi region of every pixel (row index p = j*h + i).
  std::vector<Index> region;
  /// r, plus one for the constant direction column normalization may add.
  Index true_rank_upper = 0;
};

/// Low-rank, locally smooth ground truth plus +-1 sparse corruption.
///
/// Draw order from one Prng(spec.seed): r seed pixels, r coefficient
/// vectors of N(0, 1/(hw)) entries (region-major), the r x s matrix V
/// (row-major), the support, its signs, then noise in column-major order.
/// Pixels join the nearest seed by squared Euclidean distance on (i, j);
/// ties go to the lower seed index. Each column of U V is min-max scaled to
/// [0, 1], constant columns map to 0.
SyntheticInstance generate(const SyntheticSpec& spec);

/// Partial Fisher-Yates: `count` distinct values from [0, n) in draw order.
std::vector<Index> sample_without_replacement(Prng& rng, Index n, Index count);

/// Centered moving average with replicate padding; `window` must be odd.
Vector moving_average(const Vector& v, Index window);

}  // namespace ctvrpca
