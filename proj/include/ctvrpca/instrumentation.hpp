#pragma once

#include <cstdint>

namespace ctvrpca {

/// Counts of the expensive kernels executed on the calling thread.
struct OpCounts {
  std::uint64_t svd = 0;
  std::uint64_t fft_forward = 0;
  std::uint64_t fft_inverse = 0;

  friend OpCounts operator-(const OpCounts& a, const OpCounts& b) {
    return {a.svd - b.svd, a.fft_forward - b.fft_forward,
            a.fft_inverse - b.fft_inverse};
  }
  friend bool operator==(const OpCounts&, const OpCounts&) = default;
};

/// Per-thread counters; every SVD and 3D FFT in the library bumps these.
/// Thread-local so concurrent solver runs never observe each other.
OpCounts& thread_op_counts();

}  // namespace ctvrpca
