#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <vector>

#include "toepspec/complex_matrix.hpp"

namespace toepspec {

enum class FftDirection { forward, inverse };

/// One-dimensional DFT of arbitrary length.
///
/// Convention: forward is X_k = sum_t x_t exp(-2 pi i t k / N) (unscaled);
/// inverse is x_t = (1/N) sum_k X_k exp(+2 pi i t k / N). Lengths whose prime
/// factors are all small use a mixed-radix recursion; anything with a large
/// prime factor goes through Bluestein's chirp-z reformulation on a
/// power-of-two grid.
class FftPlan {
public:
  explicit FftPlan(std::size_t n);
  ~FftPlan();
  FftPlan(FftPlan&&) noexcept;
  FftPlan& operator=(FftPlan&&) noexcept;

  std::size_t size() const noexcept { return n_; }

  /// In-place transform of a contiguous sequence of length size().
  void execute(std::span<cplx> data, FftDirection dir) const;

  /// Same, on a strided sequence (data[0], data[stride], ...). Uses scratch.
  void execute_strided(cplx* data, std::size_t stride, FftDirection dir,
                       std::vector<cplx>& scratch) const;

private:
  void mixed_radix(const cplx* in, std::size_t in_stride, cplx* out, std::size_t n,
                   std::size_t factor_idx, bool inverse, cplx* tmp) const;
  void unscaled(std::span<cplx> data, bool inverse) const;

  std::size_t n_;
  std::vector<std::size_t> factors_;
  std::vector<cplx> twiddle_;  // exp(-2 pi i j / n)
  struct Bluestein;
  std::unique_ptr<Bluestein> bluestein_;
};

/// Row-major k-dimensional transform (last index fastest).
class MultiFftPlan {
public:
  explicit MultiFftPlan(std::vector<std::size_t> sizes);

  const std::vector<std::size_t>& sizes() const noexcept { return sizes_; }
  std::size_t total() const noexcept { return total_; }
  void execute(std::span<cplx> data, FftDirection dir) const;

private:
  std::vector<std::size_t> sizes_;
  std::size_t total_;
  std::vector<FftPlan> plans_;
};

/// Convenience wrapper: transform of a k-dimensional grid stored row-major.
/// Throws InvalidArgument on a zero size or a length mismatch.
CVector fft_multi(std::span<const cplx> data, std::span<const std::size_t> sizes,
                  FftDirection dir);

}  // namespace toepspec
