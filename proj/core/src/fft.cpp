#include "toepspec/fft.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "toepspec/errors.hpp"

namespace toepspec {
namespace {

constexpr std::size_t kMaxDirectRadix = 31;

std::vector<std::size_t> factorize(std::size_t n) {
  std::vector<std::size_t> f;
  for (std::size_t p : {4u, 2u, 3u, 5u}) {
    while (n % p == 0) {
      f.push_back(p);
      n /= p;
    }
  }
  for (std::size_t p = 7; p * p <= n; p += 2) {
    while (n % p == 0) {
      f.push_back(p);
      n /= p;
    }
  }
  if (n > 1) f.push_back(n);
  return f;
}

std::vector<cplx> make_twiddles(std::size_t n) {
  std::vector<cplx> w(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double ang = -2.0 * std::numbers::pi * static_cast<double>(j) / static_cast<double>(n);
    w[j] = {std::cos(ang), std::sin(ang)};
  }
  return w;
}

}  // namespace

struct FftPlan::Bluestein {
  std::size_t m = 0;
  std::vector<cplx> chirp;       // exp(-i pi t^2 / n), t < n
  std::vector<cplx> kernel_fft;  // forward FFT of conj chirp, wrapped to length m
  std::unique_ptr<FftPlan> inner;
};

FftPlan::FftPlan(std::size_t n) : n_(n) {
  if (n == 0) throw InvalidArgument("FFT size must be positive");
  factors_ = factorize(n);
  const bool direct = std::all_of(factors_.begin(), factors_.end(),
                                  [](std::size_t p) { return p <= kMaxDirectRadix; });
  if (direct) {
    twiddle_ = make_twiddles(n);
    return;
  }
  auto b = std::make_unique<Bluestein>();
  std::size_t m = 1;
  while (m < 2 * n - 1) m <<= 1;
  b->m = m;
  b->inner = std::make_unique<FftPlan>(m);
  b->chirp.resize(n);
  const std::size_t two_n = 2 * n;
  for (std::size_t t = 0; t < n; ++t) {
    // t^2 mod 2n keeps the angle argument small and exact
    const std::size_t t2 = static_cast<std::size_t>(
        (static_cast<unsigned __int128>(t) * t) % two_n);
    const double ang = -std::numbers::pi * static_cast<double>(t2) / static_cast<double>(n);
    b->chirp[t] = {std::cos(ang), std::sin(ang)};
  }
  b->kernel_fft.assign(m, cplx{});
  b->kernel_fft[0] = std::conj(b->chirp[0]);
  for (std::size_t t = 1; t < n; ++t) {
    b->kernel_fft[t] = std::conj(b->chirp[t]);
    b->kernel_fft[m - t] = std::conj(b->chirp[t]);
  }
  b->inner->execute(b->kernel_fft, FftDirection::forward);
  bluestein_ = std::move(b);
}

FftPlan::~FftPlan() = default;
FftPlan::FftPlan(FftPlan&&) noexcept = default;
FftPlan& FftPlan::operator=(FftPlan&&) noexcept = default;

void FftPlan::mixed_radix(const cplx* in, std::size_t in_stride, cplx* out, std::size_t n,
                          std::size_t factor_idx, bool inverse, cplx* tmp) const {
  if (n == 1) {
    out[0] = in[0];
    return;
  }
  const std::size_t p = factors_[factor_idx];
  const std::size_t m = n / p;
  for (std::size_t q = 0; q < p; ++q)
    mixed_radix(in + q * in_stride, in_stride * p, out + q * m, m, factor_idx + 1, inverse, tmp);

  const std::size_t tw_step = n_ / n;  // w_n^e = w_N^{e * N/n}
  auto w = [&](std::size_t e) {
    const cplx z = twiddle_[(e % n) * tw_step];
    return inverse ? std::conj(z) : z;
  };
  for (std::size_t k = 0; k < m; ++k) {
    for (std::size_t q = 0; q < p; ++q) tmp[q] = out[q * m + k] * w(q * k);
    if (p == 2) {
      out[k] = tmp[0] + tmp[1];
      out[k + m] = tmp[0] - tmp[1];
      continue;
    }
    if (p == 4) {
      const cplx t0 = tmp[0] + tmp[2], t1 = tmp[0] - tmp[2];
      const cplx t2 = tmp[1] + tmp[3];
      cplx t3 = tmp[1] - tmp[3];
      t3 = inverse ? cplx{-t3.imag(), t3.real()} : cplx{t3.imag(), -t3.real()};
      out[k] = t0 + t2;
      out[k + m] = t1 + t3;
      out[k + 2 * m] = t0 - t2;
      out[k + 3 * m] = t1 - t3;
      continue;
    }
    for (std::size_t r = 0; r < p; ++r) {
      cplx acc{};
      for (std::size_t q = 0; q < p; ++q) acc += tmp[q] * w(q * r * m);
      out[k + r * m] = acc;
    }
  }
}

void FftPlan::unscaled(std::span<cplx> data, bool inverse) const {
  if (!bluestein_) {
    std::vector<cplx> out(n_);
    std::vector<cplx> tmp(std::max<std::size_t>(
        4, factors_.empty() ? 1 : *std::max_element(factors_.begin(), factors_.end())));
    mixed_radix(data.data(), 1, out.data(), n_, 0, inverse, tmp.data());
    std::copy(out.begin(), out.end(), data.begin());
    return;
  }
  const auto& b = *bluestein_;
  // X_k = c_k sum_t (x_t c_t) conj(c_{k-t}), c_t = exp(-+ i pi t^2/n)
  std::vector<cplx> a(b.m, cplx{});
  for (std::size_t t = 0; t < n_; ++t) {
    const cplx c = inverse ? std::conj(b.chirp[t]) : b.chirp[t];
    a[t] = data[t] * c;
  }
  b.inner->execute(a, FftDirection::forward);
  if (!inverse) {
    for (std::size_t j = 0; j < b.m; ++j) a[j] *= b.kernel_fft[j];
  } else {
    // kernel for the inverse chirp is the conjugate sequence; its transform is
    // conj(K[-j]).
    for (std::size_t j = 0; j < b.m; ++j) a[j] *= std::conj(b.kernel_fft[(b.m - j) % b.m]);
  }
  b.inner->execute(a, FftDirection::inverse);
  for (std::size_t k = 0; k < n_; ++k) {
    const cplx c = inverse ? std::conj(b.chirp[k]) : b.chirp[k];
    data[k] = a[k] * c;
  }
}

void FftPlan::execute(std::span<cplx> data, FftDirection dir) const {
  if (data.size() != n_) throw InvalidArgument("FFT length mismatch");
  const bool inverse = dir == FftDirection::inverse;
  unscaled(data, inverse);
  if (inverse) {
    const double s = 1.0 / static_cast<double>(n_);
    for (auto& z : data) z *= s;
  }
}

void FftPlan::execute_strided(cplx* data, std::size_t stride, FftDirection dir,
                              std::vector<cplx>& scratch) const {
  scratch.resize(n_);
  for (std::size_t t = 0; t < n_; ++t) scratch[t] = data[t * stride];
  execute(scratch, dir);
  for (std::size_t t = 0; t < n_; ++t) data[t * stride] = scratch[t];
}

MultiFftPlan::MultiFftPlan(std::vector<std::size_t> sizes) : sizes_(std::move(sizes)), total_(1) {
  if (sizes_.empty()) throw InvalidArgument("FFT needs at least one dimension");
  for (std::size_t n : sizes_) {
    if (n == 0) throw InvalidArgument("FFT size must be positive");
    total_ *= n;
    plans_.emplace_back(n);
  }
}

void MultiFftPlan::execute(std::span<cplx> data, FftDirection dir) const {
  if (data.size() != total_) throw InvalidArgument("FFT grid length mismatch");
  std::vector<cplx> scratch;
  std::size_t inner = total_;
  std::size_t outer = 1;
  for (std::size_t d = 0; d < sizes_.size(); ++d) {
    const std::size_t n = sizes_[d];
    inner /= n;
    if (n > 1) {
      for (std::size_t o = 0; o < outer; ++o) {
        cplx* base = data.data() + o * n * inner;
        if (inner == 1) {
          plans_[d].execute(std::span<cplx>(base, n), dir);
        } else {
          for (std::size_t i = 0; i < inner; ++i)
            plans_[d].execute_strided(base + i, inner, dir, scratch);
        }
      }
    }
    outer *= n;
  }
}

CVector fft_multi(std::span<const cplx> data, std::span<const std::size_t> sizes,
                  FftDirection dir) {
  MultiFftPlan plan(std::vector<std::size_t>(sizes.begin(), sizes.end()));
  if (data.size() != plan.total()) throw InvalidArgument("FFT grid length mismatch");
  CVector out(data.begin(), data.end());
  plan.execute(out, dir);
  return out;
}

}  // namespace toepspec
