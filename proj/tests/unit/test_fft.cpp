#include "doctest.h"

#include <toepspec/fft.hpp>

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

using namespace toepspec;

namespace {

// Naive O(N^2) DFT used as the reference transform.
CVector naive_dft(const CVector& x) {
  const auto n = x.size();
  CVector out(n);
  for (std::size_t k = 0; k < n; ++k) {
    cplx acc{};
    for (std::size_t t = 0; t < n; ++t) {
      const double ang = -2.0 * std::numbers::pi * double((k * t) % n) / double(n);
      acc += x[t] * cplx(std::cos(ang), std::sin(ang));
    }
    out[k] = acc;
  }
  return out;
}

CVector random_vector(std::size_t n, std::mt19937_64& rng) {
  std::normal_distribution<double> nd;
  CVector v(n);
  for (auto& z : v) z = {nd(rng), nd(rng)};
  return v;
}

double max_diff(const CVector& a, const CVector& b) {
  double m = 0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace

TEST_CASE("fft matches naive dft for every size up to 64 and a few large primes") {
  std::mt19937_64 rng(7);
  std::vector<std::size_t> sizes;
  for (std::size_t n = 1; n <= 64; ++n) sizes.push_back(n);
  sizes.insert(sizes.end(), {97, 127, 210, 257, 1000});
  for (auto n : sizes) {
    CAPTURE(n);
    auto x = random_vector(n, rng);
    auto ref = naive_dft(x);
    auto y = x;
    FftPlan plan(n);
    plan.execute(y, FftDirection::forward);
    CHECK(max_diff(y, ref) <= 1e-11 * double(n));
  }
}

TEST_CASE("forward then inverse is identity for k = 1, 2, 3") {
  std::mt19937_64 rng(11);
  const std::vector<std::vector<std::size_t>> shapes = {
      {1}, {17}, {64}, {3, 5}, {8, 8}, {1, 31}, {2, 3, 4}, {5, 1, 7}, {4, 4, 4}};
  for (const auto& shape : shapes) {
    std::size_t total = 1;
    for (auto s : shape) total *= s;
    auto x = random_vector(total, rng);
    auto y = fft_multi(x, shape, FftDirection::forward);
    auto z = fft_multi(y, shape, FftDirection::inverse);
    double scale = 0;
    for (auto v : x) scale = std::max(scale, std::abs(v));
    CHECK(max_diff(x, z) <= 1e-12 * std::max(1.0, scale) * 10);
  }
}

TEST_CASE("two dimensional transform agrees with separable naive dft") {
  std::mt19937_64 rng(3);
  const std::size_t n0 = 6, n1 = 10;
  auto x = random_vector(n0 * n1, rng);
  CVector ref(n0 * n1);
  for (std::size_t a = 0; a < n0; ++a)
    for (std::size_t b = 0; b < n1; ++b) {
      cplx acc{};
      for (std::size_t s = 0; s < n0; ++s)
        for (std::size_t t = 0; t < n1; ++t) {
          const double ang = -2.0 * std::numbers::pi *
                             (double(a * s) / double(n0) + double(b * t) / double(n1));
          acc += x[s * n1 + t] * cplx(std::cos(ang), std::sin(ang));
        }
      ref[a * n1 + b] = acc;
    }
  const std::vector<std::size_t> shape{n0, n1};
  CHECK(max_diff(fft_multi(x, shape, FftDirection::forward), ref) <= 1e-10);
}

TEST_CASE("zero length is rejected") {
  CVector x;
  const std::vector<std::size_t> shape{0};
  CHECK_THROWS(fft_multi(x, shape, FftDirection::forward));
}
