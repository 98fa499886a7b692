#pragma once

#include <algorithm>
#include <complex>
#include <numbers>
#include <vector>

namespace toepspec::oracle {

inline double cross(std::complex<double> o, std::complex<double> a, std::complex<double> b) {
  return (a.real() - o.real()) * (b.imag() - o.imag()) - (a.imag() - o.imag()) * (b.real() - o.real());
}

/// Monotone-chain hull of the points, then the distance from 0 to it (0 when inside).
inline double hull_distance_from_origin(std::vector<std::complex<double>> p) {
  std::sort(p.begin(), p.end(), [](auto a, auto b) {
    return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag();
  });
  std::vector<std::complex<double>> h(2 * p.size());
  std::size_t k = 0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    while (k >= 2 && cross(h[k - 2], h[k - 1], p[i]) <= 0) --k;
    h[k++] = p[i];
  }
  for (std::size_t i = p.size() - 1, t = k + 1; i-- > 0;) {
    while (k >= t && cross(h[k - 2], h[k - 1], p[i]) <= 0) --k;
    h[k++] = p[i];
  }
  h.resize(k - 1);
  bool inside = true;
  double best = 1e300;
  for (std::size_t i = 0; i < h.size(); ++i) {
    const auto a = h[i], b = h[(i + 1) % h.size()];
    if (cross(a, b, 0.0) < 0) inside = false;
    const auto ab = b - a;
    const double t = std::clamp(std::real(std::conj(ab) * (-a)) / std::norm(ab), 0.0, 1.0);
    best = std::min(best, std::abs(a + t * ab));
  }
  return inside ? 0.0 : best;
}

/// Distance from 0 to the hull of {1} and the circle |z - 5| = r (the values of g1).
inline double g1_separation(double r, int samples = 4096) {
  std::vector<std::complex<double>> pts{1.0};
  for (int t = 0; t < samples; ++t)
    pts.push_back(5.0 + r * std::polar(1.0, 2 * std::numbers::pi * t / samples));
  return hull_distance_from_origin(pts);
}

}  // namespace toepspec::oracle
