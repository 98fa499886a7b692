#pragma once

#include <array>
#include <compare>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>

namespace toepspec {

/// k-tuple of integers, 1 <= k <= 3. Ordering operators are lexicographic;
/// `leq` is the componentwise partial order.
class MultiIndex {
public:
  static constexpr int kMaxDims = 3;

  MultiIndex() : MultiIndex(1, 0) {}
  MultiIndex(std::initializer_list<int> components);
  explicit MultiIndex(std::span<const int> components);
  MultiIndex(int dims, int fill);

  int dims() const noexcept { return k_; }
  int operator[](int i) const noexcept { return c_[static_cast<std::size_t>(i)]; }
  int& operator[](int i) noexcept { return c_[static_cast<std::size_t>(i)]; }
  const int* begin() const noexcept { return c_.data(); }
  const int* end() const noexcept { return c_.data() + k_; }

  /// Product of the components (n-hat).
  long long product() const noexcept;
  int max_abs() const noexcept;

  bool leq(const MultiIndex& other) const;

  MultiIndex operator+(const MultiIndex& o) const;
  MultiIndex operator-(const MultiIndex& o) const;
  MultiIndex operator-() const;
  MultiIndex operator*(int s) const;

  friend bool operator==(const MultiIndex& a, const MultiIndex& b) noexcept;
  friend std::strong_ordering operator<=>(const MultiIndex& a, const MultiIndex& b) noexcept;

  std::string to_string() const;
  /// Parses "3", "20,20" or "(1,2)".
  static MultiIndex parse(const std::string& text);

private:
  void check_same_dims(const MultiIndex& o) const;
  std::array<int, kMaxDims> c_{};
  int k_;
};

/// Position of j in the lexicographic ordering of the range lo..hi (last
/// component fastest), counted from 0.
std::size_t linearize(const MultiIndex& j, const MultiIndex& lo, const MultiIndex& hi);
MultiIndex delinearize(std::size_t idx, const MultiIndex& lo, const MultiIndex& hi);

/// Number of multi-indices in lo..hi.
std::size_t range_size(const MultiIndex& lo, const MultiIndex& hi);

/// Visits every multi-index of lo..hi in lexicographic order.
template <class Fn>
void for_each_in_range(const MultiIndex& lo, const MultiIndex& hi, Fn&& fn) {
  if (!lo.leq(hi)) return;
  MultiIndex j = lo;
  const int k = lo.dims();
  while (true) {
    fn(static_cast<const MultiIndex&>(j));
    int d = k - 1;
    while (d >= 0) {
      if (j[d] < hi[d]) {
        ++j[d];
        break;
      }
      j[d] = lo[d];
      --d;
    }
    if (d < 0) return;
  }
}

}  // namespace toepspec
