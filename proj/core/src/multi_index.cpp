#include "toepspec/multi_index.hpp"

#include <algorithm>
#include <cstdlib>
#include <sstream>
#include <vector>

#include "toepspec/errors.hpp"

namespace toepspec {

MultiIndex::MultiIndex(std::initializer_list<int> components)
    : MultiIndex(std::span<const int>(components.begin(), components.size())) {}

MultiIndex::MultiIndex(std::span<const int> components)
    : k_(static_cast<int>(components.size())) {
  if (k_ < 1 || k_ > kMaxDims) throw InvalidArgument("multi-index must have 1..3 components");
  std::copy(components.begin(), components.end(), c_.begin());
}

MultiIndex::MultiIndex(int dims, int fill) : k_(dims) {
  if (k_ < 1 || k_ > kMaxDims) throw InvalidArgument("multi-index must have 1..3 components");
  for (int i = 0; i < k_; ++i) c_[static_cast<std::size_t>(i)] = fill;
}

long long MultiIndex::product() const noexcept {
  long long p = 1;
  for (int v : *this) p *= v;
  return p;
}

int MultiIndex::max_abs() const noexcept {
  int m = 0;
  for (int v : *this) m = std::max(m, std::abs(v));
  return m;
}

void MultiIndex::check_same_dims(const MultiIndex& o) const {
  if (k_ != o.k_) throw InvalidArgument("multi-index dimension mismatch");
}

bool MultiIndex::leq(const MultiIndex& o) const {
  check_same_dims(o);
  for (int i = 0; i < k_; ++i)
    if ((*this)[i] > o[i]) return false;
  return true;
}

MultiIndex MultiIndex::operator+(const MultiIndex& o) const {
  check_same_dims(o);
  MultiIndex r = *this;
  for (int i = 0; i < k_; ++i) r[i] += o[i];
  return r;
}

MultiIndex MultiIndex::operator-(const MultiIndex& o) const {
  check_same_dims(o);
  MultiIndex r = *this;
  for (int i = 0; i < k_; ++i) r[i] -= o[i];
  return r;
}

MultiIndex MultiIndex::operator-() const {
  MultiIndex r = *this;
  for (int i = 0; i < k_; ++i) r[i] = -r[i];
  return r;
}

MultiIndex MultiIndex::operator*(int s) const {
  MultiIndex r = *this;
  for (int i = 0; i < k_; ++i) r[i] *= s;
  return r;
}

bool operator==(const MultiIndex& a, const MultiIndex& b) noexcept {
  return a.k_ == b.k_ && std::equal(a.begin(), a.end(), b.begin());
}

std::strong_ordering operator<=>(const MultiIndex& a, const MultiIndex& b) noexcept {
  if (auto c = a.k_ <=> b.k_; c != 0) return c;
  for (int i = 0; i < a.k_; ++i)
    if (auto c = a[i] <=> b[i]; c != 0) return c;
  return std::strong_ordering::equal;
}

std::string MultiIndex::to_string() const {
  std::ostringstream os;
  os << '(';
  for (int i = 0; i < k_; ++i) os << (i ? "," : "") << (*this)[i];
  os << ')';
  return os.str();
}

MultiIndex MultiIndex::parse(const std::string& text) {
  std::string t;
  for (char ch : text)
    if (ch != '(' && ch != ')' && ch != ' ') t += ch;
  std::vector<int> parts;
  std::stringstream ss(t);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) throw InvalidArgument("malformed multi-index '" + text + "'");
    std::size_t used = 0;
    int v = 0;
    try {
      v = std::stoi(item, &used);
    } catch (...) {
      throw InvalidArgument("malformed multi-index '" + text + "'");
    }
    if (used != item.size()) throw InvalidArgument("malformed multi-index '" + text + "'");
    parts.push_back(v);
  }
  return MultiIndex(std::span<const int>(parts));
}

std::size_t range_size(const MultiIndex& lo, const MultiIndex& hi) {
  if (!lo.leq(hi)) return 0;
  std::size_t n = 1;
  for (int i = 0; i < lo.dims(); ++i) n *= static_cast<std::size_t>(hi[i] - lo[i] + 1);
  return n;
}

std::size_t linearize(const MultiIndex& j, const MultiIndex& lo, const MultiIndex& hi) {
  if (!lo.leq(j) || !j.leq(hi))
    throw InvalidArgument("multi-index " + j.to_string() + " outside range " + lo.to_string() +
                          ".." + hi.to_string());
  std::size_t idx = 0;
  for (int i = 0; i < j.dims(); ++i)
    idx = idx * static_cast<std::size_t>(hi[i] - lo[i] + 1) + static_cast<std::size_t>(j[i] - lo[i]);
  return idx;
}

MultiIndex delinearize(std::size_t idx, const MultiIndex& lo, const MultiIndex& hi) {
  const std::size_t total = range_size(lo, hi);
  if (idx >= total) throw InvalidArgument("linear index outside multi-index range");
  MultiIndex j = lo;
  for (int i = j.dims() - 1; i >= 0; --i) {
    const auto len = static_cast<std::size_t>(hi[i] - lo[i] + 1);
    j[i] = lo[i] + static_cast<int>(idx % len);
    idx /= len;
  }
  return j;
}

}  // namespace toepspec
