#include "toepspec/config.hpp"

#include <cstdlib>
#include <string>

namespace toepspec {

const Tolerances& default_tolerances() {
  static const Tolerances tol{};
  return tol;
}

std::size_t max_dense_order() {
  static const std::size_t cap = [] {
    constexpr std::size_t kDefault = 2048;
    const char* env = std::getenv("TOEPSPEC_MAX_ORDER");
    if (!env || !*env) return kDefault;
    try {
      const long long v = std::stoll(env);
      return v > 0 ? static_cast<std::size_t>(v) : kDefault;
    } catch (...) {
      return kDefault;
    }
  }();
  return cap;
}

}  // namespace toepspec
