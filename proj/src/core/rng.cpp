#include "chainsurv/core/rng.hpp"

#include <cmath>
#include <numbers>
#include <numeric>

#include "chainsurv/core/errors.hpp"

namespace chainsurv::core {

std::size_t Rng::below(std::size_t n) {
  if (n == 0) throw ContractViolation("Rng::below: n must be positive");
  // Rejection sampling removes modulo bias.
  const std::uint64_t bound = static_cast<std::uint64_t>(n);
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
  std::uint64_t x = engine_();
  while (x >= limit) x = engine_();
  return static_cast<std::size_t>(x % bound);
}

double Rng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u1 = uniform();
  while (u1 <= 0.0) u1 = uniform();
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double theta = 2.0 * std::numbers::pi * u2;
  spare_ = r * std::sin(theta);
  has_spare_ = true;
  return r * std::cos(theta);
}

double Rng::exponential(double rate) {
  if (!(rate > 0.0)) throw ContractViolation("Rng::exponential: rate must be positive");
  double u = uniform();
  while (u <= 0.0) u = uniform();
  return -std::log(u) / rate;
}

std::vector<std::size_t> derangement(std::size_t n, Rng& rng) {
  if (n < 2) throw ContractViolation("derangement: need at least 2 elements");
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  for (std::size_t i = n - 1; i > 0; --i) {
    std::size_t j = rng.below(i);  // j < i: Sattolo
    std::swap(perm[i], perm[j]);
  }
  return perm;
}

}  // namespace chainsurv::core
