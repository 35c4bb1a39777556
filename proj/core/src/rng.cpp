#include "zwf/rng.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "zwf/errors.hpp"

namespace zwf {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t master, StreamId purpose,
                          std::uint64_t a, std::uint64_t b) {
  std::uint64_t s = splitmix64(master);
  s = splitmix64(s ^ static_cast<std::uint64_t>(purpose));
  s = splitmix64(s ^ a);
  s = splitmix64(s ^ b);
  return s;
}

double Rng::runif() {
  return static_cast<double>(eng_() >> 11) * 0x1.0p-53;
}

double Rng::runif(double lo, double hi) { return lo + (hi - lo) * runif(); }

double Rng::rnorm() {
  // Box-Muller, cosine branch only: fixed consumption of two uniforms.
  double u1 = runif();
  double u2 = runif();
  while (u1 <= 0.0) u1 = runif();
  return std::sqrt(-2.0 * std::log(u1)) *
         std::cos(2.0 * std::numbers::pi * u2);
}

double Rng::rnorm(double mean, double sd) { return mean + sd * rnorm(); }

long long Rng::rpois(double mean) {
  if (!(mean >= 0.0) || !std::isfinite(mean))
    throw numerical_error("rpois: mean must be finite and >= 0, got " +
                          std::to_string(mean));
  if (mean == 0.0) return 0;
  if (mean < 30.0) {
    const double limit = std::exp(-mean);
    long long k = 0;
    double prod = runif();
    while (prod > limit) {
      prod *= runif();
      ++k;
    }
    return k;
  }
  // Poisson(m) = Poisson(m/2) + Poisson(m/2); recurse until Knuth applies.
  return rpois(mean / 2.0) + rpois(mean / 2.0);
}

std::uint64_t Rng::rint(std::uint64_t n) {
  if (n == 0) throw numerical_error("rint: n must be positive");
  const std::uint64_t bound = std::mt19937_64::max() - std::mt19937_64::max() % n;
  std::uint64_t x = eng_();
  while (x >= bound) x = eng_();
  return x % n;
}

std::string Rng::serialize() const {
  std::ostringstream os;
  os << eng_;
  return os.str();
}

void Rng::restore(const std::string& state) {
  std::istringstream is(state);
  is >> eng_;
  if (is.fail()) throw validation_error("Rng::restore: malformed engine state");
}

}  // namespace zwf
