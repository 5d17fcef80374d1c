#include "fabricnet/rng.hpp"

#include <cmath>
#include <stdexcept>

namespace fabricnet::sim {

namespace {

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  return h;
}

std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

}  // namespace

RngStream::RngStream(std::uint64_t base) : base_(base) {
  std::uint64_t sm = base;
  for (auto& w : s_) w = splitmix64(sm);
}

RngStream::RngStream(std::uint64_t master_seed, std::string_view stream_id)
    : RngStream([&] {
        std::uint64_t sm = master_seed ^ 0xA5A5A5A55A5A5A5AULL;
        const std::uint64_t a = splitmix64(sm);
        sm = a ^ fnv1a64(stream_id);
        return splitmix64(sm);
      }()) {}

std::uint64_t RngStream::next_u64() {
  // xoshiro256++
  const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
  const std::uint64_t t = s_[1] << 17;
  s_[2] ^= s_[0];
  s_[3] ^= s_[1];
  s_[1] ^= s_[2];
  s_[0] ^= s_[3];
  s_[2] ^= t;
  s_[3] = rotl(s_[3], 45);
  return result;
}

double RngStream::uniform01() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double RngStream::uniform(double lo, double hi) {
  return lo + (hi - lo) * uniform01();
}

std::uint64_t RngStream::uniform_int(std::uint64_t n) {
  if (n == 0) throw std::invalid_argument("uniform_int: n must be > 0");
  // Rejection sampling keeps the distribution exactly uniform.
  const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
  std::uint64_t v = next_u64();
  while (v >= limit) v = next_u64();
  return v % n;
}

double RngStream::gaussian() {
  // u1 in (0, 1], u2 in [0, 1).
  const double u1 = 1.0 - uniform01();
  const double u2 = uniform01();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

double RngStream::gaussian(double mean, double sigma) {
  return mean + sigma * gaussian();
}

double RngStream::pareto(double alpha) {
  if (alpha <= 0.0) throw std::invalid_argument("pareto: alpha must be > 0");
  const double u = 1.0 - uniform01();  // (0, 1]
  return std::pow(u, -1.0 / alpha);
}

RngStream RngStream::substream(std::uint64_t counter) const {
  std::uint64_t sm = base_ ^ rotl(counter + 0x6C8E9CF570932BD5ULL, 31);
  return RngStream(splitmix64(sm));
}

}  // namespace fabricnet::sim
