#pragma once

#include <cstdint>
#include <string_view>

namespace fabricnet::sim {

// Named deterministic random stream. Streams are split-seeded: the state is
// derived from (master_seed, stream_id) only, so two streams with the same
// pair produce identical sequences and distinct ids produce unrelated ones.
// Substreams derived from a counter stay reproducible regardless of the
// order or thread in which they are consumed.
class RngStream {
 public:
  RngStream() : RngStream(0, "default") {}
  RngStream(std::uint64_t master_seed, std::string_view stream_id);

  std::uint64_t next_u64();

  // Uniform on [0, 1), 53-bit resolution.
  double uniform01();
  double uniform(double lo, double hi);
  // Uniform integer in [0, n); n must be > 0.
  std::uint64_t uniform_int(std::uint64_t n);

  // Standard normal via Box-Muller; consumes exactly two raw draws.
  double gaussian();
  double gaussian(double mean, double sigma);

  // Pareto with minimum 1 and shape alpha > 0.
  double pareto(double alpha);

  // Independent stream derived from this stream's identity and a counter.
  // Does not consume state, so substream extraction is order-free.
  RngStream substream(std::uint64_t counter) const;

 private:
  explicit RngStream(std::uint64_t base);

  std::uint64_t base_;
  std::uint64_t s_[4];
};

}  // namespace fabricnet::sim
