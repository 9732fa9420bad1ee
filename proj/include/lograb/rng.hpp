#pragma once

#include <cstdint>
#include <vector>

namespace lograb {

/* Counter-based generator: out_i = finalize(key + i*GOLDEN). Draws depend only
 * on (key, i), so per-patch substreams stay aligned no matter how many values
 * other patches consumed. */
class CounterRng {
public:
  static constexpr const char* kAlgorithmId = "splitmix64-ctr/v1";

  explicit CounterRng(uint64_t key = 0) : key_(key) {}

  // substream key from (seed, stream index, domain tag)
  static CounterRng substream(uint64_t seed, uint64_t stream, uint64_t tag = 0);

  uint64_t next();

  // uniform in [0, 1), 53-bit mantissa
  double uniform();

  // unbiased uniform integer in [0, bound), bound >= 1
  uint64_t uniform_u64(uint64_t bound);

  // standard normal via Box-Muller (second value cached)
  double normal();

  // m distinct values from [0, n), returned ascending
  std::vector<uint32_t> sample_without_replacement(uint32_t n, uint32_t m);

  // m distinct indices from [0, n) in draw order (partial Fisher-Yates)
  std::vector<int> sample_indices(int n, int m);

private:
  uint64_t key_ = 0;
  uint64_t counter_ = 0;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace lograb
