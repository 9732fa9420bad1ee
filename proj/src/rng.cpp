#include "lograb/rng.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

namespace lograb {

namespace {

constexpr uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

uint64_t finalize(uint64_t z) {
  z ^= z >> 30;
  z *= 0xBF58476D1CE4E5B9ULL;
  z ^= z >> 27;
  z *= 0x94D049BB133111EBULL;
  z ^= z >> 31;
  return z;
}

}  // namespace

CounterRng CounterRng::substream(uint64_t seed, uint64_t stream, uint64_t tag) {
  uint64_t key = finalize(seed + kGolden) ^ finalize(stream * 0xD6E8FEB86659FD93ULL + tag);
  return CounterRng(finalize(key));
}

uint64_t CounterRng::next() { return finalize(key_ + (++counter_) * kGolden); }

double CounterRng::uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

uint64_t CounterRng::uniform_u64(uint64_t bound) {
  if (bound == 0) throw std::invalid_argument("uniform_u64: bound must be positive");
  uint64_t min = (0 - bound) % bound;  // 2^64 mod bound
  uint64_t x;
  do {
    x = next();
  } while (x < min);
  return x % bound;
}

double CounterRng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u1 = 1.0 - uniform();  // (0, 1]
  double u2 = uniform();
  double r = std::sqrt(-2.0 * std::log(u1));
  double theta = 2.0 * M_PI * u2;
  spare_ = r * std::sin(theta);
  has_spare_ = true;
  return r * std::cos(theta);
}

std::vector<uint32_t> CounterRng::sample_without_replacement(uint32_t n, uint32_t m) {
  if (m > n) throw std::invalid_argument("sample_without_replacement: m > n");
  std::vector<uint32_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0u);
  for (uint32_t i = 0; i < m; ++i) {
    uint32_t j = i + static_cast<uint32_t>(uniform_u64(n - i));
    std::swap(idx[i], idx[j]);
  }
  idx.resize(m);
  std::sort(idx.begin(), idx.end());
  return idx;
}

std::vector<int> CounterRng::sample_indices(int n, int m) {
  if (m > n) throw std::invalid_argument("sample_indices: m > n");
  std::vector<int> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  for (int i = 0; i < m; ++i) {
    int j = i + static_cast<int>(uniform_u64(static_cast<uint64_t>(n - i)));
    std::swap(idx[i], idx[j]);
  }
  idx.resize(m);
  return idx;
}

}  // namespace lograb
