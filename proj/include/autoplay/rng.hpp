#pragma once

#include <cstdint>
#include <vector>

namespace autoplay {

// Deterministic splitmix64 stream. The reproducibility guarantees (identical
// traces, byte-identical reports) rely on this generator being fully defined
// here rather than on library distributions.
class Rng {
 public:
  explicit Rng(uint64_t seed) : state_(seed) {}

  uint64_t nextU64() {
    uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform in [0, n). n must be nonzero.
  uint64_t below(uint64_t n) {
    return static_cast<uint64_t>(
        (static_cast<unsigned __int128>(nextU64()) * n) >> 64);
  }

  int belowInt(int n) { return static_cast<int>(below(static_cast<uint64_t>(n))); }

  // Uniform in [0, 1).
  double real01() { return static_cast<double>(nextU64() >> 11) * 0x1.0p-53; }

  bool chance(double p) { return real01() < p; }

  // Independent child stream; advances this stream by one draw.
  Rng split() { return Rng(nextU64() ^ 0xd6e8feb86659fd93ULL); }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (size_t i = v.size(); i > 1; --i) {
      size_t j = static_cast<size_t>(below(i));
      std::swap(v[i - 1], v[j]);
    }
  }

  template <typename T>
  const T& pick(const std::vector<T>& v) {
    return v[below(v.size())];
  }

 private:
  uint64_t state_;
};

}  // namespace autoplay
