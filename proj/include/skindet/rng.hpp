#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace skindet {

// Bijective 64-bit mixer (splitmix64 finalizer).
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

// Derives a sub-seed from a base seed and one or two small integers
// (candidate HN, run index, pipeline stage, ...). Decorrelates seeds that
// differ only in a low bit.
inline std::uint64_t mix_seed(std::uint64_t base, std::uint64_t a) {
  return splitmix64(splitmix64(base) ^ splitmix64(a ^ 0x517cc1b727220a95ull));
}

inline std::uint64_t mix_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b) {
  return mix_seed(mix_seed(base, a), b);
}

// Deterministic random source. The mt19937_64 engine output is pinned by
// the C++ standard; the distributions are hand-rolled here because
// std::uniform_*_distribution results are implementation-defined and would
// break bit-reproducibility across toolchains.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  std::uint64_t next() { return eng_(); }

  // Uniform on [0,1), 53 random bits.
  double unit() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * unit(); }

  // Uniform integer on [0,n), unbiased via rejection.
  std::uint64_t below(std::uint64_t n) {
    const std::uint64_t rem = (~std::uint64_t{0} % n + 1) % n;  // 2^64 mod n
    const std::uint64_t limit = ~std::uint64_t{0} - rem;        // last accepted value
    std::uint64_t x = eng_();
    while (x > limit) x = eng_();
    return x % n;
  }

  // Standard normal via Box-Muller (one value per call; the spare is kept).
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double u1 = 1.0 - unit();  // (0,1], keeps log finite
    const double u2 = unit();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      const std::size_t j = static_cast<std::size_t>(below(i));
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  std::mt19937_64 eng_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace skindet
