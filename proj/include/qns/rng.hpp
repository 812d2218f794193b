#pragma once

#include <cstdint>
#include <random>
#include <utility>
#include <vector>

namespace qns {

/// splitmix64 finalizer; used to derive independent stream seeds.
std::uint64_t mix64(std::uint64_t x);

/// Seed for stream `stream` of realization `index` under a run seed.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index, std::uint64_t stream);

/// mt19937_64 with portable uniform/normal/index draws. The standard
/// distributions are implementation-defined, so they are not used here.
class Rng {
public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t bits() { return gen_(); }
  double uniform();            // [0, 1), 53 random bits
  double normal();             // Box-Muller, one value per call (the pair is cached)
  std::uint64_t below(std::uint64_t n); // unbiased integer in [0, n)

  template <class T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[below(i)]);
  }

private:
  std::mt19937_64 gen_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

} // namespace qns
