#pragma once

#include <cstdint>
#include <random>
#include <span>

namespace coc {

// Portable sampler: std::mt19937_64 output is fixed by the standard, the
// std distributions are not, so uniform/normal draws are done here.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  // Uniform in (0, 1].
  double uniform();

  // Uniform integer in [0, bound).
  std::uint64_t below(std::uint64_t bound);

  // Box-Muller; the second variate of each pair is cached.
  double normal(double mean, double stddev);

  template <typename T>
  void shuffle(std::span<T> items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      std::swap(items[i - 1], items[below(i)]);
    }
  }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace coc
