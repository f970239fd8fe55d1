#pragma once

#include <complex>
#include <cstdint>
#include <random>
#include <string>

namespace fdp {

/**
 * @brief Seeded random stream.
 *
 * Independent streams are derived from a master seed and a list of stream
 * indices (e.g. step, batch element), so results never depend on the order in
 * which workers run.
 */
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0);
  Rng(std::uint64_t seed, std::uint64_t stream);
  Rng(std::uint64_t seed, std::uint64_t stream, std::uint64_t substream);

  double normal() { return normal_(engine_); }
  double uniform() { return uniform_(engine_); }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  bool bernoulli(double p = 0.5) { return uniform() < p; }
  std::uint64_t next_u64() { return engine_(); }

  /// Complex Gaussian with E|z|^2 = 1 (independent real/imag parts of variance 1/2).
  std::complex<double> complex_normal();

  /// Serialized engine + distribution state; round-trips through restore().
  std::string state() const;
  void restore(const std::string& state);

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

}  // namespace fdp
