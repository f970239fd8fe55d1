#include "fdp/rng.hpp"

#include <cmath>
#include <sstream>

namespace fdp {

namespace {

std::mt19937_64 seeded(std::initializer_list<std::uint64_t> words) {
  std::vector<std::uint32_t> parts;
  for (auto w : words) {
    parts.push_back(static_cast<std::uint32_t>(w & 0xffffffffu));
    parts.push_back(static_cast<std::uint32_t>(w >> 32));
  }
  std::seed_seq seq(parts.begin(), parts.end());
  return std::mt19937_64(seq);
}

}  // namespace

Rng::Rng(std::uint64_t seed) : engine_(seeded({seed})) {}

Rng::Rng(std::uint64_t seed, std::uint64_t stream)
    : engine_(seeded({seed, stream, 0x5eedULL})) {}

Rng::Rng(std::uint64_t seed, std::uint64_t stream, std::uint64_t substream)
    : engine_(seeded({seed, stream, substream, 0x5eed5eedULL})) {}

std::complex<double> Rng::complex_normal() {
  const double re = normal();
  const double im = normal();
  return {re * M_SQRT1_2, im * M_SQRT1_2};
}

std::string Rng::state() const {
  std::ostringstream os;
  os << engine_ << ' ' << normal_;
  return os.str();
}

void Rng::restore(const std::string& state) {
  std::istringstream is(state);
  is >> engine_ >> normal_;
}

}  // namespace fdp
