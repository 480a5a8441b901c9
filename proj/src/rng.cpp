#include "dynfrs/rng.hpp"

#include <algorithm>
#include <sstream>

#include "dynfrs/errors.hpp"

namespace dynfrs {

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

std::uint64_t uniform_below(Rng& rng, std::uint64_t bound) {
  // Reject the 2^64 mod bound lowest outputs so the modulo is unbiased.
  const std::uint64_t threshold = (0 - bound) % bound;
  std::uint64_t v;
  do {
    v = rng();
  } while (v < threshold);
  return v % bound;
}

std::vector<std::uint32_t> sample_without_replacement(Rng& rng, std::uint32_t n,
                                                      std::uint32_t k) {
  if (k > n) throw ArgumentError("sample_without_replacement: k > n");
  std::vector<std::uint32_t> picked;
  picked.reserve(k);
  for (std::uint32_t j = n - k; j < n; ++j) {
    const auto t = static_cast<std::uint32_t>(uniform_below(rng, std::uint64_t{j} + 1));
    if (std::find(picked.begin(), picked.end(), t) == picked.end()) {
      picked.push_back(t);
    } else {
      picked.push_back(j);
    }
  }
  std::sort(picked.begin(), picked.end());
  return picked;
}

std::string rng_state(const Rng& rng) {
  std::ostringstream out;
  out << rng;
  return out.str();
}

void restore_rng_state(Rng& rng, const std::string& state) {
  std::istringstream in(state);
  in >> rng;
  if (in.fail()) throw ParseError("corrupt random engine state");
}

}  // namespace dynfrs
