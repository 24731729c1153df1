#include "biexp/rng.hpp"

#include <array>

namespace biexp::rng {

namespace {

std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) noexcept {
  return splitmix64(splitmix64(seed) ^ splitmix64(stream + 0x632be59bd9b4e019ULL));
}

Engine make_engine(std::uint64_t seed, std::uint64_t stream) {
  const std::uint64_t mixed = derive_seed(seed, stream);
  const std::array<std::uint32_t, 4> words{
      static_cast<std::uint32_t>(mixed), static_cast<std::uint32_t>(mixed >> 32),
      static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
  std::seed_seq seq(words.begin(), words.end());
  return Engine(seq);
}

}  // namespace biexp::rng
