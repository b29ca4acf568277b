#include "covlab/rng.hpp"

namespace covlab {
namespace {

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

std::uint64_t mix_seed(std::uint64_t master, std::uint64_t index, std::uint64_t tag) noexcept {
  std::uint64_t h = splitmix64(master);
  h = splitmix64(h ^ index);
  h = splitmix64(h ^ (tag * 0xd1b54a32d192ed03ULL));
  return h;
}

}  // namespace covlab
