#include "mixlabel/rng.hpp"

namespace mixlabel {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::uint64_t scene_seed(std::uint64_t global_seed, std::string_view scene_id) {
  // FNV-1a over the id, then mixed with the global seed.
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char c : scene_id) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  return splitmix64(splitmix64(global_seed) ^ h);
}

}  // namespace mixlabel
