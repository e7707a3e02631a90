#ifndef INTRADAY_RANDOM_HPP_
#define INTRADAY_RANDOM_HPP_

#include <cstdint>
#include <initializer_list>
#include <limits>
#include <string_view>

namespace intraday {

/// SplitMix64 output finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// FNV-1a; stable across platforms, unlike std::hash.
constexpr std::uint64_t hash_string(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

/// Folds a list of words into a single stream key.
constexpr std::uint64_t derive_key(std::uint64_t seed,
                                   std::initializer_list<std::uint64_t> words) {
  std::uint64_t key = mix64(seed ^ 0x6a09e667f3bcc909ULL);
  for (const auto w : words) {
    key = mix64(key ^ mix64(w + 0x9e3779b97f4a7c15ULL));
  }
  return key;
}

/// Counter-based generator: the i-th output is mix64(key + (i+1) * golden).
/// A stream is fully determined by its key, so substreams for independent
/// traces can be created in any order on any thread.
class Substream {
public:
  using result_type = std::uint64_t;

  explicit Substream(std::uint64_t key) : key_(key) {}
  Substream(std::uint64_t seed, std::initializer_list<std::uint64_t> words)
      : key_(derive_key(seed, words)) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() {
    return std::numeric_limits<result_type>::max();
  }

  result_type operator()() {
    ++counter_;
    return mix64(key_ + counter_ * 0x9e3779b97f4a7c15ULL);
  }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

} // namespace intraday

#endif // INTRADAY_RANDOM_HPP_
