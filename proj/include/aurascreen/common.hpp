#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace aura {

inline constexpr const char* kVersion = "0.1.0";

enum class Err {
  // parsing
  EmptyInput,
  UnbalancedParenthesis,
  UnclosedRing,
  UnknownAtomSymbol,
  ValenceViolation,
  DanglingBond,
  DuplicateBond,
  BondConflict,
  BadBracket,
  UnexpectedCharacter,
  // fingerprints / clustering
  WidthMismatch,
  EmptyLibrary,
  MissingEmbedding,
  EmptyIndex,
  // model
  ShapeMismatch,
  NonFiniteActivation,
  ZeroLigandTokens,
  ZeroProteinTokens,
  NonFiniteGradient,
  // losses
  NonPositiveSigma,
  DimensionMismatch,
  // sampler / metrics
  EmptyClass,
  NoPositives,
  SingleClass,
  // pipeline
  ConfigInvalid,
  IoError,
  DuplicateId,
  DivergenceDetected,
};

const char* err_name(Err code);

class Error : public std::runtime_error {
 public:
  Error(Err code, const std::string& msg)
      : std::runtime_error(std::string(err_name(code)) + ": " + msg), code_(code) {}
  Err code() const { return code_; }

 private:
  Err code_;
};

// FNV-1a, 64-bit. Used for fingerprint hashing and config hashes; the byte
// stream fed to it is part of the file-format/bit-layout contract.
inline constexpr uint64_t kFnvOffset = 14695981039346656037ULL;
inline constexpr uint64_t kFnvPrime = 1099511628211ULL;

inline uint64_t fnv1a64(const uint8_t* data, size_t n, uint64_t h = kFnvOffset) {
  for (size_t i = 0; i < n; ++i) {
    h ^= data[i];
    h *= kFnvPrime;
  }
  return h;
}

inline uint64_t fnv1a64(const std::string& s) {
  return fnv1a64(reinterpret_cast<const uint8_t*>(s.data()), s.size());
}

std::string to_hex(uint64_t v);

// Deterministic RNG. mt19937_64's raw stream is pinned by the standard; the
// uniform/normal/shuffle transforms are implemented here rather than with
// std distributions so that sequences are identical across standard
// libraries.
class Rng {
 public:
  explicit Rng(uint64_t seed) : eng_(seed) {}

  uint64_t next_u64() { return eng_(); }

  // [0, 1)
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Box-Muller; second value of each pair is cached.
  double normal();

  // [0, n); small modulo bias is acceptable for sampling duties here
  uint64_t below(uint64_t n) { return n == 0 ? 0 : next_u64() % n; }

  int range_int(int lo, int hi) {  // inclusive
    return lo + static_cast<int>(below(static_cast<uint64_t>(hi - lo + 1)));
  }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (size_t i = v.size(); i > 1; --i) {
      size_t j = static_cast<size_t>(below(i));
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  std::mt19937_64 eng_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

// Runs fn(begin, end) over contiguous chunks of [0, n). Results must be
// written to disjoint, preallocated slots so the outcome is independent of
// the worker count.
void parallel_for(size_t n, int workers, const std::function<void(size_t, size_t)>& fn);

}  // namespace aura
