#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "aurascreen/chem.hpp"

namespace aura::fp {

class Fingerprint {
 public:
  Fingerprint() : Fingerprint(1024) {}
  explicit Fingerprint(int width) : width_(width), words_(static_cast<size_t>(width) / 64, 0) {}

  int width() const { return width_; }
  void set(int bit) { words_[static_cast<size_t>(bit) / 64] |= 1ULL << (bit % 64); }
  bool test(int bit) const {
    return (words_[static_cast<size_t>(bit) / 64] >> (bit % 64)) & 1ULL;
  }
  int popcount() const;
  const std::vector<uint64_t>& words() const { return words_; }
  std::vector<uint64_t>& words() { return words_; }

  bool operator==(const Fingerprint& other) const = default;

  // lowercase hex, LSB-first bit layout within little-endian bytes
  std::string to_hex() const;
  static Fingerprint from_hex(const std::string& hex);

 private:
  int width_;
  std::vector<uint64_t> words_;
};

// Morgan/ECFP bits. Initial atom invariant is the tuple (atomic number,
// heavy degree, total H count, formal charge, ring_member, aromatic); each
// iteration hashes (own invariant, sorted (bond code, neighbor invariant)
// list) with 64-bit FNV-1a over a little-endian byte encoding, so fingerprints
// are identical across implementations of this layout. Invariants from every
// radius 0..radius set a bit (hash mod width).
Fingerprint ecfp(const chem::Molecule& mol, int radius = 2, int width = 1024);

// |a AND b| / |a OR b|; 1.0 when both empty. Throws WidthMismatch.
double tanimoto(const Fingerprint& a, const Fingerprint& b);

// Cache file: magic "AFP1", then per record id length (u16) + id bytes +
// width (u32) + width/8 bytes, all little-endian.
struct CacheEntry {
  std::string id;
  Fingerprint fp;
};
void save_cache(const std::string& path, const std::vector<CacheEntry>& entries);
std::vector<CacheEntry> load_cache(const std::string& path);

}  // namespace aura::fp
