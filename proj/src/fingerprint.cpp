#include "aurascreen/fingerprint.hpp"

#include <algorithm>
#include <bit>
#include <fstream>

namespace aura::fp {

namespace {

void append_u8(std::vector<uint8_t>& buf, uint8_t v) { buf.push_back(v); }

void append_u32(std::vector<uint8_t>& buf, uint32_t v) {
  for (int i = 0; i < 4; ++i) buf.push_back(static_cast<uint8_t>((v >> (8 * i)) & 0xff));
}

void append_u64(std::vector<uint8_t>& buf, uint64_t v) {
  for (int i = 0; i < 8; ++i) buf.push_back(static_cast<uint8_t>((v >> (8 * i)) & 0xff));
}

uint64_t hash_initial_invariant(const chem::Molecule& mol, int idx) {
  const chem::Atom& atom = mol.atoms[static_cast<size_t>(idx)];
  std::vector<uint8_t> buf;
  buf.reserve(20);
  append_u32(buf, static_cast<uint32_t>(atom.element));
  append_u32(buf, static_cast<uint32_t>(mol.heavy_degree(idx)));
  append_u32(buf, static_cast<uint32_t>(atom.total_h()));
  append_u32(buf, static_cast<uint32_t>(atom.formal_charge));
  append_u8(buf, atom.ring_member ? 1 : 0);
  append_u8(buf, atom.aromatic ? 1 : 0);
  return fnv1a64(buf.data(), buf.size());
}

uint32_t bond_code(chem::BondOrder order) {
  switch (order) {
    case chem::BondOrder::Single: return 1;
    case chem::BondOrder::Double: return 2;
    case chem::BondOrder::Triple: return 3;
    case chem::BondOrder::Aromatic: return 4;
  }
  return 1;
}

}  // namespace

int Fingerprint::popcount() const {
  int n = 0;
  for (uint64_t w : words_) n += std::popcount(w);
  return n;
}

std::string Fingerprint::to_hex() const {
  static const char* digits = "0123456789abcdef";
  std::string out;
  out.reserve(static_cast<size_t>(width_) / 4);
  for (int byte = 0; byte < width_ / 8; ++byte) {
    uint8_t b = static_cast<uint8_t>((words_[static_cast<size_t>(byte) / 8] >> ((byte % 8) * 8)) & 0xff);
    out += digits[b >> 4];
    out += digits[b & 0xf];
  }
  return out;
}

Fingerprint Fingerprint::from_hex(const std::string& hex) {
  auto nibble = [](char c) -> int {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    throw Error(Err::IoError, "bad hex digit in fingerprint");
  };
  if (hex.size() % 16 != 0) throw Error(Err::IoError, "fingerprint hex length not a word multiple");
  Fingerprint fp(static_cast<int>(hex.size()) * 4);
  for (size_t byte = 0; byte < hex.size() / 2; ++byte) {
    uint8_t b = static_cast<uint8_t>((nibble(hex[2 * byte]) << 4) | nibble(hex[2 * byte + 1]));
    fp.words_[byte / 8] |= static_cast<uint64_t>(b) << ((byte % 8) * 8);
  }
  return fp;
}

Fingerprint ecfp(const chem::Molecule& mol, int radius, int width) {
  if (width <= 0 || (width & (width - 1)) != 0 || width % 64 != 0)
    throw Error(Err::WidthMismatch, "width must be a positive power of two (>= 64)");
  Fingerprint fp(width);
  size_t n = mol.atoms.size();
  std::vector<uint64_t> inv(n), next(n);
  for (size_t i = 0; i < n; ++i) {
    inv[i] = hash_initial_invariant(mol, static_cast<int>(i));
    fp.set(static_cast<int>(inv[i] % static_cast<uint64_t>(width)));
  }
  for (int r = 1; r <= radius; ++r) {
    for (size_t i = 0; i < n; ++i) {
      std::vector<std::pair<uint32_t, uint64_t>> nbrs;
      nbrs.reserve(mol.adjacency[i].size());
      for (int bi : mol.adjacency[i]) {
        int v = mol.other_end(bi, static_cast<int>(i));
        nbrs.emplace_back(bond_code(mol.bonds[static_cast<size_t>(bi)].order),
                          inv[static_cast<size_t>(v)]);
      }
      std::sort(nbrs.begin(), nbrs.end());
      std::vector<uint8_t> buf;
      buf.reserve(8 + nbrs.size() * 12);
      append_u64(buf, inv[i]);
      for (const auto& [code, nbr_inv] : nbrs) {
        append_u32(buf, code);
        append_u64(buf, nbr_inv);
      }
      next[i] = fnv1a64(buf.data(), buf.size());
      fp.set(static_cast<int>(next[i] % static_cast<uint64_t>(width)));
    }
    std::swap(inv, next);
  }
  return fp;
}

double tanimoto(const Fingerprint& a, const Fingerprint& b) {
  if (a.width() != b.width())
    throw Error(Err::WidthMismatch, std::to_string(a.width()) + " vs " + std::to_string(b.width()));
  int inter = 0, uni = 0;
  const auto& wa = a.words();
  const auto& wb = b.words();
  for (size_t i = 0; i < wa.size(); ++i) {
    inter += std::popcount(wa[i] & wb[i]);
    uni += std::popcount(wa[i] | wb[i]);
  }
  if (uni == 0) return 1.0;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

void save_cache(const std::string& path, const std::vector<CacheEntry>& entries) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Err::IoError, "cannot write fingerprint cache '" + path + "'");
  out.write("AFP1", 4);
  for (const auto& entry : entries) {
    uint16_t len = static_cast<uint16_t>(entry.id.size());
    uint8_t len_bytes[2] = {static_cast<uint8_t>(len & 0xff), static_cast<uint8_t>(len >> 8)};
    out.write(reinterpret_cast<const char*>(len_bytes), 2);
    out.write(entry.id.data(), len);
    uint32_t width = static_cast<uint32_t>(entry.fp.width());
    uint8_t width_bytes[4];
    for (int i = 0; i < 4; ++i) width_bytes[i] = static_cast<uint8_t>((width >> (8 * i)) & 0xff);
    out.write(reinterpret_cast<const char*>(width_bytes), 4);
    for (int byte = 0; byte < entry.fp.width() / 8; ++byte) {
      uint8_t b = static_cast<uint8_t>(
          (entry.fp.words()[static_cast<size_t>(byte) / 8] >> ((byte % 8) * 8)) & 0xff);
      out.write(reinterpret_cast<const char*>(&b), 1);
    }
  }
}

std::vector<CacheEntry> load_cache(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Err::IoError, "cannot open fingerprint cache '" + path + "'");
  char magic[4];
  if (!in.read(magic, 4) || std::string(magic, 4) != "AFP1")
    throw Error(Err::IoError, "bad fingerprint cache magic");
  std::vector<CacheEntry> entries;
  while (true) {
    uint8_t len_bytes[2];
    if (!in.read(reinterpret_cast<char*>(len_bytes), 2)) break;
    uint16_t len = static_cast<uint16_t>(len_bytes[0] | (len_bytes[1] << 8));
    std::string id(len, '\0');
    if (!in.read(id.data(), len)) throw Error(Err::IoError, "truncated cache record");
    uint8_t width_bytes[4];
    if (!in.read(reinterpret_cast<char*>(width_bytes), 4))
      throw Error(Err::IoError, "truncated cache record");
    uint32_t width = 0;
    for (int i = 0; i < 4; ++i) width |= static_cast<uint32_t>(width_bytes[i]) << (8 * i);
    Fingerprint fp(static_cast<int>(width));
    for (uint32_t byte = 0; byte < width / 8; ++byte) {
      uint8_t b;
      if (!in.read(reinterpret_cast<char*>(&b), 1)) throw Error(Err::IoError, "truncated cache record");
      fp.words()[byte / 8] |= static_cast<uint64_t>(b) << ((byte % 8) * 8);
    }
    entries.push_back({std::move(id), std::move(fp)});
  }
  return entries;
}

}  // namespace aura::fp
