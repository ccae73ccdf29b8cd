#include "aurascreen/common.hpp"

#include <cmath>

namespace aura {

const char* err_name(Err code) {
  switch (code) {
    case Err::EmptyInput: return "EmptyInput";
    case Err::UnbalancedParenthesis: return "UnbalancedParenthesis";
    case Err::UnclosedRing: return "UnclosedRing";
    case Err::UnknownAtomSymbol: return "UnknownAtomSymbol";
    case Err::ValenceViolation: return "ValenceViolation";
    case Err::DanglingBond: return "DanglingBond";
    case Err::DuplicateBond: return "DuplicateBond";
    case Err::BondConflict: return "BondConflict";
    case Err::BadBracket: return "BadBracket";
    case Err::UnexpectedCharacter: return "UnexpectedCharacter";
    case Err::WidthMismatch: return "WidthMismatch";
    case Err::EmptyLibrary: return "EmptyLibrary";
    case Err::MissingEmbedding: return "MissingEmbedding";
    case Err::EmptyIndex: return "EmptyIndex";
    case Err::ShapeMismatch: return "ShapeMismatch";
    case Err::NonFiniteActivation: return "NonFiniteActivation";
    case Err::ZeroLigandTokens: return "ZeroLigandTokens";
    case Err::ZeroProteinTokens: return "ZeroProteinTokens";
    case Err::NonFiniteGradient: return "NonFiniteGradient";
    case Err::NonPositiveSigma: return "NonPositiveSigma";
    case Err::DimensionMismatch: return "DimensionMismatch";
    case Err::EmptyClass: return "EmptyClass";
    case Err::NoPositives: return "NoPositives";
    case Err::SingleClass: return "SingleClass";
    case Err::ConfigInvalid: return "ConfigInvalid";
    case Err::IoError: return "IoError";
    case Err::DuplicateId: return "DuplicateId";
    case Err::DivergenceDetected: return "DivergenceDetected";
  }
  return "UnknownError";
}

std::string to_hex(uint64_t v) {
  static const char* digits = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<size_t>(i)] = digits[v & 0xf];
    v >>= 4;
  }
  return out;
}

double Rng::normal() {
  if (have_spare_) {
    have_spare_ = false;
    return spare_;
  }
  double u1 = uniform();
  double u2 = uniform();
  while (u1 <= 0.0) u1 = uniform();
  double r = std::sqrt(-2.0 * std::log(u1));
  double theta = 2.0 * 3.14159265358979323846 * u2;
  spare_ = r * std::sin(theta);
  have_spare_ = true;
  return r * std::cos(theta);
}

void parallel_for(size_t n, int workers, const std::function<void(size_t, size_t)>& fn) {
  if (n == 0) return;
  size_t w = workers <= 1 ? 1 : static_cast<size_t>(workers);
  if (w > n) w = n;
  if (w == 1) {
    fn(0, n);
    return;
  }
  std::vector<std::thread> threads;
  threads.reserve(w);
  size_t chunk = (n + w - 1) / w;
  for (size_t t = 0; t < w; ++t) {
    size_t begin = t * chunk;
    size_t end = begin + chunk < n ? begin + chunk : n;
    if (begin >= end) break;
    threads.emplace_back([&fn, begin, end] { fn(begin, end); });
  }
  for (auto& th : threads) th.join();
}

}  // namespace aura
