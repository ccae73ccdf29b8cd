#include "aurascreen/chem.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace aura::chem {

namespace {

struct ElementInfo {
  const char* symbol;
  int z;
  double weight;  // IUPAC 2021 standard atomic weights, 3 decimal places
};

// Covers the organic subset plus elements that show up in screening
// libraries (salt counterions, metalloids, common heavy atoms).
constexpr std::array<ElementInfo, 55> kElements{{
    {"H", 1, 1.008},    {"He", 2, 4.003},   {"Li", 3, 6.940},
    {"Be", 4, 9.012},   {"B", 5, 10.811},   {"C", 6, 12.011},
    {"N", 7, 14.007},   {"O", 8, 15.999},   {"F", 9, 18.998},
    {"Ne", 10, 20.180}, {"Na", 11, 22.990}, {"Mg", 12, 24.305},
    {"Al", 13, 26.982}, {"Si", 14, 28.085}, {"P", 15, 30.974},
    {"S", 16, 32.060},  {"Cl", 17, 35.450}, {"Ar", 18, 39.948},
    {"K", 19, 39.098},  {"Ca", 20, 40.078}, {"Ti", 22, 47.867},
    {"V", 23, 50.942},  {"Cr", 24, 51.996}, {"Mn", 25, 54.938},
    {"Fe", 26, 55.845}, {"Co", 27, 58.933}, {"Ni", 28, 58.693},
    {"Cu", 29, 63.546}, {"Zn", 30, 65.380}, {"Ga", 31, 69.723},
    {"Ge", 32, 72.630}, {"As", 33, 74.922}, {"Se", 34, 78.971},
    {"Br", 35, 79.904}, {"Rb", 37, 85.468}, {"Sr", 38, 87.620},
    {"Mo", 42, 95.950}, {"Ru", 44, 101.070}, {"Rh", 45, 102.906},
    {"Pd", 46, 106.420}, {"Ag", 47, 107.868}, {"Cd", 48, 112.414},
    {"In", 49, 114.818}, {"Sn", 50, 118.710}, {"Sb", 51, 121.760},
    {"Te", 52, 127.600}, {"I", 53, 126.904}, {"Xe", 54, 131.293},
    {"Cs", 55, 132.905}, {"Ba", 56, 137.327}, {"W", 74, 183.840},
    {"Pt", 78, 195.084}, {"Au", 79, 196.967}, {"Hg", 80, 200.592},
    {"Pb", 82, 207.200},
}};

const std::map<std::string, int>& symbol_table() {
  static const std::map<std::string, int> table = [] {
    std::map<std::string, int> t;
    for (const auto& e : kElements) t[e.symbol] = e.z;
    return t;
  }();
  return table;
}

double bond_order_value(BondOrder o) {
  switch (o) {
    case BondOrder::Single: return 1.0;
    case BondOrder::Double: return 2.0;
    case BondOrder::Triple: return 3.0;
    case BondOrder::Aromatic: return 1.5;
  }
  return 1.0;
}

// default valences used for implicit-H fill on organic-subset atoms
const std::vector<int>& default_valences(int z) {
  static const std::vector<int> vB{3}, vC{4}, vN{3}, vO{2}, vP{3, 5},
      vS{2, 4, 6}, vHal{1}, vNone{};
  switch (z) {
    case 5: return vB;
    case 6: return vC;
    case 7: return vN;
    case 8: return vO;
    case 15: return vP;
    case 16: return vS;
    case 9:
    case 17:
    case 35:
    case 53: return vHal;
    default: return vNone;
  }
}

}  // namespace

int element_from_symbol(const std::string& symbol) {
  auto it = symbol_table().find(symbol);
  if (it == symbol_table().end())
    throw Error(Err::UnknownAtomSymbol, "'" + symbol + "'");
  return it->second;
}

const std::string& symbol_from_element(int z) {
  static const std::map<int, std::string> rev = [] {
    std::map<int, std::string> t;
    for (const auto& e : kElements) t[e.z] = e.symbol;
    return t;
  }();
  auto it = rev.find(z);
  if (it == rev.end())
    throw Error(Err::UnknownAtomSymbol, "element " + std::to_string(z));
  return it->second;
}

double atomic_weight(int z) {
  static const std::map<int, double> w = [] {
    std::map<int, double> t;
    for (const auto& e : kElements) t[e.z] = e.weight;
    return t;
  }();
  auto it = w.find(z);
  if (it == w.end())
    throw Error(Err::UnknownAtomSymbol, "no weight for element " + std::to_string(z));
  return it->second;
}

bool in_organic_subset(int z) {
  switch (z) {
    case 5: case 6: case 7: case 8: case 9:
    case 15: case 16: case 17: case 35: case 53:
      return true;
    default:
      return false;
  }
}

// ---------------------------------------------------------------------------
// parser

namespace {

struct Parser {
  const std::string& text;
  size_t pos = 0;
  Molecule mol;
  std::vector<int> branch_stack;
  int prev = -1;
  std::optional<BondOrder> pending;
  // bonds created without an explicit symbol between two aromatic atoms;
  // demoted to single later if they turn out not to lie on a ring
  std::vector<bool> bond_implicit_aromatic;
  struct OpenRing {
    int atom;
    std::optional<BondOrder> order;
  };
  std::map<int, OpenRing> open_rings;

  explicit Parser(const std::string& t) : text(t) {}

  [[noreturn]] void fail(Err code, const std::string& what) const {
    throw Error(code, what + " at position " + std::to_string(pos) + " in '" + text + "'");
  }

  bool has_bond_between(int a, int b) const {
    for (const auto& bond : mol.bonds)
      if ((bond.a == a && bond.b == b) || (bond.a == b && bond.b == a)) return true;
    return false;
  }

  void add_bond(int a, int b, std::optional<BondOrder> explicit_order) {
    if (a == b) fail(Err::BondConflict, "bond from atom to itself");
    if (has_bond_between(a, b)) fail(Err::DuplicateBond, "second bond between same atom pair");
    Bond bond;
    bond.a = a;
    bond.b = b;
    bool implicit_aromatic = false;
    if (explicit_order) {
      bond.order = *explicit_order;
    } else if (mol.atoms[a].aromatic && mol.atoms[b].aromatic) {
      bond.order = BondOrder::Aromatic;
      implicit_aromatic = true;
    } else {
      bond.order = BondOrder::Single;
    }
    mol.bonds.push_back(bond);
    bond_implicit_aromatic.push_back(implicit_aromatic);
  }

  int add_atom(Atom atom) {
    mol.atoms.push_back(atom);
    int idx = static_cast<int>(mol.atoms.size()) - 1;
    if (prev >= 0) {
      add_bond(prev, idx, pending);
    } else if (pending) {
      fail(Err::DanglingBond, "bond symbol with no preceding atom");
    }
    pending.reset();
    prev = idx;
    return idx;
  }

  void handle_ring(int num) {
    if (prev < 0) fail(Err::DanglingBond, "ring closure digit before any atom");
    auto it = open_rings.find(num);
    if (it == open_rings.end()) {
      open_rings[num] = OpenRing{prev, pending};
      pending.reset();
      return;
    }
    OpenRing open = it->second;
    open_rings.erase(it);
    std::optional<BondOrder> order;
    if (open.order && pending && *open.order != *pending)
      fail(Err::BondConflict, "ring closure bond symbols disagree");
    if (open.order) order = open.order;
    if (pending) order = pending;
    pending.reset();
    add_bond(open.atom, prev, order);
  }

  Atom parse_bracket() {
    ++pos;  // consume '['
    Atom atom;
    atom.bracket = true;
    size_t iso_start = pos;
    while (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos]))) ++pos;
    if (pos > iso_start) atom.isotope = std::stoi(text.substr(iso_start, pos - iso_start));
    if (pos >= text.size()) fail(Err::BadBracket, "unterminated bracket atom");

    std::string sym;
    char c = text[pos];
    if (std::isupper(static_cast<unsigned char>(c))) {
      sym += c;
      ++pos;
      if (pos < text.size() && std::islower(static_cast<unsigned char>(text[pos]))) {
        std::string two = sym + text[pos];
        if (symbol_table().count(two)) {
          sym = two;
          ++pos;
        }
      }
    } else if (std::islower(static_cast<unsigned char>(c))) {
      // aromatic bracket atom: c n o p s b se as
      sym += c;
      ++pos;
      if (c == 's' && pos < text.size() && text[pos] == 'e') {
        sym += 'e';
        ++pos;
      } else if (c == 'a') {
        if (pos < text.size() && text[pos] == 's') {
          sym += 's';
          ++pos;
        } else {
          fail(Err::UnknownAtomSymbol, "'a'");
        }
      }
      static const std::set<std::string> aromatic_ok{"b", "c", "n", "o", "p", "s", "se", "as"};
      if (!aromatic_ok.count(sym)) fail(Err::UnknownAtomSymbol, "'" + sym + "'");
      atom.aromatic = true;
      std::string upper = sym;
      upper[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(upper[0])));
      sym = upper;
    } else {
      fail(Err::BadBracket, "expected element symbol");
    }
    atom.element = element_from_symbol(sym);

    while (pos < text.size() && text[pos] == '@') ++pos;  // chirality discarded

    if (pos < text.size() && text[pos] == 'H') {
      ++pos;
      int h = 1;
      size_t h_start = pos;
      while (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos]))) ++pos;
      if (pos > h_start) h = std::stoi(text.substr(h_start, pos - h_start));
      atom.explicit_h = h;
    }

    if (pos < text.size() && (text[pos] == '+' || text[pos] == '-')) {
      char sign = text[pos];
      ++pos;
      int magnitude = 1;
      size_t d_start = pos;
      while (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos]))) ++pos;
      if (pos > d_start) {
        magnitude = std::stoi(text.substr(d_start, pos - d_start));
      } else {
        while (pos < text.size() && text[pos] == sign) {
          ++magnitude;
          ++pos;
        }
      }
      atom.formal_charge = sign == '+' ? magnitude : -magnitude;
    }

    if (pos < text.size() && text[pos] == ':') {  // atom map, discarded
      ++pos;
      while (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos]))) ++pos;
    }

    if (pos >= text.size() || text[pos] != ']') fail(Err::BadBracket, "expected ']'");
    ++pos;
    return atom;
  }

  void run() {
    while (pos < text.size()) {
      char c = text[pos];
      switch (c) {
        case '(':
          if (prev < 0) fail(Err::UnbalancedParenthesis, "branch before any atom");
          if (pending) fail(Err::DanglingBond, "bond symbol before '('");
          branch_stack.push_back(prev);
          ++pos;
          break;
        case ')':
          if (branch_stack.empty()) fail(Err::UnbalancedParenthesis, "unmatched ')'");
          if (pending) fail(Err::DanglingBond, "bond symbol before ')'");
          prev = branch_stack.back();
          branch_stack.pop_back();
          ++pos;
          break;
        case '-': case '/': case '\\':
          if (pending) fail(Err::BondConflict, "two consecutive bond symbols");
          pending = BondOrder::Single;
          ++pos;
          break;
        case '=':
          if (pending) fail(Err::BondConflict, "two consecutive bond symbols");
          pending = BondOrder::Double;
          ++pos;
          break;
        case '#':
          if (pending) fail(Err::BondConflict, "two consecutive bond symbols");
          pending = BondOrder::Triple;
          ++pos;
          break;
        case ':':
          if (pending) fail(Err::BondConflict, "two consecutive bond symbols");
          pending = BondOrder::Aromatic;
          ++pos;
          break;
        case '.':
          if (pending) fail(Err::DanglingBond, "bond symbol before '.'");
          prev = -1;
          ++pos;
          break;
        case '%': {
          if (pos + 2 >= text.size() ||
              !std::isdigit(static_cast<unsigned char>(text[pos + 1])) ||
              !std::isdigit(static_cast<unsigned char>(text[pos + 2])))
            fail(Err::UnexpectedCharacter, "'%' needs two digits");
          int num = (text[pos + 1] - '0') * 10 + (text[pos + 2] - '0');
          pos += 3;
          handle_ring(num);
          break;
        }
        case '[': {
          Atom atom = parse_bracket();
          add_atom(atom);
          break;
        }
        default: {
          if (std::isdigit(static_cast<unsigned char>(c))) {
            ++pos;
            handle_ring(c - '0');
            break;
          }
          Atom atom;
          if (std::isupper(static_cast<unsigned char>(c))) {
            std::string sym(1, c);
            if (pos + 1 < text.size() && std::islower(static_cast<unsigned char>(text[pos + 1]))) {
              std::string two = sym + text[pos + 1];
              if (two == "Cl" || two == "Br") sym = two;
            }
            atom.element = element_from_symbol(sym);
            if (!in_organic_subset(atom.element))
              fail(Err::UnknownAtomSymbol, "'" + sym + "' must be bracketed");
            pos += sym.size();
          } else if (c == 'b' || c == 'c' || c == 'n' || c == 'o' || c == 'p' || c == 's') {
            atom.aromatic = true;
            std::string sym(1, static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
            atom.element = element_from_symbol(sym);
            ++pos;
          } else {
            fail(Err::UnexpectedCharacter, std::string("'") + c + "'");
          }
          add_atom(atom);
          break;
        }
      }
    }
    if (pending) fail(Err::DanglingBond, "trailing bond symbol");
    if (!branch_stack.empty()) fail(Err::UnbalancedParenthesis, "unclosed '('");
    if (!open_rings.empty())
      fail(Err::UnclosedRing,
           "ring digit " + std::to_string(open_rings.begin()->first) + " never closed");
    if (mol.atoms.empty()) fail(Err::EmptyInput, "no atoms");
  }
};

void build_adjacency(Molecule& mol) {
  mol.adjacency.assign(mol.atoms.size(), {});
  for (size_t i = 0; i < mol.bonds.size(); ++i) {
    mol.adjacency[static_cast<size_t>(mol.bonds[i].a)].push_back(static_cast<int>(i));
    mol.adjacency[static_cast<size_t>(mol.bonds[i].b)].push_back(static_cast<int>(i));
  }
}

int count_fragments(const Molecule& mol) {
  int n = static_cast<int>(mol.atoms.size());
  std::vector<int> comp(static_cast<size_t>(n), -1);
  int fragments = 0;
  for (int start = 0; start < n; ++start) {
    if (comp[static_cast<size_t>(start)] >= 0) continue;
    std::vector<int> stack{start};
    comp[static_cast<size_t>(start)] = fragments;
    while (!stack.empty()) {
      int u = stack.back();
      stack.pop_back();
      for (int bi : mol.adjacency[static_cast<size_t>(u)]) {
        int v = mol.other_end(bi, u);
        if (comp[static_cast<size_t>(v)] < 0) {
          comp[static_cast<size_t>(v)] = fragments;
          stack.push_back(v);
        }
      }
    }
    ++fragments;
  }
  return fragments;
}

// a bond is a ring bond iff it is not a bridge (iterative Tarjan)
void mark_ring_bonds(Molecule& mol) {
  int n = static_cast<int>(mol.atoms.size());
  std::vector<int> disc(static_cast<size_t>(n), -1), low(static_cast<size_t>(n), 0);
  int timer = 0;
  struct Frame {
    int u;
    int parent_bond;
    size_t next_edge;
  };
  for (int root = 0; root < n; ++root) {
    if (disc[static_cast<size_t>(root)] >= 0) continue;
    std::vector<Frame> stack;
    disc[static_cast<size_t>(root)] = low[static_cast<size_t>(root)] = timer++;
    stack.push_back({root, -1, 0});
    while (!stack.empty()) {
      Frame& f = stack.back();
      size_t deg = mol.adjacency[static_cast<size_t>(f.u)].size();
      if (f.next_edge < deg) {
        int bi = mol.adjacency[static_cast<size_t>(f.u)][f.next_edge++];
        if (bi == f.parent_bond) continue;
        int v = mol.other_end(bi, f.u);
        if (disc[static_cast<size_t>(v)] < 0) {
          disc[static_cast<size_t>(v)] = low[static_cast<size_t>(v)] = timer++;
          stack.push_back({v, bi, 0});
        } else {
          low[static_cast<size_t>(f.u)] =
              std::min(low[static_cast<size_t>(f.u)], disc[static_cast<size_t>(v)]);
          mol.bonds[static_cast<size_t>(bi)].in_ring = true;  // back edge
        }
      } else {
        stack.pop_back();
        if (!stack.empty()) {
          Frame& p = stack.back();
          low[static_cast<size_t>(p.u)] =
              std::min(low[static_cast<size_t>(p.u)], low[static_cast<size_t>(f.u)]);
          if (low[static_cast<size_t>(f.u)] > disc[static_cast<size_t>(p.u)]) {
            // bridge: stays non-ring
          } else {
            mol.bonds[static_cast<size_t>(f.parent_bond)].in_ring = true;
          }
        }
      }
    }
  }
  for (const auto& b : mol.bonds) {
    if (b.in_ring) {
      mol.atoms[static_cast<size_t>(b.a)].ring_member = true;
      mol.atoms[static_cast<size_t>(b.b)].ring_member = true;
    }
  }
}

void fill_implicit_hydrogens(Molecule& mol) {
  for (size_t i = 0; i < mol.atoms.size(); ++i) {
    Atom& atom = mol.atoms[i];
    atom.implicit_h = 0;
    if (atom.bracket) continue;  // bracket atoms carry explicit H only
    const auto& valences = default_valences(atom.element);
    if (valences.empty()) continue;
    double order_sum = 0.0;
    int aromatic_bonds = 0;
    for (int bi : mol.adjacency[i]) {
      BondOrder o = mol.bonds[static_cast<size_t>(bi)].order;
      if (o == BondOrder::Aromatic) {
        order_sum += 1.0;
        ++aromatic_bonds;
      } else {
        order_sum += bond_order_value(o);
      }
    }
    int sum = static_cast<int>(std::ceil(order_sum - 1e-9));
    if (atom.aromatic) {
      // carbon/nitrogen/boron/phosphorus aromatics contribute one pi bond;
      // aromatic O/S use both valences for sigma bonds
      bool pi = atom.element == 6 || atom.element == 7 || atom.element == 5 ||
                atom.element == 15;
      (void)aromatic_bonds;
      if (pi) sum += 1;
    }
    int chosen = -1;
    for (int v : valences) {
      if (v >= sum) {
        chosen = v;
        break;
      }
    }
    atom.implicit_h = chosen < 0 ? 0 : chosen - sum;
  }
}

}  // namespace

void finalize_graph(Molecule& mol) {
  build_adjacency(mol);
  mol.fragment_count = count_fragments(mol);
  for (auto& bond : mol.bonds) bond.in_ring = false;
  for (auto& atom : mol.atoms) atom.ring_member = false;
  mark_ring_bonds(mol);
  fill_implicit_hydrogens(mol);
}

Molecule parse_smiles(const std::string& text) {
  if (text.empty()) throw Error(Err::EmptyInput, "empty SMILES");
  Parser parser(text);
  parser.run();
  Molecule mol = std::move(parser.mol);
  mol.source_smiles = text;
  build_adjacency(mol);
  mol.fragment_count = count_fragments(mol);
  mark_ring_bonds(mol);
  // an unmarked bond between two aromatic atoms is aromatic only when it lies
  // on a ring (biphenyl-style bridges are single)
  for (size_t i = 0; i < mol.bonds.size(); ++i) {
    if (parser.bond_implicit_aromatic[i] && !mol.bonds[i].in_ring)
      mol.bonds[i].order = BondOrder::Single;
  }
  for (const auto& b : mol.bonds) {
    if (b.order == BondOrder::Aromatic &&
        (!mol.atoms[static_cast<size_t>(b.a)].aromatic ||
         !mol.atoms[static_cast<size_t>(b.b)].aromatic))
      throw Error(Err::BondConflict, "aromatic bond between non-aromatic atoms in '" + text + "'");
  }
  fill_implicit_hydrogens(mol);
  return mol;
}

// ---------------------------------------------------------------------------
// valence

std::optional<int> validate_valence(const Molecule& mol) {
  for (size_t i = 0; i < mol.atoms.size(); ++i) {
    const Atom& atom = mol.atoms[i];
    const auto& valences = default_valences(atom.element);
    bool check_h = atom.element == 1;
    if (valences.empty() && !check_h) continue;  // unchecked elements pass

    double order_sum = 0.0;
    for (int bi : mol.adjacency[i]) {
      BondOrder o = mol.bonds[static_cast<size_t>(bi)].order;
      order_sum += o == BondOrder::Aromatic ? 1.0 : bond_order_value(o);
    }
    int base = static_cast<int>(std::ceil(order_sum - 1e-9)) + atom.total_h();

    std::vector<int> allowed;
    auto push_allowed = [&allowed](int v) {
      if (v >= 0) allowed.push_back(v);
    };
    int charge = atom.formal_charge;
    if (check_h) {
      push_allowed(1 - std::abs(charge));
    } else {
      for (int v : valences) {
        if (charge == 0) {
          push_allowed(v);
        } else if (atom.element == 6) {
          push_allowed(v - std::abs(charge));  // carbocation and carbanion
        } else if (atom.element == 5) {
          push_allowed(v - charge);  // borate anion gains a bond
        } else {
          push_allowed(v + charge);  // N/O/S/P/halogens
        }
      }
    }
    if (allowed.empty()) return static_cast<int>(i);

    // aromatic atoms may contribute zero or one pi bond
    bool ok = false;
    int options = atom.aromatic ? 2 : 1;
    for (int add = 0; add < options && !ok; ++add)
      for (int v : allowed)
        if (base + add == v) ok = true;
    if (!ok) return static_cast<int>(i);
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// descriptors

double molecular_weight(const Molecule& mol) {
  double sum = 0.0;
  const double h = atomic_weight(1);
  for (const auto& atom : mol.atoms)
    sum += atomic_weight(atom.element) + h * atom.total_h();
  return sum;
}

int hbd_count(const Molecule& mol) {
  int n = 0;
  for (const auto& atom : mol.atoms)
    if ((atom.element == 7 || atom.element == 8) && atom.total_h() >= 1) ++n;
  return n;
}

int hba_count(const Molecule& mol) {
  int n = 0;
  for (const auto& atom : mol.atoms)
    if (atom.element == 7 || atom.element == 8) ++n;
  return n;
}

int rotatable_bond_count(const Molecule& mol) {
  int n = 0;
  for (const auto& bond : mol.bonds) {
    if (bond.order != BondOrder::Single || bond.in_ring) continue;
    if (mol.heavy_degree(bond.a) >= 2 && mol.heavy_degree(bond.b) >= 2) ++n;
  }
  return n;
}

int ring_count(const Molecule& mol) {
  return static_cast<int>(mol.bonds.size()) - static_cast<int>(mol.atoms.size()) +
         mol.fragment_count;
}

double aromatic_proportion(const Molecule& mol) {
  if (mol.atoms.empty()) return 0.0;
  int aromatic = 0;
  for (const auto& atom : mol.atoms)
    if (atom.aromatic) ++aromatic;
  return static_cast<double>(aromatic) / static_cast<double>(mol.atoms.size());
}

// ---------------------------------------------------------------------------
// writer

namespace {

// Plans ring-closure digits with one DFS, then serializes with an identical
// DFS (same rng would diverge, so the plan stores everything needed).
struct PlannedWriter {
  const Molecule& mol;
  std::vector<std::vector<std::pair<std::string, int>>> closure_tokens;  // per atom
  std::vector<std::vector<int>> tree_edges;  // per atom: child bond order
  std::vector<int> roots;

  PlannedWriter(const Molecule& m, Rng& rng) : mol(m) {
    size_t n = m.atoms.size();
    closure_tokens.assign(n, {});
    tree_edges.assign(n, {});
    std::vector<bool> visited(n, false);
    std::vector<bool> used(m.bonds.size(), false);
    std::set<int> free_digits;
    for (int d = 1; d <= 99; ++d) free_digits.insert(d);
    std::map<int, int> close_at;  // bond -> digit, freed when closing atom planned

    std::vector<int> order(n);
    for (size_t i = 0; i < n; ++i) order[i] = static_cast<int>(i);
    rng.shuffle(order);

    for (int root : order) {
      if (visited[static_cast<size_t>(root)]) continue;
      roots.push_back(root);
      plan_dfs(root, -1, visited, used, free_digits, rng);
    }
  }

  std::string digit_token(int d) const {
    if (d < 10) return std::to_string(d);
    std::string s = std::to_string(d);
    return "%" + s;
  }

  std::string bond_symbol(int bi) const {
    const Bond& bond = mol.bonds[static_cast<size_t>(bi)];
    bool both_aromatic = mol.atoms[static_cast<size_t>(bond.a)].aromatic &&
                         mol.atoms[static_cast<size_t>(bond.b)].aromatic;
    switch (bond.order) {
      case BondOrder::Single: return both_aromatic ? "-" : "";
      case BondOrder::Double: return "=";
      case BondOrder::Triple: return "#";
      case BondOrder::Aromatic: return both_aromatic && bond.in_ring ? "" : ":";
    }
    return "";
  }

  void plan_dfs(int u, int incoming_bond, std::vector<bool>& visited, std::vector<bool>& used,
                std::set<int>& free_digits, Rng& rng) {
    visited[static_cast<size_t>(u)] = true;
    std::vector<int> edges = mol.adjacency[static_cast<size_t>(u)];
    rng.shuffle(edges);
    for (int bi : edges) {
      if (used[static_cast<size_t>(bi)] || bi == incoming_bond) continue;
      int v = mol.other_end(bi, u);
      if (visited[static_cast<size_t>(v)]) {
        // ring closure: opening token (with bond symbol) goes at v, closing at
        // u; every closure gets a fresh digit so interleaved rings never share
        if (free_digits.empty()) throw Error(Err::IoError, "more than 99 ring closures");
        used[static_cast<size_t>(bi)] = true;
        int d = *free_digits.begin();
        free_digits.erase(free_digits.begin());
        closure_tokens[static_cast<size_t>(v)].push_back({bond_symbol(bi) + digit_token(d), bi});
        closure_tokens[static_cast<size_t>(u)].push_back({digit_token(d), bi});
      }
    }
    for (int bi : edges) {
      if (used[static_cast<size_t>(bi)] || bi == incoming_bond) continue;
      int v = mol.other_end(bi, u);
      if (visited[static_cast<size_t>(v)]) continue;
      used[static_cast<size_t>(bi)] = true;
      tree_edges[static_cast<size_t>(u)].push_back(bi);
      plan_dfs(v, bi, visited, used, free_digits, rng);
    }
  }

  std::string atom_token(int idx) const {
    const Atom& atom = mol.atoms[static_cast<size_t>(idx)];
    std::string sym = symbol_from_element(atom.element);
    if (atom.aromatic)
      for (auto& ch : sym) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
    bool need_bracket = atom.bracket || atom.formal_charge != 0 || atom.isotope.has_value() ||
                        atom.explicit_h.has_value() || !in_organic_subset(atom.element) ||
                        (atom.aromatic && sym.size() > 1);
    if (!need_bracket) return sym;
    std::string t = "[";
    if (atom.isotope) t += std::to_string(*atom.isotope);
    t += sym;
    int h = atom.explicit_h.value_or(0);
    if (h == 1) t += "H";
    if (h > 1) t += "H" + std::to_string(h);
    int q = atom.formal_charge;
    if (q == 1) t += "+";
    if (q == -1) t += "-";
    if (q > 1) t += "+" + std::to_string(q);
    if (q < -1) t += "-" + std::to_string(-q);
    t += "]";
    return t;
  }

  void serialize(int u, int incoming_bond, std::string& out) const {
    if (incoming_bond >= 0) out += bond_symbol(incoming_bond);
    out += atom_token(u);
    for (const auto& [token, bond] : closure_tokens[static_cast<size_t>(u)]) {
      (void)bond;
      out += token;
    }
    const auto& children = tree_edges[static_cast<size_t>(u)];
    for (size_t k = 0; k < children.size(); ++k) {
      int bi = children[k];
      int v = mol.other_end(bi, u);
      bool last = k + 1 == children.size();
      if (!last) out += "(";
      serialize(v, bi, out);
      if (!last) out += ")";
    }
  }

  std::string render() const {
    std::string out;
    for (size_t i = 0; i < roots.size(); ++i) {
      if (i) out += ".";
      serialize(roots[i], -1, out);
    }
    return out;
  }
};

}  // namespace

std::string write_smiles(const Molecule& mol, Rng& rng) {
  if (mol.atoms.empty()) throw Error(Err::EmptyInput, "empty molecule");
  PlannedWriter plan(mol, rng);
  return plan.render();
}

// ---------------------------------------------------------------------------
// library file

std::vector<LibraryRecord> load_library(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(Err::IoError, "cannot open library file '" + path + "'");
  std::vector<LibraryRecord> records;
  std::set<std::string> seen;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    size_t tab = line.find('\t');
    if (tab == std::string::npos)
      throw Error(Err::IoError,
                  "library line " + std::to_string(line_no) + " has no tab separator");
    LibraryRecord rec;
    rec.smiles = line.substr(0, tab);
    rec.id = line.substr(tab + 1);
    if (rec.id.empty() || rec.smiles.empty())
      throw Error(Err::IoError, "library line " + std::to_string(line_no) + " is incomplete");
    if (!seen.insert(rec.id).second)
      throw Error(Err::DuplicateId, "compound id '" + rec.id + "' appears twice");
    records.push_back(std::move(rec));
  }
  return records;
}

void save_library(const std::string& path, const std::vector<LibraryRecord>& records) {
  std::ofstream out(path);
  if (!out) throw Error(Err::IoError, "cannot write library file '" + path + "'");
  for (const auto& rec : records) out << rec.smiles << '\t' << rec.id << '\n';
}

}  // namespace aura::chem
