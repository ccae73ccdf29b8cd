#include "aurascreen/crippen.hpp"

#include <cmath>
#include <map>

namespace aura::chem {

const char* kCrippenTableVersion = "wc99-v1";

namespace {

// Wildman & Crippen (1999) atomic contributions. Values reproduce the
// reference toolkit's per-molecule sums (cross-checked in tests against
// frozen fixtures).
const std::map<std::string, double>& contribution_table() {
  static const std::map<std::string, double> table{
      {"C1", 0.1441},   {"C2", 0.0},      {"C3", -0.2035},  {"C4", -0.20511},
      {"C5", -0.2783},  {"C6", 0.1551},   {"C7", 0.001695}, {"C8", 0.08452},
      {"C9", -0.1444},  {"C10", -0.0516}, {"C11", 0.1193},  {"C12", -0.0967},
      {"C13", -0.54431},{"C14", 0.0},     {"C15", 0.245},   {"C16", 0.19801},
      {"C17", 0.0},     {"C18", 0.1581},  {"C19", 0.2955},  {"C20", 0.2713},
      {"C21", 0.136},   {"C22", 0.4619},  {"C23", 0.5437},  {"C24", 0.1893},
      {"C25", -0.8186}, {"C26", 0.264},   {"C27", 0.2148},  {"CS", 0.08129},
      {"N1", -1.019},   {"N2", -0.7096},  {"N3", -1.027},   {"N4", -0.5188},
      {"N5", 0.08387},  {"N6", 0.1836},   {"N7", -0.31871}, {"N8", -0.4458},
      {"N9", 0.015085}, {"N10", -1.95},   {"N11", -0.3239}, {"N12", -1.11901},
      {"N13", -0.3396}, {"N14", 0.2887},  {"NS", -0.48061},
      {"O1", 0.15519},  {"O2", -0.2893},  {"O3", -0.0684},  {"O4", -0.4195},
      {"O5", 0.03349},  {"O6", -0.3339},  {"O7", -1.189},   {"O8", 0.1788},
      {"O9", -0.15261}, {"O10", 0.11289}, {"O11", 0.4833},  {"O12", -1.32599},
      {"OS", -0.1188},
      {"F", 0.4202},    {"Cl", 0.6895},   {"Br", 0.84559},  {"I", 0.8857},
      {"Hal-", -2.996},
      {"P", 0.8612},
      {"S1", 0.6482},   {"S2", -0.0024},  {"S3", 0.62369},
      {"Me", -0.3808},  // B, Si
      {"H1", 0.123},    {"H2", -0.2677},  {"H3", 0.2142},   {"H4", 0.298},
      {"HS", 0.1125},
  };
  return table;
}

bool is_standard_het(int z) {
  switch (z) {
    case 7: case 8: case 9: case 15: case 16: case 17: case 35: case 53:
      return true;
    default:
      return false;
  }
}

struct AtomView {
  const Molecule& mol;
  int idx;

  const Atom& atom() const { return mol.atoms[static_cast<size_t>(idx)]; }
  int z() const { return atom().element; }
  bool aromatic() const { return atom().aromatic; }
  int h() const { return atom().total_h(); }
  int charge() const { return atom().formal_charge; }
  int degree() const { return mol.heavy_degree(idx); }

  bool sp3() const {
    for (int bi : mol.adjacency[static_cast<size_t>(idx)]) {
      BondOrder o = mol.bonds[static_cast<size_t>(bi)].order;
      if (o != BondOrder::Single) return false;
    }
    return !aromatic();
  }

  template <typename Fn>
  void each_neighbor(Fn&& fn) const {
    for (int bi : mol.adjacency[static_cast<size_t>(idx)]) {
      int v = mol.other_end(bi, idx);
      fn(mol.atoms[static_cast<size_t>(v)], mol.bonds[static_cast<size_t>(bi)], v);
    }
  }

  bool has_double_to(int element, bool aromatic_nbr) const {
    bool found = false;
    each_neighbor([&](const Atom& nbr, const Bond& bond, int) {
      if (bond.order == BondOrder::Double &&
          (element == 0 || nbr.element == element) && nbr.aromatic == aromatic_nbr)
        found = true;
    });
    return found;
  }

  bool has_double_bond() const {
    bool found = false;
    each_neighbor([&](const Atom&, const Bond& bond, int) {
      if (bond.order == BondOrder::Double) found = true;
    });
    return found;
  }

  bool has_triple_bond() const {
    bool found = false;
    each_neighbor([&](const Atom&, const Bond& bond, int) {
      if (bond.order == BondOrder::Triple) found = true;
    });
    return found;
  }

  bool any_aromatic_neighbor() const {
    bool found = false;
    each_neighbor([&](const Atom& nbr, const Bond&, int) {
      if (nbr.aromatic) found = true;
    });
    return found;
  }

  bool any_het_neighbor() const {
    bool found = false;
    each_neighbor([&](const Atom& nbr, const Bond&, int) {
      if (is_standard_het(nbr.element)) found = true;
    });
    return found;
  }

  bool any_weird_neighbor() const {  // not C, not H, not a standard het
    bool found = false;
    each_neighbor([&](const Atom& nbr, const Bond&, int) {
      if (nbr.element != 6 && nbr.element != 1 && !is_standard_het(nbr.element)) found = true;
    });
    return found;
  }
};

std::string type_carbon(const AtomView& a) {
  if (a.aromatic()) {
    if (a.h() >= 1) return "C18";
    // substituent-driven classes for exocyclic single bonds
    std::string sub;
    bool exo_double = false;
    int aromatic_bonds = 0;
    a.each_neighbor([&](const Atom& nbr, const Bond& bond, int) {
      if (bond.order == BondOrder::Aromatic) {
        ++aromatic_bonds;
        return;
      }
      if (bond.order == BondOrder::Double &&
          (nbr.element == 6 || nbr.element == 7 || nbr.element == 8)) {
        exo_double = true;
        return;
      }
      if (bond.order != BondOrder::Single) return;
      if (nbr.aromatic) {
        if (sub.empty()) sub = "C20";
      } else if (nbr.element == 9) {
        sub = "C14";
      } else if (nbr.element == 17) {
        sub = "C15";
      } else if (nbr.element == 35) {
        sub = "C16";
      } else if (nbr.element == 53) {
        sub = "C17";
      } else if (nbr.element == 6) {
        sub = "C21";
      } else if (nbr.element == 7) {
        sub = "C22";
      } else if (nbr.element == 8) {
        sub = "C23";
      } else if (nbr.element == 16) {
        sub = "C24";
      } else {
        sub = "C13";  // aliphatic substituent outside C/N/O/S/halogens
      }
    });
    if (!sub.empty() && sub != "C20") return sub;
    if (exo_double) return "C25";
    if (sub == "C20") return "C20";
    if (aromatic_bonds >= 3) return "C19";
    return "CS";
  }

  if (a.sp3()) {
    int h = a.h();
    // pure hydrocarbon environment
    bool only_aliphatic_c = true;
    int aliphatic_c = 0;
    a.each_neighbor([&](const Atom& nbr, const Bond&, int) {
      if (nbr.element == 6 && !nbr.aromatic)
        ++aliphatic_c;
      else
        only_aliphatic_c = false;
    });
    if (only_aliphatic_c) {
      if (h == 4 || (h == 3 && aliphatic_c == 1) || (h == 2 && aliphatic_c == 2)) return "C1";
      if ((h == 1 && aliphatic_c == 3) || (h == 0 && aliphatic_c == 4)) return "C2";
      return "CS";
    }
    // aromatic attachment beats heteroatom attachment (reference behaviour)
    if (a.any_aromatic_neighbor()) {
      if (h == 3) {
        bool on_aromatic_carbon = false;
        a.each_neighbor([&](const Atom& nbr, const Bond&, int) {
          if (nbr.aromatic && nbr.element == 6) on_aromatic_carbon = true;
        });
        return on_aromatic_carbon ? "C8" : "C9";
      }
      if (h == 2) return "C10";
      if (h == 1) return "C11";
      return "C12";
    }
    if (a.any_het_neighbor()) {
      if (h == 3 || h == 2) return "C3";
      return "C4";
    }
    if (a.any_weird_neighbor()) return "C27";
    return "CS";
  }

  // sp2 / sp
  bool double_to_aliphatic_het = false;
  a.each_neighbor([&](const Atom& nbr, const Bond& bond, int) {
    if (bond.order == BondOrder::Double && nbr.element != 6 && !nbr.aromatic)
      double_to_aliphatic_het = true;
  });
  if (double_to_aliphatic_het) return "C5";
  if (a.has_triple_bond()) return "C7";
  bool double_to_aliphatic_c = a.has_double_to(6, false);
  bool double_to_aromatic_c = a.has_double_to(6, true);
  if (double_to_aliphatic_c && !a.any_aromatic_neighbor()) return "C6";
  if ((double_to_aliphatic_c && a.any_aromatic_neighbor()) || double_to_aromatic_c) return "C26";
  return "CS";
}

std::string type_nitrogen(const AtomView& a) {
  if (a.aromatic()) return a.charge() > 0 ? "N12" : "N11";
  int charge = a.charge();
  if (charge > 0) {
    if (a.h() >= 1) return "N10";
    if (a.degree() == 4) return "N13";  // quaternary ammonium
    if (a.has_double_bond() && a.degree() == 3) return "N13";  // iminium, nitro, N-oxide
    return "N14";  // azide / diazonium centers and other charged nitrogen
  }
  if (charge < 0) return "N14";
  if (a.has_triple_bond()) return "N9";
  if (a.has_double_bond()) return a.h() >= 1 ? "N5" : "N6";
  int h = a.h();
  bool arom_nbr = a.any_aromatic_neighbor();
  if (a.degree() == 0) return "NS";
  if (h >= 2) return arom_nbr ? "N3" : "N1";
  if (h == 1) return arom_nbr ? "N4" : "N2";
  return arom_nbr ? "N8" : "N7";
}

std::string type_oxygen(const AtomView& a) {
  if (a.aromatic()) return "O1";
  if (a.charge() < 0) {
    std::string out = "O7";
    a.each_neighbor([&](const Atom& nbr, const Bond&, int v) {
      if (nbr.element == 7) {
        out = "O5";
      } else if (nbr.element == 16) {
        out = "O6";
      } else if (nbr.element == 6) {
        AtomView carbon{a.mol, v};
        if (carbon.has_double_to(8, false)) out = "O12";  // carboxylate
      }
    });
    return out;
  }
  if (a.has_double_bond()) {
    std::string out = "OS";
    a.each_neighbor([&](const Atom& nbr, const Bond& bond, int v) {
      if (bond.order != BondOrder::Double) return;
      if (nbr.element == 7 || nbr.element == 8) {
        out = "O5";
      } else if (nbr.element == 16) {
        out = "O6";
      } else if (nbr.element == 6 && nbr.aromatic) {
        out = "O8";
      } else if (nbr.element == 6) {
        // classify the carbonyl by the carbon's other substituents
        AtomView carbon{a.mol, v};
        bool any_aromatic = false;
        int others = 0, het_others = 0;
        carbon.each_neighbor([&](const Atom& nbr2, const Bond&, int v2) {
          if (v2 == a.idx) return;
          ++others;
          if (nbr2.aromatic) any_aromatic = true;
          if (nbr2.element != 6) ++het_others;
        });
        if (any_aromatic)
          out = "O10";
        else if (others >= 2 && het_others == others)
          out = "O11";  // carbonate / urea / carbamate
        else
          out = "O9";
      }
    });
    return out;
  }
  int h = a.h();
  int degree = a.degree();
  if (degree <= 1 && h >= 1) return "O2";  // water, alcohols, acids, phenols
  if (degree == 2) return a.any_aromatic_neighbor() ? "O4" : "O3";
  return "OS";
}

std::string type_sulfur(const AtomView& a) {
  if (a.aromatic()) return "S3";
  // charged sulfur and sulfur double-bonded to a heteroatom (S=O, S=N) share
  // a class; thiocarbonyl sulfur stays with the plain aliphatic class
  bool double_to_het = false;
  a.each_neighbor([&](const Atom& nbr, const Bond& bond, int) {
    if (bond.order == BondOrder::Double && nbr.element != 6) double_to_het = true;
  });
  if (a.charge() != 0 || double_to_het) return "S2";
  return "S1";
}

// hydrogens are typed from the heavy atom that carries them
std::string type_hydrogen_on(const AtomView& heavy) {
  int z = heavy.z();
  if (z == 6) return "H1";
  if (z == 7) return "H3";
  if (z == 8) {
    std::string out = "H2";  // water, alcohols, phenols, H-O-P, ...
    heavy.each_neighbor([&](const Atom& nbr, const Bond&, int v) {
      if (nbr.element == 7) {
        out = "H3";  // H-O-N
      } else if (nbr.element == 8 || nbr.element == 16) {
        out = "H4";  // peroxide / H-O-S
      } else if (nbr.element == 6 && !nbr.aromatic) {
        AtomView carbon{heavy.mol, v};
        bool acidic = false;
        carbon.each_neighbor([&](const Atom& nbr2, const Bond& bond2, int) {
          if (bond2.order == BondOrder::Double &&
              (nbr2.element == 6 || nbr2.element == 7 || nbr2.element == 8 ||
               nbr2.element == 16))
            acidic = true;
        });
        if (acidic) out = "H4";  // carboxylic acid, enol
      }
    });
    return out;
  }
  return "H2";  // thiols and other heteroatom hydrogens
}

std::string type_atom(const Molecule& mol, int idx) {
  AtomView a{mol, idx};
  switch (a.z()) {
    case 6: return type_carbon(a);
    case 7: return type_nitrogen(a);
    case 8: return type_oxygen(a);
    case 16: return type_sulfur(a);
    case 15: return "P";
    case 9: return a.degree() == 0 && a.charge() < 0 ? "Hal-" : "F";
    case 17: return a.degree() == 0 && a.charge() < 0 ? "Hal-" : "Cl";
    case 35: return a.degree() == 0 && a.charge() < 0 ? "Hal-" : "Br";
    case 53: return a.degree() == 0 && a.charge() < 0 ? "Hal-" : "I";
    case 1: return "H*";  // explicit [H] graph atoms: typed from the heavy neighbor
    case 5: case 14: return "Me";
    default: return "?";
  }
}

}  // namespace

std::string crippen_atom_type(const Molecule& mol, int atom) {
  return type_atom(mol, atom);
}

ClogpResult clogp_detailed(const Molecule& mol) {
  const auto& table = contribution_table();
  ClogpResult result;
  for (size_t i = 0; i < mol.atoms.size(); ++i) {
    std::string code = type_atom(mol, static_cast<int>(i));
    if (code == "?") {
      result.untyped_atoms.push_back(static_cast<int>(i));
      continue;
    }
    if (code == "H*") {
      // explicit [H] node: contribution of a hydrogen on its heavy neighbor
      const auto& adj = mol.adjacency[i];
      if (adj.empty()) {
        result.value += table.at("HS");
      } else {
        AtomView heavy{mol, mol.other_end(adj[0], static_cast<int>(i))};
        result.value += table.at(type_hydrogen_on(heavy));
      }
      continue;
    }
    result.value += table.at(code);
    int h = mol.atoms[i].total_h();
    if (h > 0) {
      AtomView heavy{mol, static_cast<int>(i)};
      result.value += table.at(type_hydrogen_on(heavy)) * h;
    }
  }
  return result;
}

double clogp(const Molecule& mol) { return clogp_detailed(mol).value; }

double esol_logs(const Molecule& mol) {
  double logp = clogp(mol);
  double mw = molecular_weight(mol);
  double rb = rotatable_bond_count(mol);
  double ap = aromatic_proportion(mol);
  return 0.16 - 0.63 * logp - 0.0062 * mw + 0.066 * rb - 0.74 * ap;
}

}  // namespace aura::chem
