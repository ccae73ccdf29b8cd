#pragma once

#include <optional>
#include <string>
#include <vector>

#include "aurascreen/common.hpp"

namespace aura::chem {

enum class BondOrder : uint8_t { Single = 1, Double = 2, Triple = 3, Aromatic = 4 };

struct Atom {
  int element = 0;                 // atomic number
  bool aromatic = false;           // from lowercase input symbol
  int formal_charge = 0;
  std::optional<int> explicit_h;   // from a bracket atom's H count
  std::optional<int> isotope;
  bool ring_member = false;
  bool bracket = false;
  int implicit_h = 0;              // derived; always 0 for bracket atoms
  int total_h() const { return implicit_h + explicit_h.value_or(0); }
};

struct Bond {
  int a = 0;
  int b = 0;
  BondOrder order = BondOrder::Single;
  bool in_ring = false;
};

struct Molecule {
  std::vector<Atom> atoms;
  std::vector<Bond> bonds;
  int fragment_count = 1;
  std::string source_smiles;

  // adjacency: per atom, indices into bonds
  std::vector<std::vector<int>> adjacency;

  int heavy_degree(int atom_idx) const {
    return static_cast<int>(adjacency[atom_idx].size());
  }
  int other_end(int bond_idx, int atom_idx) const {
    const Bond& b = bonds[bond_idx];
    return b.a == atom_idx ? b.b : b.a;
  }
};

// Element tables (IUPAC 2021 standard atomic weights, 3 decimal places).
// Unrecognized bracket symbols raise UnknownAtomSymbol.
int element_from_symbol(const std::string& symbol);
const std::string& symbol_from_element(int z);
double atomic_weight(int z);
bool in_organic_subset(int z);

// Parses the supported SMILES subset: organic-subset atoms, aromatic
// lowercase atoms, brackets (isotope / charge / explicit H), branches, ring
// closures (digits and %nn), bond symbols - = # :, and '.'; stereo markers
// (/ \ @) are accepted and discarded.
Molecule parse_smiles(const std::string& text);

// Computes adjacency, fragment count, ring flags, and implicit hydrogens for
// a molecule assembled programmatically (atoms and bonds already set).
void finalize_graph(Molecule& mol);

// nullopt when every atom passes; otherwise the first violating atom index.
std::optional<int> validate_valence(const Molecule& mol);

double molecular_weight(const Molecule& mol);
int hbd_count(const Molecule& mol);
int hba_count(const Molecule& mol);
int rotatable_bond_count(const Molecule& mol);
int ring_count(const Molecule& mol);

// aromatic heavy atoms / heavy atoms; 0 for an empty molecule
double aromatic_proportion(const Molecule& mol);

// Emits a valid SMILES spelling of the graph by randomized DFS. Stereo-free;
// bracket atoms keep isotope/charge/explicit-H. Round-trips through
// parse_smiles to an equivalent graph.
std::string write_smiles(const Molecule& mol, Rng& rng);

struct LibraryRecord {
  std::string id;
  std::string smiles;
};

// One record per line: `<SMILES><TAB><compound-id>`; '#' lines ignored;
// duplicate ids raise DuplicateId.
std::vector<LibraryRecord> load_library(const std::string& path);
void save_library(const std::string& path, const std::vector<LibraryRecord>& records);

}  // namespace aura::chem
