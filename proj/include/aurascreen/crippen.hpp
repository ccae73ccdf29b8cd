#pragma once

#include <string>
#include <vector>

#include "aurascreen/chem.hpp"

namespace aura::chem {

// Version tag of the shipped atomic-contribution table.
extern const char* kCrippenTableVersion;

struct ClogpResult {
  double value = 0.0;
  std::vector<int> untyped_atoms;  // contributed 0.0; molecule is flagged
  bool flagged() const { return !untyped_atoms.empty(); }
};

// Wildman-Crippen atomic-contribution logP. Atom typing is implemented in
// code; contributions come from the versioned table in crippen.cpp.
ClogpResult clogp_detailed(const Molecule& mol);
double clogp(const Molecule& mol);

// type code assigned to one heavy atom ("C18", "O2", ...); "?" if untyped
std::string crippen_atom_type(const Molecule& mol, int atom);

// Delaney ESOL:
//   logS = 0.16 - 0.63 clogp - 0.0062 MW + 0.066 RB - 0.74 AP
double esol_logs(const Molecule& mol);

}  // namespace aura::chem
