// Regenerates the frozen cLogP reference fixtures used by
// tests/test_crippen.cpp and the acceptance descriptor panel.
//
//   npm install @rdkit/rdkit && node crippen_reference.js
//
// The printed CrippenClogP values are the reference-toolkit numbers the C++
// implementation is compared against (acceptance band: 0.3).
const initRDKitModule = require("@rdkit/rdkit");

const panel = [
  "O", "C", "CCO", "c1ccccc1", "Cc1ccccc1", "Oc1ccccc1", "Nc1ccccc1",
  "c1ccncc1", "NC(=O)C", "CC(=O)O", "CCCC", "CCCCCC", "c1ccc2ccccc2c1",
  "CC(=O)Oc1ccccc1C(=O)O", "CC(C)Cc1ccc(cc1)C(C)C(=O)O",
  "Cn1cnc2c1c(=O)n(C)c(=O)n2C", "CC(=O)Nc1ccc(O)cc1", "CN1CCCC1c1cccnc1",
  "O=C(O)c1ccccc1O", "CCOCC",
];

initRDKitModule().then((RDKit) => {
  console.log("rdkit", RDKit.version());
  for (const smiles of panel) {
    const mol = RDKit.get_mol(smiles);
    const d = JSON.parse(mol.get_descriptors());
    console.log(JSON.stringify({
      smiles,
      clogp: d.CrippenClogP,
      amw: d.amw,
      hba_lipinski: d.lipinskiHBA,
      rings: d.NumRings,
    }));
    mol.delete();
  }
});
