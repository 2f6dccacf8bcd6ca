//
// Project cfmask - Copyright 2026 cfmask developers.
// SPDX-License-Identifier: Apache-2.0
//
// Shared desk-scale molecule corpus for tests. Every entry parses in the
// supported SMILES subset, is a single component, and has >= 5 heavy atoms.

#ifndef CFMASK_TESTS_CORPUS_HPP
#define CFMASK_TESTS_CORPUS_HPP

#include <string>
#include <vector>

namespace cfmask::testing {

inline const std::vector<std::string>& corpus_smiles() {
  static const std::vector<std::string> corpus{
      "CCCCC",
      "CCCCCC",
      "CC(C)CC",
      "CC(C)(C)C",
      "CCOCC",
      "CCCCO",
      "CC(=O)CC",
      "CC(=O)OCC",
      "CC(=O)NCC",
      "CCNCC",
      "CCN(CC)CC",
      "OCCOCCO",
      "CC(N)C(=O)O",
      "NCCCCN",
      "CCCCCl",
      "CCCCBr",
      "CCCCF",
      "CCCCI",
      "CC(Cl)CC",
      "ClCCCCCl",
      "C1CCCCC1",
      "C1CCCC1",
      "C1CC1CC",
      "CC1CCCCC1",
      "C1CCOC1",
      "C1CCOCC1",
      "C1CCNCC1",
      "O=C1CCCCC1",
      "C1CCC2CCCCC2C1",
      "c1ccccc1",
      "Cc1ccccc1",
      "CCc1ccccc1",
      "c1ccncc1",
      "Cc1ccncc1",
      "c1ccc2ccccc2c1",
      "Cc1ccc(C)cc1",
      "Oc1ccccc1",
      "Nc1ccccc1",
      "Clc1ccccc1",
      "Fc1ccccc1",
      "c1ccc(cc1)c1ccccc1",
      "CC(=O)c1ccccc1",
      "CC(=O)Nc1ccccc1",
      "O=C(O)c1ccccc1",
      "COc1ccccc1",
      "O=C(NC)c1ccccc1",
      "O=C(NCC)c1ccccc1",
      "CN(C)CCCN",
      "OC(=O)CC(=O)O",
      "CCC(=O)[O-]",
      "CC[N+](C)(C)C",
      "[O-]C(=O)c1ccccc1",
      "OCC1CCCCC1",
      "NC1CCCCC1",
      "CC1CCC(C)CC1",
      "NCCc1ccccc1",
      "CCSCC",
      "CS(=O)(=O)C",
      "CCOP(=O)(OCC)OCC",
      "C#CCCC",
      "CC=CCC",
      "C=CC=CC",
      "CCCCC#N",
      "Oc1ccc2ccccc2c1",
      "Brc1ccccc1",
      "CC(C)c1ccccc1",
      "CCCc1ccncc1",
      "ClCc1ccccc1",
  };
  return corpus;
}

}  // namespace cfmask::testing

#endif  // CFMASK_TESTS_CORPUS_HPP
