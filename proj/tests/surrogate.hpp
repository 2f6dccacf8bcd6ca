//
// Project cfmask - Copyright 2026 cfmask developers.
// SPDX-License-Identifier: Apache-2.0
//
// Hand-wired single-layer GIN whose output is exactly
//   count(terminal N) - count(terminal O)        (regression)
//   2 * count(terminal N) - 1                    (classification logit)
// on molecules whose N and O atoms are all degree-1. Used as an analytic
// oracle model in benchmark tests.

#ifndef CFMASK_TESTS_SURROGATE_HPP
#define CFMASK_TESTS_SURROGATE_HPP

#include "cfmask/chem.hpp"
#include "cfmask/explain.hpp"
#include "cfmask/gnn.hpp"

namespace cfmask::testing {

// With add pooling, pool((A+I)X)[col] = sum_v (1+deg_v) x_{v,col}; for
// degree-1 atoms that is exactly 2 per atom, so a 0.5 input weight yields
// plain counts.
inline gnn::Params counting_surrogate(bool classification) {
  gnn::ModelConfig cfg;
  cfg.architecture = gnn::Architecture::Gin;
  cfg.depth = 1;
  cfg.hidden = 2;
  cfg.pooling = gnn::Pooling::Add;
  cfg.task = classification ? gnn::Task::Classification : gnn::Task::Regression;
  gnn::Params p = gnn::zero_params(cfg);
  auto layout = gnn::tensor_layout(cfg);
  const int n_col = chem::FeatureLayout::kSymbolBase + 2;  // N slot
  const int o_col = chem::FeatureLayout::kSymbolBase + 1;  // O slot
  for (std::size_t i = 0; i < layout.size(); ++i) {
    ad::Matrix& t = p.tensors[i];
    if (layout[i].name == "layer0.w1") {
      t(n_col, 0) = 0.5;
      t(o_col, 1) = 0.5;
    } else if (layout[i].name == "layer0.w2") {
      t(0, 0) = 1.0;
      t(1, 1) = 1.0;
    } else if (layout[i].name == "head.w") {
      if (classification) {
        t(0, 0) = 2.0;  // logit = 2*countN - 1
      } else {
        t(0, 0) = 1.0;  // value = countN - countO
        t(1, 0) = -1.0;
      }
    } else if (layout[i].name == "head.b" && classification) {
      t(0, 0) = -1.0;
    }
  }
  return p;
}

// Exact per-atom ground truth for the regression surrogate: +1 on N, -1 on
// O, 0 elsewhere; reads zeroed rows as zero contribution.
inline explain::Explanation ground_truth_explainer(const gnn::Params&,
                                                   const chem::MolGraph& mol, std::uint64_t,
                                                   const chem::FeatureMatrix* features) {
  chem::FeatureMatrix fm = features ? *features : chem::featurize(mol);
  explain::Explanation e;
  e.method = "ground_truth";
  e.scores.resize(mol.num_atoms());
  for (int v = 0; v < mol.num_atoms(); ++v)
    e.scores[v] = fm.at(v, chem::FeatureLayout::kSymbolBase + 2) -
                  fm.at(v, chem::FeatureLayout::kSymbolBase + 1);
  return e;
}

}  // namespace cfmask::testing

#endif  // CFMASK_TESTS_SURROGATE_HPP
