//
// Project cfmask - Copyright 2026 cfmask developers.
// SPDX-License-Identifier: Apache-2.0
//
// Brute-force reference implementations used only by tests. These stay
// independent of the library code paths they check.

#ifndef CFMASK_TESTS_ORACLES_HPP
#define CFMASK_TESTS_ORACLES_HPP

#include <algorithm>
#include <cstdint>
#include <functional>
#include <iterator>
#include <map>
#include <set>
#include <vector>

#include "cfmask/chem.hpp"

namespace cfmask::testing {

using chem::BondOrder;
using chem::MolGraph;

// All simple cycles of a small graph, each as a sorted edge-index set.
inline std::vector<std::vector<int>> oracle_all_simple_cycles(const MolGraph& mol) {
  std::set<std::vector<int>> found;
  const int n = mol.num_atoms();
  std::vector<int> path;
  std::vector<int> path_edges;
  std::vector<char> on_path(n, 0);

  // Enumerate cycles whose smallest atom is `start`; avoids duplicates up
  // to rotation, and direction is handled by the sorted edge set.
  std::function<void(int, int)> dfs = [&](int start, int v) {
    for (auto [u, bi] : mol.neighbors(v)) {
      if (u == start && path.size() >= 3) {
        std::vector<int> cyc = path_edges;
        cyc.push_back(bi);
        std::sort(cyc.begin(), cyc.end());
        found.insert(cyc);
      } else if (!on_path[u] && u > start) {
        on_path[u] = 1;
        path.push_back(u);
        path_edges.push_back(bi);
        dfs(start, u);
        path_edges.pop_back();
        path.pop_back();
        on_path[u] = 0;
      }
    }
  };
  for (int s = 0; s < n; ++s) {
    std::fill(on_path.begin(), on_path.end(), 0);
    on_path[s] = 1;
    path = {s};
    path_edges.clear();
    dfs(s, s);
  }
  return {found.begin(), found.end()};
}

// Sizes of a minimum cycle basis, computed from the exhaustive cycle list
// by greedy GF(2) elimination smallest-first.
inline std::multiset<int> oracle_min_cycle_basis_sizes(const MolGraph& mol) {
  auto cycles = oracle_all_simple_cycles(mol);
  std::sort(cycles.begin(), cycles.end(), [](const auto& a, const auto& b) {
    if (a.size() != b.size()) return a.size() < b.size();
    return a < b;
  });
  int target = mol.num_bonds() - mol.num_atoms() + mol.num_components();
  std::multiset<int> sizes;
  std::vector<std::set<int>> basis;
  for (const auto& cyc : cycles) {
    if (static_cast<int>(sizes.size()) >= target) break;
    std::set<int> v(cyc.begin(), cyc.end());
    for (const auto& b : basis) {
      if (v.count(*b.begin())) {
        std::set<int> x;
        std::set_symmetric_difference(v.begin(), v.end(), b.begin(), b.end(),
                                      std::inserter(x, x.begin()));
        v = std::move(x);
      }
    }
    if (v.empty()) continue;
    basis.push_back(v);
    std::sort(basis.begin(), basis.end(), [](const auto& a, const auto& b) {
      return *a.begin() < *b.begin();
    });
    sizes.insert(static_cast<int>(cyc.size()));
  }
  return sizes;
}

inline bool oracle_atoms_match(const chem::Atom& p, const chem::Atom& t) {
  return p.element == t.element && p.aromatic == t.aromatic &&
         p.formal_charge == t.formal_charge && p.other_symbol == t.other_symbol &&
         p.stub_label == t.stub_label;
}

// Exhaustive injective-mapping enumeration for subgraph monomorphism with
// the library's match semantics (element, charge, aromatic flag, bond order;
// hydrogens ignored unless `match_h`).
inline std::vector<std::vector<int>> oracle_subgraph_matches(const MolGraph& pattern,
                                                             const MolGraph& target,
                                                             bool match_h = false) {
  std::vector<std::vector<int>> out;
  const int np = pattern.num_atoms(), nt = target.num_atoms();
  std::vector<int> map(np, -1);
  std::vector<char> used(nt, 0);

  std::function<void(int)> rec = [&](int pi) {
    if (pi == np) {
      out.push_back(map);
      return;
    }
    for (int ti = 0; ti < nt; ++ti) {
      if (used[ti]) continue;
      if (!oracle_atoms_match(pattern.atoms[pi], target.atoms[ti])) continue;
      if (match_h && pattern.atoms[pi].total_h() != target.atoms[ti].total_h()) continue;
      bool ok = true;
      for (auto [pu, pbi] : pattern.neighbors(pi)) {
        if (pu >= pi || map[pu] < 0) continue;
        int tb = target.find_bond(ti, map[pu]);
        if (tb < 0 || target.bonds[tb].order != pattern.bonds[pbi].order) {
          ok = false;
          break;
        }
      }
      if (!ok) continue;
      map[pi] = ti;
      used[ti] = 1;
      rec(pi + 1);
      used[ti] = 0;
      map[pi] = -1;
    }
  };
  rec(0);
  return out;
}

// Graph isomorphism including hydrogen counts, by exhaustive matching.
// Suitable for small graphs only.
inline bool oracle_isomorphic(const MolGraph& a, const MolGraph& b) {
  if (a.num_atoms() != b.num_atoms() || a.num_bonds() != b.num_bonds()) return false;
  auto maps = oracle_subgraph_matches(a, b, /*match_h=*/true);
  return !maps.empty();
}

// Subset-based enumeration of removable fragments: connected removed part,
// connected remainder, 1..max_cuts acyclic single boundary bonds, smaller
// side reported (ties by canonical SMILES, then index order).
inline std::vector<std::vector<int>> oracle_cut_fragments(const MolGraph& mol, int max_cuts,
                                                          int max_frag_atoms) {
  const int n = mol.num_atoms();
  std::vector<std::vector<int>> out;
  for (unsigned m = 1; m + 1 < (1u << n); ++m) {
    std::vector<int> rm, ctx;
    for (int v = 0; v < n; ++v) ((m >> v) & 1 ? rm : ctx).push_back(v);
    if (static_cast<int>(rm.size()) > max_frag_atoms) continue;
    if (!chem::induced_subgraph(mol, rm).connected()) continue;
    if (!chem::induced_subgraph(mol, ctx).connected()) continue;
    int boundary = 0;
    bool bad_bond = false;
    for (int bi = 0; bi < mol.num_bonds(); ++bi) {
      const chem::Bond& b = mol.bonds[bi];
      bool ina = (m >> b.a) & 1, inb = (m >> b.b) & 1;
      if (ina == inb) continue;
      ++boundary;
      if (mol.bonds[bi].order != BondOrder::Single || mol.bond_in_ring(bi)) bad_bond = true;
    }
    if (bad_bond || boundary < 1 || boundary > max_cuts) continue;
    if (rm.size() > ctx.size()) continue;
    if (rm.size() == ctx.size()) {
      std::string srm = chem::write_canonical(chem::induced_subgraph(mol, rm));
      std::string sctx = chem::write_canonical(chem::induced_subgraph(mol, ctx));
      if (srm != sctx ? srm > sctx : rm > ctx) continue;
    }
    out.push_back(rm);
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace cfmask::testing

#endif  // CFMASK_TESTS_ORACLES_HPP
