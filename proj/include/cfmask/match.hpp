//
// Project cfmask - Copyright 2026 cfmask developers.
// SPDX-License-Identifier: Apache-2.0
//
// Subgraph isomorphism (VF2-style), BRICS-style fragmentation, cut-set
// enumeration for the fragment generator, and the common-substructure pair
// dataset builder.

#ifndef CFMASK_MATCH_HPP
#define CFMASK_MATCH_HPP

#include <algorithm>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "cfmask/chem.hpp"

namespace cfmask::match {

using chem::BondOrder;
using chem::Element;
using chem::MolGraph;

// Injective mapping pattern-atom-index -> target-atom-index.
struct MatchMapping {
  std::vector<int> map;
};

namespace detail {

inline bool atoms_compatible(const chem::Atom& p, const chem::Atom& t) {
  return p.element == t.element && p.aromatic == t.aromatic &&
         p.formal_charge == t.formal_charge && p.other_symbol == t.other_symbol;
}

struct Vf2State {
  const MolGraph& pattern;
  const MolGraph& target;
  int max_matches;
  std::vector<int> order;        // pattern atoms, connectivity-first
  std::vector<int> core_p;       // pattern -> target (-1 unmapped)
  std::vector<int> core_t;       // target -> pattern (-1 unmapped)
  std::vector<MatchMapping> out;

  Vf2State(const MolGraph& p, const MolGraph& t, int maxm)
      : pattern(p), target(t), max_matches(maxm),
        core_p(p.num_atoms(), -1), core_t(t.num_atoms(), -1) {
    // Visit pattern atoms so each one (after the first of a component)
    // touches an already-visited atom; keeps the search pruned.
    std::vector<char> seen(p.num_atoms(), 0);
    for (int s = 0; s < p.num_atoms(); ++s) {
      if (seen[s]) continue;
      std::vector<int> stack{s};
      seen[s] = 1;
      while (!stack.empty()) {
        int v = stack.back();
        stack.pop_back();
        order.push_back(v);
        for (auto [u, bi] : p.neighbors(v)) {
          (void)bi;
          if (!seen[u]) {
            seen[u] = 1;
            stack.push_back(u);
          }
        }
      }
    }
  }

  bool feasible(int pv, int tv) const {
    if (!atoms_compatible(pattern.atoms[pv], target.atoms[tv])) return false;
    if (target.atoms[tv].degree < pattern.atoms[pv].degree) return false;
    for (auto [pu, pbi] : pattern.neighbors(pv)) {
      if (core_p[pu] < 0) continue;
      int tb = target.find_bond(tv, core_p[pu]);
      if (tb < 0 || target.bonds[tb].order != pattern.bonds[pbi].order) return false;
    }
    return true;
  }

  void search(std::size_t depth) {
    if (static_cast<int>(out.size()) >= max_matches) return;
    if (depth == order.size()) {
      out.push_back({core_p});
      return;
    }
    int pv = order[depth];
    for (int tv = 0; tv < target.num_atoms(); ++tv) {
      if (core_t[tv] >= 0 || !feasible(pv, tv)) continue;
      core_p[pv] = tv;
      core_t[tv] = pv;
      search(depth + 1);
      core_p[pv] = -1;
      core_t[tv] = -1;
      if (static_cast<int>(out.size()) >= max_matches) return;
    }
  }
};

}  // namespace detail

// All subgraph-monomorphism embeddings of `pattern` into `target`, complete
// up to max_matches. Atom semantics: element (with raw symbol for Other),
// aromatic flag and charge must match exactly; bond orders must match;
// hydrogens are not compared. Extra target bonds outside the mapped pattern
// bonds are allowed.
inline std::vector<MatchMapping> subgraph_match(const MolGraph& pattern, const MolGraph& target,
                                                int max_matches = 1 << 20) {
  if (pattern.num_atoms() == 0) throw std::invalid_argument("empty pattern");
  if (pattern.num_atoms() > target.num_atoms()) return {};
  detail::Vf2State state(pattern, target, max_matches);
  state.search(0);
  return std::move(state.out);
}

// Graph isomorphism test on top of the matcher; hydrogen totals must agree
// atom-by-atom, so parse/write round-trips preserve the molecule exactly.
inline bool isomorphic(const MolGraph& a, const MolGraph& b) {
  if (a.num_atoms() != b.num_atoms() || a.num_bonds() != b.num_bonds()) return false;
  auto maps = subgraph_match(a, b, 1 << 16);
  for (const auto& m : maps) {
    bool ok = true;
    for (int i = 0; i < a.num_atoms(); ++i) {
      if (a.atoms[i].total_h() != b.atoms[m.map[i]].total_h() ||
          a.atoms[i].stub_label != b.atoms[m.map[i]].stub_label) {
        ok = false;
        break;
      }
    }
    if (ok) return true;
  }
  return false;
}

// ---------------------------------------------------------------------------
// BRICS-style fragmentation
// ---------------------------------------------------------------------------

// The 16 link environments, written as local structural predicates over the
// perceived graph. An atom can satisfy several environments; a bond is cut
// when some (env(a), env(b)) pair is enabled for its order.
namespace brics {

inline bool has_double_to_o(const MolGraph& m, int a) {
  for (auto [u, bi] : m.neighbors(a))
    if (m.bonds[bi].order == BondOrder::Double && m.atoms[u].element == Element::O) return true;
  return false;
}

inline bool has_multiple_bond(const MolGraph& m, int a) {
  for (auto [u, bi] : m.neighbors(a)) {
    (void)u;
    if (m.bonds[bi].order == BondOrder::Double || m.bonds[bi].order == BondOrder::Triple)
      return true;
  }
  return false;
}

inline bool has_acyclic_single_to_carbon(const MolGraph& m, int a) {
  for (auto [u, bi] : m.neighbors(a))
    if (m.bonds[bi].order == BondOrder::Single && !m.bond_in_ring(bi) &&
        m.atoms[u].element == Element::C)
      return true;
  return false;
}

// L1: acyl carbon of an amide/ester, three heavy neighbors.
inline bool env1(const MolGraph& m, int a) {
  const auto& at = m.atoms[a];
  return at.element == Element::C && !at.aromatic && at.degree == 3 && has_double_to_o(m, a);
}

// L3: ether/ester oxygen with an acyclic single bond to carbon.
inline bool env3(const MolGraph& m, int a) {
  const auto& at = m.atoms[a];
  return at.element == Element::O && !at.aromatic && at.degree == 2 &&
         has_acyclic_single_to_carbon(m, a);
}

// L4: saturated carbon, not terminal, no multiple bonds, bonded to carbon.
inline bool env4(const MolGraph& m, int a) {
  const auto& at = m.atoms[a];
  return at.element == Element::C && !at.aromatic && at.degree >= 2 &&
         !has_multiple_bond(m, a) && has_acyclic_single_to_carbon(m, a);
}

// L5: amine-like nitrogen: no multiple bonds, only C or S neighbors, and not
// a lactam nitrogen (which is L10).
inline bool env5(const MolGraph& m, int a) {
  const auto& at = m.atoms[a];
  if (at.element != Element::N || at.aromatic || at.degree < 2) return false;
  if (has_multiple_bond(m, a)) return false;
  for (auto [u, bi] : m.neighbors(a)) {
    (void)bi;
    Element e = m.atoms[u].element;
    if (e != Element::C && e != Element::S) return false;
  }
  // Ring N next to an in-ring carbonyl carbon is the lactam case.
  if (at.in_ring) {
    for (auto [u, bi] : m.neighbors(a))
      if (m.bond_in_ring(bi) && m.atoms[u].element == Element::C && m.atoms[u].in_ring &&
          has_double_to_o(m, u))
        return false;
  }
  return true;
}

// L6: acyclic carbonyl carbon (the other side of the acyl cut).
inline bool env6(const MolGraph& m, int a) {
  const auto& at = m.atoms[a];
  return at.element == Element::C && !at.aromatic && !at.in_ring && at.degree == 3 &&
         has_double_to_o(m, a);
}

// L7: olefinic carbon; the (7,7) pair cuts acyclic double bonds.
inline bool env7(const MolGraph& m, int a) {
  const auto& at = m.atoms[a];
  return at.element == Element::C && !at.aromatic && (at.degree == 2 || at.degree == 3);
}

// L8: acyclic saturated carbon, not terminal, all bonds single.
inline bool env8(const MolGraph& m, int a) {
  const auto& at = m.atoms[a];
  if (at.element != Element::C || at.aromatic || at.in_ring || at.degree < 2) return false;
  for (auto [u, bi] : m.neighbors(a)) {
    (void)u;
    if (m.bonds[bi].order != BondOrder::Single) return false;
  }
  return true;
}

// L9: neutral aromatic nitrogen inside an aromatic ring.
inline bool env9(const MolGraph& m, int a) {
  const auto& at = m.atoms[a];
  return at.element == Element::N && at.aromatic && at.formal_charge == 0;
}

// L10: lactam nitrogen: ring N bonded in-ring to a ring carbonyl carbon.
inline bool env10(const MolGraph& m, int a) {
  const auto& at = m.atoms[a];
  if (at.element != Element::N || at.aromatic || !at.in_ring) return false;
  for (auto [u, bi] : m.neighbors(a))
    if (m.bond_in_ring(bi) && m.atoms[u].element == Element::C && m.atoms[u].in_ring &&
        has_double_to_o(m, u))
      return true;
  return false;
}

// L11: thioether sulfur.
inline bool env11(const MolGraph& m, int a) {
  const auto& at = m.atoms[a];
  return at.element == Element::S && !at.aromatic && at.degree == 2 &&
         has_acyclic_single_to_carbon(m, a);
}

// L12: sulfonyl sulfur.
inline bool env12(const MolGraph& m, int a) {
  const auto& at = m.atoms[a];
  if (at.element != Element::S || at.degree != 4) return false;
  int n_double_o = 0;
  for (auto [u, bi] : m.neighbors(a))
    if (m.bonds[bi].order == BondOrder::Double && m.atoms[u].element == Element::O) ++n_double_o;
  return n_double_o == 2;
}

// L13: non-aromatic ring carbon flanked in-ring by a heteroatom.
inline bool env13(const MolGraph& m, int a) {
  const auto& at = m.atoms[a];
  if (at.element != Element::C || at.aromatic || !at.in_ring) return false;
  bool ring_cnos = false, ring_nos = false;
  for (auto [u, bi] : m.neighbors(a)) {
    if (!m.bond_in_ring(bi)) continue;
    Element e = m.atoms[u].element;
    if (e == Element::C || e == Element::N || e == Element::O || e == Element::S)
      ring_cnos = true;
    if (e == Element::N || e == Element::O || e == Element::S) ring_nos = true;
  }
  return ring_cnos && ring_nos;
}

// L14: aromatic carbon next to an aromatic heteroatom.
inline bool env14(const MolGraph& m, int a) {
  const auto& at = m.atoms[a];
  if (at.element != Element::C || !at.aromatic) return false;
  for (auto [u, bi] : m.neighbors(a))
    if (m.bonds[bi].order == BondOrder::Aromatic &&
        (m.atoms[u].element == Element::N || m.atoms[u].element == Element::O ||
         m.atoms[u].element == Element::S))
      return true;
  return false;
}

// L15: carbocyclic (non-aromatic) ring carbon between two ring carbons.
inline bool env15(const MolGraph& m, int a) {
  const auto& at = m.atoms[a];
  if (at.element != Element::C || at.aromatic || !at.in_ring) return false;
  int ring_c = 0;
  for (auto [u, bi] : m.neighbors(a))
    if (m.bond_in_ring(bi) && m.atoms[u].element == Element::C && !m.atoms[u].aromatic) ++ring_c;
  return ring_c >= 2;
}

// L16: benzene-like aromatic carbon between two aromatic carbons.
inline bool env16(const MolGraph& m, int a) {
  const auto& at = m.atoms[a];
  if (at.element != Element::C || !at.aromatic) return false;
  int arom_c = 0;
  for (auto [u, bi] : m.neighbors(a))
    if (m.bonds[bi].order == BondOrder::Aromatic && m.atoms[u].element == Element::C) ++arom_c;
  return arom_c >= 2;
}

inline std::vector<int> environments(const MolGraph& m, int a) {
  std::vector<int> out;
  if (env1(m, a)) out.push_back(1);
  if (env3(m, a)) out.push_back(3);
  if (env4(m, a)) out.push_back(4);
  if (env5(m, a)) out.push_back(5);
  if (env6(m, a)) out.push_back(6);
  if (env7(m, a)) out.push_back(7);
  if (env8(m, a)) out.push_back(8);
  if (env9(m, a)) out.push_back(9);
  if (env10(m, a)) out.push_back(10);
  if (env11(m, a)) out.push_back(11);
  if (env12(m, a)) out.push_back(12);
  if (env13(m, a)) out.push_back(13);
  if (env14(m, a)) out.push_back(14);
  if (env15(m, a)) out.push_back(15);
  if (env16(m, a)) out.push_back(16);
  return out;
}

// Enabled single-bond pairs from the published rule table; (7,7) cuts
// acyclic double bonds and is handled separately.
inline const std::set<std::pair<int, int>>& single_bond_pairs() {
  static const std::set<std::pair<int, int>> pairs{
      {1, 3},   {1, 5},   {1, 10},  {3, 4},   {3, 13},  {3, 14},  {3, 15},  {3, 16},
      {4, 5},   {4, 11},  {5, 12},  {5, 13},  {5, 14},  {5, 15},  {5, 16},  {6, 13},
      {6, 14},  {6, 15},  {6, 16},  {8, 9},   {8, 10},  {8, 13},  {8, 14},  {8, 15},
      {8, 16},  {9, 13},  {9, 14},  {9, 15},  {9, 16},  {10, 13}, {10, 14}, {10, 15},
      {10, 16}, {11, 13}, {11, 14}, {11, 15}, {11, 16}, {13, 14}, {13, 15}, {13, 16},
      {14, 14}, {14, 15}, {14, 16}, {15, 16}, {16, 16}};
  return pairs;
}

// Matching rule pair for one bond, or nullopt when the bond stays intact.
inline std::optional<std::pair<int, int>> cut_rule(const MolGraph& m, int bond_idx) {
  const chem::Bond& b = m.bonds[bond_idx];
  if (m.bond_in_ring(bond_idx)) return std::nullopt;
  auto ea = environments(m, b.a), eb = environments(m, b.b);
  if (b.order == BondOrder::Double) {
    bool a7 = std::count(ea.begin(), ea.end(), 7), b7 = std::count(eb.begin(), eb.end(), 7);
    if (a7 && b7) return std::make_pair(7, 7);
    return std::nullopt;
  }
  if (b.order != BondOrder::Single) return std::nullopt;
  for (int x : ea)
    for (int y : eb) {
      auto p = std::minmax(x, y);
      if (single_bond_pairs().count({p.first, p.second})) return std::make_pair(x, y);
    }
  return std::nullopt;
}

}  // namespace brics

enum class FragmentationMode {
  Brics,       // the 16 published link environments
  SimpleCuts,  // every acyclic single bond between a ring atom and an acyclic atom
};

struct FragmentRecord {
  MolGraph fragment;        // carries degree-1 Dummy stubs labeled 1..k
  int anchor_count = 0;
  std::string origin_rule;  // e.g. "brics(1,5)" or "simple"
};

struct BricsJoin {
  int frag_a;
  int label_a;
  int frag_b;
  int label_b;
  BondOrder order;
  std::string rule;  // which link-environment pair authorized the cut
};

struct Fragmentation {
  std::vector<FragmentRecord> fragments;
  std::vector<BricsJoin> joins;  // how stubs pair up across fragments
};

// Fragment without its stubs (the heavy-atom pattern used for matching).
inline MolGraph strip_stubs(const MolGraph& fragment) {
  std::vector<int> keep;
  for (int i = 0; i < fragment.num_atoms(); ++i)
    if (fragment.atoms[i].element != Element::Dummy) keep.push_back(i);
  return chem::induced_subgraph(fragment, keep);
}

// Cuts every bond matched by the enabled rule set, in one simultaneous pass.
// A molecule with no cuttable bond comes back as a single fragment, k = 0.
inline Fragmentation brics_decompose(const MolGraph& mol,
                                     FragmentationMode mode = FragmentationMode::Brics) {
  struct Cut {
    int bond;
    std::string rule;
  };
  std::vector<Cut> cuts;
  for (int bi = 0; bi < mol.num_bonds(); ++bi) {
    if (mode == FragmentationMode::Brics) {
      if (auto rule = brics::cut_rule(mol, bi))
        cuts.push_back({bi, "brics(" + std::to_string(rule->first) + "," +
                                std::to_string(rule->second) + ")"});
    } else {
      const chem::Bond& b = mol.bonds[bi];
      if (b.order == BondOrder::Single && !mol.bond_in_ring(bi) &&
          mol.atoms[b.a].in_ring != mol.atoms[b.b].in_ring)
        cuts.push_back({bi, "simple"});
    }
  }

  Fragmentation out;
  if (cuts.empty()) {
    out.fragments.push_back({mol, 0, "none"});
    return out;
  }

  // Build the cut graph: original atoms plus one stub per bond endpoint.
  MolGraph work;
  for (const auto& a : mol.atoms) work.add_atom(a);
  std::set<int> cut_bonds;
  for (const auto& c : cuts) cut_bonds.insert(c.bond);
  std::map<int, std::string> rule_of;
  for (const auto& c : cuts) rule_of[c.bond] = c.rule;
  struct StubPair {
    int stub_a;
    int stub_b;
    BondOrder order;
  };
  std::vector<StubPair> stub_pairs;
  for (int bi = 0; bi < mol.num_bonds(); ++bi) {
    const chem::Bond& b = mol.bonds[bi];
    if (!cut_bonds.count(bi)) {
      work.add_bond(b.a, b.b, b.order);
      continue;
    }
    chem::Atom stub;
    stub.element = Element::Dummy;
    stub.bracket = true;
    int sa = work.add_atom(stub);
    int sb = work.add_atom(stub);
    work.add_bond(b.a, sa, b.order);
    work.add_bond(b.b, sb, b.order);
    stub_pairs.push_back({sa, sb, b.order});
  }
  work.perceive();

  std::vector<int> comp = work.component_of();
  int ncomp = 1 + *std::max_element(comp.begin(), comp.end());
  std::vector<std::vector<int>> members(ncomp);
  for (int v = 0; v < work.num_atoms(); ++v) members[comp[v]].push_back(v);

  // Per-fragment stub labels 1..k in member order; remember the global
  // pairing so the decomposition can be reassembled.
  std::map<int, std::pair<int, int>> stub_location;  // work idx -> (frag, label)
  for (int c = 0; c < ncomp; ++c) {
    FragmentRecord rec;
    int next_label = 1;
    std::vector<int> keep = members[c];
    MolGraph frag;
    std::vector<int> map(work.num_atoms(), -1);
    for (int v : keep) {
      chem::Atom a = work.atoms[v];
      if (a.element == Element::Dummy) {
        a.stub_label = next_label++;
        stub_location[v] = {c, a.stub_label};
      }
      map[v] = frag.add_atom(a);
    }
    for (const chem::Bond& b : work.bonds)
      if (map[b.a] >= 0 && map[b.b] >= 0) frag.add_bond(map[b.a], map[b.b], b.order);
    frag.perceive();
    rec.fragment = std::move(frag);
    rec.anchor_count = next_label - 1;
    rec.origin_rule = "brics";
    out.fragments.push_back(std::move(rec));
  }
  // Record stub pairings; stub_pairs and cuts are both in bond order, so the
  // i-th join carries the i-th cut's rule id. A fragment's rule id collects
  // every bordering cut.
  std::vector<std::set<std::string>> frag_rules(out.fragments.size());
  for (std::size_t i = 0; i < stub_pairs.size(); ++i) {
    auto [fa, la] = stub_location.at(stub_pairs[i].stub_a);
    auto [fb, lb] = stub_location.at(stub_pairs[i].stub_b);
    out.joins.push_back({fa, la, fb, lb, stub_pairs[i].order, cuts[i].rule});
    frag_rules[fa].insert(cuts[i].rule);
    frag_rules[fb].insert(cuts[i].rule);
  }
  for (std::size_t fi = 0; fi < out.fragments.size(); ++fi) {
    std::string joined;
    for (const auto& r : frag_rules[fi]) {
      if (!joined.empty()) joined += "+";
      joined += r;
    }
    out.fragments[fi].origin_rule = joined;
  }
  return out;
}

// Reattaches every fragment at its stub labels; the round-trip oracle for
// the decomposition.
inline MolGraph reassemble(const Fragmentation& f) {
  MolGraph out;
  std::vector<std::vector<int>> atom_map(f.fragments.size());
  for (std::size_t fi = 0; fi < f.fragments.size(); ++fi) {
    const MolGraph& frag = f.fragments[fi].fragment;
    atom_map[fi].assign(frag.num_atoms(), -1);
    for (int v = 0; v < frag.num_atoms(); ++v)
      if (frag.atoms[v].element != Element::Dummy) atom_map[fi][v] = out.add_atom(frag.atoms[v]);
    for (const chem::Bond& b : frag.bonds)
      if (atom_map[fi][b.a] >= 0 && atom_map[fi][b.b] >= 0)
        out.add_bond(atom_map[fi][b.a], atom_map[fi][b.b], b.order);
  }
  auto stub_anchor = [&](int fi, int label) -> int {
    const MolGraph& frag = f.fragments[fi].fragment;
    for (int v = 0; v < frag.num_atoms(); ++v) {
      if (frag.atoms[v].element == Element::Dummy && frag.atoms[v].stub_label == label) {
        int u = frag.neighbors(v).front().first;
        return atom_map[fi][u];
      }
    }
    throw std::logic_error("missing stub label");
  };
  for (const BricsJoin& j : f.joins)
    out.add_bond(stub_anchor(j.frag_a, j.label_a), stub_anchor(j.frag_b, j.label_b), j.order);
  out.perceive();
  return out;
}

// ---------------------------------------------------------------------------
// Cut-set enumeration for the fragment database
// ---------------------------------------------------------------------------

struct CutFragment {
  std::vector<int> removed_atoms;  // connected, the smaller side of the cuts
  std::vector<int> cut_bonds;      // boundary bonds, all acyclic single
};

// Enumerates connected removable fragments whose boundary consists of
// 1..max_cuts acyclic single bonds, keeping the remainder connected. The
// removed side is the smaller one (ties by canonical SMILES) so each cut
// set is reported once.
inline std::vector<CutFragment> enumerate_cut_sets(const MolGraph& mol, int max_cuts,
                                                   int max_frag_atoms) {
  if (max_cuts < 1 || max_cuts > 3) throw std::invalid_argument("max_cuts must be in [1,3]");
  std::vector<int> candidate_bonds;
  for (int bi = 0; bi < mol.num_bonds(); ++bi)
    if (mol.bonds[bi].order == BondOrder::Single && !mol.bond_in_ring(bi))
      candidate_bonds.push_back(bi);

  std::vector<CutFragment> out;
  std::set<std::vector<int>> seen_removed;

  std::vector<int> chosen;
  auto consider = [&]() {
    // Split the graph on the chosen bonds and look for a component that is
    // adjacent to every chosen bond while the rest stays connected.
    std::set<int> cut(chosen.begin(), chosen.end());
    std::vector<int> comp(mol.num_atoms(), -1);
    int ncomp = 0;
    for (int s = 0; s < mol.num_atoms(); ++s) {
      if (comp[s] >= 0) continue;
      std::vector<int> stack{s};
      comp[s] = ncomp;
      while (!stack.empty()) {
        int v = stack.back();
        stack.pop_back();
        for (auto [u, bi] : mol.neighbors(v)) {
          if (cut.count(bi) || comp[u] >= 0) continue;
          comp[u] = ncomp;
          stack.push_back(u);
        }
      }
      ++ncomp;
    }
    if (ncomp != static_cast<int>(chosen.size()) + 1) return;  // bonds overlapped a cycle
    std::vector<std::vector<int>> members(ncomp);
    for (int v = 0; v < mol.num_atoms(); ++v) members[comp[v]].push_back(v);

    for (int c = 0; c < ncomp; ++c) {
      // The removed side must touch every cut bond; the remainder (all other
      // components) must be a single connected piece, which for bridges
      // means exactly two components total.
      bool touches_all = true;
      for (int bi : chosen) {
        const chem::Bond& b = mol.bonds[bi];
        if (comp[b.a] != c && comp[b.b] != c) {
          touches_all = false;
          break;
        }
      }
      if (!touches_all) continue;
      if (ncomp != 2) continue;  // remainder would be disconnected
      int other = 1 - c;
      const auto& rm = members[c];
      const auto& ctx = members[other];
      if (static_cast<int>(rm.size()) > max_frag_atoms) continue;
      bool smaller;
      if (rm.size() != ctx.size()) {
        smaller = rm.size() < ctx.size();
      } else {
        std::string srm = chem::write_canonical(chem::induced_subgraph(mol, rm));
        std::string sctx = chem::write_canonical(chem::induced_subgraph(mol, ctx));
        // Identical halves: report the cut once, from the lower-index side.
        smaller = srm != sctx ? srm < sctx : rm < ctx;
      }
      if (!smaller) continue;
      std::vector<int> key = rm;
      std::sort(key.begin(), key.end());
      if (seen_removed.insert(key).second) out.push_back({key, chosen});
    }
  };

  std::function<void(std::size_t, int)> rec = [&](std::size_t start, int depth) {
    if (depth > 0) consider();
    if (depth == max_cuts) return;
    for (std::size_t i = start; i < candidate_bonds.size(); ++i) {
      chosen.push_back(candidate_bonds[i]);
      rec(i + 1, depth + 1);
      chosen.pop_back();
    }
  };
  rec(0, 0);
  std::sort(out.begin(), out.end(), [](const CutFragment& a, const CutFragment& b) {
    return a.removed_atoms < b.removed_atoms;
  });
  return out;
}

// ---------------------------------------------------------------------------
// Common-substructure pair dataset
// ---------------------------------------------------------------------------

enum class AnchorScenario { SingleAnchor, MultipleAnchors, Both };

inline const char* anchor_scenario_name(AnchorScenario s) {
  switch (s) {
    case AnchorScenario::SingleAnchor: return "single_anchor";
    case AnchorScenario::MultipleAnchors: return "multiple_anchors";
    case AnchorScenario::Both: return "both";
  }
  return "both";
}

struct PairEntry {
  std::string fragment_smiles;       // canonical, stub-free
  MolGraph fragment;                 // stub-free pattern graph
  std::vector<int> superstructures;  // indices into the corpus
  AnchorScenario scenario = AnchorScenario::Both;
};

struct PairDataset {
  std::vector<PairEntry> entries;
};

struct EmptyResult : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Severed bonds between the matched core and the rest of the superstructure.
inline int anchor_bond_count(const MolGraph& target, const std::vector<int>& core_atoms) {
  std::vector<char> in_core(target.num_atoms(), 0);
  for (int v : core_atoms) in_core[v] = 1;
  int cut = 0;
  for (const chem::Bond& b : target.bonds)
    if (in_core[b.a] != in_core[b.b]) ++cut;
  return cut;
}

// Builds (source fragment, superstructures) entries: BRICS fragments of the
// corpus, deduplicated by canonical SMILES, paired with every other corpus
// molecule that contains them. Entries with fewer than two superstructures
// are dropped.
inline PairDataset build_pair_dataset(const std::vector<MolGraph>& corpus, int min_frag_atoms,
                                      std::optional<AnchorScenario> scenario_filter = {},
                                      FragmentationMode mode = FragmentationMode::Brics) {
  std::map<std::string, MolGraph> fragments;
  for (const MolGraph& mol : corpus) {
    Fragmentation f = brics_decompose(mol, mode);
    for (const FragmentRecord& rec : f.fragments) {
      MolGraph stripped = strip_stubs(rec.fragment);
      if (stripped.num_atoms() < min_frag_atoms || !stripped.connected()) continue;
      fragments.emplace(chem::write_canonical(stripped), stripped);
    }
  }

  PairDataset ds;
  for (auto& [smiles, frag] : fragments) {
    PairEntry entry;
    entry.fragment_smiles = smiles;
    entry.fragment = frag;
    bool any_single = false, any_multi = false;
    for (std::size_t i = 0; i < corpus.size(); ++i) {
      if (corpus[i].num_atoms() <= frag.num_atoms()) continue;
      auto maps = subgraph_match(frag, corpus[i], 1);
      if (maps.empty()) continue;
      int anchors = anchor_bond_count(corpus[i], maps.front().map);
      if (anchors == 1) any_single = true;
      else any_multi = true;
      entry.superstructures.push_back(static_cast<int>(i));
    }
    if (entry.superstructures.size() < 2) continue;
    entry.scenario = any_single && any_multi  ? AnchorScenario::Both
                     : any_single             ? AnchorScenario::SingleAnchor
                                              : AnchorScenario::MultipleAnchors;
    if (scenario_filter && entry.scenario != *scenario_filter) continue;
    ds.entries.push_back(std::move(entry));
  }
  if (ds.entries.empty()) throw EmptyResult("no fragment qualifies for the pair dataset");
  return ds;
}

}  // namespace cfmask::match

#endif  // CFMASK_MATCH_HPP
