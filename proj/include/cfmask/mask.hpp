//
// Project cfmask - Copyright 2026 cfmask developers.
// SPDX-License-Identifier: Apache-2.0
//
// Counterfactual masking: important-subgraph extraction, whole-ring
// expansion, context/anchor extraction, the context-indexed fragment
// database, context-matched replacement sampling with graph surgery, and
// the feature-zeroing baseline.

#ifndef CFMASK_MASK_HPP
#define CFMASK_MASK_HPP

#include <algorithm>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "cfmask/chem.hpp"
#include "cfmask/match.hpp"

namespace cfmask::mask {

using chem::BondOrder;
using chem::MolGraph;

struct ArityMismatch : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct EmptySelection : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

enum class RejectReason {
  DisconnectedContext,
  NothingLeft,
  MultiComponentSelection,
  NoContextMatch,
};

inline const char* reject_reason_name(RejectReason r) {
  switch (r) {
    case RejectReason::DisconnectedContext: return "disconnected_context";
    case RejectReason::NothingLeft: return "nothing_left";
    case RejectReason::MultiComponentSelection: return "multi_component_selection";
    case RejectReason::NoContextMatch: return "no_context_match";
  }
  return "unknown";
}

// Feature-zeroing baseline: masked rows go to zero, topology untouched.
inline chem::FeatureMatrix zero_mask(const chem::FeatureMatrix& features,
                                     const std::vector<int>& atoms) {
  chem::FeatureMatrix out = features;
  for (int v : atoms) {
    if (v < 0 || v >= out.rows) throw std::out_of_range("zero_mask atom index");
    for (int c = 0; c < chem::FeatureMatrix::cols; ++c) out.at(v, c) = 0.0;
  }
  return out;
}

// Connected components of the subgraph induced on the selected atoms.
inline std::vector<std::vector<int>> important_subgraphs(const MolGraph& mol,
                                                         const std::vector<int>& selected) {
  if (selected.empty()) throw EmptySelection("no atoms selected");
  std::set<int> in(selected.begin(), selected.end());
  for (int v : in)
    if (v < 0 || v >= mol.num_atoms()) throw std::out_of_range("selection index");
  std::vector<std::vector<int>> components;
  std::set<int> seen;
  for (int start : in) {
    if (seen.count(start)) continue;
    std::vector<int> comp, stack{start};
    seen.insert(start);
    while (!stack.empty()) {
      int v = stack.back();
      stack.pop_back();
      comp.push_back(v);
      for (auto [u, bi] : mol.neighbors(v)) {
        (void)bi;
        if (in.count(u) && !seen.count(u)) {
          seen.insert(u);
          stack.push_back(u);
        }
      }
    }
    std::sort(comp.begin(), comp.end());
    components.push_back(std::move(comp));
  }
  std::sort(components.begin(), components.end());
  return components;
}

// Ring closure: any ring intersecting the set joins it, to fixpoint.
inline std::vector<int> expand_to_rings(const MolGraph& mol, const std::vector<int>& atoms) {
  std::set<int> out(atoms.begin(), atoms.end());
  bool grew = true;
  while (grew) {
    grew = false;
    for (const auto& ring : mol.rings()) {
      bool touches = false;
      for (int a : ring)
        if (out.count(a)) {
          touches = true;
          break;
        }
      if (!touches) continue;
      for (int a : ring)
        if (out.insert(a).second) grew = true;
    }
  }
  return {out.begin(), out.end()};
}

struct AttachmentPoint {
  int context_atom;  // index in the extracted context graph
  BondOrder order;   // severed bond order
};

struct Context {
  MolGraph graph;                        // the molecule minus the removed atoms
  std::vector<AttachmentPoint> anchors;  // ordered as in the key
  std::vector<int> context_to_source;    // context atom -> source atom index
  std::string key;                       // printable ContextKey encoding
};

struct ExtractResult {
  std::optional<Context> context;
  RejectReason reason = RejectReason::NothingLeft;
  bool ok() const { return context.has_value(); }
};

namespace detail {

// Canonical encoding of the radius-r neighborhood of one anchor inside the
// context. A labeled stub bonded with the severed order marks the anchor,
// so the string is invariant under context relabeling.
inline std::string anchor_neighborhood_key(const MolGraph& context, int anchor, BondOrder order,
                                           int radius) {
  std::vector<int> dist(context.num_atoms(), -1);
  std::vector<int> frontier{anchor};
  dist[anchor] = 0;
  std::vector<int> keep{anchor};
  for (int d = 1; d <= radius && !frontier.empty(); ++d) {
    std::vector<int> next;
    for (int v : frontier) {
      for (auto [u, bi] : context.neighbors(v)) {
        (void)bi;
        if (dist[u] < 0) {
          dist[u] = d;
          next.push_back(u);
          keep.push_back(u);
        }
      }
    }
    frontier = std::move(next);
  }
  std::sort(keep.begin(), keep.end());
  MolGraph sub;
  std::vector<int> map(context.num_atoms(), -1);
  for (int v : keep) map[v] = sub.add_atom(context.atoms[v]);
  for (const chem::Bond& b : context.bonds)
    if (map[b.a] >= 0 && map[b.b] >= 0) sub.add_bond(map[b.a], map[b.b], b.order);
  chem::Atom stub;
  stub.element = chem::Element::Dummy;
  stub.bracket = true;
  stub.stub_label = 1;
  int s = sub.add_atom(stub);
  sub.add_bond(map[anchor], s, order);
  sub.perceive();
  return chem::write_canonical(sub);
}

}  // namespace detail

// Removes `removed` from mol. The context must stay connected and nonempty;
// anchors are the severed bonds in deterministic (key-sorted) order.
inline ExtractResult extract_context(const MolGraph& mol, const std::vector<int>& removed,
                                     int radius = 1) {
  if (removed.empty()) throw EmptySelection("nothing to remove");
  std::set<int> rm(removed.begin(), removed.end());
  std::vector<int> keep;
  for (int v = 0; v < mol.num_atoms(); ++v)
    if (!rm.count(v)) keep.push_back(v);
  if (keep.empty()) return {std::nullopt, RejectReason::NothingLeft};

  MolGraph context;
  std::vector<int> map(mol.num_atoms(), -1);
  for (int v : keep) map[v] = context.add_atom(mol.atoms[v]);
  for (const chem::Bond& b : mol.bonds)
    if (map[b.a] >= 0 && map[b.b] >= 0) context.add_bond(map[b.a], map[b.b], b.order);
  context.perceive();
  if (!context.connected()) return {std::nullopt, RejectReason::DisconnectedContext};

  struct RawAnchor {
    int context_atom;
    BondOrder order;
    std::string key;
  };
  std::vector<RawAnchor> raw;
  for (const chem::Bond& b : mol.bonds) {
    bool a_rm = rm.count(b.a) > 0, b_rm = rm.count(b.b) > 0;
    if (a_rm == b_rm) continue;
    int ctx_atom = map[a_rm ? b.b : b.a];
    raw.push_back({ctx_atom, b.order, {}});
  }
  for (auto& a : raw)
    a.key = detail::anchor_neighborhood_key(context, a.context_atom, a.order, radius);
  std::sort(raw.begin(), raw.end(), [](const RawAnchor& x, const RawAnchor& y) {
    if (x.key != y.key) return x.key < y.key;
    return x.context_atom < y.context_atom;
  });

  Context out;
  out.graph = std::move(context);
  out.context_to_source = keep;
  std::string key = "k=" + std::to_string(raw.size());
  for (const auto& a : raw) {
    out.anchors.push_back({a.context_atom, a.order});
    key += "|" + a.key;
  }
  out.key = key;
  return {std::move(out), RejectReason::NothingLeft};
}

// The removed part of a cut, carried as a stub-labeled fragment whose stub
// order matches the anchor order of the matching context key.
inline MolGraph removed_fragment_graph(const MolGraph& mol, const std::vector<int>& removed,
                                       const std::vector<int>& anchor_source_atoms,
                                       const std::vector<BondOrder>& orders) {
  std::set<int> rm(removed.begin(), removed.end());
  MolGraph frag;
  std::vector<int> map(mol.num_atoms(), -1);
  for (int v : removed) map[v] = frag.add_atom(mol.atoms[v]);
  for (const chem::Bond& b : mol.bonds)
    if (map[b.a] >= 0 && map[b.b] >= 0) frag.add_bond(map[b.a], map[b.b], b.order);
  for (std::size_t i = 0; i < anchor_source_atoms.size(); ++i) {
    chem::Atom stub;
    stub.element = chem::Element::Dummy;
    stub.bracket = true;
    stub.stub_label = static_cast<int>(i) + 1;
    int s = frag.add_atom(stub);
    frag.add_bond(map[anchor_source_atoms[i]], s, orders[i]);
  }
  frag.perceive();
  return frag;
}

// Joins a stub-labeled fragment to the context: stub i bonds to anchor i
// with the recorded severed order. Fails on arity or validity problems.
inline MolGraph attach(const Context& ctx, const MolGraph& fragment) {
  std::vector<int> stub_atoms(ctx.anchors.size() + 1, -1);
  int n_stubs = 0;
  for (int v = 0; v < fragment.num_atoms(); ++v) {
    if (fragment.atoms[v].element != chem::Element::Dummy) continue;
    ++n_stubs;
    int label = fragment.atoms[v].stub_label;
    if (label >= 1 && label <= static_cast<int>(ctx.anchors.size())) stub_atoms[label] = v;
  }
  if (n_stubs != static_cast<int>(ctx.anchors.size()))
    throw ArityMismatch("fragment has " + std::to_string(n_stubs) + " stubs, context expects " +
                        std::to_string(ctx.anchors.size()));
  for (std::size_t i = 1; i <= ctx.anchors.size(); ++i)
    if (stub_atoms[i] < 0) throw ArityMismatch("missing stub label " + std::to_string(i));

  MolGraph out;
  std::vector<int> ctx_map(ctx.graph.num_atoms());
  for (int v = 0; v < ctx.graph.num_atoms(); ++v) ctx_map[v] = out.add_atom(ctx.graph.atoms[v]);
  for (const chem::Bond& b : ctx.graph.bonds)
    out.add_bond(ctx_map[b.a], ctx_map[b.b], b.order);
  std::vector<int> frag_map(fragment.num_atoms(), -1);
  for (int v = 0; v < fragment.num_atoms(); ++v)
    if (fragment.atoms[v].element != chem::Element::Dummy)
      frag_map[v] = out.add_atom(fragment.atoms[v]);
  for (const chem::Bond& b : fragment.bonds)
    if (frag_map[b.a] >= 0 && frag_map[b.b] >= 0)
      out.add_bond(frag_map[b.a], frag_map[b.b], b.order);
  for (std::size_t i = 0; i < ctx.anchors.size(); ++i) {
    int stub = stub_atoms[i + 1];
    int frag_atom = -1;
    for (auto [u, bi] : fragment.neighbors(stub)) {
      (void)bi;
      frag_atom = u;
    }
    if (frag_atom < 0 || frag_map[frag_atom] < 0) throw ArityMismatch("stub not attached");
    out.add_bond(ctx_map[ctx.anchors[i].context_atom], frag_map[frag_atom],
                 ctx.anchors[i].order);
  }
  out.perceive();
  auto violations = out.check_valence();
  if (!violations.empty())
    throw chem::ValenceError(violations.front().atom, "attachment exceeds valence");
  if (!out.aromatic_consistent())
    throw chem::ValenceError(-1, "attachment breaks aromatic rings");
  return out;
}

// ---------------------------------------------------------------------------
// Fragment database
// ---------------------------------------------------------------------------

struct FragmentDb {
  int radius = 1;
  int max_cuts = 2;
  int max_frag_atoms = 12;
  std::string corpus_hash;
  // key -> fragment canonical SMILES (with labeled stubs) -> count
  std::map<std::string, std::map<std::string, int>> entries;

  std::size_t key_count() const { return entries.size(); }
  std::size_t fragment_count() const {
    std::size_t n = 0;
    for (const auto& [k, v] : entries) n += v.size();
    return n;
  }
};

struct EmptyCorpus : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline std::string corpus_fingerprint(const std::vector<MolGraph>& corpus) {
  std::vector<std::string> smiles;
  smiles.reserve(corpus.size());
  for (const auto& m : corpus) smiles.push_back(chem::write_canonical(m));
  std::sort(smiles.begin(), smiles.end());
  std::uint64_t h = 0x1234abcdull;
  for (const auto& s : smiles)
    for (char c : s) h = chem::detail::hash_combine(h, static_cast<std::uint64_t>(c));
  std::ostringstream os;
  os << std::hex << h;
  return os.str();
}

// Indexes every enumerated cut of every corpus molecule by its ContextKey.
// Deterministic: counts are unordered sums and keys are sorted maps.
inline FragmentDb build_fragdb(const std::vector<MolGraph>& corpus, int radius = 1,
                               int max_cuts = 2, int max_frag_atoms = 12) {
  if (corpus.empty()) throw EmptyCorpus("fragment database needs a corpus");
  FragmentDb db;
  db.radius = radius;
  db.max_cuts = max_cuts;
  db.max_frag_atoms = max_frag_atoms;
  db.corpus_hash = corpus_fingerprint(corpus);
  for (const MolGraph& mol : corpus) {
    for (const match::CutFragment& cut :
         match::enumerate_cut_sets(mol, max_cuts, max_frag_atoms)) {
      ExtractResult er = extract_context(mol, cut.removed_atoms, radius);
      if (!er.ok()) continue;
      const Context& ctx = *er.context;
      // Anchor order in the key determines stub labels; recover the severed
      // source atoms in that same order.
      std::set<int> rm(cut.removed_atoms.begin(), cut.removed_atoms.end());
      std::vector<int> anchor_sources;
      std::vector<BondOrder> orders;
      for (const AttachmentPoint& ap : ctx.anchors) {
        int src_ctx_atom = ctx.context_to_source[ap.context_atom];
        int chosen = -1;
        for (auto [u, bi] : mol.neighbors(src_ctx_atom)) {
          if (!rm.count(u) || mol.bonds[bi].order != ap.order) continue;
          bool taken = false;
          for (std::size_t j = 0; j < anchor_sources.size(); ++j)
            if (anchor_sources[j] == u &&
                ctx.context_to_source[ctx.anchors[j].context_atom] == src_ctx_atom)
              taken = true;
          if (!taken) {
            chosen = u;
            break;
          }
        }
        if (chosen < 0) continue;
        anchor_sources.push_back(chosen);
        orders.push_back(ap.order);
      }
      if (anchor_sources.size() != ctx.anchors.size()) continue;
      MolGraph frag = removed_fragment_graph(mol, cut.removed_atoms, anchor_sources, orders);
      ++db.entries[ctx.key][chem::write_canonical(frag)];
    }
  }
  return db;
}

inline void save_fragdb(const FragmentDb& db, std::ostream& os) {
  os << "fragdb v1 r=" << db.radius << " cuts=" << db.max_cuts
     << " maxatoms=" << db.max_frag_atoms << " corpus=" << db.corpus_hash << "\n";
  for (const auto& [key, frags] : db.entries)
    for (const auto& [smiles, count] : frags) os << key << "\t" << smiles << "\t" << count << "\n";
}

inline FragmentDb load_fragdb(std::istream& is) {
  FragmentDb db;
  std::string header;
  if (!std::getline(is, header) || header.rfind("fragdb v1", 0) != 0)
    throw std::runtime_error("bad fragdb header");
  std::istringstream hs(header.substr(9));
  std::string kv;
  while (hs >> kv) {
    auto eq = kv.find('=');
    if (eq == std::string::npos) continue;
    std::string k = kv.substr(0, eq), val = kv.substr(eq + 1);
    if (k == "r") db.radius = std::stoi(val);
    else if (k == "cuts") db.max_cuts = std::stoi(val);
    else if (k == "maxatoms") db.max_frag_atoms = std::stoi(val);
    else if (k == "corpus") db.corpus_hash = val;
  }
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    auto t1 = line.find('\t');
    auto t2 = line.find('\t', t1 + 1);
    if (t1 == std::string::npos || t2 == std::string::npos)
      throw std::runtime_error("bad fragdb row: " + line);
    db.entries[line.substr(0, t1)][line.substr(t1 + 1, t2 - t1 - 1)] =
        std::stoi(line.substr(t2 + 1));
  }
  return db;
}

// ---------------------------------------------------------------------------
// Counterfactual generation
// ---------------------------------------------------------------------------

struct GeneratedVariant {
  MolGraph molecule;
  std::string fragment_smiles;     // inserted fragment (with stubs)
  std::vector<int> replaced_atoms; // indices of inserted atoms in `molecule`
  std::string source_id;
  double prediction = 0.0;         // filled by callers
};

struct CmResult {
  std::vector<GeneratedVariant> variants;
  bool rejected = false;
  RejectReason reason = RejectReason::NoContextMatch;

  bool ok() const { return !rejected; }
};

enum class RingMode { Off, On };
enum class SampleMode { FrequencyWeighted, Uniform };

// The CM pipeline: optional ring expansion, single connected important
// subgraph, context extraction, context-key lookup, weighted sampling
// without replacement (the original fragment excluded), graph surgery and
// the validity gate. Deterministic given (db, mol, selection, seed).
inline CmResult cm_generate(const MolGraph& mol, const std::vector<int>& selected_atoms,
                            const FragmentDb& db, int n_samples, std::uint64_t seed,
                            RingMode ring_mode = RingMode::On,
                            SampleMode sample_mode = SampleMode::FrequencyWeighted) {
  std::vector<int> atoms = ring_mode == RingMode::On ? expand_to_rings(mol, selected_atoms)
                                                     : selected_atoms;
  auto components = important_subgraphs(mol, atoms);
  if (components.size() != 1) return {{}, true, RejectReason::MultiComponentSelection};
  const std::vector<int>& removed = components.front();

  ExtractResult er = extract_context(mol, removed, db.radius);
  if (!er.ok()) return {{}, true, er.reason};
  const Context& ctx = *er.context;

  auto entry = db.entries.find(ctx.key);
  if (entry == db.entries.end()) return {{}, true, RejectReason::NoContextMatch};

  // Canonical form of the fragment being replaced, to exclude it.
  std::set<int> rm(removed.begin(), removed.end());
  std::vector<int> anchor_sources;
  std::vector<BondOrder> orders;
  for (const AttachmentPoint& ap : ctx.anchors) {
    int src_ctx_atom = ctx.context_to_source[ap.context_atom];
    for (auto [u, bi] : mol.neighbors(src_ctx_atom)) {
      if (rm.count(u) && mol.bonds[bi].order == ap.order) {
        bool taken = false;
        for (std::size_t j = 0; j < anchor_sources.size(); ++j)
          if (anchor_sources[j] == u) taken = true;
        if (!taken) {
          anchor_sources.push_back(u);
          orders.push_back(ap.order);
          break;
        }
      }
    }
  }
  std::string original_fragment =
      anchor_sources.size() == ctx.anchors.size()
          ? chem::write_canonical(removed_fragment_graph(mol, removed, anchor_sources, orders))
          : std::string();

  struct Candidate {
    std::string smiles;
    double weight;
  };
  std::vector<Candidate> pool;
  for (const auto& [smiles, count] : entry->second) {
    if (smiles == original_fragment) continue;
    pool.push_back({smiles, sample_mode == SampleMode::FrequencyWeighted
                                ? static_cast<double>(count)
                                : 1.0});
  }
  if (pool.empty()) return {{}, true, RejectReason::NoContextMatch};

  std::mt19937_64 rng(seed ^ 0xcf9e2d3aull);
  CmResult result;
  std::set<std::string> seen;
  int drawn = 0;
  while (drawn < n_samples && !pool.empty()) {
    double total = 0.0;
    for (const auto& c : pool) total += c.weight;
    std::uniform_real_distribution<double> dist(0.0, total);
    double r = dist(rng);
    std::size_t pick = 0;
    for (; pick + 1 < pool.size(); ++pick) {
      r -= pool[pick].weight;
      if (r < 0.0) break;
    }
    Candidate cand = pool[pick];
    pool.erase(pool.begin() + static_cast<long>(pick));
    ++drawn;
    try {
      MolGraph frag = chem::parse_smiles(cand.smiles);
      int n_frag = 0;
      for (const auto& a : frag.atoms)
        if (a.element != chem::Element::Dummy) ++n_frag;
      MolGraph variant = attach(ctx, frag);
      if (!variant.connected()) continue;
      std::string canon = chem::write_canonical(variant);
      if (!seen.insert(canon).second) continue;
      GeneratedVariant gv;
      gv.molecule = std::move(variant);
      gv.fragment_smiles = cand.smiles;
      int n_ctx = ctx.graph.num_atoms();
      for (int i = 0; i < n_frag; ++i) gv.replaced_atoms.push_back(n_ctx + i);
      gv.source_id = mol.name;
      result.variants.push_back(std::move(gv));
    } catch (const chem::ValenceError&) {
      // invalid attachment: dropped, coverage loss only
    } catch (const ArityMismatch&) {
    }
  }
  return result;
}

}  // namespace cfmask::mask

#endif  // CFMASK_MASK_HPP
