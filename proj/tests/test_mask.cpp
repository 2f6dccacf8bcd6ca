//
// Project cfmask - Copyright 2026 cfmask developers.
// SPDX-License-Identifier: Apache-2.0
//

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>
#include <sstream>

#include "cfmask/gnn.hpp"
#include "cfmask/mask.hpp"
#include "corpus.hpp"

using namespace cfmask;
using chem::BondOrder;
using chem::MolGraph;

namespace {

std::vector<MolGraph> parsed_corpus() {
  std::vector<MolGraph> out;
  for (const auto& s : cfmask::testing::corpus_smiles()) out.push_back(chem::parse_smiles(s));
  return out;
}

int atom_of(const MolGraph& m, chem::Element e) {
  for (int i = 0; i < m.num_atoms(); ++i)
    if (m.atoms[i].element == e) return i;
  return -1;
}

}  // namespace

TEST_CASE("important_subgraphs: components of the induced selection") {
  MolGraph chain = chem::parse_smiles("CCCCC");
  CHECK(mask::important_subgraphs(chain, {1, 2, 3}).size() == 1);
  CHECK(mask::important_subgraphs(chain, {0, 4}).size() == 2);
  CHECK(mask::important_subgraphs(chain, {0, 1, 2, 3, 4}).size() == 1);
  CHECK_THROWS_AS(mask::important_subgraphs(chain, {}), mask::EmptySelection);
}

TEST_CASE("expand_to_rings: whole rings join the selection") {
  MolGraph benzene = chem::parse_smiles("c1ccccc1");
  CHECK(mask::expand_to_rings(benzene, {0}).size() == 6);

  MolGraph chain = chem::parse_smiles("CCCCC");
  CHECK(mask::expand_to_rings(chain, {1, 2}) == std::vector<int>{1, 2});

  // Fused rings reach fixpoint: one shared naphthalene atom pulls in all 10.
  MolGraph naph = chem::parse_smiles("c1ccc2ccccc2c1");
  int shared = -1;
  for (int v = 0; v < naph.num_atoms(); ++v)
    if (naph.atoms[v].degree == 3) shared = v;
  REQUIRE(shared >= 0);
  CHECK(mask::expand_to_rings(naph, {shared}).size() == 10);
}

TEST_CASE("extract_context: terminal removal keeps one anchor") {
  MolGraph propanol = chem::parse_smiles("CCCO");
  auto er = mask::extract_context(propanol, {0});
  REQUIRE(er.ok());
  CHECK(er.context->graph.num_atoms() == 3);
  REQUIRE(er.context->anchors.size() == 1);
  CHECK(er.context->anchors[0].order == BondOrder::Single);
}

TEST_CASE("extract_context: middle removal disconnects") {
  MolGraph chain = chem::parse_smiles("CCC");
  auto er = mask::extract_context(chain, {1});
  CHECK(!er.ok());
  CHECK(er.reason == mask::RejectReason::DisconnectedContext);
}

TEST_CASE("extract_context: removing everything is rejected") {
  MolGraph m = chem::parse_smiles("CC");
  auto er = mask::extract_context(m, {0, 1});
  CHECK(!er.ok());
  CHECK(er.reason == mask::RejectReason::NothingLeft);
}

TEST_CASE("extract_context: severed double bond is recorded") {
  MolGraph ene = chem::parse_smiles("CC=C");
  auto er = mask::extract_context(ene, {2});
  REQUIRE(er.ok());
  REQUIRE(er.context->anchors.size() == 1);
  CHECK(er.context->anchors[0].order == BondOrder::Double);
}

TEST_CASE("context keys are invariant under atom relabeling") {
  std::mt19937 rng(17);
  for (const char* s : {"CC(=O)NCC", "CCc1ccccc1", "CC(C)CCO"}) {
    MolGraph m = chem::parse_smiles(s);
    auto base = mask::extract_context(m, {0});
    REQUIRE(base.ok());
    std::vector<int> perm(m.num_atoms());
    for (int i = 0; i < m.num_atoms(); ++i) perm[i] = i;
    for (int t = 0; t < 5; ++t) {
      std::shuffle(perm.begin(), perm.end(), rng);
      MolGraph pm = chem::permute_atoms(m, perm);
      // Atom 0 of m sits at position inverse[0] in pm.
      int where = -1;
      for (int i = 0; i < static_cast<int>(perm.size()); ++i)
        if (perm[i] == 0) where = i;
      auto er = mask::extract_context(pm, {where});
      REQUIRE(er.ok());
      CHECK(er.context->key == base.context->key);
    }
  }
}

TEST_CASE("attach: re-attaching the removed fragment reproduces the source") {
  std::mt19937_64 rng(2025);
  auto corpus = parsed_corpus();
  int done = 0;
  while (done < 100) {
    const MolGraph& mol = corpus[rng() % corpus.size()];
    auto cuts = match::enumerate_cut_sets(mol, 2, 12);
    if (cuts.empty()) continue;
    const auto& cut = cuts[rng() % cuts.size()];
    auto er = mask::extract_context(mol, cut.removed_atoms);
    REQUIRE(er.ok());
    const mask::Context& ctx = *er.context;
    std::set<int> rm(cut.removed_atoms.begin(), cut.removed_atoms.end());
    std::vector<int> anchor_sources;
    std::vector<BondOrder> orders;
    for (const auto& ap : ctx.anchors) {
      int src = ctx.context_to_source[ap.context_atom];
      for (auto [u, bi] : mol.neighbors(src))
        if (rm.count(u) && mol.bonds[bi].order == ap.order) {
          anchor_sources.push_back(u);
          orders.push_back(ap.order);
          break;
        }
    }
    REQUIRE(anchor_sources.size() == ctx.anchors.size());
    MolGraph frag =
        mask::removed_fragment_graph(mol, cut.removed_atoms, anchor_sources, orders);
    MolGraph back = mask::attach(ctx, frag);
    CHECK(match::isomorphic(back, mol));
    ++done;
  }
}

TEST_CASE("attach: arity mismatch is rejected") {
  MolGraph mol = chem::parse_smiles("CCCO");
  auto er = mask::extract_context(mol, {0});
  REQUIRE(er.ok());
  MolGraph two_stub = chem::parse_smiles("[*:1]C(C)[*:2]");
  CHECK_THROWS_AS(mask::attach(*er.context, two_stub), mask::ArityMismatch);
}

TEST_CASE("attach: O for N swap turns CCN into CCO") {
  MolGraph mol = chem::parse_smiles("CCN");
  int n = atom_of(mol, chem::Element::N);
  auto er = mask::extract_context(mol, {n});
  REQUIRE(er.ok());
  MolGraph o_frag = chem::parse_smiles("[*:1]O");
  MolGraph out = mask::attach(*er.context, o_frag);
  CHECK(chem::write_canonical(out) == chem::write_canonical(chem::parse_smiles("CCO")));
}

TEST_CASE("attach: valence violations fail the surgery") {
  // Severed double bond re-applied to a univalent cap breaks fluorine.
  MolGraph mol = chem::parse_smiles("CC=C");
  auto er = mask::extract_context(mol, {2});
  REQUIRE(er.ok());
  REQUIRE(er.context->anchors[0].order == BondOrder::Double);
  MolGraph bad = chem::parse_smiles("[*:1]F");
  CHECK_THROWS_AS(mask::attach(*er.context, bad), chem::ValenceError);
}

TEST_CASE("fragdb: hand-enumerated two-molecule corpus") {
  std::vector<MolGraph> corpus{chem::parse_smiles("CCO"), chem::parse_smiles("CCN")};
  auto db = mask::build_fragdb(corpus, 1, 2, 12);
  // The shared ethyl context must offer both the O and the N caps.
  std::string o_frag = chem::write_canonical(chem::parse_smiles("[*:1]O"));
  std::string n_frag = chem::write_canonical(chem::parse_smiles("[*:1]N"));
  bool found = false;
  for (const auto& [key, frags] : db.entries) {
    if (frags.count(o_frag) && frags.count(n_frag)) {
      found = true;
      CHECK(frags.at(o_frag) == 1);
      CHECK(frags.at(n_frag) == 1);
    }
  }
  CHECK(found);
}

TEST_CASE("fragdb: rebuilding is bit-identical and order-independent") {
  auto corpus = parsed_corpus();
  std::vector<MolGraph> subset(corpus.begin(), corpus.begin() + 20);
  auto db1 = mask::build_fragdb(subset, 1, 2, 12);
  std::reverse(subset.begin(), subset.end());
  auto db2 = mask::build_fragdb(subset, 1, 2, 12);
  std::ostringstream s1, s2;
  mask::save_fragdb(db1, s1);
  mask::save_fragdb(db2, s2);
  CHECK(s1.str() == s2.str());
}

TEST_CASE("fragdb: stored fragments reattach validly to an originating context") {
  std::vector<MolGraph> corpus{chem::parse_smiles("CCO"), chem::parse_smiles("CCN"),
                               chem::parse_smiles("CCCC"), chem::parse_smiles("CCOC")};
  auto db = mask::build_fragdb(corpus, 1, 2, 12);
  // Every (key, fragment) pair must attach to at least one context with that
  // key found in the corpus.
  for (const auto& [key, frags] : db.entries) {
    for (const auto& [frag_smiles, count] : frags) {
      (void)count;
      bool attached = false;
      for (const MolGraph& mol : corpus) {
        for (const auto& cut : match::enumerate_cut_sets(mol, 2, 12)) {
          auto er = mask::extract_context(mol, cut.removed_atoms, 1);
          if (!er.ok() || er.context->key != key) continue;
          try {
            MolGraph out = mask::attach(*er.context, chem::parse_smiles(frag_smiles));
            if (out.check_valence().empty()) attached = true;
          } catch (const std::exception&) {
          }
          if (attached) break;
        }
        if (attached) break;
      }
      CHECK(attached);
    }
  }
}

TEST_CASE("fragdb round-trips through its file format") {
  auto corpus = parsed_corpus();
  std::vector<MolGraph> subset(corpus.begin(), corpus.begin() + 15);
  auto db = mask::build_fragdb(subset, 1, 2, 12);
  std::stringstream ss;
  mask::save_fragdb(db, ss);
  auto loaded = mask::load_fragdb(ss);
  CHECK(loaded.radius == db.radius);
  CHECK(loaded.corpus_hash == db.corpus_hash);
  CHECK(loaded.entries == db.entries);
}

TEST_CASE("cm_generate: hand-enumerated replacements for the O cap") {
  std::vector<MolGraph> corpus{chem::parse_smiles("CCO"), chem::parse_smiles("CCN"),
                               chem::parse_smiles("CCF")};
  auto db = mask::build_fragdb(corpus, 1, 1, 12);
  MolGraph mol = chem::parse_smiles("CCO");
  int o = atom_of(mol, chem::Element::O);
  auto res = mask::cm_generate(mol, {o}, db, 8, 7, mask::RingMode::Off);
  REQUIRE(res.ok());
  std::set<std::string> got;
  for (const auto& v : res.variants) got.insert(chem::write_canonical(v.molecule));
  std::set<std::string> want{chem::write_canonical(chem::parse_smiles("CCN")),
                             chem::write_canonical(chem::parse_smiles("CCF"))};
  CHECK(got == want);
  for (const auto& v : res.variants) {
    CHECK(v.molecule.check_valence().empty());
    CHECK(v.molecule.connected());
    CHECK(v.replaced_atoms.size() == 1);
  }
}

TEST_CASE("cm_generate: zero samples, rejections, determinism") {
  std::vector<MolGraph> corpus{chem::parse_smiles("CCO"), chem::parse_smiles("CCN"),
                               chem::parse_smiles("CCF")};
  auto db = mask::build_fragdb(corpus, 1, 1, 12);
  MolGraph mol = chem::parse_smiles("CCO");
  int o = atom_of(mol, chem::Element::O);

  CHECK(mask::cm_generate(mol, {o}, db, 0, 7).variants.empty());

  // Disconnected selection on CCOCC: both terminal carbons.
  MolGraph ether = chem::parse_smiles("CCOCC");
  auto multi = mask::cm_generate(ether, {0, 4}, db, 4, 7, mask::RingMode::Off);
  CHECK(multi.rejected);
  CHECK(multi.reason == mask::RejectReason::MultiComponentSelection);

  // Middle removal leaves a disconnected context.
  auto disc = mask::cm_generate(chem::parse_smiles("CCC"), {1}, db, 4, 7, mask::RingMode::Off);
  CHECK(disc.rejected);
  CHECK(disc.reason == mask::RejectReason::DisconnectedContext);

  // An aromatic context this acyclic corpus has never seen.
  auto nomatch = mask::cm_generate(chem::parse_smiles("c1ccccc1CCCC"), {6, 7, 8, 9}, db, 4, 7,
                                   mask::RingMode::Off);
  CHECK(nomatch.rejected);
  CHECK(nomatch.reason == mask::RejectReason::NoContextMatch);

  auto a = mask::cm_generate(mol, {o}, db, 2, 99, mask::RingMode::Off);
  auto b = mask::cm_generate(mol, {o}, db, 2, 99, mask::RingMode::Off);
  REQUIRE(a.variants.size() == b.variants.size());
  for (std::size_t i = 0; i < a.variants.size(); ++i) {
    CHECK(chem::write_canonical(a.variants[i].molecule) ==
          chem::write_canonical(b.variants[i].molecule));
  }
}

TEST_CASE("cm_generate: ring mode replaces whole terminal rings") {
  // Rings enter the database when they are the smaller side of a cut, so
  // give each one a chain longer than the ring.
  std::vector<MolGraph> corpus{chem::parse_smiles("CCCCCCCc1ccccc1"),
                               chem::parse_smiles("CCCCCCCCC1CCCCC1"),
                               chem::parse_smiles("CCCCCCCCC1CCCC1")};
  auto db = mask::build_fragdb(corpus, 1, 1, 12);
  MolGraph mol = chem::parse_smiles("CCCCCCCc1ccccc1");
  // Select one aromatic atom; ring mode must expand to the whole phenyl.
  int aromatic_atom = -1;
  for (int v = 0; v < mol.num_atoms(); ++v)
    if (mol.atoms[v].aromatic) aromatic_atom = v;
  REQUIRE(aromatic_atom >= 0);
  auto res = mask::cm_generate(mol, {aromatic_atom}, db, 64, 5, mask::RingMode::On);
  REQUIRE(res.ok());
  REQUIRE(!res.variants.empty());
  std::set<std::string> got;
  for (const auto& v : res.variants) got.insert(chem::write_canonical(v.molecule));
  CHECK(got.count(chem::write_canonical(chem::parse_smiles("CCCCCCCC1CCCCC1"))) == 1);
  CHECK(got.count(chem::write_canonical(chem::parse_smiles("CCCCCCCC1CCCC1"))) == 1);
  // The original phenyl ring never reappears.
  CHECK(got.count(chem::write_canonical(mol)) == 0);
}

TEST_CASE("cm_generate outputs are valid, connected, and distinct across the corpus") {
  auto corpus = parsed_corpus();
  auto db = mask::build_fragdb(corpus, 1, 2, 12);
  std::mt19937_64 rng(404);
  int generated = 0;
  for (const auto& mol : corpus) {
    std::vector<int> sel{static_cast<int>(rng() % mol.num_atoms())};
    auto res = mask::cm_generate(mol, sel, db, 6, rng(), mask::RingMode::On);
    if (!res.ok()) continue;
    std::set<std::string> seen;
    for (const auto& v : res.variants) {
      ++generated;
      CHECK(v.molecule.check_valence().empty());
      CHECK(v.molecule.connected());
      CHECK(seen.insert(chem::write_canonical(v.molecule)).second);
    }
  }
  CHECK(generated > 30);
}

TEST_CASE("zero_mask: identity on empty set, zero rows, topology untouched") {
  MolGraph m = chem::parse_smiles("CC(=O)NCC");
  chem::FeatureMatrix f = chem::featurize(m);
  CHECK(mask::zero_mask(f, {}).values == f.values);
  auto masked = mask::zero_mask(f, {1, 3});
  for (int c = 0; c < chem::FeatureMatrix::cols; ++c) {
    CHECK(masked.at(1, c) == 0.0);
    CHECK(masked.at(3, c) == 0.0);
  }
  CHECK(masked.at(0, 0) == f.at(0, 0));
  CHECK(masked.rows == f.rows);  // same graph, same rows

  // Masked rows intentionally break the one-hot block sums.
  double sum = 0.0;
  for (int c = 0; c < 8; ++c) sum += masked.at(1, c);
  CHECK(sum == 0.0);
}

TEST_CASE("zero_mask: fully masked graph under a zero-bias model") {
  gnn::ModelConfig cfg;
  cfg.hidden = 8;
  auto p = gnn::zero_params(cfg);
  MolGraph m = chem::parse_smiles("CCOCC");
  chem::FeatureMatrix f = chem::featurize(m);
  auto masked = mask::zero_mask(f, {0, 1, 2, 3, 4});
  CHECK(gnn::predict(p, m, &masked) == doctest::Approx(0.5));
}
