//
// Project cfmask - Copyright 2026 cfmask developers.
// SPDX-License-Identifier: Apache-2.0
//
// Circular fingerprints, Tanimoto similarity, set diversity, and a
// corpus-calibrated synthetic-accessibility score.

#ifndef CFMASK_FINGERPRINT_HPP
#define CFMASK_FINGERPRINT_HPP

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "cfmask/chem.hpp"

namespace cfmask::fp {

using chem::MolGraph;

struct DimensionMismatch : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Fingerprint {
  int nbits = 2048;
  int radius = 2;
  std::vector<std::uint64_t> words;

  void set(std::uint64_t h) {
    std::uint64_t bit = h % static_cast<std::uint64_t>(nbits);
    words[bit / 64] |= (1ull << (bit % 64));
  }
  int popcount() const {
    int n = 0;
    for (std::uint64_t w : words) n += std::popcount(w);
    return n;
  }
  bool operator==(const Fingerprint& o) const {
    return nbits == o.nbits && radius == o.radius && words == o.words;
  }
};

namespace detail {

inline std::uint64_t atom_seed(const MolGraph& mol, int v) {
  const chem::Atom& a = mol.atoms[v];
  std::uint64_t h = chem::detail::mix64(0xfeedfaceull + static_cast<std::uint64_t>(a.element));
  h = chem::detail::hash_combine(h, static_cast<std::uint64_t>(a.formal_charge + 16));
  h = chem::detail::hash_combine(h, static_cast<std::uint64_t>(a.degree));
  h = chem::detail::hash_combine(h, static_cast<std::uint64_t>(a.total_h()));
  h = chem::detail::hash_combine(h, a.aromatic ? 1 : 0);
  h = chem::detail::hash_combine(h, a.in_ring ? 1 : 0);
  for (char c : a.other_symbol) h = chem::detail::hash_combine(h, static_cast<std::uint64_t>(c));
  return h;
}

}  // namespace detail

// Environment hashes per radius: result[r][v] identifies the radius-r
// neighborhood of atom v, independent of atom numbering.
inline std::vector<std::vector<std::uint64_t>> environment_hashes(const MolGraph& mol,
                                                                  int radius) {
  std::vector<std::vector<std::uint64_t>> env(radius + 1,
                                              std::vector<std::uint64_t>(mol.num_atoms()));
  for (int v = 0; v < mol.num_atoms(); ++v) env[0][v] = detail::atom_seed(mol, v);
  for (int r = 1; r <= radius; ++r) {
    for (int v = 0; v < mol.num_atoms(); ++v) {
      std::vector<std::pair<int, std::uint64_t>> nb;
      for (auto [u, bi] : mol.neighbors(v))
        nb.push_back({static_cast<int>(mol.bonds[bi].order), env[r - 1][u]});
      std::sort(nb.begin(), nb.end());
      std::uint64_t h = chem::detail::hash_combine(0x9d2c5680ull, env[r - 1][v]);
      for (auto [o, hu] : nb) {
        h = chem::detail::hash_combine(h, static_cast<std::uint64_t>(o));
        h = chem::detail::hash_combine(h, hu);
      }
      env[r][v] = h;
    }
  }
  return env;
}

inline Fingerprint morgan_fingerprint(const MolGraph& mol, int radius = 2, int nbits = 2048) {
  Fingerprint f;
  f.nbits = nbits;
  f.radius = radius;
  f.words.assign((nbits + 63) / 64, 0);
  auto env = environment_hashes(mol, radius);
  for (int r = 0; r <= radius; ++r)
    for (int v = 0; v < mol.num_atoms(); ++v) f.set(env[r][v]);
  return f;
}

inline double tanimoto(const Fingerprint& a, const Fingerprint& b) {
  if (a.nbits != b.nbits) throw DimensionMismatch("fingerprint sizes differ");
  int inter = 0, uni = 0;
  for (std::size_t w = 0; w < a.words.size(); ++w) {
    inter += std::popcount(a.words[w] & b.words[w]);
    uni += std::popcount(a.words[w] | b.words[w]);
  }
  if (uni == 0) return 1.0;  // both empty: keep reflexivity
  return static_cast<double>(inter) / static_cast<double>(uni);
}

// Mean pairwise (1 - tanimoto); 0 for a single molecule.
inline double diversity(const std::vector<Fingerprint>& fps) {
  if (fps.empty()) throw std::invalid_argument("diversity of an empty set");
  if (fps.size() == 1) return 0.0;
  double sum = 0.0;
  int pairs = 0;
  for (std::size_t i = 0; i < fps.size(); ++i)
    for (std::size_t j = i + 1; j < fps.size(); ++j) {
      sum += 1.0 - tanimoto(fps[i], fps[j]);
      ++pairs;
    }
  return sum / pairs;
}

inline double diversity(const std::vector<MolGraph>& mols) {
  std::vector<Fingerprint> fps;
  fps.reserve(mols.size());
  for (const auto& m : mols) fps.push_back(morgan_fingerprint(m));
  return diversity(fps);
}

// ---------------------------------------------------------------------------
// Synthetic accessibility
// ---------------------------------------------------------------------------

// Log-frequency table of radius-2 atom environments over a user corpus,
// with calibration percentiles so scores land on the familiar 1..10 scale.
struct SAFreqTable {
  std::unordered_map<std::uint64_t, double> contribution;  // env hash -> log10 count
  int corpus_size = 0;
  double raw_median = 0.0;
  double raw_p90 = 1.0;
  bool low_confidence = true;  // corpora under 1000 molecules

  static constexpr int kRadius = 2;
};

namespace detail {

// Atoms shared by two or more rings.
inline int bridge_atom_count(const MolGraph& mol) {
  std::vector<int> ring_count(mol.num_atoms(), 0);
  for (const auto& ring : mol.rings())
    for (int a : ring) ++ring_count[a];
  int n = 0;
  for (int c : ring_count)
    if (c >= 2) ++n;
  return n;
}

inline bool has_macrocycle(const MolGraph& mol) {
  for (const auto& ring : mol.rings())
    if (ring.size() > 8) return true;
  return false;
}

inline double sa_raw(const MolGraph& mol, const SAFreqTable& table) {
  auto env = environment_hashes(mol, SAFreqTable::kRadius);
  double frag = 0.0;
  for (int v = 0; v < mol.num_atoms(); ++v) {
    // Average over radii so a rare wide environment still earns partial
    // credit from its common inner shells; unseen environments count 0.
    double atom = 0.0;
    for (int r = 0; r <= SAFreqTable::kRadius; ++r) {
      auto it = table.contribution.find(env[r][v]);
      atom += it != table.contribution.end() ? it->second : 0.0;
    }
    frag += atom / (SAFreqTable::kRadius + 1);
  }
  frag /= std::max(1, mol.num_atoms());
  double n = mol.num_atoms();
  double size_penalty = std::pow(n, 1.005) - n;
  double bridge_penalty = std::log10(bridge_atom_count(mol) + 1.0);
  double macro_penalty = has_macrocycle(mol) ? std::log10(2.0) : 0.0;
  return -frag + size_penalty + bridge_penalty + macro_penalty;
}

}  // namespace detail

inline double sa_score(const MolGraph& mol, const SAFreqTable& table) {
  double raw = detail::sa_raw(mol, table);
  // Linear map pinned at (median -> 3.0) and (p90 -> 7.0), clamped to [1,10].
  double span = table.raw_p90 - table.raw_median;
  double slope = span > 1e-9 ? 4.0 / span : 1.0;
  double score = 3.0 + slope * (raw - table.raw_median);
  return std::clamp(score, 1.0, 10.0);
}

inline SAFreqTable build_sa_table(const std::vector<MolGraph>& corpus) {
  if (corpus.empty()) throw std::invalid_argument("empty corpus for the SA table");
  SAFreqTable table;
  std::unordered_map<std::uint64_t, int> counts;
  for (const auto& mol : corpus) {
    auto env = environment_hashes(mol, SAFreqTable::kRadius);
    for (int r = 0; r <= SAFreqTable::kRadius; ++r)
      for (int v = 0; v < mol.num_atoms(); ++v) ++counts[env[r][v]];
  }
  for (auto& [h, c] : counts) table.contribution[h] = std::log10(static_cast<double>(c) + 1.0);
  table.corpus_size = static_cast<int>(corpus.size());
  table.low_confidence = table.corpus_size < 1000;

  std::vector<double> raws;
  raws.reserve(corpus.size());
  for (const auto& mol : corpus) raws.push_back(detail::sa_raw(mol, table));
  std::sort(raws.begin(), raws.end());
  table.raw_median = raws[raws.size() / 2];
  table.raw_p90 = raws[static_cast<std::size_t>(0.9 * (raws.size() - 1))];
  if (table.raw_p90 <= table.raw_median) table.raw_p90 = table.raw_median + 1.0;
  return table;
}

// Line-oriented persistence: one header, then hash<TAB>contribution rows.
inline void save_sa_table(const SAFreqTable& t, std::ostream& os) {
  os.precision(17);
  os << "safreq v1 corpus=" << t.corpus_size << " median=" << t.raw_median
     << " p90=" << t.raw_p90 << "\n";
  std::map<std::uint64_t, double> ordered(t.contribution.begin(), t.contribution.end());
  for (const auto& [h, c] : ordered) os << h << "\t" << c << "\n";
}

inline SAFreqTable load_sa_table(std::istream& is) {
  SAFreqTable t;
  std::string header;
  if (!std::getline(is, header) || header.rfind("safreq v1", 0) != 0)
    throw std::runtime_error("bad SA table header");
  std::istringstream hs(header.substr(9));
  std::string kv;
  while (hs >> kv) {
    auto eq = kv.find('=');
    if (eq == std::string::npos) continue;
    std::string key = kv.substr(0, eq), val = kv.substr(eq + 1);
    if (key == "corpus") t.corpus_size = std::stoi(val);
    else if (key == "median") t.raw_median = std::stod(val);
    else if (key == "p90") t.raw_p90 = std::stod(val);
  }
  t.low_confidence = t.corpus_size < 1000;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::uint64_t h;
    double c;
    if (!(ls >> h >> c)) throw std::runtime_error("bad SA table row: " + line);
    t.contribution[h] = c;
  }
  return t;
}

}  // namespace cfmask::fp

#endif  // CFMASK_FINGERPRINT_HPP
