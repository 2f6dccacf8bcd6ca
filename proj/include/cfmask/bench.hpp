//
// Project cfmask - Copyright 2026 cfmask developers.
// SPDX-License-Identifier: Apache-2.0
//
// The three evaluation protocols: common-substructure pair masking,
// counterfactual generation with its metrics, and the explainer consistency
// benchmark, plus baselines, balanced selection, and sliced Wasserstein
// distance between embedding clouds.

#ifndef CFMASK_BENCH_HPP
#define CFMASK_BENCH_HPP

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <random>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "cfmask/chem.hpp"
#include "cfmask/explain.hpp"
#include "cfmask/fingerprint.hpp"
#include "cfmask/gnn.hpp"
#include "cfmask/mask.hpp"
#include "cfmask/match.hpp"

namespace cfmask::bench {

using chem::MolGraph;
using explain::Direction;

enum class Masker { None, Zero, Cm };

inline const char* masker_name(Masker m) {
  switch (m) {
    case Masker::None: return "none";
    case Masker::Zero: return "zero";
    case Masker::Cm: return "cm";
  }
  return "none";
}

enum class ExplainerKind { Saliency, IntegratedGradients, GradCam, GnnExplainer, Random };

inline const char* explainer_name(ExplainerKind e) {
  switch (e) {
    case ExplainerKind::Saliency: return "saliency";
    case ExplainerKind::IntegratedGradients: return "integrated_gradients";
    case ExplainerKind::GradCam: return "gradcam";
    case ExplainerKind::GnnExplainer: return "gnnexplainer";
    case ExplainerKind::Random: return "random";
  }
  return "random";
}

inline explain::Explanation run_explainer(ExplainerKind kind, const gnn::Params& model,
                                          const MolGraph& mol, std::uint64_t seed,
                                          const chem::FeatureMatrix* features = nullptr) {
  switch (kind) {
    case ExplainerKind::Saliency: return explain::saliency(model, mol, features);
    case ExplainerKind::IntegratedGradients:
      return explain::integrated_gradients(model, mol, 64, features);
    case ExplainerKind::GradCam: return explain::gradcam(model, mol, features);
    case ExplainerKind::GnnExplainer:
      return explain::gnnexplainer(model, mol, {}, seed, features);
    case ExplainerKind::Random: return explain::random_explainer(mol, seed);
  }
  throw std::logic_error("unknown explainer");
}

// Derived per-item seed: one global seed, stable per (unit, index) pair.
inline std::uint64_t substream(std::uint64_t seed, std::uint64_t unit, std::uint64_t index) {
  return chem::detail::hash_combine(chem::detail::hash_combine(seed, unit), index);
}

// ---------------------------------------------------------------------------
// Protocol 1: common-substructure pair masking
// ---------------------------------------------------------------------------

struct PairEvalRecord {
  std::string fragment_smiles;
  int super_a = -1;
  int super_b = -1;
  Masker masker = Masker::None;
  double delta_yhat = 0.0;  // |difference of masked predictions|
  bool valid = false;
  int samples_used = 0;
};

struct PairEvalSummary {
  std::vector<PairEvalRecord> records;
  double mean_delta = 0.0;  // over valid pairs
  double validity = 0.0;    // valid pairs / total pairs
  int size = 0;             // number of valid pairs
};

enum class CmAggregate { Mean, Median };

struct MaskedPrediction {
  bool ok = false;
  double value = 0.0;
  int samples = 0;
};

namespace detail {

inline MaskedPrediction masked_prediction(const gnn::Params& model, const MolGraph& mol,
                                          const std::vector<int>& masked_atoms, Masker masker,
                                          const mask::FragmentDb* db, int n_samples,
                                          std::uint64_t seed, CmAggregate aggregate) {
  MaskedPrediction out;
  switch (masker) {
    case Masker::None: {
      out.ok = true;
      out.value = gnn::predict(model, mol);
      out.samples = 0;
      return out;
    }
    case Masker::Zero: {
      chem::FeatureMatrix fm = mask::zero_mask(chem::featurize(mol), masked_atoms);
      out.ok = true;
      out.value = gnn::predict(model, mol, &fm);
      out.samples = 1;
      return out;
    }
    case Masker::Cm: {
      if (!db) throw std::invalid_argument("cm masking needs a fragment database");
      mask::CmResult res =
          mask::cm_generate(mol, masked_atoms, *db, n_samples, seed, mask::RingMode::Off);
      if (!res.ok() || res.variants.empty()) return out;
      std::vector<double> preds;
      for (const auto& v : res.variants) preds.push_back(gnn::predict(model, v.molecule));
      if (aggregate == CmAggregate::Mean) {
        double s = 0.0;
        for (double x : preds) s += x;
        out.value = s / preds.size();
      } else {
        std::sort(preds.begin(), preds.end());
        out.value = preds[preds.size() / 2];
      }
      out.ok = true;
      out.samples = static_cast<int>(preds.size());
      return out;
    }
  }
  return out;
}

}  // namespace detail

// Atoms of `target` outside the first embedding of `fragment`.
inline std::vector<int> non_shared_atoms(const MolGraph& fragment, const MolGraph& target) {
  auto maps = match::subgraph_match(fragment, target, 1);
  if (maps.empty()) return {};
  std::set<int> shared(maps.front().map.begin(), maps.front().map.end());
  std::vector<int> rest;
  for (int v = 0; v < target.num_atoms(); ++v)
    if (!shared.count(v)) rest.push_back(v);
  return rest;
}

// For each pair entry: pick the superstructure pair with the largest raw
// prediction gap, mask the non-shared atoms on both sides, and record the
// masked prediction difference.
inline PairEvalSummary eval_masking_pairs(const gnn::Params& model,
                                          const match::PairDataset& pairs,
                                          const std::vector<MolGraph>& corpus, Masker masker,
                                          const mask::FragmentDb* db = nullptr,
                                          int n_samples = 32, std::uint64_t seed = 0,
                                          CmAggregate aggregate = CmAggregate::Mean) {
  if (pairs.entries.empty()) throw match::EmptyResult("empty pair dataset");
  PairEvalSummary summary;
  double delta_sum = 0.0;
  for (std::size_t e = 0; e < pairs.entries.size(); ++e) {
    const match::PairEntry& entry = pairs.entries[e];
    // Raw predictions pick the most-contrasting pair.
    std::vector<double> raw;
    for (int idx : entry.superstructures) raw.push_back(gnn::predict(model, corpus[idx]));
    int best_i = 0, best_j = 1;
    double best_gap = -1.0;
    for (std::size_t i = 0; i < raw.size(); ++i)
      for (std::size_t j = i + 1; j < raw.size(); ++j)
        if (std::abs(raw[i] - raw[j]) > best_gap) {
          best_gap = std::abs(raw[i] - raw[j]);
          best_i = static_cast<int>(i);
          best_j = static_cast<int>(j);
        }
    int idx_a = entry.superstructures[best_i], idx_b = entry.superstructures[best_j];

    PairEvalRecord rec;
    rec.fragment_smiles = entry.fragment_smiles;
    rec.super_a = idx_a;
    rec.super_b = idx_b;
    rec.masker = masker;

    auto run_side = [&](int corpus_idx, int side) {
      const MolGraph& mol = corpus[corpus_idx];
      std::vector<int> rest = non_shared_atoms(entry.fragment, mol);
      if (masker != Masker::None && rest.empty()) return MaskedPrediction{};
      return detail::masked_prediction(model, mol, rest, masker, db, n_samples,
                                       substream(seed, e, side), aggregate);
    };
    MaskedPrediction a = run_side(idx_a, 0);
    MaskedPrediction b = run_side(idx_b, 1);
    rec.valid = a.ok && b.ok;
    rec.samples_used = a.samples + b.samples;
    if (rec.valid) {
      rec.delta_yhat = std::abs(a.value - b.value);
      delta_sum += rec.delta_yhat;
      ++summary.size;
    }
    summary.records.push_back(std::move(rec));
  }
  summary.validity = summary.records.empty()
                         ? 0.0
                         : static_cast<double>(summary.size) / summary.records.size();
  summary.mean_delta = summary.size > 0 ? delta_sum / summary.size : 0.0;
  return summary;
}

// ---------------------------------------------------------------------------
// Protocol 2: counterfactual sets
// ---------------------------------------------------------------------------

struct BalancedCandidate {
  fp::Fingerprint fingerprint;
  std::string smiles;  // canonical, used for tie-breaks
};

// Greedy similarity/diversity balance: first the candidate most similar to
// the original, then argmax of (similarity to original - max similarity to
// anything already chosen). Returns indices in pick order.
inline std::vector<int> select_balanced(const std::vector<BalancedCandidate>& candidates,
                                        const fp::Fingerprint& original, int k) {
  if (candidates.empty()) throw std::invalid_argument("select_balanced needs candidates");
  if (k < 1) throw std::invalid_argument("k must be >= 1");
  std::vector<double> sim_orig;
  for (const auto& c : candidates) sim_orig.push_back(fp::tanimoto(c.fingerprint, original));

  std::vector<int> picked;
  std::vector<char> used(candidates.size(), 0);
  while (static_cast<int>(picked.size()) < std::min<int>(k, candidates.size())) {
    int best = -1;
    double best_score = 0.0;
    for (std::size_t c = 0; c < candidates.size(); ++c) {
      if (used[c]) continue;
      double score = sim_orig[c];
      for (int s : picked)
        score = std::min(score, sim_orig[c] - fp::tanimoto(candidates[c].fingerprint,
                                                           candidates[s].fingerprint));
      if (best < 0 || score > best_score ||
          (score == best_score && candidates[c].smiles < candidates[best].smiles)) {
        best = static_cast<int>(c);
        best_score = score;
      }
    }
    used[best] = 1;
    picked.push_back(best);
  }
  return picked;
}

struct CfSet {
  std::string original_smiles;
  double original_prediction = 0.0;
  int original_class = 0;
  int candidate_count = 0;  // pre-filter
  std::vector<mask::GeneratedVariant> selected;
  bool bv_defined = false;
  double bv = 0.0;        // class flips / candidates, before filtering
  double validity = 0.0;  // post-filter: 1.0 whenever selection is nonempty
  double similarity = 0.0;
  double diversity = 0.0;
  double sa = 0.0;
  bool sa_defined = false;
  bool rejected = false;
  mask::RejectReason reject_reason = mask::RejectReason::NoContextMatch;
};

// Grad-CAM top-fraction selection in the direction supporting the current
// class, CM generation, class-flip filtering, then balanced selection.
inline CfSet generate_counterfactual_set(const gnn::Params& model, const MolGraph& mol,
                                         const mask::FragmentDb& db,
                                         const fp::SAFreqTable* sa_table = nullptr,
                                         double fraction = 0.20, int k_select = 3,
                                         int n_samples = 32, std::uint64_t seed = 0) {
  if (model.config.task != gnn::Task::Classification)
    throw std::invalid_argument("counterfactuals need a classification model");
  CfSet out;
  out.original_smiles = chem::write_canonical(mol);
  out.original_prediction = gnn::predict(model, mol);
  out.original_class = out.original_prediction > 0.5 ? 1 : 0;

  explain::Explanation cam = explain::gradcam(model, mol);
  Direction dir = out.original_class == 1 ? Direction::Increase : Direction::Decrease;
  std::vector<int> selected_atoms = explain::select_top_fraction(cam, {fraction, dir});

  mask::CmResult gen =
      mask::cm_generate(mol, selected_atoms, db, n_samples, seed, mask::RingMode::On);
  if (!gen.ok()) {
    out.rejected = true;
    out.reject_reason = gen.reason;
    return out;
  }
  out.candidate_count = static_cast<int>(gen.variants.size());
  if (gen.variants.empty()) return out;  // BV undefined

  std::vector<mask::GeneratedVariant> flips;
  int flip_count = 0;
  for (auto& v : gen.variants) {
    v.prediction = gnn::predict(model, v.molecule);
    int cls = v.prediction > 0.5 ? 1 : 0;
    if (cls != out.original_class) {
      ++flip_count;
      flips.push_back(v);
    }
  }
  out.bv_defined = true;
  out.bv = static_cast<double>(flip_count) / out.candidate_count;
  if (flips.empty()) {
    out.validity = 0.0;
    return out;
  }

  fp::Fingerprint orig_fp = fp::morgan_fingerprint(mol);
  std::vector<BalancedCandidate> cands;
  for (const auto& v : flips)
    cands.push_back(
        {fp::morgan_fingerprint(v.molecule), chem::write_canonical(v.molecule)});
  std::vector<int> picks = select_balanced(cands, orig_fp, k_select);
  for (int idx : picks) out.selected.push_back(flips[idx]);

  out.validity = 1.0;  // every selected candidate already flips the class
  double sim_sum = 0.0;
  std::vector<fp::Fingerprint> sel_fps;
  for (const auto& v : out.selected) {
    sel_fps.push_back(fp::morgan_fingerprint(v.molecule));
    sim_sum += fp::tanimoto(sel_fps.back(), orig_fp);
  }
  out.similarity = sim_sum / out.selected.size();
  out.diversity = fp::diversity(sel_fps);
  if (sa_table) {
    double sa_sum = 0.0;
    for (const auto& v : out.selected) sa_sum += fp::sa_score(v.molecule, *sa_table);
    out.sa = sa_sum / out.selected.size();
    out.sa_defined = true;
  }
  return out;
}

struct NoOppositeClass : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Nearest-neighbor baseline: the k most similar training molecules of the
// opposite predicted class.
inline CfSet nn_baseline(const gnn::Params& model, const gnn::Dataset& trainset,
                         const std::vector<double>& train_predictions, const MolGraph& mol,
                         int k) {
  if (trainset.size() != train_predictions.size())
    throw std::invalid_argument("cached predictions size mismatch");
  CfSet out;
  out.original_smiles = chem::write_canonical(mol);
  out.original_prediction = gnn::predict(model, mol);
  out.original_class = out.original_prediction > 0.5 ? 1 : 0;

  fp::Fingerprint orig_fp = fp::morgan_fingerprint(mol);
  struct Scored {
    double sim;
    std::string smiles;
    int idx;
  };
  std::vector<Scored> opposite;
  for (std::size_t i = 0; i < trainset.size(); ++i) {
    int cls = train_predictions[i] > 0.5 ? 1 : 0;
    if (cls == out.original_class) continue;
    opposite.push_back({fp::tanimoto(fp::morgan_fingerprint(trainset[i].mol), orig_fp),
                        chem::write_canonical(trainset[i].mol), static_cast<int>(i)});
  }
  if (opposite.empty()) throw NoOppositeClass("no opposite-class training molecule");
  std::sort(opposite.begin(), opposite.end(), [](const Scored& a, const Scored& b) {
    if (a.sim != b.sim) return a.sim > b.sim;
    return a.smiles < b.smiles;
  });
  opposite.resize(std::min<std::size_t>(opposite.size(), static_cast<std::size_t>(k)));

  out.candidate_count = static_cast<int>(opposite.size());
  out.bv_defined = true;
  out.bv = 1.0;
  out.validity = 1.0;
  double sim_sum = 0.0;
  std::vector<fp::Fingerprint> sel_fps;
  for (const auto& s : opposite) {
    mask::GeneratedVariant v;
    v.molecule = trainset[s.idx].mol;
    v.prediction = train_predictions[s.idx];
    v.source_id = trainset[s.idx].id;
    out.selected.push_back(std::move(v));
    sel_fps.push_back(fp::morgan_fingerprint(trainset[s.idx].mol));
    sim_sum += s.sim;
  }
  out.similarity = sim_sum / out.selected.size();
  out.diversity = fp::diversity(sel_fps);
  return out;
}

// Deletes the given atoms; the result is invalid (nullopt) when it
// fragments, breaks valence, or nothing remains.
inline std::optional<MolGraph> remove_atoms_if_valid(const MolGraph& mol,
                                                     const std::vector<int>& remove) {
  std::set<int> rm(remove.begin(), remove.end());
  if (static_cast<int>(rm.size()) >= mol.num_atoms()) return std::nullopt;
  std::vector<int> keep;
  for (int v = 0; v < mol.num_atoms(); ++v)
    if (!rm.count(v)) keep.push_back(v);
  MolGraph rest = chem::induced_subgraph(mol, keep);
  if (!rest.connected() || !rest.check_valence().empty() || !rest.aromatic_consistent())
    return std::nullopt;
  return rest;
}

// GNNExplainer-removal baseline: delete the fraction of atoms with the
// largest mask magnitudes.
inline std::optional<MolGraph> removal_baseline(const gnn::Params& model, const MolGraph& mol,
                                                double fraction = 0.10, std::uint64_t seed = 0) {
  explain::Explanation e = explain::gnnexplainer(model, mol, {}, seed);
  int k = std::max(1, static_cast<int>(std::ceil(fraction * mol.num_atoms())));
  std::vector<int> idx(mol.num_atoms());
  for (int i = 0; i < mol.num_atoms(); ++i) idx[i] = i;
  std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) {
    return std::abs(e.scores[a]) > std::abs(e.scores[b]);
  });
  return remove_atoms_if_valid(mol, {idx.begin(), idx.begin() + std::min(k, mol.num_atoms())});
}

// ---------------------------------------------------------------------------
// Protocol 3: consistency benchmark
// ---------------------------------------------------------------------------

// Discards a masked molecule whose replacement atoms push the prediction in
// the same direction as the originals, but harder.
inline bool consistency_filter_keeps(const explain::Explanation& expl_original,
                                     const explain::Explanation& expl_masked,
                                     const std::vector<int>& replaced_atoms,
                                     const std::vector<int>& original_atoms, Direction dir) {
  double replaced_sum = 0.0;
  for (int v : replaced_atoms) replaced_sum += expl_masked.scores.at(v);
  double original_sum = 0.0;
  for (int v : original_atoms) original_sum += expl_original.scores.at(v);
  double dir_sign = dir == Direction::Increase ? 1.0 : -1.0;
  bool same_direction = replaced_sum * dir_sign > 0.0;
  return !(same_direction && std::abs(replaced_sum) > std::abs(original_sum));
}

struct ConsistencyRecord {
  std::string mol_id;
  Direction direction = Direction::Increase;
  int kept = 0;
  int moved = 0;
};

struct ConsistencySummary {
  std::vector<ConsistencyRecord> records;  // kept > 0 only
  double mean = 0.0;                       // of per-record moved/kept
  double sd = 0.0;
  int excluded = 0;  // molecule-directions with nothing left after filtering
  int trials = 0;    // molecule-directions attempted
};

using ExplainerFn = std::function<explain::Explanation(
    const gnn::Params&, const MolGraph&, std::uint64_t, const chem::FeatureMatrix*)>;

struct ConsistencyOptions {
  ExplainerKind explainer = ExplainerKind::GradCam;
  Masker masker = Masker::Zero;  // Zero or Cm
  double fraction = 0.10;
  int n_mol = 300;
  int n_samples = 8;
  std::uint64_t seed = 0;
  bool strict = true;            // zero prediction change counts as inconsistent
  ExplainerFn custom_explainer;  // overrides `explainer` when set (test oracles)
};

// For each sampled molecule and direction: select atoms, mask, filter, and
// ask whether the prediction moved opposite to the selected contribution.
inline ConsistencySummary consistency_benchmark(const gnn::Params& model,
                                                const gnn::Dataset& testset,
                                                const ConsistencyOptions& opt,
                                                const mask::FragmentDb* db = nullptr) {
  if (testset.empty()) throw std::invalid_argument("empty test set");
  if (opt.masker == Masker::None) throw std::invalid_argument("masker must be zero or cm");
  if (opt.masker == Masker::Cm && !db) throw std::invalid_argument("cm masking needs a db");

  std::vector<int> order(testset.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
  std::mt19937_64 rng(opt.seed ^ 0xc0de5eedull);
  std::shuffle(order.begin(), order.end(), rng);
  int take = std::min<int>(opt.n_mol, static_cast<int>(order.size()));

  auto explain_with = [&](const MolGraph& mol, std::uint64_t s,
                          const chem::FeatureMatrix* feats) {
    return opt.custom_explainer ? opt.custom_explainer(model, mol, s, feats)
                                : run_explainer(opt.explainer, model, mol, s, feats);
  };

  ConsistencySummary summary;
  for (int t = 0; t < take; ++t) {
    const gnn::LabeledMol& ex = testset[order[t]];
    std::uint64_t mol_seed = substream(opt.seed, 1, t);
    double original = gnn::predict(model, ex.mol);
    explain::Explanation expl = explain_with(ex.mol, mol_seed, nullptr);

    for (Direction dir : {Direction::Increase, Direction::Decrease}) {
      ++summary.trials;
      std::vector<int> sel = explain::select_top_fraction(expl, {opt.fraction, dir});
      int kept = 0, moved = 0;
      double dir_sign = dir == Direction::Increase ? 1.0 : -1.0;

      auto consider = [&](double masked_pred, const explain::Explanation& expl_masked,
                          const std::vector<int>& replaced_atoms) {
        if (!consistency_filter_keeps(expl, expl_masked, replaced_atoms, sel, dir)) return;
        ++kept;
        double change = masked_pred - original;
        bool consistent = opt.strict ? change * dir_sign < 0.0 : change * dir_sign <= 0.0;
        if (consistent) ++moved;
      };

      if (opt.masker == Masker::Zero) {
        chem::FeatureMatrix fm = mask::zero_mask(chem::featurize(ex.mol), sel);
        double masked_pred = gnn::predict(model, ex.mol, &fm);
        explain::Explanation expl_masked = explain_with(ex.mol, substream(mol_seed, 2, 0), &fm);
        consider(masked_pred, expl_masked, sel);
      } else {
        mask::CmResult gen = mask::cm_generate(ex.mol, sel, *db, opt.n_samples,
                                               substream(mol_seed, 3, dir_sign > 0 ? 0 : 1),
                                               mask::RingMode::On);
        if (gen.ok()) {
          for (std::size_t vi = 0; vi < gen.variants.size(); ++vi) {
            const auto& v = gen.variants[vi];
            double masked_pred = gnn::predict(model, v.molecule);
            explain::Explanation expl_masked =
                explain_with(v.molecule, substream(mol_seed, 4, vi), nullptr);
            consider(masked_pred, expl_masked, v.replaced_atoms);
          }
        }
      }

      if (kept == 0) {
        ++summary.excluded;
        continue;
      }
      ConsistencyRecord rec;
      rec.mol_id = ex.id.empty() ? std::to_string(order[t]) : ex.id;
      rec.direction = dir;
      rec.kept = kept;
      rec.moved = moved;
      summary.records.push_back(std::move(rec));
    }
  }

  if (!summary.records.empty()) {
    double sum = 0.0;
    for (const auto& r : summary.records) sum += static_cast<double>(r.moved) / r.kept;
    summary.mean = sum / summary.records.size();
    double var = 0.0;
    for (const auto& r : summary.records) {
      double d = static_cast<double>(r.moved) / r.kept - summary.mean;
      var += d * d;
    }
    summary.sd = summary.records.size() > 1
                     ? std::sqrt(var / (summary.records.size() - 1))
                     : 0.0;
  }
  return summary;
}

// ---------------------------------------------------------------------------
// Sliced Wasserstein distance
// ---------------------------------------------------------------------------

struct DimensionMismatch : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Exact 1-D W1 between empirical distributions with possibly different
// sizes, by integrating |F_A^{-1} - F_B^{-1}| over the merged quantile grid.
inline double wasserstein_1d(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw std::invalid_argument("empty sample set");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const std::size_t m = a.size(), n = b.size();
  double total = 0.0;
  std::size_t i = 0, j = 0;
  double q = 0.0;
  while (i < m && j < n) {
    double qa = static_cast<double>(i + 1) / m;
    double qb = static_cast<double>(j + 1) / n;
    double next = std::min(qa, qb);
    total += std::abs(a[i] - b[j]) * (next - q);
    q = next;
    if (qa < qb) ++i;
    else if (qb < qa) ++j;
    else {
      ++i;
      ++j;
    }
  }
  return total;
}

// Mean 1-D transport cost over seeded random unit projections.
inline double sliced_wasserstein(const std::vector<std::vector<double>>& a,
                                 const std::vector<std::vector<double>>& b, int n_proj = 128,
                                 std::uint64_t seed = 0) {
  if (a.size() < 2 || b.size() < 2) throw std::invalid_argument("need at least 2 points per set");
  const std::size_t dim = a.front().size();
  for (const auto& x : a)
    if (x.size() != dim) throw DimensionMismatch("ragged embedding set");
  for (const auto& x : b)
    if (x.size() != dim) throw DimensionMismatch("embedding dimension mismatch");

  std::mt19937_64 rng(seed ^ 0x51ed5077ull);
  std::normal_distribution<double> gauss(0.0, 1.0);
  double sum = 0.0;
  for (int p = 0; p < n_proj; ++p) {
    std::vector<double> u(dim);
    double norm = 0.0;
    for (double& x : u) {
      x = gauss(rng);
      norm += x * x;
    }
    norm = std::sqrt(norm);
    if (norm == 0.0) continue;
    for (double& x : u) x /= norm;
    std::vector<double> pa, pb;
    pa.reserve(a.size());
    pb.reserve(b.size());
    for (const auto& x : a) {
      double d = 0.0;
      for (std::size_t k = 0; k < dim; ++k) d += x[k] * u[k];
      pa.push_back(d);
    }
    for (const auto& x : b) {
      double d = 0.0;
      for (std::size_t k = 0; k < dim; ++k) d += x[k] * u[k];
      pb.push_back(d);
    }
    sum += wasserstein_1d(std::move(pa), std::move(pb));
  }
  return sum / n_proj;
}

}  // namespace cfmask::bench

#endif  // CFMASK_BENCH_HPP
