//
// Project cfmask - Copyright 2026 cfmask developers.
// SPDX-License-Identifier: Apache-2.0
//
// Atom-level attribution: saliency, Integrated Gradients, Grad-CAM,
// GNNExplainer and a random baseline, plus directional top-fraction
// selection. All gradients are taken at the pre-sigmoid output.

#ifndef CFMASK_EXPLAIN_HPP
#define CFMASK_EXPLAIN_HPP

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "cfmask/gnn.hpp"

namespace cfmask::explain {

using chem::MolGraph;

struct Explanation {
  std::vector<double> scores;  // per-atom, signed
  std::string method;
  std::string molecule;        // provenance (canonical SMILES or dataset id)
  std::uint64_t seed = 0;
};

enum class Direction { Increase, Decrease };

struct SelectionSpec {
  double fraction = 0.10;  // in (0, 1]
  Direction direction = Direction::Increase;
};

// Signed sum of input gradients over feature dims; `absolute` switches to
// the magnitude variant (not rankable by direction).
inline Explanation saliency(const gnn::Params& p, const MolGraph& mol,
                            const chem::FeatureMatrix* features = nullptr,
                            bool absolute = false) {
  ad::Matrix g = gnn::backward(p, mol, gnn::GradWrt::Input, features);
  Explanation e;
  e.method = absolute ? "saliency_abs" : "saliency";
  e.scores.resize(mol.num_atoms(), 0.0);
  for (int v = 0; v < g.rows; ++v)
    for (int d = 0; d < g.cols; ++d) e.scores[v] += absolute ? std::abs(g(v, d)) : g(v, d);
  return e;
}

// Right-endpoint Riemann approximation of the path integral from the all
// zero baseline: score_v = sum_d x_vd * mean_t dF(t/m * x)/dx_vd.
inline Explanation integrated_gradients(const gnn::Params& p, const MolGraph& mol,
                                        int steps = 64,
                                        const chem::FeatureMatrix* features = nullptr) {
  if (steps < 1) throw std::invalid_argument("steps must be >= 1");
  chem::FeatureMatrix base = features ? *features : chem::featurize(mol);
  ad::Matrix accum(base.rows, chem::FeatureMatrix::cols);
  for (int t = 1; t <= steps; ++t) {
    chem::FeatureMatrix scaled = base;
    double f = static_cast<double>(t) / steps;
    for (double& x : scaled.values) x *= f;
    ad::Matrix g = gnn::backward(p, mol, gnn::GradWrt::Input, &scaled);
    for (std::size_t i = 0; i < accum.size(); ++i) accum.v[i] += g.v[i];
  }
  Explanation e;
  e.method = "integrated_gradients";
  e.scores.resize(mol.num_atoms(), 0.0);
  for (int v = 0; v < accum.rows; ++v)
    for (int d = 0; d < accum.cols; ++d)
      e.scores[v] += base.at(v, d) * accum(v, d) / steps;
  return e;
}

// Channel weights from mean gradients of the last conv layer, applied to
// that layer's activations. Signed (no ReLU) so decrease-direction ranking
// stays meaningful.
inline Explanation gradcam(const gnn::Params& p, const MolGraph& mol,
                           const chem::FeatureMatrix* features = nullptr) {
  gnn::Forward f = gnn::forward(p, mol, gnn::Mode::Eval, 0, features);
  f.tape.backward(f.output);
  const ad::Matrix& h = f.tape.value(f.layer_out.back());
  const ad::Matrix& g = f.tape.grad(f.layer_out.back());
  std::vector<double> alpha(h.cols, 0.0);
  for (int v = 0; v < h.rows; ++v)
    for (int k = 0; k < h.cols; ++k) alpha[k] += g(v, k);
  for (double& a : alpha) a /= std::max(1, h.rows);
  Explanation e;
  e.method = "gradcam";
  e.scores.resize(mol.num_atoms(), 0.0);
  for (int v = 0; v < h.rows; ++v)
    for (int k = 0; k < h.cols; ++k) e.scores[v] += alpha[k] * h(v, k);
  return e;
}

struct GnnExplainerOptions {
  int iters = 100;
  double lambda_size = 0.05;     // weight of sum(m)
  double lambda_entropy = 0.10;  // weight of sum of elementwise entropies
  double lr = 0.05;
};

// Learns a multiplicative node-feature mask that preserves the prediction
// while shrinking; magnitudes come from the mask, signs are copied from an
// auxiliary Grad-CAM pass. Non-convergence is not an error: the last
// iterate is returned.
inline Explanation gnnexplainer(const gnn::Params& p, const MolGraph& mol,
                                GnnExplainerOptions opt = {}, std::uint64_t seed = 0,
                                const chem::FeatureMatrix* features = nullptr) {
  const int n = mol.num_atoms();
  chem::FeatureMatrix base = features ? *features : chem::featurize(mol);
  double original = gnn::predict_logit(p, mol, features);
  double target = p.config.task == gnn::Task::Classification ? (original > 0.0 ? 1.0 : 0.0)
                                                             : original;

  ad::Matrix theta(n, 1);  // mask logits, start at 0.5 mask
  ad::Matrix m1(n, 1), m2(n, 1);
  constexpr double kBeta1 = 0.9, kBeta2 = 0.999, kEps = 1e-8;
  ad::Matrix mask_value(n, 1);
  for (int i = 0; i < n; ++i) mask_value(i, 0) = 0.5;

  for (int it = 0; it < opt.iters; ++it) {
    ad::Tape tape;
    ad::Tape::Id th = tape.leaf(theta);
    ad::Tape::Id mask = tape.sigmoid(th);
    ad::Tape::Id x = tape.leaf(gnn::detail::features_to_matrix(base));
    ad::Tape::Id masked = tape.mul_col(x, mask);
    gnn::Forward f;
    f.tape = std::move(tape);
    gnn::build_network(f, p, mol, masked, gnn::Mode::Eval, seed);
    ad::Tape::Id pred_loss =
        p.config.task == gnn::Task::Classification
            ? f.tape.bce_with_logit(f.output, target)
            : f.tape.mse_loss(f.output, target);
    ad::Tape::Id size_term = f.tape.scale(f.tape.total_sum(mask), opt.lambda_size);
    ad::Tape::Id ent_term =
        f.tape.scale(f.tape.total_sum(f.tape.binary_entropy(mask)), opt.lambda_entropy);
    ad::Tape::Id loss = f.tape.add(f.tape.add(pred_loss, size_term), ent_term);
    f.tape.backward(loss);
    const ad::Matrix& g = f.tape.grad(th);
    double c1 = 1.0 - std::pow(kBeta1, it + 1.0);
    double c2 = 1.0 - std::pow(kBeta2, it + 1.0);
    for (int i = 0; i < n; ++i) {
      m1(i, 0) = kBeta1 * m1(i, 0) + (1.0 - kBeta1) * g(i, 0);
      m2(i, 0) = kBeta2 * m2(i, 0) + (1.0 - kBeta2) * g(i, 0) * g(i, 0);
      theta(i, 0) -= opt.lr * (m1(i, 0) / c1) / (std::sqrt(m2(i, 0) / c2) + kEps);
    }
    for (int i = 0; i < n; ++i) mask_value(i, 0) = 1.0 / (1.0 + std::exp(-theta(i, 0)));
  }

  Explanation cam = gradcam(p, mol, features);
  Explanation e;
  e.method = "gnnexplainer";
  e.seed = seed;
  e.scores.resize(n, 0.0);
  for (int i = 0; i < n; ++i) {
    double sign = cam.scores[i] >= 0.0 ? 1.0 : -1.0;
    e.scores[i] = sign * mask_value(i, 0);
  }
  return e;
}

inline Explanation random_explainer(const MolGraph& mol, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  Explanation e;
  e.method = "random";
  e.seed = seed;
  e.scores.resize(mol.num_atoms());
  for (double& s : e.scores) s = dist(rng);
  return e;
}

// Top ceil(fraction * n) atoms by signed score: largest for Increase, most
// negative for Decrease; ties break toward the lower atom index; at least
// one atom is always selected.
inline std::vector<int> select_top_fraction(const Explanation& e, const SelectionSpec& spec) {
  if (spec.fraction <= 0.0 || spec.fraction > 1.0)
    throw std::invalid_argument("fraction must be in (0,1]");
  const int n = static_cast<int>(e.scores.size());
  if (n == 0) return {};
  int k = std::max(1, static_cast<int>(std::ceil(spec.fraction * n)));
  k = std::min(k, n);
  std::vector<int> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) {
    double sa = e.scores[a], sb = e.scores[b];
    if (spec.direction == Direction::Increase) return sa > sb;
    return sa < sb;
  });
  std::vector<int> out(idx.begin(), idx.begin() + k);
  std::sort(out.begin(), out.end());
  return out;
}

inline nlohmann::json explanation_to_json(const Explanation& e, const MolGraph& mol,
                                          const std::vector<int>& selected_increase,
                                          const std::vector<int>& selected_decrease) {
  return {{"method", e.method},
          {"smiles", chem::write_canonical(mol)},
          {"scores", e.scores},
          {"selected_increase", selected_increase},
          {"selected_decrease", selected_decrease},
          {"seed", e.seed}};
}

}  // namespace cfmask::explain

#endif  // CFMASK_EXPLAIN_HPP
