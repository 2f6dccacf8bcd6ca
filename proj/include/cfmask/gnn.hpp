//
// Project cfmask - Copyright 2026 cfmask developers.
// SPDX-License-Identifier: Apache-2.0
//
// Graph neural networks over molecular graphs: GIN (plain, edge-attributed,
// residual) and GAT layers, pooling, prediction heads, Adam training with
// step-decayed learning rate and early stopping, exact reverse-mode
// gradients, and JSON checkpoints.

#ifndef CFMASK_GNN_HPP
#define CFMASK_GNN_HPP

#include <cmath>
#include <cstdint>
#include <istream>
#include <limits>
#include <optional>
#include <ostream>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "cfmask/autodiff.hpp"
#include "cfmask/chem.hpp"

namespace cfmask::gnn {

enum class Architecture { Gin, EdgeGin, ResidualGin, Gat };
enum class Pooling { Mean, Add };
enum class Task { Classification, Regression };
enum class LossKind { Bce, Mse, SmoothL1 };
enum class Mode { Train, Eval };

struct ShapeMismatch : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Diverged : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ModelConfig {
  Architecture architecture = Architecture::Gin;
  int depth = 3;
  int hidden = 32;
  Pooling pooling = Pooling::Mean;
  double dropout = 0.0;
  int heads = 3;  // GAT only
  Task task = Task::Classification;
  int input_dim = chem::FeatureLayout::kWidth;

  void validate() const {
    if (depth < 1) throw std::invalid_argument("depth must be >= 1");
    if (dropout < 0.0 || dropout >= 1.0) throw std::invalid_argument("dropout must be in [0,1)");
    if (heads < 1) throw std::invalid_argument("heads must be >= 1");
    if (hidden < 1 || input_dim < 1) throw std::invalid_argument("bad dimensions");
  }
};

struct TensorSpec {
  std::string name;
  int rows;
  int cols;
};

// Parameter layout. GIN layers use a two-layer MLP that widens to 2*hidden;
// the very first projection carries no bias, which together with the linear
// head gives 10*h^2 + 52*h + 1 parameters at depth 3 and input width 22.
inline std::vector<TensorSpec> tensor_layout(const ModelConfig& cfg) {
  cfg.validate();
  std::vector<TensorSpec> specs;
  const int h = cfg.hidden;
  auto layer_in = [&](int l) {
    if (l == 0) return cfg.input_dim;
    if (cfg.architecture == Architecture::Gat) return cfg.heads * h;
    return h;
  };
  for (int l = 0; l < cfg.depth; ++l) {
    const std::string p = "layer" + std::to_string(l) + ".";
    if (cfg.architecture == Architecture::Gat) {
      for (int k = 0; k < cfg.heads; ++k) {
        const std::string hp = p + "head" + std::to_string(k) + ".";
        specs.push_back({hp + "w", layer_in(l), h});
        specs.push_back({hp + "asrc", h, 1});
        specs.push_back({hp + "adst", h, 1});
      }
    } else {
      specs.push_back({p + "w1", layer_in(l), 2 * h});
      if (l > 0) specs.push_back({p + "b1", 1, 2 * h});
      specs.push_back({p + "w2", 2 * h, h});
      specs.push_back({p + "b2", 1, h});
      if (cfg.architecture == Architecture::EdgeGin) specs.push_back({p + "we", 4, layer_in(l)});
    }
  }
  specs.push_back({"head.w", h, 1});
  specs.push_back({"head.b", 1, 1});
  return specs;
}

struct Params {
  ModelConfig config;
  std::vector<ad::Matrix> tensors;

  std::int64_t count() const {
    std::int64_t n = 0;
    for (const auto& t : tensors) n += static_cast<std::int64_t>(t.size());
    return n;
  }
};

inline std::int64_t parameter_count(const ModelConfig& cfg) {
  std::int64_t n = 0;
  for (const auto& s : tensor_layout(cfg)) n += static_cast<std::int64_t>(s.rows) * s.cols;
  return n;
}

// Glorot-uniform weights, zero biases; fully determined by the seed.
inline Params init_params(const ModelConfig& cfg, std::uint64_t seed) {
  Params p;
  p.config = cfg;
  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ull);
  for (const auto& spec : tensor_layout(cfg)) {
    ad::Matrix m(spec.rows, spec.cols);
    bool is_bias = spec.rows == 1 && spec.name.find(".b") != std::string::npos;
    if (!is_bias) {
      double limit = std::sqrt(6.0 / (spec.rows + spec.cols));
      std::uniform_real_distribution<double> dist(-limit, limit);
      for (double& x : m.v) x = dist(rng);
    }
    p.tensors.push_back(std::move(m));
  }
  return p;
}

inline Params zero_params(const ModelConfig& cfg) {
  Params p;
  p.config = cfg;
  for (const auto& spec : tensor_layout(cfg)) p.tensors.emplace_back(spec.rows, spec.cols);
  return p;
}

namespace detail {

inline ad::Matrix features_to_matrix(const chem::FeatureMatrix& fm) {
  ad::Matrix m(fm.rows, chem::FeatureMatrix::cols);
  m.v = fm.values;
  return m;
}

// Adjacency with self-loops; message passing becomes one matmul.
inline ad::Matrix adjacency_hat(const chem::MolGraph& mol) {
  ad::Matrix a(mol.num_atoms(), mol.num_atoms());
  for (int i = 0; i < mol.num_atoms(); ++i) a(i, i) = 1.0;
  for (const chem::Bond& b : mol.bonds) {
    a(b.a, b.b) = 1.0;
    a(b.b, b.a) = 1.0;
  }
  return a;
}

// Incident bond-type counts, one row per atom over the four bond orders.
inline ad::Matrix bond_type_counts(const chem::MolGraph& mol) {
  ad::Matrix c(mol.num_atoms(), 4);
  for (const chem::Bond& b : mol.bonds) {
    int t = static_cast<int>(b.order) - 1;
    c(b.a, t) += 1.0;
    c(b.b, t) += 1.0;
  }
  return c;
}

}  // namespace detail

// A taped forward pass; owns the tape so callers can differentiate through
// it (explainers, training) or just read the outputs.
struct Forward {
  ad::Tape tape;
  ad::Tape::Id input = -1;                 // feature matrix leaf
  std::vector<ad::Tape::Id> param_ids;     // leaf per parameter tensor
  std::vector<ad::Tape::Id> layer_out;     // H^(1)..H^(L)
  ad::Tape::Id pooled = -1;
  ad::Tape::Id output = -1;                // pre-sigmoid logit / regression value

  double output_value() const { return tape.value(output)(0, 0); }
  double prediction(Task task) const {
    double z = output_value();
    return task == Task::Classification ? 1.0 / (1.0 + std::exp(-z)) : z;
  }
};

// Builds the network on an existing tape from an already-created input node.
// The GNNExplainer path uses this to place a learned mask between the input
// and the first layer.
inline void build_network(Forward& f, const Params& p, const chem::MolGraph& mol,
                          ad::Tape::Id input, Mode mode, std::uint64_t seed) {
  const ModelConfig& cfg = p.config;
  cfg.validate();
  auto layout = tensor_layout(cfg);
  if (layout.size() != p.tensors.size()) throw ShapeMismatch("parameter tensor count");
  for (std::size_t i = 0; i < layout.size(); ++i)
    if (layout[i].rows != p.tensors[i].rows || layout[i].cols != p.tensors[i].cols)
      throw ShapeMismatch("parameter tensor shape for " + layout[i].name);
  if (f.tape.value(input).cols != cfg.input_dim) throw ShapeMismatch("input width");

  ad::Tape& t = f.tape;
  f.input = input;
  f.param_ids.clear();
  for (const auto& m : p.tensors) f.param_ids.push_back(t.leaf(m));

  ad::Tape::Id a_hat = t.leaf(detail::adjacency_hat(mol));
  std::mt19937_64 dropout_rng(seed ^ 0xd20b0u);

  auto maybe_dropout = [&](ad::Tape::Id h) {
    if (mode != Mode::Train || cfg.dropout <= 0.0) return h;
    const ad::Matrix& hv = t.value(h);
    ad::Matrix mask(hv.rows, hv.cols);
    std::bernoulli_distribution keep(1.0 - cfg.dropout);
    for (double& x : mask.v) x = keep(dropout_rng) ? 1.0 / (1.0 - cfg.dropout) : 0.0;
    return t.hadamard(h, t.leaf(std::move(mask)));
  };

  // Name -> leaf id lookup, resolved through the layout order.
  auto pid = [&](const std::string& name) -> ad::Tape::Id {
    for (std::size_t i = 0; i < layout.size(); ++i)
      if (layout[i].name == name) return f.param_ids[i];
    throw std::logic_error("unknown tensor " + name);
  };

  ad::Tape::Id h = input;
  f.layer_out.clear();

  if (cfg.architecture == Architecture::Gat) {
    ad::Matrix att_mask = detail::adjacency_hat(mol);  // neighbors plus self
    for (int l = 0; l < cfg.depth; ++l) {
      const std::string prefix = "layer" + std::to_string(l) + ".";
      std::vector<ad::Tape::Id> heads;
      for (int k = 0; k < cfg.heads; ++k) {
        const std::string hp = prefix + "head" + std::to_string(k) + ".";
        ad::Tape::Id z = t.matmul(h, pid(hp + "w"));
        ad::Tape::Id s_src = t.matmul(z, pid(hp + "asrc"));
        ad::Tape::Id s_dst = t.matmul(z, pid(hp + "adst"));
        ad::Tape::Id scores = t.leaky_relu(t.add_outer(s_src, s_dst), 0.2);
        ad::Tape::Id alpha = t.masked_row_softmax(scores, att_mask);
        heads.push_back(t.matmul(alpha, z));
      }
      ad::Tape::Id out;
      if (l + 1 == cfg.depth) {
        // Final layer averages the heads instead of concatenating.
        out = heads[0];
        for (int k = 1; k < cfg.heads; ++k) out = t.add(out, heads[k]);
        out = t.scale(out, 1.0 / cfg.heads);
      } else {
        out = heads[0];
        for (int k = 1; k < cfg.heads; ++k) out = t.concat_cols(out, heads[k]);
        out = t.relu(out);
      }
      out = maybe_dropout(out);
      f.layer_out.push_back(out);
      h = out;
    }
  } else {
    ad::Tape::Id bond_counts = -1;
    if (cfg.architecture == Architecture::EdgeGin)
      bond_counts = t.leaf(detail::bond_type_counts(mol));
    for (int l = 0; l < cfg.depth; ++l) {
      const std::string prefix = "layer" + std::to_string(l) + ".";
      // (1 + eps) h_v + sum_u h_u with eps = 0 is one matmul by (A + I).
      ad::Tape::Id msg = t.matmul(a_hat, h);
      if (cfg.architecture == Architecture::EdgeGin)
        msg = t.add(msg, t.matmul(bond_counts, pid(prefix + "we")));
      ad::Tape::Id z = t.matmul(msg, pid(prefix + "w1"));
      if (l > 0) z = t.add_rowvec(z, pid(prefix + "b1"));
      z = t.relu(z);
      ad::Tape::Id out = t.add_rowvec(t.matmul(z, pid(prefix + "w2")), pid(prefix + "b2"));
      if (cfg.architecture == Architecture::ResidualGin && l > 0) out = t.add(out, h);
      out = maybe_dropout(out);
      f.layer_out.push_back(out);
      h = out;
    }
  }

  f.pooled = cfg.pooling == Pooling::Mean ? t.row_mean(h) : t.row_sum(h);
  f.output = t.add_rowvec(t.matmul(f.pooled, pid("head.w")), pid("head.b"));
}

inline Forward forward(const Params& p, const chem::MolGraph& mol, Mode mode = Mode::Eval,
                       std::uint64_t seed = 0,
                       const chem::FeatureMatrix* feature_override = nullptr) {
  if (mol.num_atoms() == 0) throw std::invalid_argument("empty molecule");
  Forward f;
  chem::FeatureMatrix fm = feature_override ? *feature_override : chem::featurize(mol);
  if (fm.rows != mol.num_atoms()) throw ShapeMismatch("feature rows vs atoms");
  ad::Tape::Id input = f.tape.leaf(detail::features_to_matrix(fm));
  build_network(f, p, mol, input, mode, seed);
  return f;
}

inline double predict(const Params& p, const chem::MolGraph& mol,
                      const chem::FeatureMatrix* feature_override = nullptr) {
  Forward f = forward(p, mol, Mode::Eval, 0, feature_override);
  return f.prediction(p.config.task);
}

inline double predict_logit(const Params& p, const chem::MolGraph& mol,
                            const chem::FeatureMatrix* feature_override = nullptr) {
  Forward f = forward(p, mol, Mode::Eval, 0, feature_override);
  return f.output_value();
}

// Pooled embedding before the head.
inline std::vector<double> embed(const Params& p, const chem::MolGraph& mol,
                                 const chem::FeatureMatrix* feature_override = nullptr) {
  Forward f = forward(p, mol, Mode::Eval, 0, feature_override);
  return f.tape.value(f.pooled).v;
}

enum class GradWrt { Input, HiddenLast };

// Exact gradient of the pre-sigmoid output with respect to the input
// features or the last layer's node activations. Eval mode (no dropout).
inline ad::Matrix backward(const Params& p, const chem::MolGraph& mol, GradWrt wrt,
                           const chem::FeatureMatrix* feature_override = nullptr) {
  Forward f = forward(p, mol, Mode::Eval, 0, feature_override);
  f.tape.backward(f.output);
  return wrt == GradWrt::Input ? f.tape.grad(f.input) : f.tape.grad(f.layer_out.back());
}

// ---------------------------------------------------------------------------
// Training
// ---------------------------------------------------------------------------

struct LabeledMol {
  chem::MolGraph mol;
  double label = 0.0;
  std::string id;
};

using Dataset = std::vector<LabeledMol>;

struct TrainConfig {
  int batch_size = 16;
  double lr = 1e-3;
  double lr_decay_factor = 0.85;
  int lr_decay_period = 10;
  int max_epochs = 300;
  int patience = 20;  // epochs without val improvement; <= 0 disables
  LossKind loss = LossKind::Bce;
  std::uint64_t seed = 0;
  double split_train = 0.75;
  double split_val = 0.10;
  double split_test = 0.15;

  void validate() const {
    if (batch_size < 1 || max_epochs < 1) throw std::invalid_argument("bad train config");
    if (patience > max_epochs) throw std::invalid_argument("patience exceeds max epochs");
    if (std::abs(split_train + split_val + split_test - 1.0) > 1e-9)
      throw std::invalid_argument("split fractions must sum to 1");
  }
};

struct EpochStats {
  int epoch;
  double train_loss;
  double val_loss;
  double lr;
};

struct TrainResult {
  Params params;
  std::vector<EpochStats> history;
  int best_epoch = -1;
};

namespace detail {

inline ad::Tape::Id loss_node(ad::Tape& t, ad::Tape::Id output, double label, LossKind kind) {
  switch (kind) {
    case LossKind::Bce: return t.bce_with_logit(output, label);
    case LossKind::Mse: return t.mse_loss(output, label);
    case LossKind::SmoothL1: return t.smooth_l1_loss(output, label);
  }
  throw std::logic_error("unknown loss");
}

inline std::uint64_t substream(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
  return chem::detail::hash_combine(chem::detail::hash_combine(seed, a), b);
}

}  // namespace detail

inline double dataset_loss(const Params& p, const Dataset& set, LossKind kind) {
  if (set.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& ex : set) {
    Forward f = forward(p, ex.mol, Mode::Eval);
    ad::Tape::Id loss = detail::loss_node(f.tape, f.output, ex.label, kind);
    sum += f.tape.value(loss)(0, 0);
  }
  return sum / static_cast<double>(set.size());
}

// Adam with step-decayed learning rate and early stopping on validation
// loss; returns the best-validation parameters. Deterministic given seed.
inline TrainResult train(const ModelConfig& cfg, const TrainConfig& tcfg, const Dataset& train_set,
                         const Dataset& val_set) {
  cfg.validate();
  tcfg.validate();
  if (train_set.empty() || val_set.empty()) throw std::invalid_argument("empty dataset");
  for (const auto& ex : train_set)
    if (cfg.task == Task::Classification && ex.label != 0.0 && ex.label != 1.0)
      throw std::invalid_argument("classification labels must be 0/1");

  Params params = init_params(cfg, tcfg.seed);
  const std::size_t np = params.tensors.size();
  std::vector<ad::Matrix> grad(np), m1(np), m2(np);
  for (std::size_t i = 0; i < np; ++i) {
    grad[i] = ad::Matrix(params.tensors[i].rows, params.tensors[i].cols);
    m1[i] = grad[i];
    m2[i] = grad[i];
  }

  constexpr double kBeta1 = 0.9, kBeta2 = 0.999, kEps = 1e-8;
  std::mt19937_64 shuffle_rng(tcfg.seed ^ 0x5f0f1e5ull);
  std::vector<int> perm(train_set.size());
  for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = static_cast<int>(i);

  TrainResult result;
  double best_val = std::numeric_limits<double>::infinity();
  int since_best = 0;
  std::int64_t step = 0;

  for (int epoch = 0; epoch < tcfg.max_epochs; ++epoch) {
    double lr = tcfg.lr * std::pow(tcfg.lr_decay_factor, epoch / tcfg.lr_decay_period);
    std::shuffle(perm.begin(), perm.end(), shuffle_rng);
    double train_loss_sum = 0.0;
    for (std::size_t start = 0; start < perm.size(); start += tcfg.batch_size) {
      std::size_t stop = std::min(perm.size(), start + tcfg.batch_size);
      for (auto& g : grad) std::fill(g.v.begin(), g.v.end(), 0.0);
      for (std::size_t bi = start; bi < stop; ++bi) {
        const LabeledMol& ex = train_set[perm[bi]];
        Forward f = forward(params, ex.mol, Mode::Train,
                            detail::substream(tcfg.seed, epoch, perm[bi]));
        ad::Tape::Id loss = detail::loss_node(f.tape, f.output, ex.label, tcfg.loss);
        train_loss_sum += f.tape.value(loss)(0, 0);
        f.tape.backward(loss);
        for (std::size_t i = 0; i < np; ++i) {
          const ad::Matrix& g = f.tape.grad(f.param_ids[i]);
          for (std::size_t k = 0; k < g.size(); ++k) grad[i].v[k] += g.v[k];
        }
      }
      double inv_batch = 1.0 / static_cast<double>(stop - start);
      ++step;
      double c1 = 1.0 - std::pow(kBeta1, static_cast<double>(step));
      double c2 = 1.0 - std::pow(kBeta2, static_cast<double>(step));
      for (std::size_t i = 0; i < np; ++i) {
        for (std::size_t k = 0; k < grad[i].size(); ++k) {
          double g = grad[i].v[k] * inv_batch;
          m1[i].v[k] = kBeta1 * m1[i].v[k] + (1.0 - kBeta1) * g;
          m2[i].v[k] = kBeta2 * m2[i].v[k] + (1.0 - kBeta2) * g * g;
          double mh = m1[i].v[k] / c1, vh = m2[i].v[k] / c2;
          params.tensors[i].v[k] -= lr * mh / (std::sqrt(vh) + kEps);
        }
      }
    }
    double train_loss = train_loss_sum / static_cast<double>(train_set.size());

    double val_loss = 0.0;
    for (const auto& ex : val_set) {
      Forward f = forward(params, ex.mol, Mode::Eval);
      ad::Tape::Id loss = detail::loss_node(f.tape, f.output, ex.label, tcfg.loss);
      val_loss += f.tape.value(loss)(0, 0);
    }
    val_loss /= static_cast<double>(val_set.size());

    if (!std::isfinite(train_loss) || !std::isfinite(val_loss))
      throw Diverged("non-finite loss at epoch " + std::to_string(epoch));
    result.history.push_back({epoch, train_loss, val_loss, lr});

    if (val_loss < best_val) {
      best_val = val_loss;
      result.params = params;
      result.best_epoch = epoch;
      since_best = 0;
    } else {
      ++since_best;
      if (tcfg.patience > 0 && since_best >= tcfg.patience) break;
    }
  }
  if (result.best_epoch < 0) {
    result.params = params;
    result.best_epoch = static_cast<int>(result.history.size()) - 1;
  }
  return result;
}

// ---------------------------------------------------------------------------
// Evaluation
// ---------------------------------------------------------------------------

struct Metrics {
  std::optional<double> accuracy;
  std::optional<double> auc;  // absent when labels are degenerate
  std::optional<double> mae;
  std::optional<double> rmse;
};

// Rank-statistic AUC with average ranks on ties; absent when one class.
inline std::optional<double> auc_from_scores(const std::vector<double>& scores,
                                             const std::vector<int>& labels) {
  int n_pos = 0;
  for (int y : labels) n_pos += y ? 1 : 0;
  int n_neg = static_cast<int>(labels.size()) - n_pos;
  if (n_pos == 0 || n_neg == 0) return std::nullopt;
  std::vector<std::pair<double, int>> scored;
  for (std::size_t i = 0; i < scores.size(); ++i) scored.push_back({scores[i], labels[i]});
  std::sort(scored.begin(), scored.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  double pos_rank_sum = 0.0;
  std::size_t i = 0;
  while (i < scored.size()) {
    std::size_t j = i;
    while (j < scored.size() && scored[j].first == scored[i].first) ++j;
    double avg_rank = 0.5 * (static_cast<double>(i + 1) + static_cast<double>(j));
    for (std::size_t k = i; k < j; ++k)
      if (scored[k].second == 1) pos_rank_sum += avg_rank;
    i = j;
  }
  return (pos_rank_sum - 0.5 * n_pos * (n_pos + 1)) /
         (static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

inline Metrics evaluate(const Params& p, const Dataset& set, Task task) {
  if (set.empty()) throw std::invalid_argument("empty evaluation set");
  Metrics out;
  std::vector<double> preds;
  preds.reserve(set.size());
  for (const auto& ex : set) preds.push_back(predict(p, ex.mol));

  if (task == Task::Regression) {
    double abs_sum = 0.0, sq_sum = 0.0;
    for (std::size_t i = 0; i < set.size(); ++i) {
      double e = preds[i] - set[i].label;
      abs_sum += std::abs(e);
      sq_sum += e * e;
    }
    out.mae = abs_sum / set.size();
    out.rmse = std::sqrt(sq_sum / set.size());
    return out;
  }

  int correct = 0;
  std::vector<int> labels;
  for (std::size_t i = 0; i < set.size(); ++i) {
    int y = set[i].label > 0.5 ? 1 : 0;
    labels.push_back(y);
    if ((preds[i] > 0.5 ? 1 : 0) == y) ++correct;
  }
  out.accuracy = static_cast<double>(correct) / set.size();
  out.auc = auc_from_scores(preds, labels);
  return out;
}

// ---------------------------------------------------------------------------
// Checkpoints
// ---------------------------------------------------------------------------

inline const char* architecture_name(Architecture a) {
  switch (a) {
    case Architecture::Gin: return "gin";
    case Architecture::EdgeGin: return "edge_gin";
    case Architecture::ResidualGin: return "residual_gin";
    case Architecture::Gat: return "gat";
  }
  return "gin";
}

inline Architecture architecture_from_name(const std::string& s) {
  if (s == "gin") return Architecture::Gin;
  if (s == "edge_gin") return Architecture::EdgeGin;
  if (s == "residual_gin") return Architecture::ResidualGin;
  if (s == "gat") return Architecture::Gat;
  throw std::invalid_argument("unknown architecture: " + s);
}

inline nlohmann::json config_to_json(const ModelConfig& cfg) {
  return {{"architecture", architecture_name(cfg.architecture)},
          {"depth", cfg.depth},
          {"hidden", cfg.hidden},
          {"pooling", cfg.pooling == Pooling::Mean ? "mean" : "add"},
          {"dropout", cfg.dropout},
          {"heads", cfg.heads},
          {"task", cfg.task == Task::Classification ? "classification" : "regression"},
          {"input_dim", cfg.input_dim}};
}

inline ModelConfig config_from_json(const nlohmann::json& j) {
  ModelConfig cfg;
  cfg.architecture = architecture_from_name(j.at("architecture").get<std::string>());
  cfg.depth = j.at("depth").get<int>();
  cfg.hidden = j.at("hidden").get<int>();
  cfg.pooling = j.at("pooling").get<std::string>() == "add" ? Pooling::Add : Pooling::Mean;
  cfg.dropout = j.at("dropout").get<double>();
  cfg.heads = j.at("heads").get<int>();
  cfg.task = j.at("task").get<std::string>() == "regression" ? Task::Regression
                                                             : Task::Classification;
  cfg.input_dim = j.at("input_dim").get<int>();
  return cfg;
}

inline void save_checkpoint(const Params& p, std::ostream& os, std::uint64_t seed = 0,
                            const std::vector<EpochStats>& history = {}) {
  nlohmann::json j;
  j["format"] = "cfmask-checkpoint";
  j["version"] = 1;
  j["config"] = config_to_json(p.config);
  j["seed"] = seed;
  j["parameter_count"] = p.count();
  auto layout = tensor_layout(p.config);
  nlohmann::json tensors = nlohmann::json::array();
  for (std::size_t i = 0; i < layout.size(); ++i) {
    tensors.push_back({{"name", layout[i].name},
                       {"rows", p.tensors[i].rows},
                       {"cols", p.tensors[i].cols},
                       {"data", p.tensors[i].v}});
  }
  j["tensors"] = std::move(tensors);
  nlohmann::json hist = nlohmann::json::array();
  for (const auto& e : history)
    hist.push_back({{"epoch", e.epoch},
                    {"train_loss", e.train_loss},
                    {"val_loss", e.val_loss},
                    {"lr", e.lr}});
  j["history"] = std::move(hist);
  os << j.dump(2) << "\n";
}

inline Params load_checkpoint(std::istream& is) {
  nlohmann::json j = nlohmann::json::parse(is);
  if (j.value("format", "") != "cfmask-checkpoint")
    throw std::runtime_error("not a checkpoint file");
  if (j.value("version", -1) != 1)
    throw std::runtime_error("unsupported checkpoint version");
  Params p;
  p.config = config_from_json(j.at("config"));
  auto layout = tensor_layout(p.config);
  const auto& tensors = j.at("tensors");
  if (tensors.size() != layout.size()) throw ShapeMismatch("checkpoint tensor count");
  for (std::size_t i = 0; i < layout.size(); ++i) {
    const auto& tj = tensors[i];
    if (tj.at("name").get<std::string>() != layout[i].name ||
        tj.at("rows").get<int>() != layout[i].rows || tj.at("cols").get<int>() != layout[i].cols)
      throw ShapeMismatch("checkpoint tensor " + layout[i].name);
    ad::Matrix m(layout[i].rows, layout[i].cols);
    m.v = tj.at("data").get<std::vector<double>>();
    if (m.v.size() != static_cast<std::size_t>(layout[i].rows) * layout[i].cols)
      throw ShapeMismatch("checkpoint tensor data length");
    p.tensors.push_back(std::move(m));
  }
  return p;
}

}  // namespace cfmask::gnn

#endif  // CFMASK_GNN_HPP
