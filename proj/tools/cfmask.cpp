//
// Project cfmask - Copyright 2026 cfmask developers.
// SPDX-License-Identifier: Apache-2.0
//
// Batch front end: dataset ingestion, model training, fragment-database
// construction, the three benchmark protocols, explanation export, and
// report generation. Every subcommand writes its artifact plus a JSON
// manifest; data files are byte-stable so reruns with the same seed can be
// compared directly.

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "cfmask/bench.hpp"
#include "cfmask/chem.hpp"
#include "cfmask/dataset.hpp"
#include "cfmask/explain.hpp"
#include "cfmask/fingerprint.hpp"
#include "cfmask/gnn.hpp"
#include "cfmask/mask.hpp"
#include "cfmask/match.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace cfmask;

namespace {

std::string g_out_dir = ".";
json g_config = json::object();
std::uint64_t g_seed = 0;
int g_threads = 1;

std::string out_path(const std::string& name) {
  fs::create_directories(g_out_dir);
  return (fs::path(g_out_dir) / name).string();
}

void write_manifest(const std::string& command, const json& params,
                    const std::vector<std::string>& inputs,
                    const std::vector<std::string>& outputs) {
  json m = data::make_manifest(command, params, inputs, g_seed);
  m["outputs"] = outputs;
  m["threads"] = g_threads;
  std::ofstream os(out_path("manifest_" + command + ".json"));
  os << m.dump(2) << "\n";
}

std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(12) << v;
  return os.str();
}

// Configuration-file fallback: a flag's default may come from --config.
template <typename T>
void cfg_default(T& value, const std::string& key) {
  if (g_config.contains(key)) value = g_config.at(key).get<T>();
}

gnn::Dataset load_dataset_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open dataset: " + path);
  data::LoadReport rep;
  gnn::Dataset ds = data::load_dataset(is, &rep);
  std::cerr << "dataset " << path << ": kept " << rep.kept << " of " << rep.total_records
            << " (parse errors " << rep.parse_errors << ", too small " << rep.rejected_small
            << ", duplicates " << rep.duplicates << ")\n";
  return ds;
}

std::vector<chem::MolGraph> load_corpus_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open corpus: " + path);
  data::LoadReport rep;
  auto corpus = data::load_corpus(is, &rep);
  std::cerr << "corpus " << path << ": kept " << rep.kept << " of " << rep.total_records << "\n";
  return corpus;
}

gnn::Params load_checkpoint_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open checkpoint: " + path);
  return gnn::load_checkpoint(is);
}

mask::FragmentDb load_fragdb_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open fragdb: " + path);
  return mask::load_fragdb(is);
}

gnn::Architecture parse_arch(const std::string& s) { return gnn::architecture_from_name(s); }

bench::ExplainerKind parse_explainer(const std::string& s) {
  if (s == "saliency") return bench::ExplainerKind::Saliency;
  if (s == "integrated_gradients" || s == "ig") return bench::ExplainerKind::IntegratedGradients;
  if (s == "gradcam") return bench::ExplainerKind::GradCam;
  if (s == "gnnexplainer") return bench::ExplainerKind::GnnExplainer;
  if (s == "random") return bench::ExplainerKind::Random;
  throw CLI::ValidationError("--explainer", "unknown explainer: " + s);
}

bench::Masker parse_masker(const std::string& s) {
  if (s == "none") return bench::Masker::None;
  if (s == "zero") return bench::Masker::Zero;
  if (s == "cm") return bench::Masker::Cm;
  throw CLI::ValidationError("--masker", "unknown masker: " + s);
}

// ---------------------------------------------------------------------------
// Subcommands
// ---------------------------------------------------------------------------

struct TrainArgs {
  std::string dataset;
  std::string arch = "gin";
  int depth = 3;
  int hidden = 32;
  std::string pooling = "mean";
  double dropout = 0.0;
  int heads = 3;
  std::string task = "classification";
  int batch = 64;
  double lr = 3e-4;
  double lr_decay = 0.85;
  int lr_period = 10;
  int epochs = 300;
  int patience = 50;
  std::string loss;
  double f_train = 0.75, f_val = 0.10, f_test = 0.15;
};

int cmd_train(TrainArgs& a) {
  gnn::ModelConfig cfg;
  cfg.architecture = parse_arch(a.arch);
  cfg.depth = a.depth;
  cfg.hidden = a.hidden;
  cfg.pooling = a.pooling == "add" ? gnn::Pooling::Add : gnn::Pooling::Mean;
  cfg.dropout = a.dropout;
  cfg.heads = a.heads;
  cfg.task = a.task == "regression" ? gnn::Task::Regression : gnn::Task::Classification;

  gnn::TrainConfig tcfg;
  tcfg.batch_size = a.batch;
  tcfg.lr = a.lr;
  tcfg.lr_decay_factor = a.lr_decay;
  tcfg.lr_decay_period = a.lr_period;
  tcfg.max_epochs = a.epochs;
  tcfg.patience = a.patience;
  tcfg.seed = g_seed;
  tcfg.split_train = a.f_train;
  tcfg.split_val = a.f_val;
  tcfg.split_test = a.f_test;
  if (a.loss.empty()) a.loss = cfg.task == gnn::Task::Regression ? "smooth_l1" : "bce";
  tcfg.loss = a.loss == "mse"         ? gnn::LossKind::Mse
              : a.loss == "smooth_l1" ? gnn::LossKind::SmoothL1
                                      : gnn::LossKind::Bce;

  gnn::Dataset ds = load_dataset_file(a.dataset);
  data::SplitResult sp = data::split(ds, a.f_train, a.f_val, a.f_test, g_seed);
  std::cerr << "split: train " << sp.train.size() << ", val " << sp.val.size() << ", test "
            << sp.test.size() << "\n";
  gnn::TrainResult result = gnn::train(cfg, tcfg, sp.train, sp.val);

  {
    std::ofstream os(out_path("checkpoint.json"));
    gnn::save_checkpoint(result.params, os, g_seed, result.history);
  }
  {
    std::ofstream os(out_path("train_history.csv"));
    os << "epoch,train_loss,val_loss,lr\n";
    for (const auto& e : result.history)
      os << e.epoch << "," << fmt(e.train_loss) << "," << fmt(e.val_loss) << "," << fmt(e.lr)
         << "\n";
  }
  {
    gnn::Metrics m = gnn::evaluate(result.params, sp.test, cfg.task);
    std::ofstream os(out_path("metrics.csv"));
    os << "metric,value\n";
    os << "parameter_count," << result.params.count() << "\n";
    os << "best_epoch," << result.best_epoch << "\n";
    if (m.accuracy) os << "test_accuracy," << fmt(*m.accuracy) << "\n";
    if (m.auc) os << "test_auc," << fmt(*m.auc) << "\n";
    if (m.mae) os << "test_mae," << fmt(*m.mae) << "\n";
    if (m.rmse) os << "test_rmse," << fmt(*m.rmse) << "\n";
  }
  write_manifest("train",
                 {{"arch", a.arch},
                  {"depth", a.depth},
                  {"hidden", a.hidden},
                  {"dropout", a.dropout},
                  {"task", a.task},
                  {"loss", a.loss},
                  {"batch", a.batch},
                  {"lr", a.lr},
                  {"epochs", a.epochs},
                  {"patience", a.patience}},
                 {a.dataset}, {"checkpoint.json", "train_history.csv", "metrics.csv"});
  std::cout << "trained " << a.arch << " (" << result.params.count() << " parameters), best epoch "
            << result.best_epoch << "\n";
  return 0;
}

int cmd_build_fragdb(const std::string& corpus_path, int radius, int cuts, int max_atoms) {
  auto corpus = load_corpus_file(corpus_path);
  mask::FragmentDb db = mask::build_fragdb(corpus, radius, cuts, max_atoms);
  std::ofstream os(out_path("fragdb.txt"));
  mask::save_fragdb(db, os);
  write_manifest("build-fragdb",
                 {{"radius", radius}, {"cuts", cuts}, {"max_frag_atoms", max_atoms}},
                 {corpus_path}, {"fragdb.txt"});
  std::cout << "fragdb: " << db.key_count() << " context keys, " << db.fragment_count()
            << " fragments\n";
  return 0;
}

int cmd_gen_pairs(const std::string& corpus_path, int min_frag_atoms,
                  const std::string& scenario, bool simple_cuts) {
  auto corpus = load_corpus_file(corpus_path);
  std::optional<match::AnchorScenario> filter;
  if (scenario == "single") filter = match::AnchorScenario::SingleAnchor;
  else if (scenario == "multiple") filter = match::AnchorScenario::MultipleAnchors;
  else if (scenario == "both") filter = match::AnchorScenario::Both;
  match::PairDataset ds = match::build_pair_dataset(
      corpus, min_frag_atoms, filter,
      simple_cuts ? match::FragmentationMode::SimpleCuts : match::FragmentationMode::Brics);
  json entries = json::array();
  for (const auto& e : ds.entries) {
    json supers = json::array();
    for (int idx : e.superstructures) supers.push_back(chem::write_canonical(corpus[idx]));
    entries.push_back({{"fragment_smiles", e.fragment_smiles},
                       {"superstructures", supers},
                       {"scenario", match::anchor_scenario_name(e.scenario)}});
  }
  std::ofstream os(out_path("pairs.json"));
  os << entries.dump(2) << "\n";
  write_manifest("gen-pairs",
                 {{"min_frag_atoms", min_frag_atoms},
                  {"scenario", scenario},
                  {"simple_cuts", simple_cuts}},
                 {corpus_path}, {"pairs.json"});
  std::cout << "pair dataset: " << ds.entries.size() << " entries\n";
  return 0;
}

int cmd_bench_pairs(const std::string& checkpoint, const std::string& pairs_path,
                    const std::string& masker_s, const std::string& fragdb_path, int samples) {
  gnn::Params model = load_checkpoint_file(checkpoint);
  bench::Masker masker = parse_masker(masker_s);

  std::ifstream pf(pairs_path);
  if (!pf) throw std::runtime_error("cannot open pairs: " + pairs_path);
  json entries = json::parse(pf);

  std::vector<chem::MolGraph> corpus;
  std::map<std::string, int> corpus_index;
  match::PairDataset ds;
  for (const auto& e : entries) {
    match::PairEntry entry;
    entry.fragment_smiles = e.at("fragment_smiles").get<std::string>();
    entry.fragment = chem::parse_smiles(entry.fragment_smiles);
    for (const auto& s : e.at("superstructures")) {
      std::string smiles = s.get<std::string>();
      auto it = corpus_index.find(smiles);
      if (it == corpus_index.end()) {
        corpus_index[smiles] = static_cast<int>(corpus.size());
        corpus.push_back(chem::parse_smiles(smiles));
        it = corpus_index.find(smiles);
      }
      entry.superstructures.push_back(it->second);
    }
    ds.entries.push_back(std::move(entry));
  }

  std::optional<mask::FragmentDb> db;
  if (masker == bench::Masker::Cm) db = load_fragdb_file(fragdb_path);
  bench::PairEvalSummary summary = bench::eval_masking_pairs(
      model, ds, corpus, masker, db ? &*db : nullptr, samples, g_seed);

  {
    std::ofstream os(out_path("pairs_records.csv"));
    os << "fragment,super_a,super_b,masker,delta_yhat,valid,samples\n";
    for (const auto& r : summary.records)
      os << r.fragment_smiles << "," << chem::write_canonical(corpus[r.super_a]) << ","
         << chem::write_canonical(corpus[r.super_b]) << "," << bench::masker_name(r.masker)
         << "," << fmt(r.delta_yhat) << "," << (r.valid ? 1 : 0) << "," << r.samples_used
         << "\n";
  }
  {
    std::ofstream os(out_path("pairs_summary.csv"));
    os << "masker,mean_delta,validity,size,total\n";
    os << masker_s << "," << fmt(summary.mean_delta) << "," << fmt(summary.validity) << ","
       << summary.size << "," << summary.records.size() << "\n";
  }
  write_manifest("bench-pairs", {{"masker", masker_s}, {"samples", samples}},
                 {checkpoint, pairs_path, fragdb_path}, {"pairs_records.csv", "pairs_summary.csv"});
  std::cout << "pairs: masker " << masker_s << ", mean |dy| " << fmt(summary.mean_delta)
            << ", validity " << fmt(summary.validity) << ", size " << summary.size << "\n";
  return 0;
}

int cmd_gen_cf(const std::string& checkpoint, const std::string& dataset_path,
               const std::string& fragdb_path, const std::string& sa_corpus_path,
               double fraction, int k, int samples, int limit) {
  gnn::Params model = load_checkpoint_file(checkpoint);
  mask::FragmentDb db = load_fragdb_file(fragdb_path);
  gnn::Dataset ds = load_dataset_file(dataset_path);
  std::optional<fp::SAFreqTable> sa;
  if (!sa_corpus_path.empty()) sa = fp::build_sa_table(load_corpus_file(sa_corpus_path));

  std::ofstream os(out_path("cf_records.csv"));
  os << "smiles,prediction,class,candidates,bv,validity,similarity,diversity,sa,selected\n";
  int done = 0;
  double bv_sum = 0, val_sum = 0, sim_sum = 0, div_sum = 0, sa_sum = 0;
  int bv_n = 0, metric_n = 0, sa_n = 0;
  for (std::size_t i = 0; i < ds.size() && done < limit; ++i) {
    bench::CfSet cf = bench::generate_counterfactual_set(
        model, ds[i].mol, db, sa ? &*sa : nullptr, fraction, k, samples,
        bench::substream(g_seed, 7, i));
    if (cf.rejected) continue;
    ++done;
    std::string selected;
    for (const auto& v : cf.selected) {
      if (!selected.empty()) selected += ";";
      selected += chem::write_canonical(v.molecule);
    }
    os << cf.original_smiles << "," << fmt(cf.original_prediction) << "," << cf.original_class
       << "," << cf.candidate_count << "," << (cf.bv_defined ? fmt(cf.bv) : "") << ","
       << fmt(cf.validity) << "," << fmt(cf.similarity) << "," << fmt(cf.diversity) << ","
       << (cf.sa_defined ? fmt(cf.sa) : "") << "," << selected << "\n";
    if (cf.bv_defined) {
      bv_sum += cf.bv;
      ++bv_n;
    }
    if (!cf.selected.empty()) {
      val_sum += cf.validity;
      sim_sum += cf.similarity;
      div_sum += cf.diversity;
      ++metric_n;
      if (cf.sa_defined) {
        sa_sum += cf.sa;
        ++sa_n;
      }
    }
  }
  {
    std::ofstream ss(out_path("cf_summary.csv"));
    ss << "method,bv,validity,similarity,diversity,sa,molecules\n";
    ss << "cm_gradcam," << (bv_n ? fmt(bv_sum / bv_n) : "") << ","
       << (metric_n ? fmt(val_sum / metric_n) : "") << ","
       << (metric_n ? fmt(sim_sum / metric_n) : "") << ","
       << (metric_n ? fmt(div_sum / metric_n) : "") << "," << (sa_n ? fmt(sa_sum / sa_n) : "")
       << "," << done << "\n";
  }
  write_manifest("gen-cf",
                 {{"fraction", fraction}, {"k", k}, {"samples", samples}, {"limit", limit}},
                 {checkpoint, dataset_path, fragdb_path}, {"cf_records.csv", "cf_summary.csv"});
  std::cout << "counterfactuals for " << done << " molecules\n";
  return 0;
}

int cmd_bench_consistency(const std::string& checkpoint, const std::string& dataset_path,
                          const std::string& explainer_s, const std::string& masker_s,
                          const std::string& fragdb_path, double fraction, int n_mol,
                          int samples) {
  gnn::Params model = load_checkpoint_file(checkpoint);
  gnn::Dataset ds = load_dataset_file(dataset_path);
  bench::ConsistencyOptions opt;
  opt.explainer = parse_explainer(explainer_s);
  opt.masker = parse_masker(masker_s);
  opt.fraction = fraction;
  opt.n_mol = n_mol;
  opt.n_samples = samples;
  opt.seed = g_seed;
  std::optional<mask::FragmentDb> db;
  if (opt.masker == bench::Masker::Cm) db = load_fragdb_file(fragdb_path);

  bench::ConsistencySummary summary =
      bench::consistency_benchmark(model, ds, opt, db ? &*db : nullptr);

  {
    std::ofstream os(out_path("consistency_records.csv"));
    os << "mol_id,direction,kept,moved\n";
    for (const auto& r : summary.records)
      os << r.mol_id << "," << (r.direction == explain::Direction::Increase ? "increase" : "decrease")
         << "," << r.kept << "," << r.moved << "\n";
  }
  {
    std::ofstream os(out_path("consistency_summary.csv"));
    os << "dataset,explainer,masker,fraction,mean,sd,records,excluded,trials\n";
    os << fs::path(dataset_path).stem().string() << "," << explainer_s << "," << masker_s << ","
       << fmt(fraction) << "," << fmt(summary.mean) << "," << fmt(summary.sd) << ","
       << summary.records.size() << "," << summary.excluded << "," << summary.trials << "\n";
  }
  write_manifest("bench-consistency",
                 {{"explainer", explainer_s},
                  {"masker", masker_s},
                  {"fraction", fraction},
                  {"n_mol", n_mol},
                  {"samples", samples}},
                 {checkpoint, dataset_path, fragdb_path},
                 {"consistency_records.csv", "consistency_summary.csv"});
  std::cout << "consistency: " << explainer_s << " + " << masker_s << " = "
            << fmt(100.0 * summary.mean) << "% +- " << fmt(100.0 * summary.sd) << "% over "
            << summary.records.size() << " records\n";
  return 0;
}

int cmd_explain(const std::string& checkpoint, const std::string& dataset_path,
                const std::string& explainer_s, double fraction, int limit) {
  gnn::Params model = load_checkpoint_file(checkpoint);
  gnn::Dataset ds = load_dataset_file(dataset_path);
  bench::ExplainerKind kind = parse_explainer(explainer_s);
  std::ofstream os(out_path("explanations.jsonl"));
  int done = 0;
  for (std::size_t i = 0; i < ds.size() && done < limit; ++i, ++done) {
    explain::Explanation e =
        bench::run_explainer(kind, model, ds[i].mol, bench::substream(g_seed, 9, i));
    auto inc = explain::select_top_fraction(e, {fraction, explain::Direction::Increase});
    auto dec = explain::select_top_fraction(e, {fraction, explain::Direction::Decrease});
    os << explain::explanation_to_json(e, ds[i].mol, inc, dec).dump() << "\n";
  }
  write_manifest("explain", {{"explainer", explainer_s}, {"fraction", fraction}},
                 {checkpoint, dataset_path}, {"explanations.jsonl"});
  std::cout << "explained " << done << " molecules\n";
  return 0;
}

int cmd_embed_export(const std::string& checkpoint, const std::string& dataset_path) {
  gnn::Params model = load_checkpoint_file(checkpoint);
  gnn::Dataset ds = load_dataset_file(dataset_path);
  std::ofstream os(out_path("embeddings.csv"));
  os << "id";
  for (int d = 0; d < model.config.hidden; ++d) os << ",dim" << d;
  os << "\n";
  for (const auto& ex : ds) {
    std::vector<double> e = gnn::embed(model, ex.mol);
    os << ex.id;
    for (double v : e) os << "," << fmt(v);
    os << "\n";
  }
  write_manifest("embed-export", json::object(), {checkpoint, dataset_path},
                 {"embeddings.csv"});
  std::cout << "exported " << ds.size() << " embeddings\n";
  return 0;
}

// Markdown tables from summary CSVs; input kind detected by header.
int cmd_report(const std::vector<std::string>& inputs) {
  std::vector<std::vector<std::string>> pair_rows, cf_rows;
  // consistency: dataset -> (explainer, masker) -> cell
  std::map<std::string, std::map<std::pair<std::string, std::string>, std::string>> grid;
  std::set<std::string> datasets;
  std::set<std::pair<std::string, std::string>> combos;

  auto split_csv = [](const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
      if (c == ',') {
        out.push_back(cur);
        cur.clear();
      } else {
        cur += c;
      }
    }
    out.push_back(cur);
    return out;
  };

  for (const auto& path : inputs) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open input: " + path);
    std::string header;
    if (!std::getline(is, header)) continue;
    std::string line;
    while (std::getline(is, line)) {
      if (line.empty()) continue;
      auto f = split_csv(line);
      if (header.rfind("masker,", 0) == 0 && f.size() >= 4) {
        pair_rows.push_back(f);
      } else if (header.rfind("method,", 0) == 0 && f.size() >= 6) {
        cf_rows.push_back(f);
      } else if (header.rfind("dataset,", 0) == 0 && f.size() >= 9) {
        datasets.insert(f[0]);
        combos.insert({f[2], f[1]});  // (masker, explainer)
        double mean = std::stod(f[4]) * 100.0, sd = std::stod(f[5]) * 100.0;
        std::ostringstream cell;
        cell << std::fixed << std::setprecision(0) << mean << "±" << sd << "%";
        grid[f[0]][{f[2], f[1]}] = cell.str();
      }
    }
  }

  std::ofstream os(out_path("report.md"));
  os << "# cfmask benchmark report\n";
  if (!pair_rows.empty()) {
    os << "\n## Masking pair evaluation\n\n";
    os << "| masker | mean delta | validity | size |\n";
    os << "|---|---|---|---|\n";
    for (const auto& r : pair_rows)
      os << "| " << r[0] << " | " << r[1] << " | " << r[2] << " | " << r[3] << " |\n";
  }
  if (!cf_rows.empty()) {
    os << "\n## Counterfactual metrics\n\n";
    os << "| method | BV | validity | similarity | diversity | SA |\n";
    os << "|---|---|---|---|---|---|\n";
    for (const auto& r : cf_rows)
      os << "| " << r[0] << " | " << r[1] << " | " << r[2] << " | " << r[3] << " | " << r[4]
         << " | " << r[5] << " |\n";
  }
  if (!grid.empty()) {
    os << "\n## Consistency benchmark\n\n";
    os << "| masker | explainer |";
    for (const auto& d : datasets) os << " " << d << " |";
    os << "\n|---|---|";
    for (std::size_t i = 0; i < datasets.size(); ++i) os << "---|";
    os << "\n";
    for (const auto& combo : combos) {
      os << "| " << combo.first << " | " << combo.second << " |";
      for (const auto& d : datasets) {
        auto it = grid.find(d);
        std::string cell;
        if (it != grid.end()) {
          auto jt = it->second.find(combo);
          if (jt != it->second.end()) cell = jt->second;
        }
        os << " " << cell << " |";
      }
      os << "\n";
    }
  }
  write_manifest("report", json::object(), inputs, {"report.md"});
  std::cout << "report written\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"counterfactual masking toolkit"};
  app.require_subcommand(1);

  // Config file first: its values become defaults, flags override them.
  std::string config_path;
  for (int i = 1; i + 1 < argc; ++i)
    if (std::string(argv[i]) == "--config") config_path = argv[i + 1];
  if (!config_path.empty()) {
    std::ifstream cf(config_path);
    if (!cf) {
      std::cerr << json{{"error", "cannot open config: " + config_path}}.dump() << "\n";
      return 2;
    }
    g_config = json::parse(cf);
  }
  if (const char* env_out = std::getenv("CFMASK_OUT")) g_out_dir = env_out;
  cfg_default(g_out_dir, "out");
  cfg_default(g_seed, "seed");
  cfg_default(g_threads, "threads");

  app.add_option("--config", config_path, "JSON config file (flags override it)");
  app.add_option("--seed", g_seed, "global random seed");
  app.add_option("--threads", g_threads, "cap on worker parallelism");
  app.add_option("--out", g_out_dir, "output directory (or env CFMASK_OUT)");

  TrainArgs ta;
  cfg_default(ta.dataset, "dataset");
  cfg_default(ta.arch, "arch");
  cfg_default(ta.hidden, "hidden");
  cfg_default(ta.depth, "depth");
  cfg_default(ta.task, "task");
  auto* train = app.add_subcommand("train", "train a model on a smiles,label CSV");
  train->add_option("--dataset", ta.dataset, "dataset CSV")->required(!g_config.contains("dataset"));
  train->add_option("--arch", ta.arch, "gin|edge_gin|residual_gin|gat");
  train->add_option("--depth", ta.depth, "layers");
  train->add_option("--hidden", ta.hidden, "hidden width");
  train->add_option("--pool", ta.pooling, "mean|add");
  train->add_option("--dropout", ta.dropout, "dropout rate");
  train->add_option("--heads", ta.heads, "attention heads (gat)");
  train->add_option("--task", ta.task, "classification|regression");
  train->add_option("--batch", ta.batch, "batch size");
  train->add_option("--lr", ta.lr, "initial learning rate");
  train->add_option("--lr-decay", ta.lr_decay, "decay factor");
  train->add_option("--lr-period", ta.lr_period, "decay period (epochs)");
  train->add_option("--epochs", ta.epochs, "max epochs");
  train->add_option("--patience", ta.patience, "early-stopping patience");
  train->add_option("--loss", ta.loss, "bce|mse|smooth_l1");
  train->add_option("--train-frac", ta.f_train, "train fraction");
  train->add_option("--val-frac", ta.f_val, "validation fraction");
  train->add_option("--test-frac", ta.f_test, "test fraction");

  std::string corpus_path, scenario = "any";
  int radius = 1, cuts = 2, max_atoms = 12, min_frag_atoms = 5;
  bool simple_cuts = false;
  cfg_default(corpus_path, "corpus");
  auto* bdb = app.add_subcommand("build-fragdb", "index corpus fragments by context");
  bdb->add_option("--corpus", corpus_path, "SMILES corpus file")
      ->required(!g_config.contains("corpus"));
  bdb->add_option("--radius", radius, "context radius");
  bdb->add_option("--cuts", cuts, "max cuts");
  bdb->add_option("--max-frag-atoms", max_atoms, "max fragment heavy atoms");

  auto* gp = app.add_subcommand("gen-pairs", "build the common-substructure pair dataset");
  gp->add_option("--corpus", corpus_path, "SMILES corpus file")
      ->required(!g_config.contains("corpus"));
  gp->add_option("--min-frag-atoms", min_frag_atoms, "minimum fragment size");
  gp->add_option("--scenario", scenario, "any|single|multiple|both");
  gp->add_flag("--simple-cuts", simple_cuts, "ring/chain cuts instead of the full rule table");

  std::string checkpoint, pairs_path, fragdb_path, dataset_path, sa_corpus;
  std::string masker = "zero", explainer = "gradcam";
  int samples = 32, n_mol = 300, k_select = 3, limit = 1000000;
  double fraction = 0.10;
  auto* bp = app.add_subcommand("bench-pairs", "pair-masking evaluation");
  bp->add_option("--checkpoint", checkpoint, "model checkpoint")->required();
  bp->add_option("--pairs", pairs_path, "pairs.json")->required();
  bp->add_option("--masker", masker, "none|zero|cm");
  bp->add_option("--fragdb", fragdb_path, "fragment database (cm)");
  bp->add_option("--samples", samples, "cm samples per molecule");

  auto* gc = app.add_subcommand("gen-cf", "generate counterfactual sets");
  gc->add_option("--checkpoint", checkpoint, "model checkpoint")->required();
  gc->add_option("--dataset", dataset_path, "dataset CSV")->required();
  gc->add_option("--fragdb", fragdb_path, "fragment database")->required();
  gc->add_option("--sa-corpus", sa_corpus, "corpus for the SA table");
  gc->add_option("--fraction", fraction, "selected atom fraction")->default_val(0.20);
  gc->add_option("--k", k_select, "counterfactuals per molecule");
  gc->add_option("--samples", samples, "cm samples per molecule");
  gc->add_option("--limit", limit, "max molecules");

  auto* bc = app.add_subcommand("bench-consistency", "explainer consistency benchmark");
  bc->add_option("--checkpoint", checkpoint, "model checkpoint")->required();
  bc->add_option("--dataset", dataset_path, "dataset CSV")->required();
  bc->add_option("--explainer", explainer,
                 "saliency|integrated_gradients|gradcam|gnnexplainer|random");
  bc->add_option("--masker", masker, "zero|cm");
  bc->add_option("--fragdb", fragdb_path, "fragment database (cm)");
  bc->add_option("--fraction", fraction, "selected atom fraction");
  bc->add_option("--n-mol", n_mol, "molecules to sample");
  bc->add_option("--samples", samples, "cm samples per molecule");

  auto* ex = app.add_subcommand("explain", "export per-atom attributions");
  ex->add_option("--checkpoint", checkpoint, "model checkpoint")->required();
  ex->add_option("--dataset", dataset_path, "dataset CSV")->required();
  ex->add_option("--explainer", explainer, "attribution method");
  ex->add_option("--fraction", fraction, "selection fraction");
  ex->add_option("--limit", limit, "max molecules");

  auto* ee = app.add_subcommand("embed-export", "export pooled embeddings");
  ee->add_option("--checkpoint", checkpoint, "model checkpoint")->required();
  ee->add_option("--dataset", dataset_path, "dataset CSV")->required();

  std::vector<std::string> report_inputs;
  auto* rp = app.add_subcommand("report", "merge summary CSVs into a Markdown report");
  rp->add_option("--inputs", report_inputs, "summary CSV files")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (train->parsed()) return cmd_train(ta);
    if (bdb->parsed()) return cmd_build_fragdb(corpus_path, radius, cuts, max_atoms);
    if (gp->parsed()) return cmd_gen_pairs(corpus_path, min_frag_atoms, scenario, simple_cuts);
    if (bp->parsed()) return cmd_bench_pairs(checkpoint, pairs_path, masker, fragdb_path, samples);
    if (gc->parsed())
      return cmd_gen_cf(checkpoint, dataset_path, fragdb_path, sa_corpus, fraction, k_select,
                        samples, limit);
    if (bc->parsed())
      return cmd_bench_consistency(checkpoint, dataset_path, explainer, masker, fragdb_path,
                                   fraction, n_mol, samples);
    if (ex->parsed()) return cmd_explain(checkpoint, dataset_path, explainer, fraction, limit);
    if (ee->parsed()) return cmd_embed_export(checkpoint, dataset_path);
    if (rp->parsed()) return cmd_report(report_inputs);
  } catch (const std::exception& e) {
    std::cerr << json{{"error", e.what()}}.dump() << "\n";
    return 1;
  }
  return 1;
}
