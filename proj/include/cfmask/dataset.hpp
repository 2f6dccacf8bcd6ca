//
// Project cfmask - Copyright 2026 cfmask developers.
// SPDX-License-Identifier: Apache-2.0
//
// Dataset ingestion (CSV and SMILES-list formats), seeded splitting, file
// hashing and run manifests shared by the command-line tools.

#ifndef CFMASK_DATASET_HPP
#define CFMASK_DATASET_HPP

#include <chrono>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <istream>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "cfmask/chem.hpp"
#include "cfmask/gnn.hpp"

namespace cfmask::data {

struct LoadReport {
  int total_records = 0;
  int kept = 0;
  int parse_errors = 0;
  int rejected_small = 0;
  int duplicates = 0;
  std::vector<std::string> error_samples;  // first few, for diagnostics
};

// CSV with header `smiles,label`: parse, preprocess (ion strip + size
// gate), deduplicate by canonical SMILES keeping the first occurrence.
// Aborts only when more than half of the records fail to parse.
inline gnn::Dataset load_dataset(std::istream& is, LoadReport* report = nullptr) {
  LoadReport local;
  LoadReport& rep = report ? *report : local;
  gnn::Dataset out;
  std::set<std::string> seen;
  std::string line;
  bool first = true;
  int line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (first) {
      first = false;
      if (line.rfind("smiles", 0) == 0 || line.rfind("SMILES", 0) == 0) continue;
    }
    ++rep.total_records;
    auto comma = line.find(',');
    if (comma == std::string::npos) {
      ++rep.parse_errors;
      if (rep.error_samples.size() < 8)
        rep.error_samples.push_back("line " + std::to_string(line_no) + ": missing label");
      continue;
    }
    std::string smiles = line.substr(0, comma);
    double label = 0.0;
    try {
      label = std::stod(line.substr(comma + 1));
    } catch (const std::exception&) {
      ++rep.parse_errors;
      if (rep.error_samples.size() < 8)
        rep.error_samples.push_back("line " + std::to_string(line_no) + ": bad label");
      continue;
    }
    try {
      chem::MolGraph mol = chem::parse_smiles(smiles);
      auto pre = chem::preprocess(mol);
      if (!pre.ok()) {
        ++rep.rejected_small;
        continue;
      }
      std::string canon = chem::write_canonical(*pre.mol);
      if (!seen.insert(canon).second) {
        ++rep.duplicates;
        continue;
      }
      pre.mol->name = smiles;
      out.push_back({std::move(*pre.mol), label, canon});
      ++rep.kept;
    } catch (const std::exception& e) {
      ++rep.parse_errors;
      if (rep.error_samples.size() < 8)
        rep.error_samples.push_back("line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  if (rep.total_records > 0 && rep.parse_errors * 2 > rep.total_records)
    throw std::runtime_error("more than half of the dataset failed to parse");
  return out;
}

// One SMILES per line; '#' starts a comment. Preprocessing applied.
inline std::vector<chem::MolGraph> load_corpus(std::istream& is, LoadReport* report = nullptr) {
  LoadReport local;
  LoadReport& rep = report ? *report : local;
  std::vector<chem::MolGraph> out;
  std::set<std::string> seen;
  std::string line;
  while (std::getline(is, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    while (!line.empty() && (line.back() == ' ' || line.back() == '\t')) line.pop_back();
    if (line.empty()) continue;
    ++rep.total_records;
    try {
      auto pre = chem::preprocess(chem::parse_smiles(line));
      if (!pre.ok()) {
        ++rep.rejected_small;
        continue;
      }
      std::string canon = chem::write_canonical(*pre.mol);
      if (!seen.insert(canon).second) {
        ++rep.duplicates;
        continue;
      }
      out.push_back(std::move(*pre.mol));
      ++rep.kept;
    } catch (const std::exception& e) {
      ++rep.parse_errors;
      if (rep.error_samples.size() < 8) rep.error_samples.push_back(e.what());
    }
  }
  return out;
}

struct SplitResult {
  gnn::Dataset train;
  gnn::Dataset val;
  gnn::Dataset test;
};

// Seeded permutation split with sizes within one of the exact fractions.
inline SplitResult split(const gnn::Dataset& dataset, double f_train, double f_val,
                         double f_test, std::uint64_t seed) {
  if (std::abs(f_train + f_val + f_test - 1.0) > 1e-9)
    throw std::invalid_argument("split fractions must sum to 1");
  std::vector<int> order(dataset.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
  std::mt19937_64 rng(seed ^ 0x5b17f00dull);
  std::shuffle(order.begin(), order.end(), rng);
  const int n = static_cast<int>(dataset.size());
  int n_train = static_cast<int>(std::llround(f_train * n));
  int n_val = static_cast<int>(std::llround(f_val * n));
  n_train = std::min(n_train, n);
  n_val = std::min(n_val, n - n_train);
  SplitResult out;
  for (int i = 0; i < n; ++i) {
    const gnn::LabeledMol& ex = dataset[order[i]];
    if (i < n_train) out.train.push_back(ex);
    else if (i < n_train + n_val) out.val.push_back(ex);
    else out.test.push_back(ex);
  }
  return out;
}

// FNV-1a over raw bytes, for manifest provenance.
inline std::string file_hash(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return "missing";
  std::uint64_t h = 0xcbf29ce484222325ull;
  char c;
  while (in.get(c)) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ull;
  }
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << h;
  return os.str();
}

// Run manifest: configuration echo, seeds, and input hashes. The timestamp
// lives only here so data artifacts stay byte-stable.
inline nlohmann::json make_manifest(const std::string& command, const nlohmann::json& params,
                                    const std::vector<std::string>& input_paths,
                                    std::uint64_t seed) {
  nlohmann::json inputs = nlohmann::json::object();
  for (const auto& p : input_paths) inputs[p] = file_hash(p);
  auto now = std::chrono::system_clock::now();
  std::time_t t = std::chrono::system_clock::to_time_t(now);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
  return {{"command", command},
          {"params", params},
          {"inputs", inputs},
          {"seed", seed},
          {"timestamp", buf}};
}

}  // namespace cfmask::data

#endif  // CFMASK_DATASET_HPP
