// Copyright 2026  The spanalign Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "spanalign/evalkit.h"
#include "spanalign/synth.h"
#include "spanalign/trainer.h"

namespace spanalign {

struct CorpusPaths {
  std::filesystem::path manifest;
  std::filesystem::path features;
  std::filesystem::path translations;
  std::optional<std::filesystem::path> gold;
};

/// load_corpus, keeping only the gold entries of the manifest's utterances.
Corpus load_split(const CorpusPaths& paths);

struct AlignOptions {
  CorpusPaths corpus;
  std::filesystem::path out_dir;
  TrainConfig train;
  /// Write the proportional-length baseline instead of training.
  bool naive = false;
};

/// Outputs in out_dir: alignments.tsv, model.json (plus model.iterN.json after
/// every iteration), iterations.log and, with gold, eval_report.{txt,tsv}.
/// Returns the corpus report when gold is available.
std::optional<EvalReport> run_align(const AlignOptions& opts, std::ostream& log);

struct GridOptions {
  CorpusPaths dev;
  CorpusPaths test;
  std::filesystem::path out_dir;
  TrainConfig train;
  std::vector<double> lambda_grid;
};

struct GridRow {
  std::string split;
  double lambda = 0.0;
  EvalReport report;
};

/// One dev run per lambda, then the best dev lambda (first on ties) on test.
/// Writes grid_report.tsv and the winning test run under out_dir/test.
std::vector<GridRow> run_grid(const GridOptions& opts, std::ostream& log);

/// Writes the synthetic corpus plus truth.json (true prototypes).
CorpusFiles run_synth(const SynthConfig& config, std::uint64_t seed,
                      const std::filesystem::path& out_dir);

/// Prints "normalized_cost", "raw_cost" and "path_length" lines.
void run_dtw(const std::filesystem::path& a, const std::filesystem::path& b, std::ostream& out);

/// Prints the report and, when out_prefix is set, writes <prefix>.txt/.tsv.
EvalReport run_eval(const std::filesystem::path& predicted, const std::filesystem::path& gold,
                    const std::optional<std::filesystem::path>& out_prefix, std::ostream& out);

/// Decimal with at least one fractional digit ("0.0", "0.2").
std::string format_metric(double value);

/// Entry point of the spanalign executable. Returns the process exit code.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace spanalign
