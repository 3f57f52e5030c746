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

#include "spanalign/cli.h"

#include <ostream>
#include <set>

#include "CLI11.hpp"
#include "spanalign/dtw.h"
#include "spanalign/text_io.h"

namespace spanalign {

namespace fs = std::filesystem;

Corpus load_split(const CorpusPaths& paths) {
  Corpus corpus = load_corpus(paths.manifest, paths.features, paths.translations);
  if (paths.gold) {
    auto all = read_gold_file(*paths.gold);
    std::map<std::string, GoldAlignment> mine;
    for (const auto& p : corpus.pairs) {
      auto it = all.find(p.utt_id);
      if (it != all.end()) mine.emplace(p.utt_id, std::move(it->second));
    }
    corpus.gold = std::move(mine);
    corpus.validate();
  }
  return corpus;
}

std::string format_metric(double value) {
  std::string s = format_double(value);
  if (s.find_first_of(".en") == std::string::npos) s += ".0";
  return s;
}

namespace {

std::string describe(const TrainConfig& c) {
  std::string s;
  s += "# variant " + to_string(c.variant) + "\n";
  s += "# iterations " + std::to_string(c.iterations) + "\n";
  s += "# seed " + std::to_string(c.seed) + "\n";
  s += "# k " + std::to_string(c.k) + "\n";
  s += "# dba_iterations " + std::to_string(c.dba_iterations) + "\n";
  s += "# p0 " + format_double(c.distortion.p0) + "\n";
  s += "# lambda " + format_double(c.distortion.lambda) + "\n";
  s += "# normalize " + std::string(c.normalize ? "true" : "false") + "\n";
  s += "# grid_stride " + std::to_string(c.segmentation.grid_stride) + "\n";
  s += "# span_min_len " + std::to_string(c.segmentation.span_min_len) + "\n";
  s += "# span_max_len " + std::to_string(c.segmentation.span_max_len) + "\n";
  return s;
}

void write_reports(const EvalReport& report, const fs::path& prefix) {
  auto txt = prefix;
  txt += ".txt";
  auto tsv = prefix;
  tsv += ".tsv";
  write_file_atomic(txt, format_report(report));
  write_file_atomic(tsv, format_report_tsv(report));
}

}  // namespace

std::optional<EvalReport> run_align(const AlignOptions& opts, std::ostream& log) {
  Corpus corpus = load_split(opts.corpus);
  fs::create_directories(opts.out_dir);

  std::vector<Alignment> alignments;
  std::string iteration_log = describe(opts.train);
  if (opts.naive) {
    iteration_log += "# method naive\n";
    for (const auto& p : corpus.pairs) alignments.push_back(naive_baseline(p));
  } else {
    auto data = prepare_corpus(corpus, opts.train);
    iteration_log += "# iteration\ttotal_log_score\tseconds\n";
    auto state = train(data, opts.train, [&](const TrainState& s) {
      const auto& rec = s.iteration_log.back();
      write_checkpoint(opts.out_dir / ("model.iter" + std::to_string(rec.iteration) + ".json"),
                       s.params);
      log << "iteration " << rec.iteration << " log_score " << format_double(rec.total_log_score)
          << " (" << rec.seconds << " s)\n";
    });
    for (const auto& rec : state.iteration_log)
      iteration_log += std::to_string(rec.iteration) + "\t" + format_double(rec.total_log_score) +
                       "\t" + format_double(rec.seconds) + "\n";
    write_checkpoint(opts.out_dir / "model.json", state.params);
    alignments = std::move(state.assignments);
  }
  write_file_atomic(opts.out_dir / "alignments.tsv", format_alignments(corpus, alignments));
  write_file_atomic(opts.out_dir / "iterations.log", iteration_log);

  if (!corpus.gold) return std::nullopt;
  auto report = evaluate(eval_items(corpus, alignments));
  write_reports(report, opts.out_dir / "eval_report");
  log << "precision " << format_metric(report.precision) << " recall "
      << format_metric(report.recall) << " f_score " << format_metric(report.f_score) << "\n";
  return report;
}

std::vector<GridRow> run_grid(const GridOptions& opts, std::ostream& log) {
  if (opts.lambda_grid.empty()) throw Error("grid: empty lambda grid");
  if (!opts.dev.gold) throw Error("grid: the dev split needs gold alignments");
  for (double lambda : opts.lambda_grid)
    if (!(lambda >= 0.0)) throw Error("grid: lambda values must be non-negative");
  fs::create_directories(opts.out_dir);

  std::vector<GridRow> rows;
  std::size_t best = 0;
  for (std::size_t g = 0; g < opts.lambda_grid.size(); ++g) {
    AlignOptions run;
    run.corpus = opts.dev;
    run.train = opts.train;
    run.train.distortion.lambda = opts.lambda_grid[g];
    run.out_dir = opts.out_dir / ("dev_lambda_" + format_double(opts.lambda_grid[g]));
    log << "dev lambda " << format_double(opts.lambda_grid[g]) << "\n";
    auto report = run_align(run, log);
    rows.push_back({"dev", opts.lambda_grid[g], *report});
    if (report->f_score > rows[best].report.f_score) best = g;
  }

  AlignOptions final_run;
  final_run.corpus = opts.test;
  final_run.train = opts.train;
  final_run.train.distortion.lambda = opts.lambda_grid[best];
  final_run.out_dir = opts.out_dir / "test";
  log << "test lambda " << format_double(opts.lambda_grid[best]) << "\n";
  auto report = run_align(final_run, log);
  if (report) rows.push_back({"test", opts.lambda_grid[best], *report});

  std::string out = "split\tlambda\tprecision\trecall\tf_score\n";
  for (const auto& r : rows)
    out += r.split + "\t" + format_double(r.lambda) + "\t" + format_double(r.report.precision) +
           "\t" + format_double(r.report.recall) + "\t" + format_double(r.report.f_score) + "\n";
  write_file_atomic(opts.out_dir / "grid_report.tsv", out);
  return rows;
}

CorpusFiles run_synth(const SynthConfig& config, std::uint64_t seed, const fs::path& out_dir) {
  auto synth = synth_generate(config, seed);
  fs::create_directories(out_dir);
  auto files = write_corpus(synth.corpus, out_dir);
  write_checkpoint(out_dir / "truth.json", synth.truth);
  return files;
}

void run_dtw(const fs::path& a, const fs::path& b, std::ostream& out) {
  auto x = read_feature_file(a);
  auto y = read_feature_file(b);
  auto warp = dtw_distance(x, y);
  out << "normalized_cost " << format_metric(warp.normalized_cost) << "\n";
  out << "raw_cost " << format_metric(warp.raw_cost) << "\n";
  out << "path_length " << warp.path.size() << "\n";
}

EvalReport run_eval(const fs::path& predicted, const fs::path& gold,
                    const std::optional<fs::path>& out_prefix, std::ostream& out) {
  auto rows = read_alignment_file(predicted);
  auto gold_links = read_gold_file(gold);
  std::map<std::string, EvalItem> items;
  for (const auto& r : rows) {
    auto& item = items[r.utt_id];
    item.utt_id = r.utt_id;
    if (item.words.size() <= static_cast<std::size_t>(r.word_index))
      item.words.resize(static_cast<std::size_t>(r.word_index) + 1, "?");
    item.words[static_cast<std::size_t>(r.word_index)] = r.word;
    for (int f = r.start_frame; f < r.end_frame; ++f) item.predicted.emplace(r.word_index, f);
  }
  for (const auto& [id, g] : gold_links) {
    auto& item = items[id];
    item.utt_id = id;
    item.gold = g.links;
    for (const auto& link : g.links)
      if (item.words.size() <= static_cast<std::size_t>(link.first))
        item.words.resize(static_cast<std::size_t>(link.first) + 1, "?");
  }
  std::vector<EvalItem> list;
  for (auto& [id, item] : items) list.push_back(std::move(item));
  auto report = evaluate(list);
  out << "precision " << format_metric(report.precision) << "\n";
  out << "recall " << format_metric(report.recall) << "\n";
  out << "f_score " << format_metric(report.f_score) << "\n";
  if (out_prefix) write_reports(report, *out_prefix);
  return report;
}

namespace {

struct CliState {
  TrainConfig train;
  std::string variant = "deficient";
  std::vector<double> lambda_grid{0.1, 0.3, 0.5, 1.0, 2.0};
  int threads = 0;

  CorpusPaths corpus;
  CorpusPaths dev, test;
  std::string gold;
  fs::path out_dir;
  bool naive = false;

  SynthConfig synth;
  std::uint64_t synth_seed = 1;

  fs::path eval_pred, eval_gold;
  std::string eval_out;

  fs::path dtw_a, dtw_b;
};

void add_corpus_options(CLI::App* cmd, CorpusPaths& paths, const std::string& prefix) {
  cmd->add_option("--" + prefix + "manifest", paths.manifest, "utterance id list")
      ->required()
      ->check(CLI::ExistingFile);
  cmd->add_option("--" + prefix + "features", paths.features,
                  "directory of <utt_id>.feat (+ optional .energy/.bounds)")
      ->required()
      ->check(CLI::ExistingDirectory);
  cmd->add_option("--" + prefix + "translations", paths.translations,
                  "one target sentence per manifest line")
      ->required()
      ->check(CLI::ExistingFile);
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CliState st;
  CLI::App app{"spanalign: unsupervised alignment of speech features to translated text"};
  app.option_defaults()->always_capture_default();
  app.set_config("--config", "", "flat key = value file; command-line flags win");
  app.allow_config_extras(CLI::config_extras_mode::error);
  app.require_subcommand(1);
  app.fallthrough();

  auto& t = st.train;
  app.add_option("--p0", t.distortion.p0, "null alignment probability")->check(CLI::Range(0.0, 1.0));
  app.add_option("--lambda", t.distortion.lambda, "distortion precision")
      ->check(CLI::NonNegativeNumber);
  app.add_option("--threshold_ratio", t.segmentation.threshold_ratio,
                 "silence threshold relative to the smoothed energy maximum")
      ->check(CLI::Range(0.0, 1.0));
  app.add_option("--min_silence_ms", t.segmentation.min_silence_ms, "shortest silence")
      ->check(CLI::PositiveNumber);
  app.add_option("--smooth_frames", t.segmentation.smooth_frames, "energy smoothing window")
      ->check(CLI::PositiveNumber);
  app.add_option("--grid_stride", t.segmentation.grid_stride,
                 "uniform boundary grid stride in frames (0 disables)")
      ->check(CLI::NonNegativeNumber);
  app.add_option("--span_min_len", t.segmentation.span_min_len, "shortest candidate span")
      ->check(CLI::PositiveNumber);
  app.add_option("--span_max_len", t.segmentation.span_max_len, "longest candidate span")
      ->check(CLI::PositiveNumber);
  app.add_option("--iterations", t.iterations, "EM iterations")->check(CLI::PositiveNumber);
  app.add_option("--seed", t.seed, "random seed for cluster initialization");
  app.add_option("--k", t.k, "clusters per target word type")->check(CLI::PositiveNumber);
  app.add_option("--dba_iterations", t.dba_iterations, "DBA refinement iterations")
      ->check(CLI::PositiveNumber);
  app.add_option("--variant", st.variant, "model variant")
      ->check(CLI::IsMember({"deficient", "proper"}));
  app.add_option("--lambda_grid", st.lambda_grid, "lambda values tried by grid")->delimiter(',');
  app.add_option("--normalize", t.normalize, "per-utterance mean/variance normalization");
  app.add_option("--threads", st.threads, "worker threads (0 = all cores)")
      ->envname("SPANALIGN_THREADS")
      ->check(CLI::NonNegativeNumber);

  auto* align = app.add_subcommand("align", "train the model and write alignments");
  add_corpus_options(align, st.corpus, "");
  align->add_option("--gold", st.gold, "gold links for scoring")->check(CLI::ExistingFile);
  align->add_option("--out-dir", st.out_dir, "output directory")->required();
  align->add_flag("--naive", st.naive, "write the proportional-length baseline instead");

  auto* eval = app.add_subcommand("eval", "score predicted alignments against gold links");
  eval->add_option("--predicted", st.eval_pred, "alignment TSV")->required()->check(CLI::ExistingFile);
  eval->add_option("--gold", st.eval_gold, "gold file")->required()->check(CLI::ExistingFile);
  eval->add_option("--out", st.eval_out, "write <out>.txt and <out>.tsv");

  auto* grid = app.add_subcommand("grid", "pick lambda on a dev split, then run it on test");
  grid->add_option("--features", st.corpus.features, "feature directory shared by both splits")
      ->required()
      ->check(CLI::ExistingDirectory);
  for (auto [name, paths] : {std::pair{"dev", &st.dev}, std::pair{"test", &st.test}}) {
    grid->add_option(std::string("--") + name + "-manifest", paths->manifest,
                     std::string(name) + " utterance ids")
        ->required()
        ->check(CLI::ExistingFile);
    grid->add_option(std::string("--") + name + "-translations", paths->translations,
                     std::string(name) + " sentences")
        ->required()
        ->check(CLI::ExistingFile);
  }
  grid->add_option("--gold", st.gold, "gold links covering both splits")
      ->required()
      ->check(CLI::ExistingFile);
  grid->add_option("--out-dir", st.out_dir, "output directory")->required();

  auto* synth = app.add_subcommand("synth", "write a synthetic corpus with gold links");
  auto& sc = st.synth;
  synth->add_option("--out-dir", st.out_dir, "output directory")->required();
  synth->add_option("--synth_seed", st.synth_seed, "generator seed");
  synth->add_option("--vocab_size", sc.vocab_size, "word types");
  synth->add_option("--num_sentences", sc.num_sentences, "utterances");
  synth->add_option("--min_words", sc.min_words, "shortest sentence");
  synth->add_option("--max_words", sc.max_words, "longest sentence");
  synth->add_option("--min_proto_len", sc.min_proto_len, "shortest word prototype (frames)");
  synth->add_option("--max_proto_len", sc.max_proto_len, "longest word prototype (frames)");
  synth->add_option("--feature_dim", sc.feature_dim, "features per frame");
  synth->add_option("--noise_std", sc.noise_std, "additive Gaussian noise");
  synth->add_option("--reorder_prob", sc.reorder_prob, "adjacent-word swap probability");
  synth->add_option("--silence_prob", sc.silence_prob, "pause probability per word boundary");
  synth->add_option("--emit_boundaries", sc.emit_boundaries, "write .bounds sidecars");
  synth->add_option("--emit_energy", sc.emit_energy, "write .energy sidecars");

  auto* dtw = app.add_subcommand("dtw", "print the normalized DTW distance of two feature files");
  dtw->add_option("file_a", st.dtw_a, "first feature file")->required()->check(CLI::ExistingFile);
  dtw->add_option("file_b", st.dtw_b, "second feature file")->required()->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }

  try {
    t.variant = parse_variant(st.variant);
    t.threads = st.threads;
    if (*align) {
      AlignOptions opts;
      opts.corpus = st.corpus;
      if (!st.gold.empty()) opts.corpus.gold = st.gold;
      opts.out_dir = st.out_dir;
      opts.train = t;
      opts.naive = st.naive;
      run_align(opts, out);
    } else if (*grid) {
      GridOptions opts;
      opts.dev = st.dev;
      opts.test = st.test;
      opts.dev.features = opts.test.features = st.corpus.features;
      opts.dev.gold = opts.test.gold = fs::path(st.gold);
      opts.out_dir = st.out_dir;
      opts.train = t;
      opts.lambda_grid = st.lambda_grid;
      auto rows = run_grid(opts, err);
      out << "split\tlambda\tf_score\n";
      for (const auto& r : rows)
        out << r.split << "\t" << format_double(r.lambda) << "\t" << format_metric(r.report.f_score)
            << "\n";
    } else if (*eval) {
      std::optional<fs::path> prefix;
      if (!st.eval_out.empty()) prefix = st.eval_out;
      run_eval(st.eval_pred, st.eval_gold, prefix, out);
    } else if (*synth) {
      auto files = run_synth(st.synth, st.synth_seed, st.out_dir);
      out << "manifest " << files.manifest.string() << "\n";
      out << "features " << files.feature_dir.string() << "\n";
      out << "translations " << files.translations.string() << "\n";
      if (files.gold) out << "gold " << files.gold->string() << "\n";
    } else if (*dtw) {
      run_dtw(st.dtw_a, st.dtw_b, out);
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace spanalign
