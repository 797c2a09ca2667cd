// tools/mocovox_main.cc

// Copyright 2026 The MoCoVox Authors
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
//
// Command-line entry point: corpus synthesis, training, verification
// evaluation, score histograms, and the queue-size sweep.
//
// Exit codes: 0 ok, 2 config/data error, 3 I/O error, 4 numeric error.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "mocovox/eval.h"
#include "mocovox/synthdata.h"
#include "mocovox/trainer.h"

namespace {

namespace fs = std::filesystem;
using namespace mocovox;

constexpr int kExitConfig = 2;
constexpr int kExitIo = 3;
constexpr int kExitNumeric = 4;

int ExitCodeFor(const Error& e) {
  switch (e.kind()) {
    case ErrorKind::kIo: return kExitIo;
    case ErrorKind::kNumeric: return kExitNumeric;
    default: return kExitConfig;
  }
}

struct SynthArgs {
  int speakers = 32;
  int utts = 20;
  std::string out;
  uint64_t seed = 0;
  int trials = 500;
  double duration_s = 4.0;
};

int RunSynth(const SynthArgs& args) {
  CorpusConfig cfg;
  cfg.n_speakers = args.speakers;
  cfg.utts_per_speaker = args.utts;
  cfg.utterance_duration_s = args.duration_s;
  cfg.seed = args.seed;
  Manifest manifest = BuildCorpus(cfg, args.out);
  TrialList trials = BuildTrials(manifest, args.trials, args.seed);
  WriteTrials(fs::path(args.out) / "trials.tsv", trials);
  std::cout << "manifest=" << (fs::path(args.out) / "manifest.tsv").string() << "\n";
  std::cout << "trials=" << (fs::path(args.out) / "trials.tsv").string() << "\n";
  std::cout << "utterances=" << manifest.records.size() << " trial_pairs=" << trials.size()
            << "\n";
  return 0;
}

struct TrainArgs {
  std::string config;
  std::string data;
  std::string out;
  int64_t seed = -1;  // <0: keep the config file's seed
};

int RunTrain(const TrainArgs& args) {
  TrainConfig cfg = TrainConfig::FromFile(args.config);
  if (args.seed >= 0) cfg.seed = static_cast<uint64_t>(args.seed);
  Manifest manifest = Manifest::Read(fs::path(args.data) / "manifest.tsv");
  TrainResult result = Train(cfg, manifest, args.data, args.out);
  std::cout << "checkpoint=" << result.checkpoint_path.string() << "\n";
  std::cout << "metrics=" << result.metrics_path.string() << "\n";
  std::cout << "steps=" << result.steps << " final_loss=" << FormatDouble(result.final_loss)
            << "\n";
  return 0;
}

struct EvalArgs {
  std::string checkpoint;
  std::string data;
  std::string trials;
  std::string out;
  uint64_t seed = 0;
};

int RunEval(const EvalArgs& args) {
  Checkpoint ckpt = LoadCheckpoint(args.checkpoint);
  Manifest manifest = Manifest::Read(fs::path(args.data) / "manifest.tsv");
  TrialList trials = ReadTrials(args.trials);
  EncoderParams theta_q{ckpt.theta_q};
  EvalResult result = Evaluate(ckpt.encoder, theta_q, ckpt.features, manifest, trials,
                               args.data, args.seed, /*n_segments=*/10, ckpt.segment_s);
  std::error_code ec;
  fs::create_directories(args.out, ec);
  if (ec) MOCOVOX_ERR(kIo) << "cannot create " << args.out << ": " << ec.message();
  WriteScoresCsv(fs::path(args.out) / "scores.csv", result.records);
  std::cout << FormatEerSummary(result.eer) << "\n";
  std::cout << "scores=" << (fs::path(args.out) / "scores.csv").string() << "\n";
  return 0;
}

struct PlotArgs {
  std::string scores;
  std::string out;
  int bins = 50;
};

int RunPlotScores(const PlotArgs& args) {
  std::vector<ScoreRecord> records = ReadScoresCsv(args.scores);
  if (records.empty()) MOCOVOX_ERR(kData) << "scores file " << args.scores << " is empty";
  std::vector<HistogramBin> bins = ScoreHistogram(records, args.bins);
  WriteHistogramCsv(args.out, bins);
  std::cout << "histogram=" << args.out << " bins=" << bins.size() << "\n";
  return 0;
}

struct SweepArgs {
  std::string config;
  std::string data;
  std::string sizes;
  std::string out;
  int64_t seed = -1;
};

int RunSweepQueue(const SweepArgs& args) {
  TrainConfig base = TrainConfig::FromFile(args.config);
  if (args.seed >= 0) base.seed = static_cast<uint64_t>(args.seed);
  std::vector<int64_t> sizes;
  for (const auto& item : SplitString(args.sizes, ','))
    sizes.push_back(ParseInt(item, "--sizes"));
  if (sizes.empty()) MOCOVOX_ERR(kConfig) << "--sizes must list at least one queue size";
  for (int64_t k : sizes)
    if (k < 1 || k % base.batch_size != 0)
      MOCOVOX_ERR(kConfig) << "queue size " << k << " is not a positive multiple of batch_size "
                           << base.batch_size;

  Manifest manifest = Manifest::Read(fs::path(args.data) / "manifest.tsv");
  TrialList trials = ReadTrials(fs::path(args.data) / "trials.tsv");
  std::error_code ec;
  fs::create_directories(args.out, ec);
  if (ec) MOCOVOX_ERR(kIo) << "cannot create " << args.out << ": " << ec.message();

  std::ofstream csv(fs::path(args.out) / "sweep.csv", std::ios::trunc);
  if (!csv) MOCOVOX_ERR(kIo) << "cannot open sweep.csv for writing";
  csv << "queue_size,eer\n";
  for (int64_t k : sizes) {
    TrainConfig cfg = base;
    cfg.queue_size = k;
    const fs::path run_dir = fs::path(args.out) / ("q" + std::to_string(k));
    TrainResult tr = Train(cfg, manifest, args.data, run_dir);
    Checkpoint ckpt = LoadCheckpoint(tr.checkpoint_path);
    EncoderParams theta_q{ckpt.theta_q};
    EvalResult er = Evaluate(ckpt.encoder, theta_q, ckpt.features, manifest, trials,
                             args.data, cfg.seed, 10, ckpt.segment_s);
    char row[64];
    std::snprintf(row, sizeof(row), "%lld,%.2f\n", static_cast<long long>(k),
                  100.0 * er.eer.eer);
    csv << row;
    csv.flush();
    std::cout << "queue_size=" << k << " " << FormatEerSummary(er.eer) << "\n";
  }
  std::cout << "sweep=" << (fs::path(args.out) / "sweep.csv").string() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"MoCoVox: momentum-contrast speaker representations at desk scale"};
  app.require_subcommand(1);

  SynthArgs synth_args;
  CLI::App* synth = app.add_subcommand("synth", "Generate a synthetic speaker corpus");
  synth->add_option("--speakers", synth_args.speakers, "Number of speakers")->required();
  synth->add_option("--utts", synth_args.utts, "Utterances per speaker")->required();
  synth->add_option("--out", synth_args.out, "Output corpus directory")->required();
  synth->add_option("--seed", synth_args.seed, "Corpus seed");
  synth->add_option("--trials", synth_args.trials, "Verification trial pairs to emit");
  synth->add_option("--duration", synth_args.duration_s, "Utterance duration in seconds");

  TrainArgs train_args;
  CLI::App* train = app.add_subcommand("train", "Train encoders on a corpus");
  train->add_option("--config", train_args.config, "Run config file")->required();
  train->add_option("--data", train_args.data, "Corpus directory")->required();
  train->add_option("--out", train_args.out, "Output directory")->required();
  train->add_option("--seed", train_args.seed, "Override the config seed");

  EvalArgs eval_args;
  CLI::App* eval = app.add_subcommand("eval", "Speaker-verification EER evaluation");
  eval->add_option("--checkpoint", eval_args.checkpoint, "MCVX1 checkpoint")->required();
  eval->add_option("--data", eval_args.data, "Corpus directory")->required();
  eval->add_option("--trials", eval_args.trials, "Trial list file")->required();
  eval->add_option("--out", eval_args.out, "Output directory for scores.csv")->required();
  eval->add_option("--seed", eval_args.seed, "Segment-sampling seed");

  PlotArgs plot_args;
  CLI::App* plot = app.add_subcommand("plot-scores", "Export a score histogram CSV");
  plot->add_option("--scores", plot_args.scores, "scores.csv from eval")->required();
  plot->add_option("--out", plot_args.out, "Histogram CSV path")->required();
  plot->add_option("--bins", plot_args.bins, "Number of bins");

  SweepArgs sweep_args;
  CLI::App* sweep = app.add_subcommand("sweep-queue", "Train/eval across queue sizes");
  sweep->add_option("--config", sweep_args.config, "Run config file")->required();
  sweep->add_option("--data", sweep_args.data, "Corpus directory")->required();
  sweep->add_option("--sizes", sweep_args.sizes, "Comma-separated queue sizes")->required();
  sweep->add_option("--out", sweep_args.out, "Output directory")->required();
  sweep->add_option("--seed", sweep_args.seed, "Override the config seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    if (synth->parsed()) return RunSynth(synth_args);
    if (train->parsed()) return RunTrain(train_args);
    if (eval->parsed()) return RunEval(eval_args);
    if (plot->parsed()) return RunPlotScores(plot_args);
    if (sweep->parsed()) return RunSweepQueue(sweep_args);
  } catch (const Error& e) {
    std::cerr << "mocovox: " << e.what() << "\n";
    return ExitCodeFor(e);
  } catch (const std::exception& e) {
    std::cerr << "mocovox: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
