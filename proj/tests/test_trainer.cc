// tests/test_trainer.cc

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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "mocovox/trainer.h"
#include "testing_util.h"

using namespace mocovox;
namespace fs = std::filesystem;

namespace {

fs::path TempDir(const char* name) {
  fs::path dir = fs::temp_directory_path() / "mocovox_tests" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string ReadBytes(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in);
  return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

// Small but real training setup shared by the smoke tests.
TrainConfig SmokeConfig() {
  TrainConfig cfg;
  cfg.batch_size = 4;
  cfg.queue_size = 16;
  cfg.epochs = 8;  // 15 dev utterances -> 4 steps/epoch -> 32 steps
  cfg.lr = 0.05;
  cfg.seed = 321;
  cfg.encoder.conv_channels = {4, 8};
  cfg.encoder.kernel_sizes = {3, 3};
  cfg.encoder.embed_dim = 32;
  return cfg;
}

const fs::path& SmokeCorpus() {
  static fs::path dir = [] {
    fs::path d = TempDir("trainer_corpus");
    CorpusConfig cc;
    cc.n_speakers = 6;
    cc.utts_per_speaker = 3;
    cc.seed = 2025;
    BuildCorpus(cc, d);
    return d;
  }();
  return dir;
}

}  // namespace

TEST_CASE("SgdStep recursion") {
  OptState opt;
  SgdConfig cfg{0.03, 0.0, 0.0};
  std::vector<double> theta = {1.0};
  SgdStep(theta, {0.0}, opt, cfg);
  CHECK(theta[0] == 1.0);
  SgdStep(theta, {1.0}, opt, cfg);
  CHECK(theta[0] == doctest::Approx(0.97).epsilon(1e-15));

  // Two momentum steps: drops of 0.1 then 0.19.
  OptState opt2;
  SgdConfig cfg2{0.1, 0.9, 0.0};
  std::vector<double> x = {5.0};
  SgdStep(x, {1.0}, opt2, cfg2);
  CHECK(x[0] == doctest::Approx(4.9).epsilon(1e-15));
  SgdStep(x, {1.0}, opt2, cfg2);
  CHECK(x[0] == doctest::Approx(4.71).epsilon(1e-15));

  // Property: matches the hand recursion exactly over a random run.
  Rng rng(10);
  OptState opt3;
  SgdConfig cfg3{0.02, 0.8, 1e-3};
  std::vector<double> theta3 = {rng.Uniform(-1, 1), rng.Uniform(-1, 1)};
  std::vector<double> ref = theta3, vel = {0.0, 0.0};
  for (int step = 0; step < 25; ++step) {
    std::vector<double> grad = {rng.Uniform(-1, 1), rng.Uniform(-1, 1)};
    SgdStep(theta3, grad, opt3, cfg3);
    for (int i = 0; i < 2; ++i) {
      const double g = grad[i] + cfg3.weight_decay * ref[i];
      vel[i] = cfg3.momentum * vel[i] + g;
      ref[i] -= cfg3.lr * vel[i];
    }
    CHECK(theta3 == ref);
  }

  std::vector<double> short_grad = {1.0};
  CHECK_THROWS_AS(SgdStep(theta3, short_grad, opt3, cfg3), Error);
}

TEST_CASE("TrainConfig round trip, comments and unknown keys") {
  TrainConfig cfg = SmokeConfig();
  cfg.pretext = Pretext::kAngularPrototypical;
  cfg.augment.mode = AugmentMode::kBothSegments;
  cfg.augment.noise_prob = 0.6;
  cfg.features.mean_var_norm = true;
  cfg.encoder.normalization = NormKind::kPerChannelInstance;

  std::istringstream in("# comment line\n\n" + cfg.Serialize());
  TrainConfig back = TrainConfig::Parse(in, "inline");
  CHECK(back.Serialize() == cfg.Serialize());

  std::istringstream bad("no_such_key=1\n");
  CHECK_THROWS_WITH_AS(TrainConfig::Parse(bad, "inline"), doctest::Contains("unknown"),
                       Error);

  TrainConfig mismatch = SmokeConfig();
  mismatch.queue_size = 10;  // not a multiple of 4
  CHECK_THROWS_WITH_AS(mismatch.Validate(), doctest::Contains("multiple"), Error);
}

TEST_CASE("SamplePairBatch segment sizes, distinctness and replay") {
  std::vector<UtteranceRecord> records(10);
  std::vector<Waveform> audio(10);
  for (int i = 0; i < 10; ++i) {
    records[i].utterance_id = "u" + std::to_string(i);
    audio[i].sample_rate = 16000;
    audio[i].samples.assign(64000, 0.01 * (i + 1));
  }
  Rng r1(9), r2(9);
  PairBatch a = SamplePairBatch(records, audio, 6, 1.8, r1);
  PairBatch b = SamplePairBatch(records, audio, 6, 1.8, r2);

  std::set<int64_t> seen;
  for (size_t i = 0; i < a.utterance_indices.size(); ++i) {
    CHECK(a.query_segments[i].NumSamples() == 28800);
    CHECK(a.key_segments[i].NumSamples() == 28800);
    seen.insert(a.utterance_indices[i]);
  }
  CHECK(seen.size() == 6);  // no utterance twice in one batch
  CHECK(a.utterance_indices == b.utterance_indices);
  for (size_t i = 0; i < a.query_segments.size(); ++i)
    CHECK(a.query_segments[i].samples == b.query_segments[i].samples);

  Rng r3(9);
  CHECK_THROWS_AS(SamplePairBatch(records, audio, 11, 1.8, r3), Error);
}

TEST_CASE("Checkpoint round trip is byte-exact; corruption is caught") {
  const fs::path dir = TempDir("ckpt");
  EncoderConfig ec;
  ec.n_mels = 6;
  ec.embed_dim = 4;
  ec.conv_channels = {2};
  ec.kernel_sizes = {3};
  Rng rng(12);
  EncoderParams params = InitParams(ec, rng);

  Checkpoint ckpt;
  ckpt.encoder = ec;
  ckpt.features.n_mels = 6;
  ckpt.theta_q = params.theta;
  ckpt.theta_k = params.theta;
  ckpt.queue_buffer = Matrix(8, 4);
  for (auto& v : ckpt.queue_buffer.data) v = rng.Uniform(-1, 1);
  ckpt.queue_ptr = 4;
  ckpt.queue_filled = 8;

  const fs::path p1 = dir / "a.mcvx";
  SaveCheckpoint(ckpt, p1);
  Checkpoint loaded = LoadCheckpoint(p1);
  CHECK(loaded.encoder == ec);
  CHECK(loaded.queue_ptr == 4);
  CHECK(loaded.queue_filled == 8);
  CHECK(loaded.features.n_mels == 6);
  const fs::path p2 = dir / "b.mcvx";
  SaveCheckpoint(loaded, p2);
  CHECK(ReadBytes(p1) == ReadBytes(p2));

  // Truncation -> format error with an offset, not a crash.
  std::string bytes = ReadBytes(p1);
  {
    std::ofstream out(dir / "trunc.mcvx", std::ios::binary);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size() - 40));
  }
  CHECK_THROWS_WITH_AS(LoadCheckpoint(dir / "trunc.mcvx"), doctest::Contains("truncated"),
                       Error);

  {
    std::ofstream out(dir / "garbage.mcvx", std::ios::binary);
    out << "NOTMAGIC\nwhatever\n";
  }
  CHECK_THROWS_WITH_AS(LoadCheckpoint(dir / "garbage.mcvx"), doctest::Contains("magic"),
                       Error);

  EncoderConfig other = ec;
  other.embed_dim = 8;
  CHECK_THROWS_WITH_AS(RequireSameEncoderConfig(other, loaded.encoder),
                       doctest::Contains("embed_dim"), Error);
}

TEST_CASE("Train smoke run: row count, loss decrease, determinism") {
  const fs::path& corpus = SmokeCorpus();
  Manifest manifest = Manifest::Read(corpus / "manifest.tsv");
  TrainConfig cfg = SmokeConfig();

  const fs::path out1 = TempDir("train_run1");
  TrainResult r1 = Train(cfg, manifest, corpus, out1);
  CHECK(r1.steps == 32);
  CHECK(fs::exists(r1.checkpoint_path));
  CHECK(fs::exists(r1.init_checkpoint_path));

  std::ifstream metrics(r1.metrics_path);
  std::string header;
  std::getline(metrics, header);
  CHECK(header == "step,loss,pos_logit_mean,queue_filled,lr");
  std::vector<double> losses;
  std::string line;
  while (std::getline(metrics, line)) {
    if (line.empty()) continue;
    auto fields = SplitString(line, ',');
    REQUIRE(fields.size() == 5);
    losses.push_back(ParseDouble(fields[1], "loss"));
  }
  REQUIRE(static_cast<int64_t>(losses.size()) == r1.steps);

  double early = 0.0, late = 0.0;
  for (int i = 0; i < 10; ++i) {
    early += losses[i];
    late += losses[losses.size() - 10 + i];
  }
  CHECK(late / 10.0 < early / 10.0);

  // Same seed twice: bit-identical metrics and checkpoints.
  const fs::path out2 = TempDir("train_run2");
  TrainResult r2 = Train(cfg, manifest, corpus, out2);
  CHECK(ReadBytes(r1.metrics_path) == ReadBytes(r2.metrics_path));
  CHECK(ReadBytes(r1.checkpoint_path) == ReadBytes(r2.checkpoint_path));
}

TEST_CASE("Train with both-segment N|R augmentation completes") {
  const fs::path& corpus = SmokeCorpus();
  Manifest manifest = Manifest::Read(corpus / "manifest.tsv");
  TrainConfig cfg = SmokeConfig();
  cfg.epochs = 1;
  cfg.augment.mode = AugmentMode::kBothSegments;
  cfg.augment.kind = AugmentKind::kNoiseOrRir;
  const fs::path out = TempDir("train_aug");
  TrainResult r = Train(cfg, manifest, corpus, out);
  CHECK(r.steps == 4);
  CHECK(std::isfinite(r.final_loss));
}

TEST_CASE("Prototypical and angular pretext steps run and log") {
  const fs::path& corpus = SmokeCorpus();
  Manifest manifest = Manifest::Read(corpus / "manifest.tsv");
  for (Pretext p : {Pretext::kPrototypical, Pretext::kAngularPrototypical}) {
    TrainConfig cfg = SmokeConfig();
    cfg.pretext = p;
    cfg.epochs = 2;
    const fs::path out = TempDir(p == Pretext::kPrototypical ? "train_proto" : "train_ap");
    TrainResult r = Train(cfg, manifest, corpus, out);
    CHECK(r.steps == 8);
    CHECK(std::isfinite(r.final_loss));
    // Queue is maintained for parity in pretext modes too.
    Checkpoint ckpt = LoadCheckpoint(r.checkpoint_path);
    CHECK(ckpt.queue_filled > 0);
  }
}

TEST_CASE("Exploding learning rate raises a numeric error naming the step") {
  const fs::path& corpus = SmokeCorpus();
  Manifest manifest = Manifest::Read(corpus / "manifest.tsv");
  TrainConfig cfg = SmokeConfig();
  cfg.lr = 1e6;
  const fs::path out = TempDir("train_nan");
  try {
    Train(cfg, manifest, corpus, out);
    FAIL("expected a numeric error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kNumeric);
    CHECK(std::string(e.what()).find("step") != std::string::npos);
  }
}
