// core/src/trainer.cc

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

#include "mocovox/trainer.h"

#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

namespace mocovox {

namespace {

constexpr double kAngularInitScale = 10.0;
constexpr double kAngularInitBias = -5.0;

std::vector<std::pair<std::string, std::string>> ParseKeyValueLines(
    std::istream& in, const std::string& origin, bool stop_at_blank) {
  std::vector<std::pair<std::string, std::string>> kv;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string t = TrimString(line);
    if (t.empty()) {
      if (stop_at_blank) break;
      continue;
    }
    if (t[0] == '#') continue;
    const size_t eq = t.find('=');
    if (eq == std::string::npos)
      MOCOVOX_ERR(kFormat) << origin << ":" << lineno << ": expected key=value, got '" << t
                           << "'";
    kv.emplace_back(TrimString(t.substr(0, eq)), TrimString(t.substr(eq + 1)));
  }
  return kv;
}

const char* PretextName(Pretext p) {
  switch (p) {
    case Pretext::kInstanceDiscrimination: return "instance_discrimination";
    case Pretext::kPrototypical: return "prototypical";
    case Pretext::kAngularPrototypical: return "angular_prototypical";
  }
  return "unknown";
}

Pretext PretextFromName(const std::string& s) {
  if (s == "instance_discrimination") return Pretext::kInstanceDiscrimination;
  if (s == "prototypical") return Pretext::kPrototypical;
  if (s == "angular_prototypical") return Pretext::kAngularPrototypical;
  MOCOVOX_ERR(kConfig) << "unknown pretext '" << s << "'";
}

const char* AugmentModeName(AugmentMode m) {
  switch (m) {
    case AugmentMode::kNone: return "none";
    case AugmentMode::kOneSegment: return "one_segment";
    case AugmentMode::kBothSegments: return "both_segments";
  }
  return "unknown";
}

AugmentMode AugmentModeFromName(const std::string& s) {
  if (s == "none") return AugmentMode::kNone;
  if (s == "one_segment") return AugmentMode::kOneSegment;
  if (s == "both_segments") return AugmentMode::kBothSegments;
  MOCOVOX_ERR(kConfig) << "unknown augment mode '" << s << "'";
}

bool ParseBool(const std::string& v, const std::string& key) {
  if (v == "0" || v == "false") return false;
  if (v == "1" || v == "true") return true;
  MOCOVOX_ERR(kFormat) << key << " must be 0|1|true|false, got '" << v << "'";
}

void WriteFloatsLe(std::string& out, const std::vector<double>& values) {
  for (double v : values) {
    const float f = static_cast<float>(v);
    uint32_t bits;
    std::memcpy(&bits, &f, sizeof(bits));
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((bits >> (8 * i)) & 0xff));
  }
}

std::vector<double> ReadFloatsLe(const std::string& bytes, size_t& offset, size_t count,
                                 const std::filesystem::path& path, const char* what) {
  if (offset + 4 * count > bytes.size())
    MOCOVOX_ERR(kFormat) << path << ": truncated " << what << " block at byte offset "
                         << offset << " (need " << 4 * count << " more bytes, have "
                         << bytes.size() - offset << ")";
  std::vector<double> out(count);
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data()) + offset;
  for (size_t i = 0; i < count; ++i) {
    uint32_t bits = static_cast<uint32_t>(p[4 * i]) | (static_cast<uint32_t>(p[4 * i + 1]) << 8) |
                    (static_cast<uint32_t>(p[4 * i + 2]) << 16) |
                    (static_cast<uint32_t>(p[4 * i + 3]) << 24);
    float f;
    std::memcpy(&f, &bits, sizeof(f));
    out[i] = static_cast<double>(f);
  }
  offset += 4 * count;
  return out;
}

// Pre-generated noise clips per kind, mirroring the fixed-corpus role MUSAN
// plays at full scale. Clips are long enough for any segment offset.
struct NoiseBank {
  std::vector<std::vector<Waveform>> clips;  // indexed by NoiseKind

  static NoiseBank Build(uint64_t seed, double clip_s, int per_kind, int sample_rate) {
    NoiseBank bank;
    bank.clips.assign(3, {});
    for (auto& v : bank.clips) v.resize(per_kind);
    ParallelFor(3 * per_kind, [&](int64_t idx) {
      const int kind = static_cast<int>(idx / per_kind);
      const int i = static_cast<int>(idx % per_kind);
      Rng rng(DeriveSeed(seed, "noisebank", kind, i));
      bank.clips[kind][i] =
          GenNoise(static_cast<NoiseKind>(kind), clip_s, rng, sample_rate);
    });
    return bank;
  }

  const Waveform& Pick(NoiseKind kind, Rng& rng) const {
    const auto& pool = clips[static_cast<int>(kind)];
    return pool[rng.UniformInt(static_cast<int64_t>(pool.size()))];
  }
};

Waveform AugmentSegment(const Waveform& clean, const SegmentAugment& plan,
                        const NoiseBank& bank, Rng& rng) {
  if (plan.use_noise) {
    const Waveform& clip = bank.Pick(plan.noise_kind, rng);
    const int64_t slack = clip.NumSamples() - clean.NumSamples();
    if (slack < 0)
      MOCOVOX_ERR(kState) << "noise bank clip shorter than the training segment";
    const int64_t start = slack > 0 ? rng.UniformInt(slack + 1) : 0;
    Waveform slice;
    slice.sample_rate = clip.sample_rate;
    slice.samples.assign(clip.samples.begin() + start,
                         clip.samples.begin() + start + clean.NumSamples());
    return MixNoise(clean, slice, plan.snr_db);
  }
  Waveform rir = GenRir(plan.rt60_s, rng, clean.sample_rate);
  return ApplyRir(clean, rir);
}

void AppendMetricsRow(std::ofstream& out, int64_t step, double loss, double pos_logit,
                      int64_t queue_filled, double lr) {
  out << step << ',' << FormatDouble(loss) << ',' << FormatDouble(pos_logit) << ','
      << queue_filled << ',' << FormatDouble(lr) << '\n';
}

}  // namespace

void TrainConfig::Validate() const {
  if (lr <= 0.0) MOCOVOX_ERR(kConfig) << "lr must be positive, got " << lr;
  if (!(sgd_momentum >= 0.0 && sgd_momentum < 1.0))
    MOCOVOX_ERR(kConfig) << "sgd_momentum must be in [0, 1), got " << sgd_momentum;
  if (weight_decay < 0.0) MOCOVOX_ERR(kConfig) << "weight_decay must be >= 0";
  if (batch_size < 1) MOCOVOX_ERR(kConfig) << "batch_size must be >= 1";
  if (epochs < 1) MOCOVOX_ERR(kConfig) << "epochs must be >= 1";
  if (queue_size < 1 || queue_size % batch_size != 0)
    MOCOVOX_ERR(kConfig) << "queue_size " << queue_size
                         << " must be a positive multiple of batch_size " << batch_size;
  if (!(m >= 0.0 && m <= 1.0)) MOCOVOX_ERR(kConfig) << "m must be in [0, 1], got " << m;
  if (tau <= 0.0) MOCOVOX_ERR(kConfig) << "tau must be positive, got " << tau;
  if (segment_s <= 0.0) MOCOVOX_ERR(kConfig) << "segment_s must be positive";
  augment.Validate();
  features.Validate();
  encoder.Validate();
  if (encoder.n_mels != features.n_mels)
    MOCOVOX_ERR(kConfig) << "encoder.n_mels " << encoder.n_mels << " != features.n_mels "
                         << features.n_mels;
}

std::string TrainConfig::Serialize() const {
  std::ostringstream os;
  os << "seed=" << seed << "\n";
  os << "lr=" << FormatDouble(lr) << "\n";
  os << "sgd_momentum=" << FormatDouble(sgd_momentum) << "\n";
  os << "weight_decay=" << FormatDouble(weight_decay) << "\n";
  os << "batch_size=" << batch_size << "\n";
  os << "epochs=" << epochs << "\n";
  os << "queue_size=" << queue_size << "\n";
  os << "m=" << FormatDouble(m) << "\n";
  os << "tau=" << FormatDouble(tau) << "\n";
  os << "segment_s=" << FormatDouble(segment_s) << "\n";
  os << "pretext=" << PretextName(pretext) << "\n";
  os << "augment.mode=" << AugmentModeName(augment.mode) << "\n";
  os << "augment.kind="
     << (augment.kind == AugmentKind::kNoiseOnly ? "noise_only" : "noise_or_rir") << "\n";
  os << "augment.noise_prob=" << FormatDouble(augment.noise_prob) << "\n";
  os << "augment.snr_db_lo=" << FormatDouble(augment.snr_db_lo) << "\n";
  os << "augment.snr_db_hi=" << FormatDouble(augment.snr_db_hi) << "\n";
  os << "augment.rt60_lo=" << FormatDouble(augment.rt60_lo) << "\n";
  os << "augment.rt60_hi=" << FormatDouble(augment.rt60_hi) << "\n";
  os << "augment.target="
     << (augment.one_segment_target == AugmentTarget::kKey ? "key" : "query") << "\n";
  os << "features.sample_rate=" << features.sample_rate << "\n";
  os << "features.win_len=" << FormatDouble(features.win_len) << "\n";
  os << "features.hop_len=" << FormatDouble(features.hop_len) << "\n";
  os << "features.n_mels=" << features.n_mels << "\n";
  os << "features.fft_size=" << features.fft_size << "\n";
  os << "features.fmin=" << FormatDouble(features.fmin) << "\n";
  os << "features.fmax=" << FormatDouble(features.fmax) << "\n";
  os << "features.log_floor=" << FormatDouble(features.log_floor) << "\n";
  os << "features.mean_var_norm=" << (features.mean_var_norm ? 1 : 0) << "\n";
  os << "encoder.embed_dim=" << encoder.embed_dim << "\n";
  auto join = [](const std::vector<int>& v) {
    std::string s;
    for (size_t i = 0; i < v.size(); ++i) {
      if (i) s += ',';
      s += std::to_string(v[i]);
    }
    return s;
  };
  os << "encoder.conv_channels=" << join(encoder.conv_channels) << "\n";
  os << "encoder.kernel_sizes=" << join(encoder.kernel_sizes) << "\n";
  os << "encoder.normalization="
     << (encoder.normalization == NormKind::kNone ? "none" : "per_channel_instance") << "\n";
  return os.str();
}

TrainConfig TrainConfig::Parse(std::istream& in, const std::string& origin) {
  TrainConfig cfg;
  auto parse_int_list = [](const std::string& v, const char* what) {
    std::vector<int> out;
    if (TrimString(v).empty()) return out;
    for (const auto& item : SplitString(v, ','))
      out.push_back(static_cast<int>(ParseInt(item, what)));
    return out;
  };
  for (const auto& [key, value] : ParseKeyValueLines(in, origin, /*stop_at_blank=*/false)) {
    if (key == "seed") {
      cfg.seed = static_cast<uint64_t>(ParseInt(value, key));
    } else if (key == "lr") {
      cfg.lr = ParseDouble(value, key);
    } else if (key == "sgd_momentum") {
      cfg.sgd_momentum = ParseDouble(value, key);
    } else if (key == "weight_decay") {
      cfg.weight_decay = ParseDouble(value, key);
    } else if (key == "batch_size") {
      cfg.batch_size = ParseInt(value, key);
    } else if (key == "epochs") {
      cfg.epochs = ParseInt(value, key);
    } else if (key == "queue_size") {
      cfg.queue_size = ParseInt(value, key);
    } else if (key == "m") {
      cfg.m = ParseDouble(value, key);
    } else if (key == "tau") {
      cfg.tau = ParseDouble(value, key);
    } else if (key == "segment_s") {
      cfg.segment_s = ParseDouble(value, key);
    } else if (key == "pretext") {
      cfg.pretext = PretextFromName(value);
    } else if (key == "augment.mode") {
      cfg.augment.mode = AugmentModeFromName(value);
    } else if (key == "augment.kind") {
      if (value == "noise_only") {
        cfg.augment.kind = AugmentKind::kNoiseOnly;
      } else if (value == "noise_or_rir") {
        cfg.augment.kind = AugmentKind::kNoiseOrRir;
      } else {
        MOCOVOX_ERR(kConfig) << "unknown augment kind '" << value << "'";
      }
    } else if (key == "augment.noise_prob") {
      cfg.augment.noise_prob = ParseDouble(value, key);
    } else if (key == "augment.snr_db_lo") {
      cfg.augment.snr_db_lo = ParseDouble(value, key);
    } else if (key == "augment.snr_db_hi") {
      cfg.augment.snr_db_hi = ParseDouble(value, key);
    } else if (key == "augment.rt60_lo") {
      cfg.augment.rt60_lo = ParseDouble(value, key);
    } else if (key == "augment.rt60_hi") {
      cfg.augment.rt60_hi = ParseDouble(value, key);
    } else if (key == "augment.target") {
      if (value == "key") {
        cfg.augment.one_segment_target = AugmentTarget::kKey;
      } else if (value == "query") {
        cfg.augment.one_segment_target = AugmentTarget::kQuery;
      } else {
        MOCOVOX_ERR(kConfig) << "augment.target must be key|query, got '" << value << "'";
      }
    } else if (key == "features.sample_rate") {
      cfg.features.sample_rate = static_cast<int>(ParseInt(value, key));
    } else if (key == "features.win_len") {
      cfg.features.win_len = ParseDouble(value, key);
    } else if (key == "features.hop_len") {
      cfg.features.hop_len = ParseDouble(value, key);
    } else if (key == "features.n_mels") {
      cfg.features.n_mels = static_cast<int>(ParseInt(value, key));
    } else if (key == "features.fft_size") {
      cfg.features.fft_size = static_cast<int>(ParseInt(value, key));
    } else if (key == "features.fmin") {
      cfg.features.fmin = ParseDouble(value, key);
    } else if (key == "features.fmax") {
      cfg.features.fmax = ParseDouble(value, key);
    } else if (key == "features.log_floor") {
      cfg.features.log_floor = ParseDouble(value, key);
    } else if (key == "features.mean_var_norm") {
      cfg.features.mean_var_norm = ParseBool(value, key);
    } else if (key == "encoder.embed_dim") {
      cfg.encoder.embed_dim = static_cast<int>(ParseInt(value, key));
    } else if (key == "encoder.conv_channels") {
      cfg.encoder.conv_channels = parse_int_list(value, "encoder.conv_channels");
    } else if (key == "encoder.kernel_sizes") {
      cfg.encoder.kernel_sizes = parse_int_list(value, "encoder.kernel_sizes");
    } else if (key == "encoder.normalization") {
      if (value == "none") {
        cfg.encoder.normalization = NormKind::kNone;
      } else if (value == "per_channel_instance") {
        cfg.encoder.normalization = NormKind::kPerChannelInstance;
      } else {
        MOCOVOX_ERR(kConfig) << "unknown encoder normalization '" << value << "'";
      }
    } else {
      MOCOVOX_ERR(kConfig) << origin << ": unknown config key '" << key << "'";
    }
  }
  // The encoder always sees exactly the configured mel bins.
  cfg.encoder.n_mels = cfg.features.n_mels;
  cfg.Validate();
  return cfg;
}

TrainConfig TrainConfig::FromFile(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) MOCOVOX_ERR(kIo) << "cannot open config file " << path;
  return Parse(in, path.string());
}

PairBatch SamplePairBatch(const std::vector<UtteranceRecord>& records,
                          const std::vector<Waveform>& audio, int64_t batch_size,
                          double segment_s, Rng& rng) {
  const int64_t n = static_cast<int64_t>(records.size());
  if (n == 0) MOCOVOX_ERR(kData) << "dev split is empty";
  if (audio.size() != records.size())
    MOCOVOX_ERR(kShape) << "audio cache has " << audio.size() << " entries for " << n
                        << " records";
  if (batch_size > n)
    MOCOVOX_ERR(kConfig) << "batch of " << batch_size << " distinct utterances exceeds the "
                         << n << " dev utterances";

  // Partial Fisher-Yates for B distinct indices.
  std::vector<int64_t> idx(n);
  for (int64_t i = 0; i < n; ++i) idx[i] = i;
  PairBatch batch;
  for (int64_t i = 0; i < batch_size; ++i) {
    const int64_t j = i + rng.UniformInt(n - i);
    std::swap(idx[i], idx[j]);
    const int64_t u = idx[i];
    const Waveform& utt = audio[u];
    const int64_t seg = std::llround(segment_s * utt.sample_rate);
    if (seg > utt.NumSamples())
      MOCOVOX_ERR(kData) << "utterance " << records[u].utterance_id << " of "
                         << utt.NumSamples() << " samples is shorter than one " << segment_s
                         << " s segment";
    const int64_t span = utt.NumSamples() - seg + 1;
    const int64_t start_q = rng.UniformInt(span);
    const int64_t start_k = rng.UniformInt(span);
    batch.utterance_indices.push_back(u);
    batch.utterance_ids.push_back(records[u].utterance_id);
    batch.query_segments.push_back(ChopSegment(utt, start_q, segment_s));
    batch.key_segments.push_back(ChopSegment(utt, start_k, segment_s));
  }
  return batch;
}

void SaveCheckpoint(const Checkpoint& ckpt, const std::filesystem::path& path) {
  std::string out;
  out += Checkpoint::kMagic;
  out += "\n";
  out += ckpt.encoder.Serialize();
  std::ostringstream os;
  os << "features.sample_rate=" << ckpt.features.sample_rate << "\n";
  os << "features.win_len=" << FormatDouble(ckpt.features.win_len) << "\n";
  os << "features.hop_len=" << FormatDouble(ckpt.features.hop_len) << "\n";
  os << "features.n_mels=" << ckpt.features.n_mels << "\n";
  os << "features.fft_size=" << ckpt.features.fft_size << "\n";
  os << "features.fmin=" << FormatDouble(ckpt.features.fmin) << "\n";
  os << "features.fmax=" << FormatDouble(ckpt.features.fmax) << "\n";
  os << "features.log_floor=" << FormatDouble(ckpt.features.log_floor) << "\n";
  os << "features.mean_var_norm=" << (ckpt.features.mean_var_norm ? 1 : 0) << "\n";
  os << "segment_s=" << FormatDouble(ckpt.segment_s) << "\n";
  os << "m=" << FormatDouble(ckpt.m) << "\n";
  os << "tau=" << FormatDouble(ckpt.tau) << "\n";
  os << "theta_len=" << ckpt.theta_q.size() << "\n";
  os << "queue_capacity=" << ckpt.queue_buffer.rows << "\n";
  os << "queue_dim=" << ckpt.queue_buffer.cols << "\n";
  os << "queue_ptr=" << ckpt.queue_ptr << "\n";
  os << "queue_filled=" << ckpt.queue_filled << "\n";
  out += os.str();
  out += "\n";

  if (ckpt.theta_q.size() != ckpt.theta_k.size())
    MOCOVOX_ERR(kShape) << "theta_q and theta_k sizes differ";
  const int64_t expected = NumParams(ckpt.encoder);
  if (static_cast<int64_t>(ckpt.theta_q.size()) != expected)
    MOCOVOX_ERR(kShape) << "theta has " << ckpt.theta_q.size() << " values, encoder config needs "
                        << expected;
  WriteFloatsLe(out, ckpt.theta_q);
  WriteFloatsLe(out, ckpt.theta_k);
  WriteFloatsLe(out, ckpt.queue_buffer.data);

  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) MOCOVOX_ERR(kIo) << "cannot open " << path << " for writing";
  f.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!f) MOCOVOX_ERR(kIo) << "short write to " << path;
}

Checkpoint LoadCheckpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) MOCOVOX_ERR(kIo) << "cannot open checkpoint " << path;
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

  // Header: magic line, then key=value lines up to a blank line.
  size_t offset = 0;
  auto next_line = [&]() -> std::string {
    const size_t nl = bytes.find('\n', offset);
    if (nl == std::string::npos)
      MOCOVOX_ERR(kFormat) << path << ": header not terminated at byte offset " << offset;
    std::string line = bytes.substr(offset, nl - offset);
    offset = nl + 1;
    return line;
  };
  if (next_line() != Checkpoint::kMagic)
    MOCOVOX_ERR(kFormat) << path << ": bad magic, not an MCVX1 checkpoint";

  Checkpoint ckpt;
  std::vector<std::pair<std::string, std::string>> encoder_kv;
  int64_t theta_len = -1, queue_capacity = -1, queue_dim = -1;
  for (;;) {
    std::string line = next_line();
    if (TrimString(line).empty()) break;
    const size_t eq = line.find('=');
    if (eq == std::string::npos)
      MOCOVOX_ERR(kFormat) << path << ": malformed header line '" << line << "'";
    const std::string key = TrimString(line.substr(0, eq));
    const std::string value = TrimString(line.substr(eq + 1));
    if (key == "features.sample_rate") {
      ckpt.features.sample_rate = static_cast<int>(ParseInt(value, key));
    } else if (key == "features.win_len") {
      ckpt.features.win_len = ParseDouble(value, key);
    } else if (key == "features.hop_len") {
      ckpt.features.hop_len = ParseDouble(value, key);
    } else if (key == "features.n_mels") {
      ckpt.features.n_mels = static_cast<int>(ParseInt(value, key));
    } else if (key == "features.fft_size") {
      ckpt.features.fft_size = static_cast<int>(ParseInt(value, key));
    } else if (key == "features.fmin") {
      ckpt.features.fmin = ParseDouble(value, key);
    } else if (key == "features.fmax") {
      ckpt.features.fmax = ParseDouble(value, key);
    } else if (key == "features.log_floor") {
      ckpt.features.log_floor = ParseDouble(value, key);
    } else if (key == "features.mean_var_norm") {
      ckpt.features.mean_var_norm = ParseBool(value, key);
    } else if (key == "segment_s") {
      ckpt.segment_s = ParseDouble(value, key);
    } else if (key == "m") {
      ckpt.m = ParseDouble(value, key);
    } else if (key == "tau") {
      ckpt.tau = ParseDouble(value, key);
    } else if (key == "theta_len") {
      theta_len = ParseInt(value, key);
    } else if (key == "queue_capacity") {
      queue_capacity = ParseInt(value, key);
    } else if (key == "queue_dim") {
      queue_dim = ParseInt(value, key);
    } else if (key == "queue_ptr") {
      ckpt.queue_ptr = ParseInt(value, key);
    } else if (key == "queue_filled") {
      ckpt.queue_filled = ParseInt(value, key);
    } else {
      encoder_kv.emplace_back(key, value);
    }
  }
  ckpt.encoder = EncoderConfig::Deserialize(encoder_kv);
  if (theta_len < 0 || queue_capacity < 0 || queue_dim < 0)
    MOCOVOX_ERR(kFormat) << path << ": header missing theta_len/queue_capacity/queue_dim";
  const int64_t expected = NumParams(ckpt.encoder);
  if (theta_len != expected)
    MOCOVOX_ERR(kFormat) << path << ": theta_len " << theta_len
                         << " does not match encoder layout size " << expected;
  if (queue_dim != ckpt.encoder.embed_dim)
    MOCOVOX_ERR(kFormat) << path << ": queue_dim " << queue_dim << " != embed_dim "
                         << ckpt.encoder.embed_dim;

  ckpt.theta_q = ReadFloatsLe(bytes, offset, static_cast<size_t>(theta_len), path, "theta_q");
  ckpt.theta_k = ReadFloatsLe(bytes, offset, static_cast<size_t>(theta_len), path, "theta_k");
  ckpt.queue_buffer = Matrix(queue_capacity, queue_dim);
  ckpt.queue_buffer.data =
      ReadFloatsLe(bytes, offset, static_cast<size_t>(queue_capacity * queue_dim), path,
                   "queue buffer");
  if (offset != bytes.size())
    MOCOVOX_ERR(kFormat) << path << ": " << bytes.size() - offset
                         << " trailing bytes after queue block";
  if (ckpt.queue_ptr < 0 || ckpt.queue_ptr >= queue_capacity || ckpt.queue_filled < 0 ||
      ckpt.queue_filled > queue_capacity)
    MOCOVOX_ERR(kFormat) << path << ": queue_ptr/queue_filled out of range";
  return ckpt;
}

void RequireSameEncoderConfig(const EncoderConfig& expected, const EncoderConfig& actual) {
  if (expected.n_mels != actual.n_mels)
    MOCOVOX_ERR(kConfig) << "encoder config mismatch in n_mels: " << expected.n_mels << " vs "
                         << actual.n_mels;
  if (expected.embed_dim != actual.embed_dim)
    MOCOVOX_ERR(kConfig) << "encoder config mismatch in embed_dim: " << expected.embed_dim
                         << " vs " << actual.embed_dim;
  if (expected.conv_channels != actual.conv_channels)
    MOCOVOX_ERR(kConfig) << "encoder config mismatch in conv_channels";
  if (expected.kernel_sizes != actual.kernel_sizes)
    MOCOVOX_ERR(kConfig) << "encoder config mismatch in kernel_sizes";
  if (expected.normalization != actual.normalization)
    MOCOVOX_ERR(kConfig) << "encoder config mismatch in normalization";
}

TrainResult Train(const TrainConfig& cfg, const Manifest& manifest,
                  const std::filesystem::path& data_dir,
                  const std::filesystem::path& out_dir) {
  cfg.Validate();
  const auto dev = manifest.Split("dev");
  if (dev.empty()) MOCOVOX_ERR(kData) << "manifest has no dev utterances";

  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) MOCOVOX_ERR(kIo) << "cannot create " << out_dir << ": " << ec.message();

  // Load every dev waveform once up front.
  std::vector<Waveform> audio(dev.size());
  ParallelFor(static_cast<int64_t>(dev.size()),
              [&](int64_t i) { audio[i] = ReadWav(data_dir / dev[i].path); });

  Rng init_rng(DeriveSeed(cfg.seed, "init"));
  EncoderParams init = InitParams(cfg.encoder, init_rng);
  MoCoState state(cfg.encoder, std::move(init), cfg.queue_size, cfg.batch_size, cfg.m,
                  cfg.tau);
  OptState opt;
  SgdConfig sgd{cfg.lr, cfg.sgd_momentum, cfg.weight_decay};

  auto make_checkpoint = [&]() {
    Checkpoint ckpt;
    ckpt.encoder = cfg.encoder;
    ckpt.features = cfg.features;
    ckpt.segment_s = cfg.segment_s;
    ckpt.m = cfg.m;
    ckpt.tau = cfg.tau;
    ckpt.theta_q = state.theta_q.theta;
    ckpt.theta_k = state.theta_k.theta;
    ckpt.queue_ptr = state.queue.ptr();
    ckpt.queue_filled = state.queue.filled();
    ckpt.queue_buffer = state.queue.buffer();
    return ckpt;
  };

  TrainResult result;
  result.init_checkpoint_path = out_dir / "checkpoint_init.mcvx";
  result.checkpoint_path = out_dir / "checkpoint.mcvx";
  result.metrics_path = out_dir / "metrics.csv";
  SaveCheckpoint(make_checkpoint(), result.init_checkpoint_path);

  NoiseBank bank;
  if (cfg.augment.mode != AugmentMode::kNone)
    bank = NoiseBank::Build(cfg.seed, cfg.segment_s + 0.7, 4, cfg.features.sample_rate);

  std::ofstream metrics(result.metrics_path, std::ios::trunc);
  if (!metrics) MOCOVOX_ERR(kIo) << "cannot open " << result.metrics_path << " for writing";
  metrics << "step,loss,pos_logit_mean,queue_filled,lr\n";

  Rng rng(DeriveSeed(cfg.seed, "train"));
  const int64_t steps_per_epoch =
      (static_cast<int64_t>(dev.size()) + cfg.batch_size - 1) / cfg.batch_size;
  const int64_t total_steps = steps_per_epoch * cfg.epochs;

  // Angular-prototypical scale/offset, trained alongside theta_q.
  double ap_w = kAngularInitScale, ap_b = kAngularInitBias;
  double ap_w_vel = 0.0, ap_b_vel = 0.0;

  // Prepares (augments + feature-extracts) one sampled batch. Per-segment
  // seeds make the result independent of worker scheduling.
  auto prepare = [&](const PairBatch& pairs, int64_t step,
                     std::vector<LogMelSegment>& q_feats,
                     std::vector<LogMelSegment>& k_feats) {
    const int64_t B = static_cast<int64_t>(pairs.query_segments.size());
    q_feats.resize(B);
    k_feats.resize(B);
    ParallelFor(2 * B, [&](int64_t slot) {
      const int64_t p = slot / 2;
      const int side = static_cast<int>(slot % 2);  // 0 = query, 1 = key
      const std::string& utt_id = pairs.utterance_ids[p];
      const Waveform* seg = side == 0 ? &pairs.query_segments[p] : &pairs.key_segments[p];
      Waveform augmented;
      if (cfg.augment.mode != AugmentMode::kNone) {
        Rng decide_rng(DeriveSeed(cfg.seed, "aug", HashStr(0, utt_id), step));
        const AugmentDecision decision = SampleDecision(cfg.augment, decide_rng);
        if (decision.apply[side]) {
          Rng seg_rng(DeriveSeed(cfg.seed, "augseg", HashStr(0, utt_id), step, side));
          augmented = AugmentSegment(*seg, decision.segment[side], bank, seg_rng);
          seg = &augmented;
        }
      }
      LogMelSegment feat = LogMel(*seg, cfg.features);
      if (side == 0) {
        q_feats[p] = std::move(feat);
      } else {
        k_feats[p] = std::move(feat);
      }
    });
  };

  // Seed the queue with one key batch so step 1 has negatives; no parameter
  // update happens here.
  {
    PairBatch pairs = SamplePairBatch(dev, audio, cfg.batch_size, cfg.segment_s, rng);
    std::vector<LogMelSegment> q_feats, k_feats;
    prepare(pairs, /*step=*/0, q_feats, k_feats);
    BootstrapQueue(state, k_feats);
  }

  double final_loss = 0.0;
  for (int64_t step = 1; step <= total_steps; ++step) {
    PairBatch pairs = SamplePairBatch(dev, audio, cfg.batch_size, cfg.segment_s, rng);
    std::vector<LogMelSegment> q_feats, k_feats;
    prepare(pairs, step, q_feats, k_feats);

    double loss = 0.0, pos_logit = 0.0;
    try {
      if (cfg.pretext == Pretext::kInstanceDiscrimination) {
        StepMetrics sm = MoCoStep(state, q_feats, k_feats, opt, sgd);
        loss = sm.loss;
        pos_logit = sm.pos_logit_mean;
      } else {
        ForwardTape tape_q, tape_s;
        Matrix q = Forward(cfg.encoder, state.theta_q, q_feats, &tape_q);
        Matrix s = Forward(cfg.encoder, state.theta_q, k_feats, &tape_s);
        Matrix grad_q, grad_s;
        if (cfg.pretext == Pretext::kPrototypical) {
          PrototypicalResult r = PrototypicalLoss(q, s);
          loss = r.loss;
          pos_logit = r.diag_logit_mean;
          grad_q = std::move(r.grad_queries);
          grad_s = std::move(r.grad_supports);
        } else {
          AngularPrototypicalResult r = AngularPrototypicalLoss(q, s, ap_w, ap_b);
          loss = r.loss;
          pos_logit = r.diag_logit_mean;
          grad_q = std::move(r.grad_queries);
          grad_s = std::move(r.grad_supports);
          ap_w_vel = cfg.sgd_momentum * ap_w_vel + r.grad_w;
          ap_b_vel = cfg.sgd_momentum * ap_b_vel + r.grad_b;
          ap_w = std::max(ap_w - cfg.lr * ap_w_vel, kAngularScaleMin);
          ap_b -= cfg.lr * ap_b_vel;
        }
        if (!std::isfinite(loss)) MOCOVOX_ERR(kNumeric) << "non-finite pretext loss";
        std::vector<double> grad = Backward(cfg.encoder, state.theta_q, tape_q, grad_q);
        std::vector<double> grad2 = Backward(cfg.encoder, state.theta_q, tape_s, grad_s);
        for (size_t i = 0; i < grad.size(); ++i) grad[i] += grad2[i];
        SgdStep(state.theta_q.theta, grad, opt, sgd);
        MomentumUpdate(state.theta_k, state.theta_q, cfg.m);
        state.queue.Enqueue(Forward(cfg.encoder, state.theta_k, k_feats, nullptr));
      }
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::kNumeric) {
        std::string msg = e.what();
        const std::string prefix = "numeric error: ";
        if (msg.rfind(prefix, 0) == 0) msg = msg.substr(prefix.size());
        MOCOVOX_ERR(kNumeric) << msg << " (training step " << step << ")";
      }
      throw;
    }

    AppendMetricsRow(metrics, step, loss, pos_logit, state.queue.filled(), cfg.lr);
    final_loss = loss;
    if (step % steps_per_epoch == 0) {
      metrics.flush();
      SaveCheckpoint(make_checkpoint(), out_dir / "checkpoint_last.mcvx");
    }
  }
  metrics.close();
  if (!metrics) MOCOVOX_ERR(kIo) << "failed writing " << result.metrics_path;

  SaveCheckpoint(make_checkpoint(), result.checkpoint_path);
  result.steps = total_steps;
  result.final_loss = final_loss;
  return result;
}

}  // namespace mocovox
