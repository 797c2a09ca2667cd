// core/src/encoder.cc

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

#include "mocovox/encoder.h"

#include <cmath>
#include <cstring>

namespace mocovox {

namespace {

constexpr double kInstanceNormEps = 1e-5;

struct Dims {
  int c = 0, t = 0, m = 0;
  int64_t Count() const { return static_cast<int64_t>(c) * t * m; }
};

// Plane-shift convolution with same padding: for each (dt, dm) kernel tap,
// accumulate a scalar-weighted shifted plane over the valid rectangle. The
// inner loop runs over contiguous mel columns.
void ConvForward(const double* in, Dims din, const double* w, const double* bias,
                 double* out, int c_out, int k) {
  const int p = k / 2;
  const int T = din.t, M = din.m;
  const int64_t plane = static_cast<int64_t>(T) * M;
  for (int co = 0; co < c_out; ++co) {
    double* outp = out + co * plane;
    const double b = bias[co];
    for (int64_t i = 0; i < plane; ++i) outp[i] = b;
    for (int ci = 0; ci < din.c; ++ci) {
      const double* inp = in + ci * plane;
      const double* wrow = w + (static_cast<int64_t>(co) * din.c + ci) * k * k;
      for (int dt = 0; dt < k; ++dt) {
        const int st = dt - p;
        const int t_lo = std::max(0, -st), t_hi = T - std::max(0, st);
        for (int dm = 0; dm < k; ++dm) {
          const int sm = dm - p;
          const int m_lo = std::max(0, -sm), m_hi = M - std::max(0, sm);
          if (t_lo >= t_hi || m_lo >= m_hi) continue;
          const double wv = wrow[dt * k + dm];
          for (int t = t_lo; t < t_hi; ++t) {
            double* orow = outp + static_cast<int64_t>(t) * M;
            const double* irow = inp + static_cast<int64_t>(t + st) * M + sm;
            for (int m = m_lo; m < m_hi; ++m) orow[m] += wv * irow[m];
          }
        }
      }
    }
  }
}

// Gradients of the convolution: weight gradient is a plane dot product per
// tap, input gradient the transposed plane accumulation.
void ConvBackward(const double* in, Dims din, const double* w, const double* dout,
                  int c_out, int k, double* dw, double* dbias, double* din_grad) {
  const int p = k / 2;
  const int T = din.t, M = din.m;
  const int64_t plane = static_cast<int64_t>(T) * M;
  for (int co = 0; co < c_out; ++co) {
    const double* doutp = dout + co * plane;
    double acc_b = 0.0;
    for (int64_t i = 0; i < plane; ++i) acc_b += doutp[i];
    dbias[co] += acc_b;
    for (int ci = 0; ci < din.c; ++ci) {
      const double* inp = in + ci * plane;
      double* ding = din_grad ? din_grad + ci * plane : nullptr;
      const int64_t wbase = (static_cast<int64_t>(co) * din.c + ci) * k * k;
      for (int dt = 0; dt < k; ++dt) {
        const int st = dt - p;
        const int t_lo = std::max(0, -st), t_hi = T - std::max(0, st);
        for (int dm = 0; dm < k; ++dm) {
          const int sm = dm - p;
          const int m_lo = std::max(0, -sm), m_hi = M - std::max(0, sm);
          if (t_lo >= t_hi || m_lo >= m_hi) continue;
          const double wv = w[wbase + dt * k + dm];
          double acc_w = 0.0;
          for (int t = t_lo; t < t_hi; ++t) {
            const double* drow = doutp + static_cast<int64_t>(t) * M;
            const double* irow = inp + static_cast<int64_t>(t + st) * M + sm;
            double* grow = ding ? ding + static_cast<int64_t>(t + st) * M + sm : nullptr;
            for (int m = m_lo; m < m_hi; ++m) {
              acc_w += drow[m] * irow[m];
              if (grow) grow[m] += wv * drow[m];
            }
          }
          dw[wbase + dt * k + dm] += acc_w;
        }
      }
    }
  }
}

// ReLU fused into the 2x2 mean pool; `in` holds pre-activations.
void ReluMeanPool2x2(const double* in, Dims din, double* out, Dims dout) {
  const int64_t in_plane = static_cast<int64_t>(din.t) * din.m;
  const int64_t out_plane = static_cast<int64_t>(dout.t) * dout.m;
  auto relu = [](double v) { return v > 0.0 ? v : 0.0; };
  for (int c = 0; c < din.c; ++c) {
    const double* ip = in + c * in_plane;
    double* op = out + c * out_plane;
    for (int t = 0; t < dout.t; ++t) {
      const double* r0 = ip + static_cast<int64_t>(2 * t) * din.m;
      const double* r1 = r0 + din.m;
      for (int m = 0; m < dout.m; ++m)
        op[static_cast<int64_t>(t) * dout.m + m] =
            0.25 * (relu(r0[2 * m]) + relu(r0[2 * m + 1]) + relu(r1[2 * m]) +
                    relu(r1[2 * m + 1]));
    }
  }
}

// Backward of pool-of-ReLU: spread the gradient to the 2x2 cells whose
// pre-activation was positive; everything else (including the rows/columns
// dropped by an odd input size) gets zero.
void ReluMeanPool2x2Backward(const double* dout, Dims dout_dims, const double* pre,
                             double* din, Dims din_dims) {
  const int64_t in_plane = static_cast<int64_t>(din_dims.t) * din_dims.m;
  const int64_t out_plane = static_cast<int64_t>(dout_dims.t) * dout_dims.m;
  std::memset(din, 0, sizeof(double) * din_dims.Count());
  for (int c = 0; c < din_dims.c; ++c) {
    const double* op = dout + c * out_plane;
    const double* pp = pre + c * in_plane;
    double* ip = din + c * in_plane;
    for (int t = 0; t < dout_dims.t; ++t) {
      const int64_t row0 = static_cast<int64_t>(2 * t) * din_dims.m;
      const int64_t row1 = row0 + din_dims.m;
      for (int m = 0; m < dout_dims.m; ++m) {
        const double g = 0.25 * op[static_cast<int64_t>(t) * dout_dims.m + m];
        if (pp[row0 + 2 * m] > 0.0) ip[row0 + 2 * m] += g;
        if (pp[row0 + 2 * m + 1] > 0.0) ip[row0 + 2 * m + 1] += g;
        if (pp[row1 + 2 * m] > 0.0) ip[row1 + 2 * m] += g;
        if (pp[row1 + 2 * m + 1] > 0.0) ip[row1 + 2 * m + 1] += g;
      }
    }
  }
}

std::vector<Dims> BlockInputDims(const EncoderConfig& cfg, int frames) {
  std::vector<Dims> dims;
  Dims d{1, frames, cfg.n_mels};
  for (int b = 0; b < cfg.NumBlocks(); ++b) {
    dims.push_back(d);
    if (d.t < 2 || d.m < 2)
      MOCOVOX_ERR(kShape) << "block " << b << " input " << d.t << "x" << d.m
                          << " too small for 2x2 pooling";
    d = Dims{cfg.conv_channels[b], d.t / 2, d.m / 2};
  }
  dims.push_back(d);  // output of the conv stack
  return dims;
}

}  // namespace

void EncoderConfig::Validate() const {
  if (n_mels < 1) MOCOVOX_ERR(kConfig) << "n_mels must be >= 1, got " << n_mels;
  if (embed_dim < 2) MOCOVOX_ERR(kConfig) << "embed_dim must be >= 2, got " << embed_dim;
  if (conv_channels.size() != kernel_sizes.size())
    MOCOVOX_ERR(kConfig) << "conv_channels (" << conv_channels.size() << ") and kernel_sizes ("
                         << kernel_sizes.size() << ") must have equal length";
  for (size_t b = 0; b < conv_channels.size(); ++b) {
    if (conv_channels[b] < 1)
      MOCOVOX_ERR(kConfig) << "block " << b << ": channels must be >= 1";
    if (kernel_sizes[b] < 1 || kernel_sizes[b] % 2 == 0)
      MOCOVOX_ERR(kConfig) << "block " << b << ": kernel size must be odd and >= 1, got "
                           << kernel_sizes[b];
  }
  if (MelOutDim() < 1)
    MOCOVOX_ERR(kConfig) << "mel axis vanishes after " << NumBlocks() << " pooling stages";
}

int EncoderConfig::MelOutDim() const {
  int m = n_mels;
  for (int b = 0; b < NumBlocks(); ++b) m /= 2;
  return m;
}

int EncoderConfig::FeatureDim() const {
  if (NumBlocks() == 0) return n_mels;
  return conv_channels.back() * MelOutDim();
}

std::string EncoderConfig::Serialize() const {
  std::ostringstream os;
  os << "n_mels=" << n_mels << "\n";
  os << "embed_dim=" << embed_dim << "\n";
  auto join = [](const std::vector<int>& v) {
    std::string s;
    for (size_t i = 0; i < v.size(); ++i) {
      if (i) s += ',';
      s += std::to_string(v[i]);
    }
    return s;
  };
  os << "conv_channels=" << join(conv_channels) << "\n";
  os << "kernel_sizes=" << join(kernel_sizes) << "\n";
  os << "normalization="
     << (normalization == NormKind::kNone ? "none" : "per_channel_instance") << "\n";
  return os.str();
}

EncoderConfig EncoderConfig::Deserialize(
    const std::vector<std::pair<std::string, std::string>>& kv) {
  EncoderConfig cfg;
  cfg.conv_channels.clear();
  cfg.kernel_sizes.clear();
  auto parse_list = [](const std::string& v, const char* what) {
    std::vector<int> out;
    if (TrimString(v).empty()) return out;
    for (const auto& item : SplitString(v, ','))
      out.push_back(static_cast<int>(ParseInt(item, what)));
    return out;
  };
  for (const auto& [key, value] : kv) {
    if (key == "n_mels") {
      cfg.n_mels = static_cast<int>(ParseInt(value, key));
    } else if (key == "embed_dim") {
      cfg.embed_dim = static_cast<int>(ParseInt(value, key));
    } else if (key == "conv_channels") {
      cfg.conv_channels = parse_list(value, "conv_channels");
    } else if (key == "kernel_sizes") {
      cfg.kernel_sizes = parse_list(value, "kernel_sizes");
    } else if (key == "normalization") {
      if (value == "none") {
        cfg.normalization = NormKind::kNone;
      } else if (value == "per_channel_instance") {
        cfg.normalization = NormKind::kPerChannelInstance;
      } else {
        MOCOVOX_ERR(kFormat) << "unknown normalization '" << value << "'";
      }
    } else {
      MOCOVOX_ERR(kFormat) << "unknown encoder config key '" << key << "'";
    }
  }
  cfg.Validate();
  return cfg;
}

ParamLayout MakeLayout(const EncoderConfig& cfg) {
  cfg.Validate();
  ParamLayout layout;
  int c_in = 1;
  for (int b = 0; b < cfg.NumBlocks(); ++b) {
    const int c_out = cfg.conv_channels[b];
    const int k = cfg.kernel_sizes[b];
    const std::string base = "conv" + std::to_string(b);
    layout.entries.push_back(
        {base + ".weight", layout.total, static_cast<int64_t>(c_out) * c_in * k * k});
    layout.total += layout.entries.back().size;
    layout.entries.push_back({base + ".bias", layout.total, c_out});
    layout.total += c_out;
    c_in = c_out;
  }
  layout.entries.push_back(
      {"linear.weight", layout.total,
       static_cast<int64_t>(cfg.embed_dim) * cfg.FeatureDim()});
  layout.total += layout.entries.back().size;
  layout.entries.push_back({"linear.bias", layout.total, cfg.embed_dim});
  layout.total += cfg.embed_dim;
  return layout;
}

int64_t NumParams(const EncoderConfig& cfg) { return MakeLayout(cfg).total; }

EncoderParams InitParams(const EncoderConfig& cfg, Rng& rng) {
  const ParamLayout layout = MakeLayout(cfg);
  EncoderParams params;
  params.theta.assign(layout.total, 0.0);
  int c_in = 1;
  for (int b = 0; b < cfg.NumBlocks(); ++b) {
    const int c_out = cfg.conv_channels[b];
    const int k = cfg.kernel_sizes[b];
    const double fan_in = static_cast<double>(c_in) * k * k;
    const double fan_out = static_cast<double>(c_out) * k * k;
    const double a = std::sqrt(6.0 / (fan_in + fan_out));
    const LayoutEntry& entry = layout.entries[2 * b];
    for (int64_t i = 0; i < entry.size; ++i)
      params.theta[entry.offset + i] = rng.Uniform(-a, a);
    c_in = c_out;
  }
  const LayoutEntry& lw = layout.entries[layout.entries.size() - 2];
  const double a =
      std::sqrt(6.0 / (static_cast<double>(cfg.FeatureDim()) + cfg.embed_dim));
  for (int64_t i = 0; i < lw.size; ++i) params.theta[lw.offset + i] = rng.Uniform(-a, a);
  return params;
}

uint64_t ParamsHash(const EncoderParams& params) {
  return FnvHash(params.theta.data(), params.theta.size() * sizeof(double));
}

std::vector<double> L2NormalizeBackward(const std::vector<double>& z,
                                        const std::vector<double>& upstream) {
  if (z.size() != upstream.size())
    MOCOVOX_ERR(kShape) << "L2NormalizeBackward size mismatch: " << z.size() << " vs "
                        << upstream.size();
  double norm_sq = 0.0;
  for (double v : z) norm_sq += v * v;
  const double norm = std::sqrt(norm_sq);
  if (norm < 1e-12) MOCOVOX_ERR(kNumeric) << "cannot backprop through a zero-norm embedding";
  double dot = 0.0;
  for (size_t i = 0; i < z.size(); ++i) dot += upstream[i] * z[i] / norm;
  std::vector<double> out(z.size());
  for (size_t i = 0; i < z.size(); ++i) out[i] = (upstream[i] - dot * z[i] / norm) / norm;
  return out;
}

Matrix Forward(const EncoderConfig& cfg, const EncoderParams& params,
               const std::vector<LogMelSegment>& batch, ForwardTape* tape) {
  cfg.Validate();
  if (batch.empty()) MOCOVOX_ERR(kShape) << "Forward called with an empty batch";
  const ParamLayout layout = MakeLayout(cfg);
  if (static_cast<int64_t>(params.theta.size()) != layout.total)
    MOCOVOX_ERR(kShape) << "theta has " << params.theta.size() << " values, layout needs "
                        << layout.total;
  const int64_t frames = batch[0].values.rows;
  for (size_t i = 0; i < batch.size(); ++i) {
    if (batch[i].values.cols != cfg.n_mels)
      MOCOVOX_ERR(kShape) << "segment " << i << " has " << batch[i].values.cols
                          << " mel bins, encoder expects " << cfg.n_mels;
    if (batch[i].values.rows != frames)
      MOCOVOX_ERR(kShape) << "segment " << i << " has " << batch[i].values.rows
                          << " frames, batch leader has " << frames;
  }
  const auto dims = BlockInputDims(cfg, static_cast<int>(frames));
  const int64_t B = static_cast<int64_t>(batch.size());
  Matrix out(B, cfg.embed_dim);

  if (tape) {
    tape->params_hash = ParamsHash(params);
    tape->batch = B;
    tape->frames = frames;
    tape->samples.assign(B, SampleTape{});
  }

  const double* theta = params.theta.data();
  ParallelFor(B, [&](int64_t i) {
    SampleTape local;
    SampleTape& st = tape ? tape->samples[i] : local;
    st.block_inputs.resize(cfg.NumBlocks());
    st.block_preact.resize(cfg.NumBlocks());
    st.block_inv_std.resize(cfg.NumBlocks());

    std::vector<double> act(batch[i].values.data);
    for (int b = 0; b < cfg.NumBlocks(); ++b) {
      const Dims din = dims[b];
      const int c_out = cfg.conv_channels[b];
      const int k = cfg.kernel_sizes[b];
      const double* w = theta + layout.entries[2 * b].offset;
      const double* bias = theta + layout.entries[2 * b + 1].offset;
      st.block_inputs[b] = std::move(act);

      std::vector<double> conv(static_cast<int64_t>(c_out) * din.t * din.m);
      ConvForward(st.block_inputs[b].data(), din, w, bias, conv.data(), c_out, k);

      if (cfg.normalization == NormKind::kPerChannelInstance) {
        const int64_t plane = static_cast<int64_t>(din.t) * din.m;
        st.block_inv_std[b].resize(c_out);
        for (int c = 0; c < c_out; ++c) {
          double* p = conv.data() + c * plane;
          double mean = 0.0;
          for (int64_t j = 0; j < plane; ++j) mean += p[j];
          mean /= static_cast<double>(plane);
          double var = 0.0;
          for (int64_t j = 0; j < plane; ++j) var += (p[j] - mean) * (p[j] - mean);
          var /= static_cast<double>(plane);
          const double inv_std = 1.0 / std::sqrt(var + kInstanceNormEps);
          st.block_inv_std[b][c] = inv_std;
          for (int64_t j = 0; j < plane; ++j) p[j] = (p[j] - mean) * inv_std;
        }
      }
      st.block_preact[b] = std::move(conv);

      const Dims pooled{c_out, din.t / 2, din.m / 2};
      act.assign(pooled.Count(), 0.0);
      ReluMeanPool2x2(st.block_preact[b].data(), Dims{c_out, din.t, din.m}, act.data(),
                      pooled);
    }

    // Temporal mean pooling: features[c * M + m] = mean_t act[c][t][m].
    const Dims dlast = dims[cfg.NumBlocks()];
    std::vector<double> feat(static_cast<int64_t>(dlast.c) * dlast.m, 0.0);
    const int64_t plane = static_cast<int64_t>(dlast.t) * dlast.m;
    for (int c = 0; c < dlast.c; ++c) {
      for (int t = 0; t < dlast.t; ++t) {
        const double* row = act.data() + c * plane + static_cast<int64_t>(t) * dlast.m;
        for (int m = 0; m < dlast.m; ++m) feat[static_cast<int64_t>(c) * dlast.m + m] += row[m];
      }
    }
    const double inv_t = 1.0 / static_cast<double>(dlast.t);
    for (double& v : feat) v *= inv_t;
    st.features = std::move(feat);

    const int64_t F = cfg.FeatureDim();
    const double* lw = theta + layout.entries[layout.entries.size() - 2].offset;
    const double* lb = theta + layout.entries[layout.entries.size() - 1].offset;
    std::vector<double> z(cfg.embed_dim);
    for (int e = 0; e < cfg.embed_dim; ++e) {
      double acc = lb[e];
      const double* wrow = lw + static_cast<int64_t>(e) * F;
      for (int64_t f = 0; f < F; ++f) acc += wrow[f] * st.features[f];
      z[e] = acc;
    }
    st.pre_norm = z;
    double norm_sq = 0.0;
    for (double v : z) norm_sq += v * v;
    const double norm = std::sqrt(norm_sq);
    if (!std::isfinite(norm))
      MOCOVOX_ERR(kNumeric) << "non-finite embedding for batch sample " << i
                            << " (diverged parameters?)";
    if (norm < 1e-12)
      MOCOVOX_ERR(kNumeric) << "zero-norm embedding for batch sample " << i;
    st.z_norm = norm;
    for (int e = 0; e < cfg.embed_dim; ++e) out(i, e) = z[e] / norm;
  });
  return out;
}

std::vector<double> Backward(const EncoderConfig& cfg, const EncoderParams& params,
                             const ForwardTape& tape, const Matrix& grad_embeddings) {
  cfg.Validate();
  const ParamLayout layout = MakeLayout(cfg);
  if (static_cast<int64_t>(params.theta.size()) != layout.total)
    MOCOVOX_ERR(kShape) << "theta has " << params.theta.size() << " values, layout needs "
                        << layout.total;
  if (tape.params_hash != ParamsHash(params))
    MOCOVOX_ERR(kState) << "stale tape: parameters changed since the forward pass";
  if (grad_embeddings.rows != tape.batch || grad_embeddings.cols != cfg.embed_dim)
    MOCOVOX_ERR(kShape) << "grad_embeddings is " << grad_embeddings.rows << "x"
                        << grad_embeddings.cols << ", expected " << tape.batch << "x"
                        << cfg.embed_dim;

  const auto dims = BlockInputDims(cfg, static_cast<int>(tape.frames));
  const int64_t B = tape.batch;
  const double* theta = params.theta.data();

  // Per-sample gradients, reduced in index order afterwards, so results are
  // identical for every MOCOVOX_THREADS setting.
  std::vector<std::vector<double>> per_sample(B);
  ParallelFor(B, [&](int64_t i) {
    const SampleTape& st = tape.samples[i];
    std::vector<double> grad(layout.total, 0.0);

    std::vector<double> upstream(grad_embeddings.Row(i),
                                 grad_embeddings.Row(i) + cfg.embed_dim);
    std::vector<double> dz = L2NormalizeBackward(st.pre_norm, upstream);

    const int64_t F = cfg.FeatureDim();
    const double* lw = theta + layout.entries[layout.entries.size() - 2].offset;
    double* dlw = grad.data() + layout.entries[layout.entries.size() - 2].offset;
    double* dlb = grad.data() + layout.entries[layout.entries.size() - 1].offset;
    std::vector<double> dfeat(F, 0.0);
    for (int e = 0; e < cfg.embed_dim; ++e) {
      const double g = dz[e];
      dlb[e] += g;
      const double* wrow = lw + static_cast<int64_t>(e) * F;
      double* dwrow = dlw + static_cast<int64_t>(e) * F;
      for (int64_t f = 0; f < F; ++f) {
        dwrow[f] += g * st.features[f];
        dfeat[f] += g * wrow[f];
      }
    }

    // Temporal mean backward.
    const Dims dlast = dims[cfg.NumBlocks()];
    std::vector<double> dact(dlast.Count());
    const double inv_t = 1.0 / static_cast<double>(dlast.t);
    const int64_t plane_last = static_cast<int64_t>(dlast.t) * dlast.m;
    for (int c = 0; c < dlast.c; ++c)
      for (int t = 0; t < dlast.t; ++t)
        for (int m = 0; m < dlast.m; ++m)
          dact[c * plane_last + static_cast<int64_t>(t) * dlast.m + m] =
              dfeat[static_cast<int64_t>(c) * dlast.m + m] * inv_t;

    for (int b = cfg.NumBlocks() - 1; b >= 0; --b) {
      const Dims din = dims[b];
      const int c_out = cfg.conv_channels[b];
      const int k = cfg.kernel_sizes[b];
      const Dims conv_dims{c_out, din.t, din.m};
      const Dims pooled{c_out, din.t / 2, din.m / 2};

      const std::vector<double>& pre = st.block_preact[b];
      std::vector<double> drelu(conv_dims.Count());
      ReluMeanPool2x2Backward(dact.data(), pooled, pre.data(), drelu.data(), conv_dims);

      if (cfg.normalization == NormKind::kPerChannelInstance) {
        // y = (x - mean) * inv_std; recorded preact holds y. With g the
        // upstream grad: dx = inv_std * (g - mean(g) - y * mean(g * y)).
        const int64_t plane = static_cast<int64_t>(din.t) * din.m;
        for (int c = 0; c < c_out; ++c) {
          double* g = drelu.data() + c * plane;
          const double* y = pre.data() + c * plane;
          const double inv_std = st.block_inv_std[b][c];
          double mean_g = 0.0, mean_gy = 0.0;
          for (int64_t j = 0; j < plane; ++j) {
            mean_g += g[j];
            mean_gy += g[j] * y[j];
          }
          mean_g /= static_cast<double>(plane);
          mean_gy /= static_cast<double>(plane);
          for (int64_t j = 0; j < plane; ++j)
            g[j] = inv_std * (g[j] - mean_g - y[j] * mean_gy);
        }
      }

      double* dw = grad.data() + layout.entries[2 * b].offset;
      double* dbias = grad.data() + layout.entries[2 * b + 1].offset;
      const double* w = theta + layout.entries[2 * b].offset;
      std::vector<double> din_grad;
      double* din_ptr = nullptr;
      if (b > 0) {
        din_grad.assign(din.Count(), 0.0);
        din_ptr = din_grad.data();
      }
      ConvBackward(st.block_inputs[b].data(), din, w, drelu.data(), c_out, k, dw, dbias,
                   din_ptr);
      dact = std::move(din_grad);
    }
    per_sample[i] = std::move(grad);
  });

  std::vector<double> total(layout.total, 0.0);
  for (int64_t i = 0; i < B; ++i) {
    const std::vector<double>& g = per_sample[i];
    for (int64_t j = 0; j < layout.total; ++j) total[j] += g[j];
  }
  return total;
}

}  // namespace mocovox
