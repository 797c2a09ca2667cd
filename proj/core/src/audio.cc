// core/src/audio.cc

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

#include "mocovox/audio.h"

#include <cmath>
#include <cstring>
#include <fstream>

#include "mocovox/common.h"

namespace mocovox {

namespace {

void PutU32(std::string& out, uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void PutU16(std::string& out, uint16_t v) {
  out.push_back(static_cast<char>(v & 0xff));
  out.push_back(static_cast<char>((v >> 8) & 0xff));
}

uint32_t GetU32(const unsigned char* p) {
  return static_cast<uint32_t>(p[0]) | (static_cast<uint32_t>(p[1]) << 8) |
         (static_cast<uint32_t>(p[2]) << 16) | (static_cast<uint32_t>(p[3]) << 24);
}

uint16_t GetU16(const unsigned char* p) {
  return static_cast<uint16_t>(p[0] | (p[1] << 8));
}

}  // namespace

void ValidateWaveform(const Waveform& w, const char* what) {
  if (w.sample_rate <= 0)
    MOCOVOX_ERR(kData) << what << ": sample_rate must be positive, got " << w.sample_rate;
  for (double s : w.samples) {
    if (!std::isfinite(s))
      MOCOVOX_ERR(kData) << what << ": non-finite sample value";
  }
}

double Rms(const Waveform& w) {
  if (w.samples.empty()) return 0.0;
  double acc = 0.0;
  for (double s : w.samples) acc += s * s;
  return std::sqrt(acc / static_cast<double>(w.samples.size()));
}

double PeakAbs(const Waveform& w) {
  double peak = 0.0;
  for (double s : w.samples) peak = std::max(peak, std::fabs(s));
  return peak;
}

Waveform ReadWav(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) MOCOVOX_ERR(kIo) << "cannot open WAV file " << path;
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
  const size_t n = bytes.size();
  if (n < 12 || std::memcmp(p, "RIFF", 4) != 0 || std::memcmp(p + 8, "WAVE", 4) != 0)
    MOCOVOX_ERR(kFormat) << path << ": not a RIFF/WAVE file";

  int sample_rate = 0;
  int channels = 0;
  int bits = 0;
  bool have_fmt = false;
  Waveform w;
  size_t off = 12;
  while (off + 8 <= n) {
    const char* id = bytes.data() + off;
    uint32_t size = GetU32(p + off + 4);
    size_t body = off + 8;
    if (body + size > n)
      MOCOVOX_ERR(kFormat) << path << ": chunk '" << std::string(id, 4)
                           << "' overruns file at offset " << off;
    if (std::memcmp(id, "fmt ", 4) == 0) {
      if (size < 16) MOCOVOX_ERR(kFormat) << path << ": fmt chunk too small";
      uint16_t format = GetU16(p + body);
      channels = GetU16(p + body + 2);
      sample_rate = static_cast<int>(GetU32(p + body + 4));
      bits = GetU16(p + body + 14);
      if (format != 1)
        MOCOVOX_ERR(kFormat) << path << ": only PCM supported, got format tag " << format;
      have_fmt = true;
    } else if (std::memcmp(id, "data", 4) == 0) {
      if (!have_fmt) MOCOVOX_ERR(kFormat) << path << ": data chunk before fmt";
      if (channels != 1)
        MOCOVOX_ERR(kFormat) << path << ": expected mono, got " << channels << " channels";
      if (bits != 16)
        MOCOVOX_ERR(kFormat) << path << ": expected 16-bit samples, got " << bits;
      size_t count = size / 2;
      w.samples.resize(count);
      for (size_t i = 0; i < count; ++i) {
        int16_t v = static_cast<int16_t>(GetU16(p + body + 2 * i));
        w.samples[i] = static_cast<double>(v) / 32768.0;
      }
      w.sample_rate = sample_rate;
      return w;
    }
    off = body + size + (size & 1);
  }
  MOCOVOX_ERR(kFormat) << path << ": no data chunk found";
}

void WriteWav(const std::filesystem::path& path, const Waveform& w) {
  ValidateWaveform(w, "WriteWav");
  const uint32_t n = static_cast<uint32_t>(w.samples.size());
  std::string out;
  out.reserve(44 + 2 * n);
  out += "RIFF";
  PutU32(out, 36 + 2 * n);
  out += "WAVEfmt ";
  PutU32(out, 16);
  PutU16(out, 1);  // PCM
  PutU16(out, 1);  // mono
  PutU32(out, static_cast<uint32_t>(w.sample_rate));
  PutU32(out, static_cast<uint32_t>(w.sample_rate) * 2);
  PutU16(out, 2);
  PutU16(out, 16);
  out += "data";
  PutU32(out, 2 * n);
  for (double s : w.samples) {
    double scaled = std::nearbyint(s * 32767.0);
    if (scaled > 32767.0) scaled = 32767.0;
    if (scaled < -32768.0) scaled = -32768.0;
    PutU16(out, static_cast<uint16_t>(static_cast<int16_t>(scaled)));
  }
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) MOCOVOX_ERR(kIo) << "cannot open " << path << " for writing";
  f.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!f) MOCOVOX_ERR(kIo) << "short write to " << path;
}

}  // namespace mocovox
