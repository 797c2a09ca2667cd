// core/include/mocovox/common.h

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

#ifndef MOCOVOX_COMMON_H_
#define MOCOVOX_COMMON_H_

#include <cstdint>
#include <functional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace mocovox {

// Every error the library raises carries one of these kinds; the CLI maps
// them onto its exit-code contract (config -> 2, io -> 3, numeric -> 4).
enum class ErrorKind {
  kConfig,
  kIo,
  kNumeric,
  kData,
  kFormat,
  kShape,
  kContract,
  kState,
  kBounds,
};

const char* ErrorKindName(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& msg)
      : std::runtime_error(std::string(ErrorKindName(kind)) + " error: " + msg),
        kind_(kind) {}
  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

namespace internal {

// Stream collector that throws when it goes out of scope, so call sites can
// write `MOCOVOX_ERR(kConfig) << "bad value " << x;`.
class ErrorStream {
 public:
  explicit ErrorStream(ErrorKind kind) : kind_(kind) {}
  [[noreturn]] ~ErrorStream() noexcept(false) { throw Error(kind_, os_.str()); }
  template <typename T>
  ErrorStream& operator<<(const T& v) {
    os_ << v;
    return *this;
  }

 private:
  ErrorKind kind_;
  std::ostringstream os_;
};

}  // namespace internal

#define MOCOVOX_ERR(kind) ::mocovox::internal::ErrorStream(::mocovox::ErrorKind::kind)

// Dense row-major matrix of doubles. Small by design: the project needs
// contiguous storage and row pointers, nothing more.
struct Matrix {
  int64_t rows = 0;
  int64_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(int64_t r, int64_t c) : rows(r), cols(c), data(r * c, 0.0) {}

  double& operator()(int64_t r, int64_t c) { return data[r * cols + c]; }
  double operator()(int64_t r, int64_t c) const { return data[r * cols + c]; }
  double* Row(int64_t r) { return data.data() + r * cols; }
  const double* Row(int64_t r) const { return data.data() + r * cols; }
  bool Empty() const { return rows == 0 || cols == 0; }
};

// Non-owning read view over a row-major block; convertible from Matrix.
struct ConstMatrixView {
  const double* data = nullptr;
  int64_t rows = 0;
  int64_t cols = 0;

  ConstMatrixView() = default;
  ConstMatrixView(const double* d, int64_t r, int64_t c) : data(d), rows(r), cols(c) {}
  ConstMatrixView(const Matrix& m) : data(m.data.data()), rows(m.rows), cols(m.cols) {}
  const double* Row(int64_t r) const { return data + r * cols; }
};

// FNV-1a over raw bytes; the project's one hashing primitive (seed
// derivation, config fingerprints, tape/params matching).
uint64_t FnvHash(const void* bytes, size_t n, uint64_t seed = 0xcbf29ce484222325ull);
uint64_t HashU64(uint64_t h, uint64_t v);
uint64_t HashStr(uint64_t h, std::string_view s);

// Worker-pool width from MOCOVOX_THREADS. Unset or 0 means single-threaded
// deterministic mode. Values are capped at hardware concurrency.
int WorkerThreads();

// Runs fn(i) for i in [0, n). Items must be independent and write disjoint
// slots; outputs are then identical for every thread count.
void ParallelFor(int64_t n, const std::function<void(int64_t)>& fn);

// Text helpers shared by the manifest/config/CSV readers.
std::vector<std::string> SplitString(std::string_view s, char delim);
std::string TrimString(std::string_view s);
double ParseDouble(std::string_view s, std::string_view what);
int64_t ParseInt(std::string_view s, std::string_view what);

// Shortest round-trippable decimal for a double; keeps CSV output
// bit-reproducible without printing 17 digits for simple values.
std::string FormatDouble(double v);

}  // namespace mocovox

#endif  // MOCOVOX_COMMON_H_
