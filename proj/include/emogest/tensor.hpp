// emogest/tensor.hpp

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace emogest {

// Dense row-major matrix of doubles. All model math runs in double so that
// finite-difference gradient checks have headroom.
class Tensor {
 public:
  Tensor() = default;
  Tensor(int rows, int cols, double fill = 0.0);

  static Tensor zeros(int rows, int cols) { return Tensor(rows, cols, 0.0); }
  static Tensor full(int rows, int cols, double v) { return Tensor(rows, cols, v); }
  static Tensor identity(int n);
  static Tensor from_row(const std::vector<double>& v);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  std::int64_t size() const { return static_cast<std::int64_t>(rows_) * cols_; }
  bool empty() const { return rows_ == 0 || cols_ == 0; }

  double& at(int r, int c) { return data_[static_cast<std::size_t>(r) * cols_ + c]; }
  double at(int r, int c) const { return data_[static_cast<std::size_t>(r) * cols_ + c]; }
  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }
  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }

  bool same_shape(const Tensor& o) const { return rows_ == o.rows_ && cols_ == o.cols_; }
  bool all_finite() const;
  double min() const;
  double max() const;
  double sum() const;
  double mean() const;

  Tensor transposed() const;
  Tensor reshaped(int rows, int cols) const;
  Tensor row(int r) const;

  // In-place helpers used by optimizer and accumulation paths.
  void fill(double v);
  void add_scaled(const Tensor& o, double s);  // this += s * o

  friend Tensor operator+(const Tensor& a, const Tensor& b);
  friend Tensor operator-(const Tensor& a, const Tensor& b);
  friend Tensor operator*(const Tensor& a, double s);
  friend Tensor hadamard(const Tensor& a, const Tensor& b);
  friend Tensor matmul(const Tensor& a, const Tensor& b);
  friend Tensor matmul_nt(const Tensor& a, const Tensor& b);  // a * b^T
  friend Tensor matmul_tn(const Tensor& a, const Tensor& b);  // a^T * b

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<double> data_;
};

Tensor operator+(const Tensor& a, const Tensor& b);
Tensor operator-(const Tensor& a, const Tensor& b);
Tensor operator*(const Tensor& a, double s);
Tensor hadamard(const Tensor& a, const Tensor& b);
Tensor matmul(const Tensor& a, const Tensor& b);
Tensor matmul_nt(const Tensor& a, const Tensor& b);
Tensor matmul_tn(const Tensor& a, const Tensor& b);

// Deterministic random source. The engine is std::mt19937_64 (bit-exact by
// the standard); distributions are hand-rolled so streams are identical
// across platforms and library versions.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0);

  std::uint64_t next_u64();
  double uniform();                       // [0, 1)
  double uniform(double lo, double hi);   // [lo, hi)
  int uniform_int(int n);                 // {0, ..., n-1}, n >= 1
  double normal();                        // N(0, 1) via Box-Muller
  Tensor normal_tensor(int rows, int cols, double std = 1.0);
  Tensor uniform_tensor(int rows, int cols, double lo, double hi);

 private:
  std::mt19937_64 engine_;
};

}  // namespace emogest
