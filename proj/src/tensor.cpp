// src/tensor.cpp

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

#include "emogest/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "emogest/errors.hpp"

namespace emogest {

Tensor::Tensor(int rows, int cols, double fill)
    : rows_(rows), cols_(cols), data_(static_cast<std::size_t>(rows) * cols, fill) {
  if (rows < 0 || cols < 0) throw InvalidInput("Tensor: negative shape");
}

Tensor Tensor::identity(int n) {
  Tensor t(n, n, 0.0);
  for (int i = 0; i < n; ++i) t.at(i, i) = 1.0;
  return t;
}

Tensor Tensor::from_row(const std::vector<double>& v) {
  Tensor t(1, static_cast<int>(v.size()));
  std::copy(v.begin(), v.end(), t.data_.begin());
  return t;
}

bool Tensor::all_finite() const {
  for (double v : data_)
    if (!std::isfinite(v)) return false;
  return true;
}

double Tensor::min() const {
  double m = std::numeric_limits<double>::infinity();
  for (double v : data_) m = std::min(m, v);
  return m;
}

double Tensor::max() const {
  double m = -std::numeric_limits<double>::infinity();
  for (double v : data_) m = std::max(m, v);
  return m;
}

double Tensor::sum() const {
  double s = 0.0;
  for (double v : data_) s += v;
  return s;
}

double Tensor::mean() const { return size() == 0 ? 0.0 : sum() / static_cast<double>(size()); }

Tensor Tensor::transposed() const {
  Tensor t(cols_, rows_);
  for (int r = 0; r < rows_; ++r)
    for (int c = 0; c < cols_; ++c) t.at(c, r) = at(r, c);
  return t;
}

Tensor Tensor::reshaped(int rows, int cols) const {
  if (static_cast<std::int64_t>(rows) * cols != size())
    throw InvalidInput("Tensor::reshaped: element count mismatch");
  Tensor t = *this;
  t.rows_ = rows;
  t.cols_ = cols;
  return t;
}

Tensor Tensor::row(int r) const {
  Tensor t(1, cols_);
  for (int c = 0; c < cols_; ++c) t.at(0, c) = at(r, c);
  return t;
}

void Tensor::fill(double v) { std::fill(data_.begin(), data_.end(), v); }

void Tensor::add_scaled(const Tensor& o, double s) {
  if (!same_shape(o)) throw InvalidInput("Tensor::add_scaled: shape mismatch");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += s * o.data_[i];
}

Tensor operator+(const Tensor& a, const Tensor& b) {
  if (!a.same_shape(b)) throw InvalidInput("Tensor+: shape mismatch");
  Tensor t = a;
  for (std::size_t i = 0; i < t.data_.size(); ++i) t.data_[i] += b.data_[i];
  return t;
}

Tensor operator-(const Tensor& a, const Tensor& b) {
  if (!a.same_shape(b)) throw InvalidInput("Tensor-: shape mismatch");
  Tensor t = a;
  for (std::size_t i = 0; i < t.data_.size(); ++i) t.data_[i] -= b.data_[i];
  return t;
}

Tensor operator*(const Tensor& a, double s) {
  Tensor t = a;
  for (auto& v : t.data_) v *= s;
  return t;
}

Tensor hadamard(const Tensor& a, const Tensor& b) {
  if (!a.same_shape(b)) throw InvalidInput("hadamard: shape mismatch");
  Tensor t = a;
  for (std::size_t i = 0; i < t.data_.size(); ++i) t.data_[i] *= b.data_[i];
  return t;
}

Tensor matmul(const Tensor& a, const Tensor& b) {
  if (a.cols() != b.rows()) throw InvalidInput("matmul: inner dim mismatch");
  Tensor out(a.rows(), b.cols(), 0.0);
  for (int i = 0; i < a.rows(); ++i) {
    for (int k = 0; k < a.cols(); ++k) {
      const double aik = a.at(i, k);
      if (aik == 0.0) continue;
      const double* brow = b.data() + static_cast<std::size_t>(k) * b.cols();
      double* orow = out.data() + static_cast<std::size_t>(i) * out.cols();
      for (int j = 0; j < b.cols(); ++j) orow[j] += aik * brow[j];
    }
  }
  return out;
}

Tensor matmul_nt(const Tensor& a, const Tensor& b) {
  if (a.cols() != b.cols()) throw InvalidInput("matmul_nt: inner dim mismatch");
  Tensor out(a.rows(), b.rows(), 0.0);
  for (int i = 0; i < a.rows(); ++i) {
    const double* arow = a.data() + static_cast<std::size_t>(i) * a.cols();
    for (int j = 0; j < b.rows(); ++j) {
      const double* brow = b.data() + static_cast<std::size_t>(j) * b.cols();
      double s = 0.0;
      for (int k = 0; k < a.cols(); ++k) s += arow[k] * brow[k];
      out.at(i, j) = s;
    }
  }
  return out;
}

Tensor matmul_tn(const Tensor& a, const Tensor& b) {
  if (a.rows() != b.rows()) throw InvalidInput("matmul_tn: inner dim mismatch");
  Tensor out(a.cols(), b.cols(), 0.0);
  for (int k = 0; k < a.rows(); ++k) {
    const double* arow = a.data() + static_cast<std::size_t>(k) * a.cols();
    const double* brow = b.data() + static_cast<std::size_t>(k) * b.cols();
    for (int i = 0; i < a.cols(); ++i) {
      const double aki = arow[i];
      if (aki == 0.0) continue;
      double* orow = out.data() + static_cast<std::size_t>(i) * out.cols();
      for (int j = 0; j < b.cols(); ++j) orow[j] += aki * brow[j];
    }
  }
  return out;
}

Rng::Rng(std::uint64_t seed) : engine_(seed) {}

std::uint64_t Rng::next_u64() { return engine_(); }

double Rng::uniform() {
  // 53-bit mantissa in [0, 1)
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Rng::uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

int Rng::uniform_int(int n) {
  if (n <= 0) throw InvalidInput("Rng::uniform_int: n must be positive");
  return static_cast<int>(next_u64() % static_cast<std::uint64_t>(n));
}

double Rng::normal() {
  // Box-Muller, no spare caching so the stream is a pure function of the
  // engine position.
  double u1 = 0.0;
  do {
    u1 = uniform();
  } while (u1 <= 0.0);
  const double u2 = uniform();
  const double two_pi = 6.283185307179586476925286766559;
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(two_pi * u2);
}

Tensor Rng::normal_tensor(int rows, int cols, double std) {
  Tensor t(rows, cols);
  for (std::int64_t i = 0; i < t.size(); ++i) t[static_cast<std::size_t>(i)] = std * normal();
  return t;
}

Tensor Rng::uniform_tensor(int rows, int cols, double lo, double hi) {
  Tensor t(rows, cols);
  for (std::int64_t i = 0; i < t.size(); ++i) t[static_cast<std::size_t>(i)] = uniform(lo, hi);
  return t;
}

}  // namespace emogest
