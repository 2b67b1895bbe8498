//
// Copyright 2026 The VeilVote Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace veilvote {

// Dense row-major matrix of doubles. Everything in this project is desk
// scale, so plain loops over spans are fine; no BLAS.
class Matrix {
 public:
  Matrix() = default;
  Matrix(int rows, int cols);
  Matrix(int rows, int cols, std::vector<double> data);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  std::span<const double> row(int i) const;
  std::span<double> row(int i);
  double at(int i, int j) const { return data_[static_cast<size_t>(i) * cols_ + j]; }
  double& at(int i, int j) { return data_[static_cast<size_t>(i) * cols_ + j]; }
  const std::vector<double>& data() const { return data_; }
  std::vector<double>& data() { return data_; }

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<double> data_;
};

// Sum by recursive halving. Deterministic for a fixed input order and more
// accurate than left-to-right accumulation.
double pairwise_sum(std::span<const double> values);

// Pairwise reduction of `count` equally sized vectors. leaf(i) is invoked
// exactly once per index, in ascending order of i.
std::vector<double> pairwise_vector_sum(
    int count, const std::function<std::vector<double>(int)>& leaf);

// Index of the largest value; ties resolve to the lowest index.
int argmax_lowest(std::span<const double> values);

double l2_norm(std::span<const double> values);

// Worker cap for parallel sections: hardware concurrency, further capped by
// VEILVOTE_THREADS when that parses to a positive integer.
int worker_threads();

// Runs fn(0), ..., fn(n-1) on up to worker_threads() threads. The first
// exception thrown by fn is rethrown on the calling thread after all workers
// join. fn(i) must not depend on scheduling order.
void parallel_for(int n, const std::function<void(int)>& fn);

}  // namespace veilvote
