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

#include "veilvote/common.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <stdexcept>
#include <thread>

namespace veilvote {

namespace {

double pairwise_sum_range(std::span<const double> values, size_t lo, size_t hi) {
  if (hi - lo <= 8) {
    double acc = 0.0;
    for (size_t i = lo; i < hi; ++i) acc += values[i];
    return acc;
  }
  const size_t mid = lo + (hi - lo) / 2;
  return pairwise_sum_range(values, lo, mid) + pairwise_sum_range(values, mid, hi);
}

std::vector<double> pairwise_vector_sum_range(
    int lo, int hi, const std::function<std::vector<double>(int)>& leaf) {
  if (hi - lo == 1) return leaf(lo);
  const int mid = lo + (hi - lo) / 2;
  std::vector<double> left = pairwise_vector_sum_range(lo, mid, leaf);
  const std::vector<double> right = pairwise_vector_sum_range(mid, hi, leaf);
  if (left.size() != right.size()) {
    throw std::invalid_argument("pairwise_vector_sum: mismatched vector sizes");
  }
  for (size_t i = 0; i < left.size(); ++i) left[i] += right[i];
  return left;
}

}  // namespace

Matrix::Matrix(int rows, int cols)
    : rows_(rows), cols_(cols), data_(static_cast<size_t>(rows) * cols, 0.0) {
  if (rows < 0 || cols < 0) throw std::invalid_argument("Matrix: negative shape");
}

Matrix::Matrix(int rows, int cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (rows < 0 || cols < 0) throw std::invalid_argument("Matrix: negative shape");
  if (data_.size() != static_cast<size_t>(rows) * cols) {
    throw std::invalid_argument("Matrix: data size does not match shape");
  }
}

std::span<const double> Matrix::row(int i) const {
  return {data_.data() + static_cast<size_t>(i) * cols_, static_cast<size_t>(cols_)};
}

std::span<double> Matrix::row(int i) {
  return {data_.data() + static_cast<size_t>(i) * cols_, static_cast<size_t>(cols_)};
}

double pairwise_sum(std::span<const double> values) {
  if (values.empty()) return 0.0;
  return pairwise_sum_range(values, 0, values.size());
}

std::vector<double> pairwise_vector_sum(
    int count, const std::function<std::vector<double>(int)>& leaf) {
  if (count < 1) throw std::invalid_argument("pairwise_vector_sum: empty reduction");
  return pairwise_vector_sum_range(0, count, leaf);
}

int argmax_lowest(std::span<const double> values) {
  if (values.empty()) throw std::invalid_argument("argmax_lowest: empty input");
  int best = 0;
  for (int i = 1; i < static_cast<int>(values.size()); ++i) {
    if (values[i] > values[best]) best = i;
  }
  return best;
}

double l2_norm(std::span<const double> values) {
  double acc = 0.0;
  for (double v : values) acc += v * v;
  return std::sqrt(acc);
}

int worker_threads() {
  static const int cached = [] {
    int limit = static_cast<int>(std::thread::hardware_concurrency());
    if (limit < 1) limit = 1;
    if (const char* env = std::getenv("VEILVOTE_THREADS")) {
      char* end = nullptr;
      const long parsed = std::strtol(env, &end, 10);
      if (end != env && *end == '\0' && parsed >= 1) {
        limit = std::min<long>(limit, parsed);
      }
    }
    return limit;
  }();
  return cached;
}

void parallel_for(int n, const std::function<void(int)>& fn) {
  if (n <= 0) return;
  const int workers = std::min(n, worker_threads());
  if (workers <= 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::mutex error_mutex;
  std::exception_ptr first_error;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) {
    const int lo = static_cast<int>(static_cast<long long>(n) * w / workers);
    const int hi = static_cast<int>(static_cast<long long>(n) * (w + 1) / workers);
    pool.emplace_back([&, lo, hi] {
      try {
        for (int i = lo; i < hi; ++i) fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
      }
    });
  }
  for (std::thread& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace veilvote
