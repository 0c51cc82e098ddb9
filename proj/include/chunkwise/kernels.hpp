// Copyright 2026 The Chunkwise Authors.
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

#pragma once

// Data-parallel inner loops. Every kernel has a serial counterpart in
// kernels::reference that computes bit-identical results; tests compare the
// two and the benchmark times them.

#include <cstddef>
#include <cstdint>
#include <exception>
#include <functional>
#include <span>
#include <vector>

namespace chunkwise::kernels {

// Row-major rows x dim block.
struct MatrixView {
  std::span<const double> data;
  std::size_t rows = 0;
  std::size_t dim = 0;

  std::span<const double> row(std::size_t i) const {
    return data.subspan(i * dim, dim);
  }
};

// Parent scores and children in CSR layout: children of parent p are
// child_scores[child_offsets[p] .. child_offsets[p+1]).
struct GroupedScores {
  std::span<const double> parent_scores;
  std::span<const std::size_t> child_offsets;
  std::span<const double> child_scores;
};

inline constexpr std::ptrdiff_t kSelf = -1;

struct GroupMax {
  double score = 0.0;
  // kSelf or index into the parent's own child list. First maximum wins.
  std::ptrdiff_t best = kSelf;

  bool operator==(const GroupMax&) const = default;
};

// 0 means the OpenMP default.
int resolve_jobs(int jobs);

// Runs body(i) for i in [0, n) across `jobs` threads. The first exception
// thrown by any iteration is rethrown on the calling thread.
void parallel_for(std::size_t n, int jobs,
                  const std::function<void(std::size_t)>& body);

double l2_norm(std::span<const double> v);
double dot(std::span<const double> a, std::span<const double> b);

// Cosine of every row against query. Zero rows score 0; callers validate.
std::vector<double> cosine_scores(MatrixView rows, std::span<const double> query,
                                  int jobs = 0);

std::vector<GroupMax> group_max(const GroupedScores& scores, int jobs = 0);

std::size_t lcs_length(std::span<const std::uint32_t> a,
                       std::span<const std::uint32_t> b);

std::vector<std::size_t> lcs_lengths(
    std::span<const std::uint32_t> reference,
    std::span<const std::vector<std::uint32_t>> candidates, int jobs = 0);

namespace reference {

std::vector<double> cosine_scores(MatrixView rows, std::span<const double> query);
std::vector<GroupMax> group_max(const GroupedScores& scores);
std::size_t lcs_length(std::span<const std::uint32_t> a,
                       std::span<const std::uint32_t> b);
std::vector<std::size_t> lcs_lengths(
    std::span<const std::uint32_t> reference,
    std::span<const std::vector<std::uint32_t>> candidates);

}  // namespace reference
}  // namespace chunkwise::kernels
