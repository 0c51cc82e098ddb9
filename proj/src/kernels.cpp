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

#include "chunkwise/kernels.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <mutex>

namespace chunkwise::kernels {
namespace {

GroupMax group_max_one(const GroupedScores& s, std::size_t p) {
  GroupMax g{s.parent_scores[p], kSelf};
  const std::size_t b = s.child_offsets[p];
  const std::size_t e = s.child_offsets[p + 1];
  for (std::size_t c = b; c < e; ++c) {
    if (s.child_scores[c] > g.score) {
      g.score = s.child_scores[c];
      g.best = static_cast<std::ptrdiff_t>(c - b);
    }
  }
  return g;
}

double cosine_row(std::span<const double> row, double row_norm,
                  std::span<const double> query, double query_norm) {
  if (row_norm == 0.0 || query_norm == 0.0) return 0.0;
  return dot(row, query) / (row_norm * query_norm);
}

}  // namespace

int resolve_jobs(int jobs) {
  return jobs > 0 ? jobs : omp_get_max_threads();
}

void parallel_for(std::size_t n, int jobs,
                  const std::function<void(std::size_t)>& body) {
  std::exception_ptr first_error;
  std::mutex mu;
  const auto count = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for num_threads(resolve_jobs(jobs)) schedule(dynamic, 1)
  for (std::ptrdiff_t i = 0; i < count; ++i) {
    {
      std::lock_guard lock(mu);
      if (first_error) continue;
    }
    try {
      body(static_cast<std::size_t>(i));
    } catch (...) {
      std::lock_guard lock(mu);
      if (!first_error) first_error = std::current_exception();
    }
  }
  if (first_error) std::rethrow_exception(first_error);
}

double dot(std::span<const double> a, std::span<const double> b) {
  double acc = 0.0;
  for (std::size_t d = 0; d < a.size(); ++d) acc += a[d] * b[d];
  return acc;
}

double l2_norm(std::span<const double> v) { return std::sqrt(dot(v, v)); }

std::vector<double> cosine_scores(MatrixView rows, std::span<const double> query,
                                  int jobs) {
  std::vector<double> out(rows.rows);
  const double qn = l2_norm(query);
  const auto n = static_cast<std::ptrdiff_t>(rows.rows);
#pragma omp parallel for num_threads(resolve_jobs(jobs)) schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const auto r = rows.row(static_cast<std::size_t>(i));
    out[static_cast<std::size_t>(i)] = cosine_row(r, l2_norm(r), query, qn);
  }
  return out;
}

std::vector<GroupMax> group_max(const GroupedScores& scores, int jobs) {
  const std::size_t parents = scores.parent_scores.size();
  std::vector<GroupMax> out(parents);
  const auto n = static_cast<std::ptrdiff_t>(parents);
#pragma omp parallel for num_threads(resolve_jobs(jobs)) schedule(static)
  for (std::ptrdiff_t p = 0; p < n; ++p) {
    out[static_cast<std::size_t>(p)] =
        group_max_one(scores, static_cast<std::size_t>(p));
  }
  return out;
}

std::size_t lcs_length(std::span<const std::uint32_t> a,
                       std::span<const std::uint32_t> b) {
  if (a.size() < b.size()) std::swap(a, b);
  std::vector<std::size_t> row(b.size() + 1, 0);
  for (std::size_t i = 0; i < a.size(); ++i) {
    std::size_t diag = 0;
    for (std::size_t j = 0; j < b.size(); ++j) {
      const std::size_t up = row[j + 1];
      row[j + 1] = a[i] == b[j] ? diag + 1 : std::max(up, row[j]);
      diag = up;
    }
  }
  return row[b.size()];
}

std::vector<std::size_t> lcs_lengths(
    std::span<const std::uint32_t> reference,
    std::span<const std::vector<std::uint32_t>> candidates, int jobs) {
  std::vector<std::size_t> out(candidates.size());
  const auto n = static_cast<std::ptrdiff_t>(candidates.size());
#pragma omp parallel for num_threads(resolve_jobs(jobs)) schedule(dynamic, 4)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const auto k = static_cast<std::size_t>(i);
    out[k] = lcs_length(reference, candidates[k]);
  }
  return out;
}

namespace reference {

std::vector<double> cosine_scores(MatrixView rows, std::span<const double> query) {
  std::vector<double> out;
  out.reserve(rows.rows);
  const double qn = l2_norm(query);
  for (std::size_t i = 0; i < rows.rows; ++i) {
    const auto r = rows.row(i);
    out.push_back(cosine_row(r, l2_norm(r), query, qn));
  }
  return out;
}

std::vector<GroupMax> group_max(const GroupedScores& scores) {
  std::vector<GroupMax> out;
  out.reserve(scores.parent_scores.size());
  for (std::size_t p = 0; p < scores.parent_scores.size(); ++p) {
    out.push_back(group_max_one(scores, p));
  }
  return out;
}

// Full (n+1) x (m+1) table.
std::size_t lcs_length(std::span<const std::uint32_t> a,
                       std::span<const std::uint32_t> b) {
  std::vector<std::vector<std::size_t>> t(a.size() + 1,
                                          std::vector<std::size_t>(b.size() + 1));
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      t[i][j] = a[i - 1] == b[j - 1] ? t[i - 1][j - 1] + 1
                                     : std::max(t[i - 1][j], t[i][j - 1]);
    }
  }
  return t[a.size()][b.size()];
}

std::vector<std::size_t> lcs_lengths(
    std::span<const std::uint32_t> reference,
    std::span<const std::vector<std::uint32_t>> candidates) {
  std::vector<std::size_t> out;
  out.reserve(candidates.size());
  for (const auto& c : candidates) out.push_back(lcs_length(reference, c));
  return out;
}

}  // namespace reference
}  // namespace chunkwise::kernels
