// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "zebra/core.hpp"
#include "zebra/error.hpp"

namespace zebra {

inline double mean(std::span<const double> values) {
    double sum = 0.0;
    for (double v : values) sum += v;
    return sum / static_cast<double>(values.size());
}

/// Sample standard deviation with divisor N-1. Exactly 0 when all values
/// are equal, so constant metrics do not pick up rounding noise.
inline double sample_std(std::span<const double> values) {
    const double m = mean(values);
    bool all_equal = true;
    for (double v : values) {
        if (v != values[0]) {
            all_equal = false;
            break;
        }
    }
    if (all_equal) return 0.0;
    double sum_sq = 0.0;
    for (double v : values) sum_sq += (v - m) * (v - m);
    return std::sqrt(sum_sq / static_cast<double>(values.size() - 1));
}

/// Spread of a Bernoulli-distributed score: sqrt(mean * (1 - mean)).
inline double bernoulli_std(double mean_value) {
    return std::sqrt(mean_value * (1.0 - mean_value));
}

/// Standard error of the mean: std / sqrt(N).
inline double standard_error(double sd, std::size_t n) {
    return sd / std::sqrt(static_cast<double>(n));
}

/// Error of a difference of independent means: sqrt(e1^2 + e2^2).
inline double difference_error(double err_a, double err_b) {
    return std::sqrt(err_a * err_a + err_b * err_b);
}

/// Per-run accuracy summary over one puzzle set.
struct MetricSummary {
    std::size_t n_puzzles = 0;
    double mean_a_puzzle = 0.0;
    double mean_a_cell = 0.0;
    double mean_a_best_cell = 0.0;
    double bernoulli_sample_std = 0.0; // of a_puzzle
    double cell_sample_std = 0.0;      // of a_cell
    double stderr_a_puzzle = 0.0;
    double stderr_a_cell = 0.0;
};

inline MetricSummary summarize(std::span<const double> a_puzzle, std::span<const double> a_cell,
                               std::span<const double> a_best_cell) {
    if (a_puzzle.size() < 2) {
        throw EvalError("need at least 2 records to aggregate metrics");
    }
    if (a_puzzle.size() != a_cell.size() || a_cell.size() != a_best_cell.size()) {
        throw EvalError("metric vectors must have equal length");
    }
    MetricSummary s;
    s.n_puzzles = a_puzzle.size();
    s.mean_a_puzzle = mean(a_puzzle);
    s.mean_a_cell = mean(a_cell);
    s.mean_a_best_cell = mean(a_best_cell);
    s.bernoulli_sample_std = bernoulli_std(s.mean_a_puzzle);
    s.cell_sample_std = sample_std(a_cell);
    s.stderr_a_puzzle = standard_error(s.bernoulli_sample_std, s.n_puzzles);
    s.stderr_a_cell = standard_error(s.cell_sample_std, s.n_puzzles);
    return s;
}

// ---------------------------------------------------------------------------
// Run comparison

struct SizeDelta {
    Size size;
    double delta_a_puzzle = 0.0;
    double err_a_puzzle = 0.0;
    double delta_a_cell = 0.0;
    double err_a_cell = 0.0;
};

struct RunComparison {
    std::vector<SizeDelta> per_size;
    double overall_delta_a_puzzle = 0.0;
    double overall_err_a_puzzle = 0.0;
    double overall_delta_a_cell = 0.0;
    double overall_err_a_cell = 0.0;
};

/// Per-size differences of means (run a minus run b) with the combined
/// independent error, plus the mean of differences across sizes whose
/// uncertainty is the sample standard deviation of the per-size deltas
/// (divisor N_sizes - 1; 0 when only one size is present).
inline RunComparison compare_runs(const std::vector<std::pair<Size, MetricSummary>>& a,
                                  const std::vector<std::pair<Size, MetricSummary>>& b) {
    if (a.size() != b.size()) throw EvalError("size mismatch between runs");
    RunComparison cmp;
    std::vector<double> puzzle_deltas;
    std::vector<double> cell_deltas;
    for (const auto& [size, sa] : a) {
        const MetricSummary* sb = nullptr;
        for (const auto& [size_b, candidate] : b) {
            if (size_b == size) {
                sb = &candidate;
                break;
            }
        }
        if (sb == nullptr) {
            throw EvalError("size " + size.to_string() + " is missing from the second run");
        }
        SizeDelta d;
        d.size = size;
        d.delta_a_puzzle = sa.mean_a_puzzle - sb->mean_a_puzzle;
        d.err_a_puzzle = difference_error(sa.stderr_a_puzzle, sb->stderr_a_puzzle);
        d.delta_a_cell = sa.mean_a_cell - sb->mean_a_cell;
        d.err_a_cell = difference_error(sa.stderr_a_cell, sb->stderr_a_cell);
        puzzle_deltas.push_back(d.delta_a_puzzle);
        cell_deltas.push_back(d.delta_a_cell);
        cmp.per_size.push_back(d);
    }
    if (cmp.per_size.empty()) throw EvalError("no sizes to compare");
    cmp.overall_delta_a_puzzle = mean(puzzle_deltas);
    cmp.overall_delta_a_cell = mean(cell_deltas);
    if (puzzle_deltas.size() >= 2) {
        cmp.overall_err_a_puzzle = sample_std(puzzle_deltas);
        cmp.overall_err_a_cell = sample_std(cell_deltas);
    }
    return cmp;
}

} // namespace zebra
