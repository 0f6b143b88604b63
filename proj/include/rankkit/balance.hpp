#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "rankkit/errors.hpp"

namespace rankkit {

// 6 equal-width teacher-score bins x 8 log-spaced document-length bins.
inline constexpr std::size_t kScoreBins = 6;
inline constexpr std::size_t kLengthBins = 8;
inline constexpr std::size_t kGridCells = kScoreBins * kLengthBins;

// Lower edges of the length bins; the last bin is [4096, +inf).
inline constexpr std::array<std::size_t, kLengthBins> kLengthBinLowerEdges = {
    0, 64, 128, 256, 512, 1024, 2048, 4096};

struct CellHistogram {
  std::array<std::array<std::int64_t, kLengthBins>, kScoreBins> counts{};
  std::int64_t total = 0;

  void add(std::size_t row, std::size_t col, std::int64_t n = 1) {
    counts[row][col] += n;
    total += n;
  }
};

struct BalanceReport {
  double h_norm_before = 0.0;
  double h_norm_after = 0.0;
  double cv_before = 0.0;
  double cv_after = 0.0;
  double retained_fraction = 1.0;
  std::int64_t cap = 0;
};

namespace balance {

struct Cell {
  std::size_t row = 0;  // score bin
  std::size_t col = 0;  // length bin
};

// row = min(floor(6*score), 5); col = length bin containing `length`.
// Score 1.0 lands in the top bin.
Cell bin_pair(double score, std::size_t length);

CellHistogram build_histogram(const std::vector<double>& scores,
                              const std::vector<std::size_t>& lengths);

// Normalized cell entropy: -(1/ln 48) * sum p_i ln p_i, empty cells
// contributing zero. 1.0 means a perfectly uniform grid.
double normalized_entropy(const CellHistogram& hist);

// Coefficient of variation of the 48 cell counts (population std / mean).
double coefficient_of_variation(const CellHistogram& hist);

struct BalanceResult {
  std::vector<std::size_t> retained;  // indices into the input, ascending
  BalanceReport report;
};

// Finds the largest per-cell cap C (binary search over integer caps) such
// that capping every cell at C reaches H_norm >= target_h, then retains a
// seeded uniform subset inside each over-full cell. Deterministic: the
// generator for each cell is derived from (seed, row, col), so results do
// not depend on evaluation order.
BalanceResult balance(const std::vector<double>& scores,
                      const std::vector<std::size_t>& lengths, double target_h,
                      std::uint64_t seed);

// Query-level split: all samples sharing a query land on the same side and
// the distinct query sets are disjoint. Deterministic given seed.
struct QuerySplit {
  std::vector<std::size_t> train;  // indices into the input, ascending
  std::vector<std::size_t> dev;
};

QuerySplit split_by_query(const std::vector<std::string>& queries,
                          double dev_fraction, std::uint64_t seed);

}  // namespace balance
}  // namespace rankkit
