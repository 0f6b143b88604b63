#include "rankkit/balance.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <unordered_map>

#include "rankkit/stable_rng.hpp"

namespace rankkit::balance {

Cell bin_pair(double score, std::size_t length) {
  if (!std::isfinite(score) || score < 0.0 || score > 1.0)
    throw ValidationError("bin_pair: score must lie in [0,1]");
  Cell cell;
  cell.row = std::min(static_cast<std::size_t>(score * kScoreBins), kScoreBins - 1);
  cell.col = kLengthBins - 1;
  for (std::size_t c = 0; c + 1 < kLengthBins; ++c) {
    if (length < kLengthBinLowerEdges[c + 1]) {
      cell.col = c;
      break;
    }
  }
  return cell;
}

CellHistogram build_histogram(const std::vector<double>& scores,
                              const std::vector<std::size_t>& lengths) {
  if (scores.size() != lengths.size())
    throw ValidationError("build_histogram: scores/lengths length mismatch");
  CellHistogram hist;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const Cell c = bin_pair(scores[i], lengths[i]);
    hist.add(c.row, c.col);
  }
  return hist;
}

double normalized_entropy(const CellHistogram& hist) {
  if (hist.total <= 0) throw ValidationError("normalized_entropy: empty histogram");
  const double total = static_cast<double>(hist.total);
  double h = 0.0;
  for (const auto& row : hist.counts) {
    for (std::int64_t c : row) {
      if (c == 0) continue;  // 0 * ln 0 = 0
      const double p = static_cast<double>(c) / total;
      h -= p * std::log(p);
    }
  }
  return h / std::log(static_cast<double>(kGridCells));
}

double coefficient_of_variation(const CellHistogram& hist) {
  const double n = static_cast<double>(kGridCells);
  double mean = static_cast<double>(hist.total) / n;
  if (mean == 0.0) return 0.0;
  double var = 0.0;
  for (const auto& row : hist.counts) {
    for (std::int64_t c : row) {
      const double d = static_cast<double>(c) - mean;
      var += d * d;
    }
  }
  var /= n;
  return std::sqrt(var) / mean;
}

namespace {

CellHistogram capped(const CellHistogram& hist, std::int64_t cap) {
  CellHistogram out;
  for (std::size_t r = 0; r < kScoreBins; ++r)
    for (std::size_t c = 0; c < kLengthBins; ++c)
      if (hist.counts[r][c] > 0)
        out.add(r, c, std::min(hist.counts[r][c], cap));
  return out;
}

StableRng cell_rng(std::uint64_t seed, std::size_t row, std::size_t col) {
  return StableRng(seed, {static_cast<std::uint64_t>(row),
                          static_cast<std::uint64_t>(col)});
}

}  // namespace

BalanceResult balance(const std::vector<double>& scores,
                      const std::vector<std::size_t>& lengths, double target_h,
                      std::uint64_t seed) {
  if (scores.empty()) throw ValidationError("balance: no samples");
  if (!(target_h > 0.0) || target_h > 1.0)
    throw ValidationError("balance: target_h must lie in (0,1]");

  const CellHistogram before = build_histogram(scores, lengths);
  std::int64_t max_count = 0;
  for (const auto& row : before.counts)
    for (std::int64_t c : row) max_count = std::max(max_count, c);

  if (normalized_entropy(capped(before, 1)) < target_h) {
    throw ValidationError(
        "balance: target unreachable; best achievable H_norm = " +
        std::to_string(normalized_entropy(capped(before, 1))));
  }

  // Largest cap whose capped histogram still reaches the target. Entropy is
  // non-increasing in the cap, so bisect on [1, max_count].
  std::int64_t lo = 1, hi = max_count;
  while (lo < hi) {
    const std::int64_t mid = lo + (hi - lo + 1) / 2;
    if (normalized_entropy(capped(before, mid)) >= target_h) {
      lo = mid;
    } else {
      hi = mid - 1;
    }
  }
  const std::int64_t cap = lo;

  // Membership lists per cell, in input order.
  std::map<std::pair<std::size_t, std::size_t>, std::vector<std::size_t>> members;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const Cell c = bin_pair(scores[i], lengths[i]);
    members[{c.row, c.col}].push_back(i);
  }

  BalanceResult result;
  for (auto& [cell, idx] : members) {
    if (static_cast<std::int64_t>(idx.size()) > cap) {
      auto rng = cell_rng(seed, cell.first, cell.second);
      // Partial Fisher-Yates: the first `cap` slots become the retained subset.
      for (std::int64_t k = 0; k < cap; ++k) {
        const auto j = static_cast<std::size_t>(k) +
                       rng.next_below(idx.size() - static_cast<std::size_t>(k));
        std::swap(idx[static_cast<std::size_t>(k)], idx[j]);
      }
      idx.resize(cap);
    }
    result.retained.insert(result.retained.end(), idx.begin(), idx.end());
  }
  std::sort(result.retained.begin(), result.retained.end());

  const CellHistogram after = capped(before, cap);
  result.report.h_norm_before = normalized_entropy(before);
  result.report.h_norm_after = normalized_entropy(after);
  result.report.cv_before = coefficient_of_variation(before);
  result.report.cv_after = coefficient_of_variation(after);
  result.report.retained_fraction =
      static_cast<double>(result.retained.size()) / static_cast<double>(scores.size());
  result.report.cap = cap;
  return result;
}

QuerySplit split_by_query(const std::vector<std::string>& queries,
                          double dev_fraction, std::uint64_t seed) {
  if (!(dev_fraction > 0.0) || !(dev_fraction < 1.0))
    throw ValidationError("split_by_query: dev_fraction must lie in (0,1)");

  std::vector<std::string> distinct;
  std::unordered_map<std::string, std::size_t> first_seen;
  for (const auto& q : queries) {
    if (first_seen.emplace(q, distinct.size()).second) distinct.push_back(q);
  }
  if (distinct.size() < 2)
    throw ValidationError("split_by_query: need at least 2 distinct queries");

  std::vector<std::size_t> order(distinct.size());
  std::iota(order.begin(), order.end(), 0);
  StableRng(seed).shuffle(order);

  const auto n = static_cast<double>(distinct.size());
  auto n_dev = static_cast<std::size_t>(std::floor(dev_fraction * n + 0.5));
  n_dev = std::clamp<std::size_t>(n_dev, 1, distinct.size() - 1);

  std::vector<bool> is_dev(distinct.size(), false);
  for (std::size_t i = 0; i < n_dev; ++i) is_dev[order[i]] = true;

  QuerySplit split;
  for (std::size_t i = 0; i < queries.size(); ++i) {
    if (is_dev[first_seen.at(queries[i])]) {
      split.dev.push_back(i);
    } else {
      split.train.push_back(i);
    }
  }
  return split;
}

}  // namespace rankkit::balance
