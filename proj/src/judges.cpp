#include "rankkit/judges.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <set>

namespace rankkit {

void JudgeSpec::validate() const {
  if (judge_id.empty()) throw ValidationError("judge_id must be non-empty");
  if (endpoint_url.empty())
    throw ValidationError("judge " + judge_id + ": endpoint_url must be non-empty");
  if (max_concurrent < 1)
    throw ValidationError("judge " + judge_id + ": max_concurrent must be >= 1");
  if (timeout_ms < 1)
    throw ValidationError("judge " + judge_id + ": timeout_ms must be >= 1");
}

namespace judges {

namespace {

bool is_punct(char c) {
  static const std::string punct = ".,!?:;\"'()[]{}*#`~|";
  return punct.find(c) != std::string::npos;
}

std::string normalize(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (char c : text) {
    if (is_punct(c)) {
      out.push_back(' ');
    } else {
      out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    }
  }
  return out;
}

std::vector<std::string> split_ws(std::string_view text) {
  std::vector<std::string> tokens;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    std::size_t j = i;
    while (j < text.size() && !std::isspace(static_cast<unsigned char>(text[j]))) ++j;
    if (j > i) tokens.emplace_back(text.substr(i, j - i));
    i = j;
  }
  return tokens;
}

}  // namespace

std::optional<Verdict> parse_verdict(std::string_view response) {
  const std::string norm = normalize(response);
  const auto tokens = split_ws(norm);
  if (tokens.empty()) return std::nullopt;
  if (tokens.front() == "yes") return Verdict::yes;
  if (tokens.front() == "no") return Verdict::no;

  // Final non-empty line consisting of exactly "yes" or "no".
  std::size_t end = norm.size();
  while (end > 0) {
    std::size_t begin = norm.rfind('\n', end - 1);
    const std::size_t line_start = begin == std::string::npos ? 0 : begin + 1;
    const auto line_tokens = split_ws(std::string_view(norm).substr(line_start, end - line_start));
    if (!line_tokens.empty()) {
      if (line_tokens.size() == 1 && line_tokens[0] == "yes") return Verdict::yes;
      if (line_tokens.size() == 1 && line_tokens[0] == "no") return Verdict::no;
      return std::nullopt;
    }
    if (begin == std::string::npos) break;
    end = begin;
  }
  return std::nullopt;
}

int default_threshold(std::size_t panel_size) {
  return static_cast<int>((panel_size + 2) / 2);  // ceil((n+1)/2)
}

EnsembleLabel majority_vote(const std::vector<JudgeVote>& votes, int threshold) {
  if (votes.empty()) throw ValidationError("majority_vote: empty vote list");
  if (threshold < 1) throw ValidationError("majority_vote: threshold must be >= 1");
  EnsembleLabel label;
  label.pair_id = votes.front().pair_id;
  for (const auto& v : votes) {
    if (v.pair_id != label.pair_id)
      throw ValidationError("majority_vote: votes span multiple pairs");
    if (v.verdict != Verdict::yes && v.verdict != Verdict::no)
      throw ValidationError("majority_vote: vote must be yes or no");
    if (!label.votes.emplace(v.judge_id, v.verdict).second)
      throw ValidationError("majority_vote: duplicate judge_id " + v.judge_id);
    if (v.verdict == Verdict::yes) ++label.yes_count;
  }
  label.label = label.yes_count >= threshold ? GoldLabel::positive : GoldLabel::negative;
  return label;
}

double cohen_kappa(const std::vector<int>& a, const std::vector<int>& b) {
  if (a.empty() || a.size() != b.size())
    throw ValidationError("cohen_kappa: sequences must be non-empty and equal length");
  const double n = static_cast<double>(a.size());
  double agree = 0.0, a1 = 0.0, b1 = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if ((a[i] != 0) == (b[i] != 0)) agree += 1.0;
    if (a[i] != 0) a1 += 1.0;
    if (b[i] != 0) b1 += 1.0;
  }
  const double po = agree / n;
  const double pa1 = a1 / n, pb1 = b1 / n;
  const double pe = pa1 * pb1 + (1.0 - pa1) * (1.0 - pb1);
  if (pe >= 1.0) {
    // Both raters constant: kappa undefined; documented convention.
    return a == b ? 1.0 : 0.0;
  }
  return (po - pe) / (1.0 - pe);
}

KappaMatrix pairwise_kappa_matrix(
    const std::map<std::string, std::vector<int>>& votes_by_judge) {
  if (votes_by_judge.empty())
    throw ValidationError("pairwise_kappa_matrix: no judges");
  KappaMatrix m;
  m.n_shared = votes_by_judge.begin()->second.size();
  for (const auto& [id, votes] : votes_by_judge) {
    if (votes.size() != m.n_shared)
      throw ValidationError("pairwise_kappa_matrix: vote list for " + id +
                            " is not aligned with the shared pair set");
    m.judge_ids.push_back(id);
  }
  const std::size_t n = m.judge_ids.size();
  m.kappa.assign(n, std::vector<double>(n, 1.0));
  for (std::size_t i = 0; i < n; ++i) {
    const auto& vi = votes_by_judge.at(m.judge_ids[i]);
    for (std::size_t j = i + 1; j < n; ++j) {
      const auto& vj = votes_by_judge.at(m.judge_ids[j]);
      const double k = cohen_kappa(vi, vj);
      m.kappa[i][j] = k;
      m.kappa[j][i] = k;
    }
  }
  return m;
}

namespace {

double mean_kappa_to(const KappaMatrix& m, std::size_t idx,
                     const std::vector<std::size_t>& members) {
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t other : members) {
    if (other == idx) continue;
    sum += m.kappa[idx][other];
    ++count;
  }
  return count == 0 ? 0.0 : sum / static_cast<double>(count);
}

}  // namespace

std::vector<std::string> select_panel(const KappaMatrix& matrix, std::size_t k) {
  if (k < 2) throw ValidationError("select_panel: k must be >= 2");
  if (k > matrix.judge_ids.size())
    throw ValidationError("select_panel: k exceeds the candidate pool");

  std::vector<std::size_t> remaining(matrix.judge_ids.size());
  for (std::size_t i = 0; i < remaining.size(); ++i) remaining[i] = i;

  while (remaining.size() > k) {
    std::size_t drop = remaining.front();
    double worst = -2.0;
    for (std::size_t idx : remaining) {
      const double mk = mean_kappa_to(matrix, idx, remaining);
      if (mk > worst ||
          (mk == worst && matrix.judge_ids[idx] < matrix.judge_ids[drop])) {
        worst = mk;
        drop = idx;
      }
    }
    remaining.erase(std::find(remaining.begin(), remaining.end(), drop));
  }

  std::vector<std::pair<double, std::string>> ranked;
  ranked.reserve(remaining.size());
  for (std::size_t idx : remaining)
    ranked.emplace_back(mean_kappa_to(matrix, idx, remaining), matrix.judge_ids[idx]);
  std::sort(ranked.begin(), ranked.end());
  std::vector<std::string> out;
  out.reserve(ranked.size());
  for (auto& [mk, id] : ranked) out.push_back(std::move(id));
  return out;
}

}  // namespace judges
}  // namespace rankkit
