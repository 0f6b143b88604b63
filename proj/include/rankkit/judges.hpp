#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "rankkit/errors.hpp"
#include "rankkit/protocol.hpp"

namespace rankkit {

// One judge endpoint. Identities are configuration, not code.
struct JudgeSpec {
  std::string judge_id;
  std::string endpoint_url;
  std::string model_name;
  std::string api_key_env_var;
  int max_concurrent = 4;
  int timeout_ms = 30000;

  void validate() const;
};

struct JudgeVote {
  std::string pair_id;
  std::string judge_id;
  Verdict verdict = Verdict::no;  // yes or no only
  std::string raw_response;
  bool cached = false;
};

struct EnsembleLabel {
  std::string pair_id;
  std::map<std::string, Verdict> votes;  // judge_id -> verdict
  int yes_count = 0;
  GoldLabel label = GoldLabel::negative;
};

struct KappaMatrix {
  std::vector<std::string> judge_ids;
  std::vector<std::vector<double>> kappa;  // symmetric, unit diagonal
  std::size_t n_shared = 0;
};

namespace judges {

// Documented verdict-parsing rule: lowercase the response, strip
// punctuation, then accept a leading "yes"/"no" token or a final line that
// is exactly "yes"/"no". Anything else is unparseable (nullopt).
std::optional<Verdict> parse_verdict(std::string_view response);

// Majority threshold default for an n-judge panel: ceil((n+1)/2).
int default_threshold(std::size_t panel_size);

// label = positive iff yes_count >= threshold. Duplicate judge ids reject.
EnsembleLabel majority_vote(const std::vector<JudgeVote>& votes, int threshold);

// Chance-corrected agreement between two binary annotators. When both
// raters are constant (p_e = 1) the convention is 1.0 for identical
// sequences, 0.0 otherwise.
double cohen_kappa(const std::vector<int>& a, const std::vector<int>& b);

// Symmetric pairwise kappa over aligned vote vectors.
KappaMatrix pairwise_kappa_matrix(
    const std::map<std::string, std::vector<int>>& votes_by_judge);

// Greedily removes the judge with the highest mean kappa to the remaining
// set until k remain; ties drop the lexicographically smallest id. Returns
// the retained ids ordered by ascending mean off-diagonal kappa within the
// retained set (most independent first).
std::vector<std::string> select_panel(const KappaMatrix& matrix, std::size_t k);

}  // namespace judges
}  // namespace rankkit
