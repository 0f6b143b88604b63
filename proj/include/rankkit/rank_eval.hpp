#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "rankkit/errors.hpp"

namespace rankkit {

// Graded relevance judgments. Per-query docs keep file order so downstream
// operations (force-insert) are deterministic.
struct Qrels {
  struct Judgment {
    std::string doc_id;
    int relevance = 0;
  };
  std::map<std::string, std::vector<Judgment>> by_query;

  std::optional<int> relevance(const std::string& query_id,
                               const std::string& doc_id) const;
  void add(const std::string& query_id, const std::string& doc_id, int relevance);
};

// A system's ranked output: per query, (doc_id, score) descending by score,
// ties broken by ascending doc_id.
struct RunList {
  struct Entry {
    std::string doc_id;
    double score = 0.0;
  };
  std::map<std::string, std::vector<Entry>> by_query;

  void add(const std::string& query_id, const std::string& doc_id, double score);
  void sort_entries();  // score desc, then doc_id asc
};

struct CheckpointMetrics {
  std::optional<double> pearson_teacher;
  std::optional<double> pearson_label;
  std::optional<double> auc;
  double accuracy_at_half = 0.0;
};

namespace rank_eval {

// TREC qrels: `query_id 0 doc_id rel`, whitespace-delimited. Duplicate
// (query, doc) keys or malformed lines raise with the line number.
Qrels parse_qrels(const std::filesystem::path& path);

// TREC run: `query_id Q0 doc_id rank score tag`.
RunList parse_run(const std::filesystem::path& path);

struct NdcgResult {
  std::map<std::string, double> per_query;
  double mean = 0.0;
  std::size_t evaluated = 0;
  std::size_t excluded_no_relevant = 0;  // qrels queries without relevant docs
};

// DCG with gain 2^rel - 1 and discount log2(rank+1), normalized by the
// ideal DCG. Queries with no relevant documents are excluded from the
// mean; queries missing from the run score 0. A run query absent from the
// qrels is an error.
NdcgResult ndcg_at_k(const Qrels& qrels, const RunList& run, std::size_t k);

// Recall-insensitive protocol: any relevant document absent from the
// top-`depth` entries of a query's run is appended at the tail (in qrels
// order) so the metric reflects reranking quality alone, not first-stage
// recall. Off by default.
RunList force_insert_positives(const RunList& run, const Qrels& qrels,
                               std::size_t depth);

double pearson(const std::vector<double>& x, const std::vector<double>& y);

// AUC by pair counting over all (positive, negative) pairs; ties count 0.5.
double auc_pair_counting(const std::vector<double>& scores,
                         const std::vector<int>& labels);

// Checkpoint-selection metrics: Pearson against the teacher score, Pearson
// against binary labels, AUC, and accuracy at threshold 0.5. Degenerate
// inputs (single-class labels, zero-variance vectors) yield absent fields.
CheckpointMetrics checkpoint_metrics(const std::vector<double>& scores,
                                     const std::vector<double>& teacher,
                                     const std::vector<int>& labels);

}  // namespace rank_eval
}  // namespace rankkit
