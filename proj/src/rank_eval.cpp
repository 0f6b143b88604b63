#include "rankkit/rank_eval.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace rankkit {

std::optional<int> Qrels::relevance(const std::string& query_id,
                                    const std::string& doc_id) const {
  const auto it = by_query.find(query_id);
  if (it == by_query.end()) return std::nullopt;
  for (const auto& j : it->second)
    if (j.doc_id == doc_id) return j.relevance;
  return std::nullopt;
}

void Qrels::add(const std::string& query_id, const std::string& doc_id,
                int relevance) {
  if (relevance < 0) throw ValidationError("qrels: negative relevance grade");
  auto& docs = by_query[query_id];
  for (const auto& j : docs)
    if (j.doc_id == doc_id)
      throw ValidationError("qrels: duplicate (query, doc) key (" + query_id +
                            ", " + doc_id + ")");
  docs.push_back({doc_id, relevance});
}

void RunList::add(const std::string& query_id, const std::string& doc_id,
                  double score) {
  auto& entries = by_query[query_id];
  for (const auto& e : entries)
    if (e.doc_id == doc_id)
      throw ValidationError("run: duplicate doc " + doc_id + " for query " +
                            query_id);
  entries.push_back({doc_id, score});
}

void RunList::sort_entries() {
  for (auto& [qid, entries] : by_query) {
    std::stable_sort(entries.begin(), entries.end(),
                     [](const Entry& a, const Entry& b) {
                       if (a.score != b.score) return a.score > b.score;
                       return a.doc_id < b.doc_id;
                     });
  }
}

namespace rank_eval {

namespace {

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> fields;
  std::istringstream ss(line);
  std::string f;
  while (ss >> f) fields.push_back(f);
  return fields;
}

[[noreturn]] void line_error(const std::filesystem::path& path, std::size_t lineno,
                             const std::string& what) {
  throw ValidationError(path.string() + ":" + std::to_string(lineno) + ": " + what);
}

}  // namespace

Qrels parse_qrels(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open qrels file " + path.string());
  Qrels qrels;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto fields = split_fields(line);
    if (fields.empty()) continue;
    if (fields.size() != 4) line_error(path, lineno, "expected 4 fields in qrels line");
    int rel = 0;
    try {
      rel = std::stoi(fields[3]);
    } catch (const std::exception&) {
      line_error(path, lineno, "relevance grade is not an integer");
    }
    try {
      qrels.add(fields[0], fields[2], rel);
    } catch (const ValidationError& e) {
      line_error(path, lineno, e.what());
    }
  }
  return qrels;
}

RunList parse_run(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open run file " + path.string());
  RunList run;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto fields = split_fields(line);
    if (fields.empty()) continue;
    if (fields.size() != 6) line_error(path, lineno, "expected 6 fields in run line");
    double score = 0.0;
    try {
      std::size_t pos = 0;
      score = std::stod(fields[4], &pos);
      if (pos != fields[4].size()) throw std::invalid_argument("trailing chars");
    } catch (const std::exception&) {
      line_error(path, lineno, "score is not a number");
    }
    try {
      run.add(fields[0], fields[2], score);
    } catch (const ValidationError& e) {
      line_error(path, lineno, e.what());
    }
  }
  run.sort_entries();
  return run;
}

namespace {

double gain(int rel) { return std::exp2(static_cast<double>(rel)) - 1.0; }

double dcg_at_k(const Qrels& qrels, const std::string& qid,
                const std::vector<RunList::Entry>& entries, std::size_t k) {
  double dcg = 0.0;
  const std::size_t depth = std::min(k, entries.size());
  for (std::size_t rank = 1; rank <= depth; ++rank) {
    const auto rel = qrels.relevance(qid, entries[rank - 1].doc_id);
    if (rel && *rel > 0)
      dcg += gain(*rel) / std::log2(static_cast<double>(rank) + 1.0);
  }
  return dcg;
}

double ideal_dcg_at_k(const std::vector<Qrels::Judgment>& judgments, std::size_t k) {
  std::vector<int> rels;
  for (const auto& j : judgments)
    if (j.relevance > 0) rels.push_back(j.relevance);
  std::sort(rels.rbegin(), rels.rend());
  double idcg = 0.0;
  for (std::size_t rank = 1; rank <= std::min(k, rels.size()); ++rank)
    idcg += gain(rels[rank - 1]) / std::log2(static_cast<double>(rank) + 1.0);
  return idcg;
}

}  // namespace

NdcgResult ndcg_at_k(const Qrels& qrels, const RunList& run, std::size_t k) {
  if (k < 1) throw ValidationError("ndcg_at_k: k must be >= 1");
  for (const auto& [qid, entries] : run.by_query) {
    if (!qrels.by_query.count(qid))
      throw ValidationError("ndcg_at_k: run query absent from qrels: " + qid);
  }

  NdcgResult result;
  static const std::vector<RunList::Entry> kEmpty;
  for (const auto& [qid, judgments] : qrels.by_query) {
    const double idcg = ideal_dcg_at_k(judgments, k);
    if (idcg == 0.0) {
      ++result.excluded_no_relevant;
      continue;
    }
    const auto it = run.by_query.find(qid);
    const auto& entries = it == run.by_query.end() ? kEmpty : it->second;
    const double v = dcg_at_k(qrels, qid, entries, k) / idcg;
    result.per_query[qid] = v;
    result.mean += v;
    ++result.evaluated;
  }
  if (result.evaluated > 0) result.mean /= static_cast<double>(result.evaluated);
  return result;
}

RunList force_insert_positives(const RunList& run, const Qrels& qrels,
                               std::size_t depth) {
  if (depth < 1) throw ValidationError("force_insert_positives: depth must be >= 1");
  RunList out = run;
  for (const auto& [qid, judgments] : qrels.by_query) {
    auto& entries = out.by_query[qid];  // creates empty list when absent
    std::set<std::string> present;
    for (std::size_t i = 0; i < std::min(depth, entries.size()); ++i)
      present.insert(entries[i].doc_id);
    double floor_score =
        entries.empty() ? 0.0
                        : std::min_element(entries.begin(), entries.end(),
                                           [](const auto& a, const auto& b) {
                                             return a.score < b.score;
                                           })
                              ->score;
    for (const auto& j : judgments) {
      if (j.relevance <= 0 || present.count(j.doc_id)) continue;
      bool in_tail = false;
      for (std::size_t i = depth; i < entries.size(); ++i)
        if (entries[i].doc_id == j.doc_id) in_tail = true;
      if (in_tail) continue;
      floor_score -= 1.0;
      entries.push_back({j.doc_id, floor_score});
    }
    if (entries.empty()) out.by_query.erase(qid);
  }
  out.sort_entries();
  return out;
}

double pearson(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2)
    throw ValidationError("pearson: need equal-length vectors of size >= 2");
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx, dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0)
    throw ValidationError("pearson: zero-variance input");
  return sxy / std::sqrt(sxx * syy);
}

double auc_pair_counting(const std::vector<double>& scores,
                         const std::vector<int>& labels) {
  if (scores.size() != labels.size() || scores.empty())
    throw ValidationError("auc: scores/labels mismatch");
  double correct = 0.0;
  std::size_t pos = 0, neg = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] != 0) {
      ++pos;
      for (std::size_t j = 0; j < labels.size(); ++j) {
        if (labels[j] != 0) continue;
        if (scores[i] > scores[j]) {
          correct += 1.0;
        } else if (scores[i] == scores[j]) {
          correct += 0.5;
        }
      }
    } else {
      ++neg;
    }
  }
  if (pos == 0 || neg == 0)
    throw ValidationError("auc: need both classes present");
  return correct / (static_cast<double>(pos) * static_cast<double>(neg));
}

CheckpointMetrics checkpoint_metrics(const std::vector<double>& scores,
                                     const std::vector<double>& teacher,
                                     const std::vector<int>& labels) {
  if (scores.size() < 2 || scores.size() != teacher.size() ||
      scores.size() != labels.size())
    throw ValidationError("checkpoint_metrics: need aligned vectors of size >= 2");

  CheckpointMetrics m;
  std::vector<double> label_vals(labels.size());
  std::size_t pos = 0;
  std::size_t correct = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    label_vals[i] = labels[i] != 0 ? 1.0 : 0.0;
    if (labels[i] != 0) ++pos;
    if ((scores[i] >= 0.5 ? 1 : 0) == (labels[i] != 0 ? 1 : 0)) ++correct;
  }
  m.accuracy_at_half = static_cast<double>(correct) / static_cast<double>(labels.size());

  try {
    m.pearson_teacher = pearson(scores, teacher);
  } catch (const ValidationError&) {
    m.pearson_teacher = std::nullopt;
  }
  try {
    m.pearson_label = pearson(scores, label_vals);
  } catch (const ValidationError&) {
    m.pearson_label = std::nullopt;
  }
  if (pos > 0 && pos < labels.size()) {
    m.auc = auc_pair_counting(scores, labels);
  }
  return m;
}

}  // namespace rank_eval
}  // namespace rankkit
