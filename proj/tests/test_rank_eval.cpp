#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>

#include "rankkit/rank_eval.hpp"

using namespace rankkit;
using namespace rankkit::rank_eval;

namespace {

namespace fs = std::filesystem;

fs::path write_temp(const std::string& name, const std::string& content) {
  const fs::path path = fs::temp_directory_path() / ("rankkit_test_" + name);
  std::ofstream out(path, std::ios::trunc);
  out << content;
  return path;
}

// Brute-force reference: direct formula evaluation, no shared code with the
// implementation beyond the type definitions.
double ndcg_reference(const Qrels& qrels, const std::string& qid,
                      const std::vector<RunList::Entry>& ranked, std::size_t k) {
  double dcg = 0.0;
  for (std::size_t i = 0; i < ranked.size() && i < k; ++i) {
    const auto rel = qrels.relevance(qid, ranked[i].doc_id);
    if (rel)
      dcg += (std::pow(2.0, *rel) - 1.0) / (std::log(double(i) + 2.0) / std::log(2.0));
  }
  std::vector<int> rels;
  for (const auto& j : qrels.by_query.at(qid)) rels.push_back(j.relevance);
  std::sort(rels.rbegin(), rels.rend());
  double idcg = 0.0;
  for (std::size_t i = 0; i < rels.size() && i < k; ++i)
    idcg += (std::pow(2.0, rels[i]) - 1.0) / (std::log(double(i) + 2.0) / std::log(2.0));
  return idcg == 0.0 ? 0.0 : dcg / idcg;
}

}  // namespace

TEST_CASE("ndcg worked example") {
  Qrels qrels;
  qrels.add("q1", "A", 3);
  qrels.add("q1", "B", 2);
  qrels.add("q1", "C", 0);
  RunList run;
  run.add("q1", "B", 0.9);
  run.add("q1", "A", 0.8);
  run.add("q1", "C", 0.7);
  run.sort_entries();

  const auto result = ndcg_at_k(qrels, run, 10);
  const double expected = (3.0 / 1.0 + 7.0 / std::log2(3.0)) /
                          (7.0 / 1.0 + 3.0 / std::log2(3.0));
  CHECK(result.per_query.at("q1") == doctest::Approx(expected).epsilon(1e-12));
  CHECK(result.per_query.at("q1") == doctest::Approx(0.8340).epsilon(1e-4));
}

TEST_CASE("perfect ranking scores exactly 1") {
  Qrels qrels;
  qrels.add("q", "d1", 3);
  qrels.add("q", "d2", 1);
  qrels.add("q", "d3", 0);
  RunList run;
  run.add("q", "d1", 3.0);
  run.add("q", "d2", 2.0);
  run.add("q", "d3", 1.0);
  run.sort_entries();
  CHECK(ndcg_at_k(qrels, run, 10).per_query.at("q") == 1.0);
}

TEST_CASE("ndcg edge handling") {
  Qrels qrels;
  qrels.add("q1", "A", 1);
  qrels.add("q2", "B", 0);  // no relevant docs: excluded
  RunList run;
  run.add("q1", "A", 1.0);
  run.sort_entries();

  const auto result = ndcg_at_k(qrels, run, 10);
  CHECK(result.evaluated == 1);
  CHECK(result.excluded_no_relevant == 1);
  CHECK(result.per_query.count("q2") == 0);

  // Query with relevant docs but missing from the run scores zero.
  Qrels qrels2;
  qrels2.add("q1", "A", 1);
  qrels2.add("q3", "C", 2);
  const auto result2 = ndcg_at_k(qrels2, run, 10);
  CHECK(result2.per_query.at("q3") == 0.0);
  CHECK(result2.mean == doctest::Approx(0.5).epsilon(1e-12));

  // Run query absent from qrels is an error naming the query.
  RunList stray;
  stray.add("zzz", "A", 1.0);
  CHECK_THROWS_WITH_AS(ndcg_at_k(qrels, stray, 10),
                       doctest::Contains("zzz"), ValidationError);
}

TEST_CASE("ndcg equals the brute-force reference on random instances") {
  std::mt19937 rng(31337);
  for (int trial = 0; trial < 200; ++trial) {
    Qrels qrels;
    RunList run;
    const int n_docs = 1 + static_cast<int>(rng() % 10);
    bool any_rel = false;
    for (int d = 0; d < n_docs; ++d) {
      const int rel = static_cast<int>(rng() % 4);
      any_rel |= rel > 0;
      qrels.add("q", "doc" + std::to_string(d), rel);
    }
    if (!any_rel) qrels.add("q", "docrel", 1 + static_cast<int>(rng() % 3));
    const int n_ranked = 1 + static_cast<int>(rng() % n_docs);
    std::uniform_real_distribution<double> score(0.0, 1.0);
    for (int d = 0; d < n_ranked; ++d)
      run.add("q", "doc" + std::to_string(d), score(rng));
    run.sort_entries();
    const std::size_t k = 1 + rng() % 10;

    const auto result = ndcg_at_k(qrels, run, k);
    const double expected = ndcg_reference(qrels, "q", run.by_query.at("q"), k);
    CHECK(std::abs(result.per_query.at("q") - expected) <= 1e-12);
  }
}

TEST_CASE("ndcg is invariant under order-preserving affine score maps") {
  std::mt19937 rng(555);
  Qrels qrels;
  for (int d = 0; d < 8; ++d) qrels.add("q", "doc" + std::to_string(d), d % 3);
  RunList run, scaled;
  std::uniform_real_distribution<double> score(0.0, 1.0);
  for (int d = 0; d < 8; ++d) {
    const double s = score(rng);
    run.add("q", "doc" + std::to_string(d), s);
    scaled.add("q", "doc" + std::to_string(d), 100.0 * s + 5.0);
  }
  run.sort_entries();
  scaled.sort_entries();
  CHECK(ndcg_at_k(qrels, run, 5).per_query.at("q") ==
        ndcg_at_k(qrels, scaled, 5).per_query.at("q"));
}

TEST_CASE("force_insert_positives") {
  Qrels qrels;
  qrels.add("q", "present", 2);
  qrels.add("q", "missing1", 1);
  qrels.add("q", "missing2", 3);
  qrels.add("q", "irrelevant", 0);
  RunList run;
  run.add("q", "present", 0.9);
  run.add("q", "other", 0.5);
  run.sort_entries();

  const auto inserted = force_insert_positives(run, qrels, 100);
  const auto& entries = inserted.by_query.at("q");
  REQUIRE(entries.size() == 4);  // two missing positives appended
  CHECK(entries[0].doc_id == "present");
  CHECK(entries[1].doc_id == "other");
  CHECK(entries[2].doc_id == "missing1");  // qrels order
  CHECK(entries[3].doc_id == "missing2");

  // Present positives leave the run unchanged.
  Qrels only_present;
  only_present.add("q", "present", 1);
  CHECK(force_insert_positives(run, only_present, 100).by_query.at("q").size() == 2);

  // The metric then sees every annotated positive.
  const auto result = ndcg_at_k(qrels, inserted, 10);
  CHECK(result.per_query.at("q") > 0.0);
}

TEST_CASE("trec parsers round-trip the worked fixture") {
  const auto qrels_path = write_temp("qrels.txt",
                                     "q1 0 A 3\n"
                                     "q1 0 B 2\n"
                                     "q1 0 C 0\n"
                                     "q2 0 D 1\n");
  const auto run_path = write_temp("run.txt",
                                   "q1 Q0 B 1 0.9 tag\n"
                                   "q1 Q0 A 2 0.8 tag\n"
                                   "q1 Q0 C 3 0.7 tag\n"
                                   "q2 Q0 D 1 0.6 tag\n");
  const Qrels qrels = parse_qrels(qrels_path);
  const RunList run = parse_run(run_path);
  CHECK(qrels.by_query.size() == 2);
  CHECK(run.by_query.at("q1").front().doc_id == "B");
  const auto result = ndcg_at_k(qrels, run, 10);
  CHECK(result.evaluated == 2);
  fs::remove(qrels_path);
  fs::remove(run_path);
}

TEST_CASE("trec parsers report the offending line") {
  const auto bad_run = write_temp("bad_run.txt",
                                  "q1 Q0 A 1 0.9 tag\n"
                                  "q1 Q0 B 2 not_a_score tag\n");
  CHECK_THROWS_WITH_AS(parse_run(bad_run), doctest::Contains(":2"), ValidationError);
  fs::remove(bad_run);

  const auto dup_qrels = write_temp("dup_qrels.txt",
                                    "q1 0 A 1\n"
                                    "q1 0 A 2\n");
  CHECK_THROWS_AS(parse_qrels(dup_qrels), ValidationError);
  fs::remove(dup_qrels);
}

TEST_CASE("pearson fixtures and properties") {
  CHECK(pearson({1, 2, 3}, {1, 2, 3}) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(pearson({1, 2, 3}, {3, 2, 1}) == doctest::Approx(-1.0).epsilon(1e-12));
  // Hand-computed: x={1,2,3,4}, y={2,4,5,9}: sxy=11, sxx=5, syy=26.
  const double r = pearson({1, 2, 3, 4}, {2, 4, 5, 9});
  CHECK(r == doctest::Approx(11.0 / std::sqrt(5.0 * 26.0)).epsilon(1e-12));

  std::mt19937 rng(8);
  std::uniform_real_distribution<double> value(-5.0, 5.0);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> x(10), y(10);
    for (int i = 0; i < 10; ++i) {
      x[i] = value(rng);
      y[i] = value(rng);
    }
    CHECK(pearson(x, y) == doctest::Approx(pearson(y, x)).epsilon(1e-12));
    std::vector<double> scaled = x;
    for (auto& v : scaled) v = 3.0 * v + 1.0;
    CHECK(pearson(scaled, y) == doctest::Approx(pearson(x, y)).epsilon(1e-9));
    for (auto& v : scaled) v = -v;
    CHECK(pearson(scaled, y) == doctest::Approx(-pearson(x, y)).epsilon(1e-9));
  }
  CHECK_THROWS_AS(pearson({1, 1, 1}, {1, 2, 3}), ValidationError);
}

namespace {

// Rank-sum AUC with midranks for ties: the independent oracle.
double auc_rank_sum(const std::vector<double>& scores, const std::vector<int>& labels) {
  std::vector<std::size_t> order(scores.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  std::vector<double> rank(scores.size());
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j + 1 < order.size() && scores[order[j + 1]] == scores[order[i]]) ++j;
    const double mid = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t t = i; t <= j; ++t) rank[order[t]] = mid;
    i = j + 1;
  }
  double pos_rank_sum = 0.0;
  std::size_t pos = 0;
  for (std::size_t t = 0; t < labels.size(); ++t) {
    if (labels[t] != 0) {
      pos_rank_sum += rank[t];
      ++pos;
    }
  }
  const std::size_t neg = labels.size() - pos;
  return (pos_rank_sum - static_cast<double>(pos) * (pos + 1) / 2.0) /
         (static_cast<double>(pos) * static_cast<double>(neg));
}

}  // namespace

TEST_CASE("auc fixtures") {
  CHECK(auc_pair_counting({0.9, 0.8, 0.3, 0.1}, {1, 1, 0, 0}) == 1.0);
  CHECK(auc_pair_counting({0.6, 0.4}, {0, 1}) == 0.0);
  CHECK(auc_pair_counting({0.5, 0.5}, {1, 0}) == 0.5);
  CHECK_THROWS_AS(auc_pair_counting({0.5, 0.6}, {1, 1}), ValidationError);
}

TEST_CASE("pair-counting auc equals rank-sum auc on random instances") {
  std::mt19937 rng(2718);
  std::uniform_real_distribution<double> score(0.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 4 + static_cast<int>(rng() % 30);
    std::vector<double> scores(n);
    std::vector<int> labels(n);
    bool has_pos = false, has_neg = false;
    for (int i = 0; i < n; ++i) {
      // Coarse grid so ties actually occur.
      scores[i] = std::floor(score(rng) * 8.0) / 8.0;
      labels[i] = static_cast<int>(rng() % 2);
      (labels[i] ? has_pos : has_neg) = true;
    }
    if (!has_pos) labels[0] = 1;
    if (!has_neg) labels[1] = 0;
    CHECK(std::abs(auc_pair_counting(scores, labels) - auc_rank_sum(scores, labels)) <=
          1e-12);
  }
}

TEST_CASE("checkpoint metrics fixtures") {
  const std::vector<double> scores{0.9, 0.8, 0.3, 0.1};
  const std::vector<double> teacher{0.9, 0.8, 0.3, 0.1};
  const std::vector<int> labels{1, 1, 0, 0};
  const auto m = checkpoint_metrics(scores, teacher, labels);
  REQUIRE(m.pearson_teacher.has_value());
  CHECK(*m.pearson_teacher == doctest::Approx(1.0).epsilon(1e-12));
  REQUIRE(m.auc.has_value());
  CHECK(*m.auc == 1.0);
  CHECK(m.accuracy_at_half == 1.0);
  REQUIRE(m.pearson_label.has_value());
  CHECK(*m.pearson_label > 0.9);

  // Threshold is inclusive: score 0.5 predicts positive.
  const auto m2 = checkpoint_metrics({0.5, 0.4}, {0.6, 0.2}, {1, 0});
  CHECK(m2.accuracy_at_half == 1.0);

  // Single-class labels: AUC absent, the rest computed.
  const auto m3 = checkpoint_metrics({0.7, 0.6}, {0.8, 0.5}, {1, 1});
  CHECK_FALSE(m3.auc.has_value());
  CHECK_FALSE(m3.pearson_label.has_value());  // zero-variance labels
  CHECK(m3.pearson_teacher.has_value());
  CHECK(m3.accuracy_at_half == 1.0);

  // Zero-variance scores: Pearsons absent, accuracy still defined.
  const auto m4 = checkpoint_metrics({0.5, 0.5, 0.5}, {0.9, 0.5, 0.1}, {1, 0, 1});
  CHECK_FALSE(m4.pearson_teacher.has_value());
  CHECK_FALSE(m4.pearson_label.has_value());
  REQUIRE(m4.auc.has_value());
  CHECK(*m4.auc == 0.5);
}
