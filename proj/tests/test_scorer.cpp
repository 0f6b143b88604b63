#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "rankkit/scorer.hpp"

using namespace rankkit;
using namespace rankkit::scorer;

TEST_CASE("relevance_score basics") {
  CHECK(relevance_score({3.0, 3.0}) == doctest::Approx(0.5).epsilon(1e-15));
  // Direct logistic evaluation 1/(1+e^-2).
  CHECK(relevance_score({2.0, 0.0}) ==
        doctest::Approx(0.8807970779778823).epsilon(1e-12));
  const double tiny = relevance_score({0.0, 50.0});
  CHECK(tiny > 0.0);
  CHECK(tiny < 1e-20);
  CHECK_THROWS_AS(relevance_score({std::nan(""), 0.0}), ValidationError);
  CHECK_THROWS_AS(relevance_score({0.0, INFINITY}), ValidationError);
}

TEST_CASE("relevance_score symmetry and shift invariance") {
  std::mt19937_64 rng(123);
  std::uniform_real_distribution<double> logits(-20.0, 20.0);
  for (int trial = 0; trial < 1000; ++trial) {
    const double a = logits(rng), b = logits(rng), c = logits(rng);
    const double s_ab = relevance_score({a, b});
    const double s_ba = relevance_score({b, a});
    CHECK(std::abs(s_ab + s_ba - 1.0) <= 1e-12);
    CHECK(std::abs(relevance_score({a + c, b + c}) - s_ab) <= 1e-12);
  }
}

TEST_CASE("loss_point") {
  CHECK(loss_point(0.5, {0.5, TeacherSource::cached_file}) == 0.0);
  CHECK(loss_point(0.8, {0.5, TeacherSource::cached_file}) ==
        doctest::Approx(0.09).epsilon(1e-12));
  CHECK(loss_point(0.0, {1.0, TeacherSource::cached_file}) == 1.0);
  CHECK_THROWS_AS(loss_point(0.5, {1.3, TeacherSource::commercial_api}), ValidationError);
}

TEST_CASE("loss_point gradient matches central finite differences") {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> unit(0.05, 0.95);
  const double h = 1e-6;
  for (int trial = 0; trial < 10; ++trial) {
    const double s = unit(rng);
    const TeacherScore y{unit(rng), TeacherSource::cached_file};
    const double numeric = (loss_point(s + h, y) - loss_point(s - h, y)) / (2 * h);
    const double analytic = 2.0 * (s - y.y);
    CHECK(numeric == doctest::Approx(analytic).epsilon(1e-6));
  }
}

TEST_CASE("loss_sft sums masked log-probabilities") {
  SftTarget target;
  target.token_logprobs = {-1.0, -2.0, -3.0};
  target.mask = {false, true, true};
  CHECK(loss_sft(target) == doctest::Approx(5.0).epsilon(1e-15));

  SftTarget single;
  single.token_logprobs = {-0.1};
  single.mask = {true};
  CHECK(loss_sft(single) == doctest::Approx(0.1).epsilon(1e-15));

  SftTarget perfect;
  perfect.token_logprobs = {0.0, 0.0};
  perfect.mask = {true, true};
  CHECK(loss_sft(perfect) == 0.0);

  SftTarget unmasked;
  unmasked.token_logprobs = {-1.0};
  unmasked.mask = {false};
  CHECK_THROWS_AS(loss_sft(unmasked), ValidationError);

  SftTarget mismatched;
  mismatched.token_logprobs = {-1.0, -2.0};
  mismatched.mask = {true};
  CHECK_THROWS_AS(loss_sft(mismatched), ValidationError);

  SftTarget positive_lp;
  positive_lp.token_logprobs = {0.5};
  positive_lp.mask = {true};
  CHECK_THROWS_AS(loss_sft(positive_lp), ValidationError);
}

TEST_CASE("loss_total with the default weights") {
  const LossWeights defaults;
  CHECK(defaults.gamma_point == 20.0);
  CHECK(defaults.gamma_sft == 1.0);
  CHECK(loss_total(0.09, 5.0, defaults) == doctest::Approx(6.8).epsilon(1e-12));
  CHECK(loss_total(0.0, 0.0, defaults) == 0.0);

  LossWeights doubled;
  doubled.gamma_point = 40.0;
  const double base = loss_total(0.25, 1.0, defaults);
  const double big = loss_total(0.25, 1.0, doubled);
  CHECK(big - base == doctest::Approx(20.0 * 0.25).epsilon(1e-12));

  LossWeights bad;
  bad.gamma_point = 0.0;
  CHECK_THROWS_AS(loss_total(1.0, 1.0, bad), ValidationError);
}

namespace {

// Independent two-point reference: softened Bernoulli-style distributions
// computed straight from the definition.
double two_point_kl_reference(double t1, double t2, double s1, double s2, double T) {
  const auto logit = [](double p) { return std::log(p / (1.0 - p)); };
  const double ta = std::exp(logit(t1) / T), tb = std::exp(logit(t2) / T);
  const double sa = std::exp(logit(s1) / T), sb = std::exp(logit(s2) / T);
  const double p1 = ta / (ta + tb), p2 = tb / (ta + tb);
  const double q1 = sa / (sa + sb), q2 = sb / (sa + sb);
  return T * T * (p1 * std::log(p1 / q1) + p2 * std::log(p2 / q2));
}

}  // namespace

TEST_CASE("loss_listwise_kl") {
  SUBCASE("zero at equality") {
    const std::vector<double> scores{0.9, 0.4, 0.2, 0.1};
    CHECK(loss_listwise_kl(scores, scores, 2.0) == doctest::Approx(0.0).epsilon(1e-15));
  }
  SUBCASE("matches the independent two-point reference") {
    const std::vector<double> teacher{0.9, 0.1};
    const std::vector<double> student{0.5, 0.5};
    const double expected = two_point_kl_reference(0.9, 0.1, 0.5, 0.5, 2.0);
    CHECK(loss_listwise_kl(student, teacher, 2.0) ==
          doctest::Approx(expected).epsilon(1e-12));
  }
  SUBCASE("non-negative on random instances, positive when perturbed") {
    std::mt19937_64 rng(4242);
    std::uniform_real_distribution<double> unit(0.01, 0.99);
    std::uniform_int_distribution<int> group(2, 8);
    for (int trial = 0; trial < 100; ++trial) {
      const int n = group(rng);
      std::vector<double> teacher(n), student(n);
      for (int i = 0; i < n; ++i) {
        teacher[i] = unit(rng);
        student[i] = unit(rng);
      }
      CHECK(loss_listwise_kl(student, teacher, 2.0) >= -1e-12);
    }
    std::vector<double> teacher{0.8, 0.3, 0.3};
    std::vector<double> student = teacher;
    student[0] = 0.5;
    CHECK(loss_listwise_kl(student, teacher, 2.0) > 1e-6);
  }
  SUBCASE("direction flag flips the arguments") {
    const std::vector<double> teacher{0.9, 0.2, 0.4};
    const std::vector<double> student{0.6, 0.3, 0.5};
    const double ts = loss_listwise_kl(student, teacher, 2.0, KlDirection::teacher_student);
    const double st = loss_listwise_kl(student, teacher, 2.0, KlDirection::student_teacher);
    CHECK(ts != doctest::Approx(st).epsilon(1e-9));
    CHECK(loss_listwise_kl(teacher, student, 2.0, KlDirection::student_teacher) ==
          doctest::Approx(ts).epsilon(1e-12));
  }
  SUBCASE("validation") {
    CHECK_THROWS_AS(loss_listwise_kl({0.5}, {0.5}, 2.0), ValidationError);
    CHECK_THROWS_AS(loss_listwise_kl({0.5, 0.4}, {0.5}, 2.0), ValidationError);
    CHECK_THROWS_AS(loss_listwise_kl({0.0, 0.4}, {0.5, 0.4}, 2.0), ValidationError);
    CHECK_THROWS_AS(loss_listwise_kl({0.5, 0.4}, {1.0, 0.4}, 2.0), ValidationError);
    CHECK_THROWS_AS(loss_listwise_kl({0.5, 0.4}, {0.5, 0.4}, 0.0), ValidationError);
  }
}

TEST_CASE("loss_rank_infonce") {
  SUBCASE("equal scores with one negative give ln 2") {
    CHECK(loss_rank_infonce({1.3, 1.3}, {0.9, 0.9}, 0) ==
          doctest::Approx(std::log(2.0)).epsilon(1e-12));
  }
  SUBCASE("saturates to zero for a huge student margin") {
    CHECK(loss_rank_infonce({40.0, 0.0}, {0.9, 0.1}, 0) < 1e-12);
  }
  SUBCASE("strictly decreasing in the positive score") {
    const std::vector<double> teacher{0.9, 0.5, 0.2};
    double previous = loss_rank_infonce({0.0, 0.3, 0.1}, teacher, 0);
    for (double bump = 0.5; bump < 3.0; bump += 0.5) {
      const double current = loss_rank_infonce({bump, 0.3, 0.1}, teacher, 0);
      CHECK(current < previous);
      previous = current;
    }
  }
  SUBCASE("hard negatives weigh more than easy ones") {
    // Same student scores; the hard-margin variant must lose at least as much.
    const double hard = loss_rank_infonce({1.0, 0.5, 0.5}, {0.9, 0.85, 0.85}, 0);
    const double easy = loss_rank_infonce({1.0, 0.5, 0.5}, {0.9, 0.05, 0.05}, 0);
    // Weights renormalize to mean one, so uniform margins coincide.
    CHECK(hard == doctest::Approx(easy).epsilon(1e-12));
    const double mixed = loss_rank_infonce({1.0, 0.9, 0.1}, {0.9, 0.85, 0.05}, 0);
    const double flipped = loss_rank_infonce({1.0, 0.9, 0.1}, {0.9, 0.05, 0.85}, 0);
    CHECK(mixed > flipped);  // more weight on the strong hard negative hurts more
  }
  SUBCASE("validation") {
    CHECK_THROWS_AS(loss_rank_infonce({1.0, 0.5}, {0.9, 0.1}, 2), ValidationError);
    CHECK_THROWS_AS(loss_rank_infonce({1.0}, {0.9}, 0), ValidationError);
    CHECK_THROWS_AS(loss_rank_infonce({1.0, 0.5}, {0.9}, 0), ValidationError);
  }
}

TEST_CASE("inverse_logistic clamps the boundary") {
  CHECK(std::isfinite(inverse_logistic(0.0)));
  CHECK(std::isfinite(inverse_logistic(1.0)));
  CHECK(inverse_logistic(0.5) == doctest::Approx(0.0).epsilon(1e-15));
  const double x = 0.73;
  CHECK(logistic(inverse_logistic(x)) == doctest::Approx(x).epsilon(1e-12));
}
