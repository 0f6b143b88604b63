#pragma once

#include <vector>

#include "rankkit/errors.hpp"

namespace rankkit {

// Logits at the position whose next-token prediction is the label token.
struct LabelLogits {
  double l_yes = 0.0;
  double l_no = 0.0;
};

enum class TeacherSource { commercial_api, self_distillation, cached_file };

struct TeacherScore {
  double y = 0.0;  // in [0, 1]
  TeacherSource source = TeacherSource::cached_file;

  void validate() const;
};

// Per-token log-probabilities of one SFT target with its supervision mask.
struct SftTarget {
  std::vector<double> token_logprobs;  // each <= 0
  std::vector<bool> mask;              // true = supervised position

  void validate() const;
};

struct LossWeights {
  double gamma_point = 20.0;
  double gamma_sft = 1.0;

  void validate() const;
};

enum class KlDirection { teacher_student, student_teacher };

namespace scorer {

// Calibrated relevance probability: logistic(l_yes - l_no), strictly in (0,1).
double relevance_score(const LabelLogits& logits);

// Squared error against the teacher score.
double loss_point(double s, const TeacherScore& teacher);

// Negative sum of supervised log-probabilities; unmasked positions
// contribute zero. At least one supervised position required.
double loss_sft(const SftTarget& target);

// gamma_point * lp + gamma_sft * ls.
double loss_total(double lp, double ls, const LossWeights& weights);

// Scores in (0,1) are mapped back to logits via the inverse logistic
// (inputs clamped to [1e-7, 1-1e-7] before inversion), softened by the
// temperature, normalized with softmax, and compared with KL; the result is
// scaled by T^2 to restore gradient scale. Direction defaults to
// KL(teacher || student), the usual distillation orientation.
double loss_listwise_kl(const std::vector<double>& student_scores,
                        const std::vector<double>& teacher_scores,
                        double temperature = 2.0,
                        KlDirection direction = KlDirection::teacher_student);

// Weighted InfoNCE over one positive and the remaining negatives. Each
// negative j is weighted by w_j = 1 - (y_pos - y_j), clamped to
// [margin_epsilon, 1] and renormalized to mean 1, so hard negatives (small
// teacher margin) receive more gradient.
double loss_rank_infonce(const std::vector<double>& student_scores,
                         const std::vector<double>& teacher_scores,
                         std::size_t positive_index,
                         double margin_epsilon = 0.1);

// ln(p / (1-p)) with p clamped to [1e-7, 1-1e-7] first; keeps cached
// scores that were rounded to the boundary finite.
double inverse_logistic(double p);

double logistic(double x);

}  // namespace scorer
}  // namespace rankkit
