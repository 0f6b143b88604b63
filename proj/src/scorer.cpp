#include "rankkit/scorer.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace rankkit {

void TeacherScore::validate() const {
  if (!std::isfinite(y) || y < 0.0 || y > 1.0)
    throw ValidationError("teacher score out of [0,1]: " + std::to_string(y));
}

void SftTarget::validate() const {
  if (token_logprobs.size() != mask.size())
    throw ValidationError("sft target: logprobs and mask lengths differ");
  for (double lp : token_logprobs) {
    if (!std::isfinite(lp) || lp > 0.0)
      throw ValidationError("sft target: log-probability must be finite and <= 0");
  }
}

void LossWeights::validate() const {
  if (!(gamma_point > 0.0) || !(gamma_sft > 0.0))
    throw ValidationError("loss weights must be positive");
}

namespace scorer {

double logistic(double x) {
  if (x >= 0.0) {
    return 1.0 / (1.0 + std::exp(-x));
  }
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double inverse_logistic(double p) {
  const double clamped = std::clamp(p, 1e-7, 1.0 - 1e-7);
  return std::log(clamped / (1.0 - clamped));
}

double relevance_score(const LabelLogits& logits) {
  if (!std::isfinite(logits.l_yes) || !std::isfinite(logits.l_no))
    throw ValidationError("label logits must be finite");
  return logistic(logits.l_yes - logits.l_no);
}

double loss_point(double s, const TeacherScore& teacher) {
  teacher.validate();
  const double d = s - teacher.y;
  return d * d;
}

double loss_sft(const SftTarget& target) {
  target.validate();
  bool any = false;
  double sum = 0.0;
  for (std::size_t i = 0; i < target.mask.size(); ++i) {
    if (!target.mask[i]) continue;
    any = true;
    sum -= target.token_logprobs[i];
  }
  if (!any) throw ValidationError("sft target: mask supervises no position");
  return sum;
}

double loss_total(double lp, double ls, const LossWeights& weights) {
  weights.validate();
  if (lp < 0.0 || ls < 0.0) throw ValidationError("loss terms must be non-negative");
  return weights.gamma_point * lp + weights.gamma_sft * ls;
}

namespace {

std::vector<double> softmax(const std::vector<double>& logits) {
  const double m = *std::max_element(logits.begin(), logits.end());
  std::vector<double> out(logits.size());
  double z = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    out[i] = std::exp(logits[i] - m);
    z += out[i];
  }
  for (double& v : out) v /= z;
  return out;
}

std::vector<double> softened_distribution(const std::vector<double>& scores,
                                          double temperature) {
  std::vector<double> logits(scores.size());
  for (std::size_t i = 0; i < scores.size(); ++i)
    logits[i] = inverse_logistic(scores[i]) / temperature;
  return softmax(logits);
}

double kl_divergence(const std::vector<double>& p, const std::vector<double>& q) {
  double kl = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) kl += p[i] * std::log(p[i] / q[i]);
  return kl;
}

void check_score_list(const std::vector<double>& scores, const char* name) {
  for (double s : scores) {
    if (!std::isfinite(s) || s <= 0.0 || s >= 1.0)
      throw ValidationError(std::string(name) +
                            " scores must lie strictly inside (0,1)");
  }
}

}  // namespace

double loss_listwise_kl(const std::vector<double>& student_scores,
                        const std::vector<double>& teacher_scores,
                        double temperature, KlDirection direction) {
  if (student_scores.size() != teacher_scores.size())
    throw ValidationError("listwise kl: score lists must have equal length");
  if (student_scores.size() < 2)
    throw ValidationError("listwise kl: need at least 2 documents");
  if (!(temperature > 0.0)) throw ValidationError("listwise kl: temperature must be positive");
  check_score_list(student_scores, "student");
  check_score_list(teacher_scores, "teacher");

  const auto student = softened_distribution(student_scores, temperature);
  const auto teacher = softened_distribution(teacher_scores, temperature);
  const double kl = direction == KlDirection::teacher_student
                        ? kl_divergence(teacher, student)
                        : kl_divergence(student, teacher);
  return temperature * temperature * kl;
}

double loss_rank_infonce(const std::vector<double>& student_scores,
                         const std::vector<double>& teacher_scores,
                         std::size_t positive_index, double margin_epsilon) {
  if (student_scores.size() != teacher_scores.size())
    throw ValidationError("rank infonce: score lists must have equal length");
  if (student_scores.size() < 2)
    throw ValidationError("rank infonce: need at least 2 documents");
  if (positive_index >= student_scores.size())
    throw ValidationError("rank infonce: positive_index out of range");
  if (!(margin_epsilon > 0.0) || margin_epsilon > 1.0)
    throw ValidationError("rank infonce: margin_epsilon must lie in (0,1]");

  const double y_pos = teacher_scores[positive_index];
  std::vector<double> weights;
  weights.reserve(student_scores.size() - 1);
  for (std::size_t j = 0; j < teacher_scores.size(); ++j) {
    if (j == positive_index) continue;
    const double w = 1.0 - (y_pos - teacher_scores[j]);
    weights.push_back(std::clamp(w, margin_epsilon, 1.0));
  }
  double mean = 0.0;
  for (double w : weights) mean += w;
  mean /= static_cast<double>(weights.size());
  for (double& w : weights) w /= mean;

  // log-sum-exp over {s_pos} union {s_j + ln w_j}.
  const double s_pos = student_scores[positive_index];
  double m = s_pos;
  std::vector<double> terms;
  terms.reserve(weights.size());
  std::size_t wi = 0;
  for (std::size_t j = 0; j < student_scores.size(); ++j) {
    if (j == positive_index) continue;
    const double t = student_scores[j] + std::log(weights[wi++]);
    terms.push_back(t);
    m = std::max(m, t);
  }
  double z = std::exp(s_pos - m);
  for (double t : terms) z += std::exp(t - m);
  return -(s_pos - m - std::log(z));
}

}  // namespace scorer
}  // namespace rankkit
