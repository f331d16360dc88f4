#include "c3rf/loss.hpp"

#include <cmath>
#include <string>
#include <vector>

#include "c3rf/logspace.hpp"

namespace c3rf {

namespace {

void check_lengths(std::size_t a, std::size_t b) {
  if (a != b) fail(ErrorCode::length_mismatch, "configurations differ in length");
}

void check_labels(const Configuration& y, int num_classes) {
  for (int v : y) {
    if (v < 0 || v >= num_classes)
      fail(ErrorCode::invalid_configuration,
           "label " + std::to_string(v) + " outside the " + std::to_string(num_classes) +
               "-class universe");
  }
}

}  // namespace

double hamming_loss(const Configuration& y, const Configuration& yhat) {
  check_lengths(y.size(), yhat.size());
  if (y.empty()) fail(ErrorCode::invalid_argument, "empty configuration");
  int d = 0;
  for (std::size_t i = 0; i < y.size(); ++i) d += (y[i] != yhat[i]) ? 1 : 0;
  return static_cast<double>(d) / static_cast<double>(y.size());
}

double iou_loss(const Configuration& y, const Configuration& yhat, int num_classes) {
  check_lengths(y.size(), yhat.size());
  if (y.empty()) fail(ErrorCode::invalid_argument, "empty configuration");
  if (num_classes < 2) fail(ErrorCode::invalid_argument, "need at least two classes");
  check_labels(y, num_classes);
  check_labels(yhat, num_classes);

  double sum = 0.0;
  int contributing = 0;
  for (int k = 0; k < num_classes; ++k) {
    int inter = 0, uni = 0;
    for (std::size_t i = 0; i < y.size(); ++i) {
      const bool a = y[i] == k, b = yhat[i] == k;
      inter += (a && b) ? 1 : 0;
      uni += (a || b) ? 1 : 0;
    }
    if (uni > 0) {
      sum += static_cast<double>(inter) / static_cast<double>(uni);
      ++contributing;
    }
  }
  return 1.0 - sum / static_cast<double>(contributing);
}

double configuration_loss(const LossSpec& spec, const Configuration& y, const Configuration& yhat) {
  return spec.kind == LossKind::hamming ? hamming_loss(y, yhat)
                                        : iou_loss(y, yhat, spec.num_classes);
}

double fela_hamming(const NodeMarginals& marginals, const Configuration& yhat) {
  check_lengths(marginals.size(), yhat.size());
  if (yhat.empty()) fail(ErrorCode::invalid_argument, "empty configuration");
  double total = 0.0;
  for (std::size_t i = 0; i < yhat.size(); ++i) {
    const auto& p = marginals[i];
    if (yhat[i] < 0 || static_cast<std::size_t>(yhat[i]) >= p.size())
      fail(ErrorCode::invalid_configuration, "label out of range for variable " + std::to_string(i));
    total += 1.0 - p[static_cast<std::size_t>(yhat[i])];
  }
  return total / static_cast<double>(yhat.size());
}

double fela_iou(const NodeMarginals& marginals, const Configuration& yhat, int num_classes) {
  check_lengths(marginals.size(), yhat.size());
  if (yhat.empty()) fail(ErrorCode::invalid_argument, "empty configuration");
  if (num_classes < 2) fail(ErrorCode::invalid_argument, "need at least two classes");
  check_labels(yhat, num_classes);
  for (std::size_t i = 0; i < marginals.size(); ++i) {
    if (marginals[i].size() < static_cast<std::size_t>(num_classes))
      fail(ErrorCode::dimension_mismatch, "marginal vector shorter than the class universe");
  }

  double sum = 0.0;
  int contributing = 0;
  for (int k = 0; k < num_classes; ++k) {
    double inter = 0.0, uni = 0.0;
    for (std::size_t i = 0; i < yhat.size(); ++i) {
      const double p = marginals[i][static_cast<std::size_t>(k)];
      if (yhat[i] == k) {
        inter += p;
        uni += 1.0;
      } else {
        uni += p;
      }
    }
    // same contributing-class rule as iou_loss: skip empty (soft) unions
    if (uni > 0.0) {
      sum += inter / uni;
      ++contributing;
    }
  }
  return 1.0 - sum / static_cast<double>(contributing);
}

double fela(const LossSpec& spec, const NodeMarginals& marginals, const Configuration& yhat) {
  return spec.kind == LossKind::hamming ? fela_hamming(marginals, yhat)
                                        : fela_iou(marginals, yhat, spec.num_classes);
}

double expected_loss_exact(const GibbsModel& model, const Configuration& yhat, const LossSpec& spec,
                           const std::optional<HammingBall>& ball, std::uint64_t cap) {
  validate_configuration(model.graph, yhat);

  // pass 1: normalizer over the (possibly restricted) support
  LogSumAccumulator norm;
  const auto add_weight = [&](const Configuration& y) { norm.add(log_gibbs_weight(model, y)); };
  std::vector<int> cards;
  if (ball) {
    cards.reserve(model.graph.variables.size());
    for (const auto& v : model.graph.variables) cards.push_back(v.cardinality);
    for_each_ball_member(ball->center, cards, ball->radius, add_weight, cap);
  } else {
    for_each_configuration(model.graph, add_weight, cap);
  }
  if (norm.empty())
    fail(ball ? ErrorCode::empty_ball : ErrorCode::all_configurations_forbidden,
         "no live configuration to average over");
  const double log_z = norm.value();

  double expected = 0.0;
  const auto add_loss = [&](const Configuration& y) {
    const double lw = log_gibbs_weight(model, y);
    if (is_neg_inf(lw)) return;
    expected += std::exp(lw - log_z) * configuration_loss(spec, y, yhat);
  };
  if (ball) {
    for_each_ball_member(ball->center, cards, ball->radius, add_loss, cap);
  } else {
    for_each_configuration(model.graph, add_loss, cap);
  }
  return expected;
}

}  // namespace c3rf
