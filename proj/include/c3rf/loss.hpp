#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "c3rf/graph.hpp"
#include "c3rf/hamming.hpp"
#include "c3rf/infer.hpp"

namespace c3rf {

enum class LossKind { hamming, iou };

struct LossSpec {
  LossKind kind = LossKind::hamming;
  int num_classes = 2;  // label universe for iou
};

// Fraction of disagreeing positions.
double hamming_loss(const Configuration& y, const Configuration& yhat);

// 1 - mean over classes of intersection/union; a class contributes only when
// its union is nonempty.
double iou_loss(const Configuration& y, const Configuration& yhat, int num_classes);

double configuration_loss(const LossSpec& spec, const Configuration& y, const Configuration& yhat);

// Factorized expected-loss approximations under per-variable marginals.
// The Hamming form is exact: (1/n) sum_i (1 - P_i(yhat_i)).
double fela_hamming(const NodeMarginals& marginals, const Configuration& yhat);
// Soft intersection/union per class, same contributing-class rule as
// iou_loss. Reduces to iou_loss exactly for point-mass marginals.
double fela_iou(const NodeMarginals& marginals, const Configuration& yhat, int num_classes);

double fela(const LossSpec& spec, const NodeMarginals& marginals, const Configuration& yhat);

// Enumerated E_P[loss(y, yhat)] under the (optionally ball-restricted,
// renormalized) Gibbs distribution.
double expected_loss_exact(const GibbsModel& model, const Configuration& yhat,
                           const LossSpec& spec,
                           const std::optional<HammingBall>& ball = std::nullopt,
                           std::uint64_t cap = kDefaultEnumerationCap);

}  // namespace c3rf
