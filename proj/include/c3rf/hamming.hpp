#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "c3rf/graph.hpp"
#include "c3rf/infer.hpp"

namespace c3rf {

struct HammingBall {
  Configuration center;
  int radius = 0;
};

int hamming_distance(const Configuration& a, const Configuration& b);

// Number of configurations within the given Hamming radius of a center, for n
// variables with a uniform label count k: sum_{d<=R} C(n,d) (k-1)^d.
std::uint64_t ball_volume(int n, int k, int radius);

// One node of a count-aggregation tree. Leaves carry an explicit
// state -> count map (how many disagreements that leaf state contributes);
// internal nodes are auxiliary count variables whose state equals the clipped
// sum of their children's counts.
struct CountNode {
  int var = -1;
  std::vector<int> state_count;  // leaves only
  int left = -1;
  int right = -1;

  bool is_leaf() const { return left < 0; }
};

struct CountingTree {
  std::vector<CountNode> nodes;
  int root = -1;

  bool empty() const { return root < 0; }
};

// Multi-label model rewritten over binary indicators b_{i,k} ("variable i
// takes label k"), with a 1-of-K counting gadget per original variable.
struct ExpandedBinaryGraph {
  GibbsModel model;
  std::vector<int> indicator_offset;     // original variable -> id of b_{i,0}
  std::vector<int> original_cardinality;
  std::vector<CountingTree> gadgets;     // one per original variable

  int original_n() const { return static_cast<int>(indicator_offset.size()); }
  int indicator_id(int var, int label) const {
    return indicator_offset[static_cast<std::size_t>(var)] + label;
  }
};

ExpandedBinaryGraph expand_multilabel(const GibbsModel& model);

// Indicator-and-count assignment induced by an original configuration.
Configuration expand_configuration(const ExpandedBinaryGraph& e, const Configuration& y);

// Exact log Z of the expanded model. Gadget count variables are determined by
// the indicators, so the sum runs over the original label space.
double exact_log_z_expanded(const ExpandedBinaryGraph& e,
                            std::uint64_t cap = kDefaultEnumerationCap);

struct HopOptions {
  // Domain cap for auxiliary count variables; counts >= cap share one bucket
  // state. Defaults to radius + 1, which is exact for the hard ball because
  // every count above the radius is forbidden anyway.
  std::optional<int> saturation_cap;
};

struct HammingHopModel {
  GibbsModel model;   // augmented graph: base + count variables + gadget factors
  CountingTree tree;  // distance-count tree, empty when the ball is vacuous
  int original_n = 0;
};

// Attaches a Hamming-ball potential to an already-binary model. For binary
// graphs the tree root sums two subtree counts: disagreements where the
// center is ON and where it is OFF.
HammingHopModel build_hamming_hop(const GibbsModel& model, const HammingBall& ball,
                                  const HopOptions& options = {});
// Same over the center indicators of an expanded multi-label model (distance
// = number of OFF nodes among the indicators that are ON in the center).
HammingHopModel build_hamming_hop(const ExpandedBinaryGraph& e, const HammingBall& ball,
                                  const HopOptions& options = {});

GibbsModel attach_hamming_hop(const GibbsModel& model, const HammingBall& ball,
                              const HopOptions& options = {});
GibbsModel attach_hamming_hop(const ExpandedBinaryGraph& e, const HammingBall& ball,
                              const HopOptions& options = {});

// Fills the count-variable entries of an augmented configuration whose base
// part is already set. Counts above a variable's top state are clipped into
// the bucket state.
void complete_counts(const CountingTree& tree, const FactorGraph& g, Configuration& y);

struct ConstrainedPosterior {
  double log_mass = 0.0;             // Bethe (or exact) log Z of the ball-constrained model
  NodeMarginals node_marginals;      // original label space
  bool converged = false;
};

// Ball-constrained marginals and mass via BP on the augmented graph.
// Multi-label models are expanded first; marginals are read off the
// indicators and renormalized per variable. Raises empty_ball when the
// constrained model has no live configuration.
ConstrainedPosterior constrained_posterior(const GibbsModel& model, const HammingBall& ball,
                                           const BPSettings& settings = {},
                                           const HopOptions& options = {});

// Enumeration oracle over ball members (original label space).
ConstrainedPosterior exact_constrained_oracle(const GibbsModel& model, const HammingBall& ball,
                                              std::uint64_t cap = kDefaultEnumerationCap);

// Importance-style estimate log(V * mean_s exp(score(y_s)/T)) from uniform
// ball samples. Requires a uniform label count across variables.
double sample_mass_uniform_ball(const GibbsModel& model, const HammingBall& ball,
                                int num_samples, std::uint64_t seed);

}  // namespace c3rf
