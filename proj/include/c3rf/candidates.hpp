#pragma once

#include <cstdint>
#include <vector>

#include "c3rf/graph.hpp"
#include "c3rf/infer.hpp"

namespace c3rf {

struct Candidate {
  Configuration labels;
  double score = 0.0;   // unaugmented model score
  double weight = 1.0;  // positive multiplicative weight
};

struct CandidateSet {
  std::vector<Candidate> items;
  double lambda = 0.0;
  bool heuristic_map = false;  // true when produced by the max-product solver

  bool empty() const { return items.empty(); }
  int size() const { return static_cast<int>(items.size()); }
};

enum class MapSolver { exhaustive, max_product };

// Diverse MAP solutions: each round maximizes the model score plus
// lambda * (Hamming distance to every previous solution), implemented as
// accumulated unary perturbations. Recorded scores are unaugmented. With
// lambda = 0 all rounds return the MAP.
CandidateSet divmbest(const GibbsModel& model, int num_solutions, double lambda,
                      MapSolver solver = MapSolver::exhaustive, const BPSettings& settings = {},
                      std::uint64_t cap = kDefaultEnumerationCap);

// Keeps the first occurrences of distinct configurations, in order, until
// target unique items are found. If fewer unique items exist, duplicate slots
// are retained (up to target) and the weights of dropped occurrences fold
// into the first kept slot of the same configuration.
CandidateSet first_unique(const CandidateSet& set, int target);

}  // namespace c3rf
