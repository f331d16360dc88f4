#include "c3rf/candidates.hpp"

#include <map>
#include <string>
#include <utility>
#include <vector>

namespace c3rf {

CandidateSet divmbest(const GibbsModel& model, int num_solutions, double lambda, MapSolver solver,
                      const BPSettings& settings, std::uint64_t cap) {
  if (num_solutions < 1) fail(ErrorCode::invalid_argument, "need at least one solution");
  if (lambda < 0.0) fail(ErrorCode::invalid_argument, "diversity weight must be >= 0");

  const FactorGraph& g = model.graph;
  const int n = g.num_variables();

  // accumulated unary perturbations: lambda per disagreement with each
  // previous solution
  std::vector<std::vector<double>> aug;
  aug.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i)
    aug.emplace_back(static_cast<std::size_t>(g.cardinality(i)), 0.0);

  CandidateSet out;
  out.lambda = lambda;
  out.heuristic_map = solver == MapSolver::max_product;

  for (int m = 0; m < num_solutions; ++m) {
    std::vector<VariableSpec> vars = g.variables;
    std::vector<FactorSpec> factors = g.factors;
    for (int i = 0; i < n; ++i) {
      FactorSpec f;
      f.id = static_cast<int>(factors.size());
      f.scope = {i};
      f.table = aug[static_cast<std::size_t>(i)];
      factors.push_back(std::move(f));
    }
    GibbsModel augmented = make_model(build_graph(std::move(vars), std::move(factors)),
                                      model.temperature);

    Configuration y = solver == MapSolver::exhaustive ? map_exhaustive(augmented, cap)
                                                      : map_maxproduct(augmented, settings);
    out.items.push_back(Candidate{y, score(model, y), 1.0});

    for (int i = 0; i < n; ++i) {
      for (int k = 0; k < g.cardinality(i); ++k) {
        if (k != y[static_cast<std::size_t>(i)]) aug[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)] += lambda;
      }
    }
  }
  return out;
}

CandidateSet first_unique(const CandidateSet& set, int target) {
  if (target < 1) fail(ErrorCode::invalid_argument, "target must be >= 1");
  if (set.empty()) fail(ErrorCode::empty_candidate_set, "no candidates to filter");

  CandidateSet out;
  out.lambda = set.lambda;
  out.heuristic_map = set.heuristic_map;

  std::map<Configuration, int> seen;  // configuration -> first occurrence index
  int unique_count = 0;
  for (std::size_t i = 0; i < set.items.size(); ++i) {
    if (seen.emplace(set.items[i].labels, static_cast<int>(i)).second) ++unique_count;
  }

  std::vector<bool> keep(set.items.size(), false);
  if (unique_count >= target) {
    // plain dedupe: first occurrences of the first `target` distinct items
    int taken = 0;
    std::map<Configuration, bool> done;
    for (std::size_t i = 0; i < set.items.size() && taken < target; ++i) {
      if (done.emplace(set.items[i].labels, true).second) {
        keep[i] = true;
        ++taken;
      }
    }
    for (std::size_t i = 0; i < set.items.size(); ++i)
      if (keep[i]) out.items.push_back(set.items[i]);
    return out;
  }

  // fewer unique than requested: keep every first occurrence, fill the
  // remaining slots with duplicates in scan order, and fold the weight of
  // each dropped occurrence into the first kept slot of its configuration
  int slots = unique_count;
  for (std::size_t i = 0; i < set.items.size(); ++i) {
    if (seen.at(set.items[i].labels) == static_cast<int>(i)) {
      keep[i] = true;
    } else if (slots < target) {
      keep[i] = true;
      ++slots;
    }
  }
  std::map<Configuration, int> kept_slot;
  for (std::size_t i = 0; i < set.items.size(); ++i) {
    if (keep[i]) {
      kept_slot.emplace(set.items[i].labels, static_cast<int>(out.items.size()));
      out.items.push_back(set.items[i]);
    } else {
      out.items[static_cast<std::size_t>(kept_slot.at(set.items[i].labels))].weight +=
          set.items[i].weight;
    }
  }
  return out;
}

}  // namespace c3rf
