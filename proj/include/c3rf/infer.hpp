#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "c3rf/enumerate.hpp"
#include "c3rf/graph.hpp"

namespace c3rf {

using NodeMarginals = std::vector<std::vector<double>>;

struct BPSettings {
  int max_iterations = 200;
  double convergence_tol = 1e-8;
  // log-space damping factor in [0, 1); unset selects 0 on forests and 0.5 on
  // loopy graphs
  std::optional<double> damping;
};

struct Marginals {
  NodeMarginals node;                        // per-variable label distributions
  std::vector<std::vector<double>> factor;   // per-factor joint tables, row-major
  bool converged = false;
  int iterations = 0;
};

// Log-space sum-product with a sequential round-robin schedule over edges in
// (variable id, factor id) order. Non-convergence is reported through the
// flag, not an error. Throws all_configurations_forbidden when a message or
// belief has no finite entry.
Marginals sum_product(const GibbsModel& model, const BPSettings& settings = {});

// Bethe free-energy estimate of log Z for weights exp(score/T), computed from
// converged beliefs. Exact on forests.
double bethe_log_z(const GibbsModel& model, const Marginals& m);

// Enumeration oracles.
double exact_log_z(const GibbsModel& model, std::uint64_t cap = kDefaultEnumerationCap);
Marginals exact_marginals(const GibbsModel& model, std::uint64_t cap = kDefaultEnumerationCap);

// Exhaustive MAP; ties broken toward the lexicographically smallest
// configuration.
Configuration map_exhaustive(const GibbsModel& model, std::uint64_t cap = kDefaultEnumerationCap);

// Max-product decoding: per-variable belief argmax, ties toward the smallest
// label. Exact on forests with tie-free potentials, heuristic on loopy graphs.
Configuration map_maxproduct(const GibbsModel& model, const BPSettings& settings = {});

}  // namespace c3rf
