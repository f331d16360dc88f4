#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "c3rf/candidates.hpp"
#include "c3rf/hamming.hpp"
#include "c3rf/infer.hpp"
#include "c3rf/tune.hpp"

namespace c3rf {

// Ball-mass estimator study on seeded random grids: Bethe versus uniform-ball
// sampling at several sample counts, against the enumeration oracle. The
// radius is drawn uniformly from {1, ..., ceil(sqrt(side))} per run.
struct BetheSweepRow {
  int side = 0;
  int run = 0;
  std::uint64_t seed = 0;
  int radius = 0;
  std::string method;  // "bethe" or "sampling"
  int samples = 0;     // 0 for bethe
  double estimate = 0.0;
  double exact = 0.0;
  double abs_error = 0.0;
  bool converged = true;
};

std::vector<BetheSweepRow> sweep_bethe(const std::vector<int>& sides, int runs,
                                       const std::vector<int>& sample_counts, std::uint64_t seed,
                                       double potential_low = -5.0, double temperature = 1.0,
                                       const BPSettings& settings = {});

// Per-instance Spearman correlation between candidate scores and candidate
// ball log-masses, across (radius fraction, temperature) settings.
struct RankCorrRow {
  int instance = 0;
  double rho = 0.0;
  double temperature = 1.0;
  std::optional<double> spearman;
  std::string status;  // "ok" or "degenerate"
};

std::vector<RankCorrRow> rank_correlation(const Corpus& corpus, const std::vector<double>& rhos,
                                          const std::vector<double>& temperatures, int num_candidates,
                                          double lambda, MapSolver solver = MapSolver::exhaustive,
                                          const BPSettings& settings = {});

}  // namespace c3rf
