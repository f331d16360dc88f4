#include "c3rf/tune.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "c3rf/loss.hpp"
#include "c3rf/rng.hpp"

namespace c3rf {

namespace {

struct GridPoint {
  double lambda = 0.0;
  double rho = 0.0;
  double temperature = 1.0;
  int lambda_index = 0;  // into the sorted lambda list, keys the candidate cache
};

std::vector<double> sorted_unique(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

// Canonical enumeration order is ascending (lambda, rho, T); first-strictly-better
// scans below therefore break ties toward the lexicographically smallest point.
std::vector<GridPoint> canonical_grid(const ParameterGrid& grid) {
  const auto lambdas = sorted_unique(grid.lambdas);
  const auto rhos = sorted_unique(grid.radius_fractions);
  const auto temps = sorted_unique(grid.temperatures);
  if (lambdas.empty() || rhos.empty() || temps.empty())
    fail(ErrorCode::invalid_argument, "parameter grid lists must be nonempty");
  for (double l : lambdas)
    if (!std::isfinite(l) || l < 0.0) fail(ErrorCode::invalid_argument, "lambda must be >= 0");
  for (double r : rhos)
    if (!(r >= 0.0 && r <= 1.0)) fail(ErrorCode::invalid_argument, "radius fraction must lie in [0, 1]");
  for (double t : temps)
    if (!std::isfinite(t) || t <= 0.0) fail(ErrorCode::invalid_argument, "temperature must be > 0");
  std::vector<GridPoint> points;
  points.reserve(lambdas.size() * rhos.size() * temps.size());
  for (std::size_t li = 0; li < lambdas.size(); ++li)
    for (double r : rhos)
      for (double t : temps) points.push_back({lambdas[li], r, t, static_cast<int>(li)});
  return points;
}

struct CellEval {
  double instance_loss = 0.0;          // hamming objective
  std::vector<double> inter, uni;      // per-class counts, iou objective
  double log_prob = 0.0;               // density objective
};

CellEval compute_cell(const CorpusInstance& inst, const CandidateSet& cands, const GridPoint& gp,
                      const PredictorConfig& base, const TuneOptions& options, bool density) {
  PredictorConfig cfg = base;
  cfg.radius_fraction = gp.rho;
  cfg.temperature = gp.temperature;
  CellEval out;
  if (!density) {
    const Prediction p = predict(inst.model, cands, cfg, options.backend);
    if (base.loss.kind == LossKind::hamming) {
      out.instance_loss = hamming_loss(p.chosen, inst.ground_truth);
    } else {
      const int k = base.loss.num_classes;
      out.inter.assign(static_cast<std::size_t>(k), 0.0);
      out.uni.assign(static_cast<std::size_t>(k), 0.0);
      for (std::size_t i = 0; i < inst.ground_truth.size(); ++i) {
        const int a = p.chosen[i];
        const int b = inst.ground_truth[i];
        if (a < 0 || a >= k || b < 0 || b >= k)
          fail(ErrorCode::invalid_configuration, "label outside the class universe");
        if (a == b) out.inter[static_cast<std::size_t>(a)] += 1.0;
        out.uni[static_cast<std::size_t>(a)] += 1.0;
        if (a != b) out.uni[static_cast<std::size_t>(b)] += 1.0;
      }
    }
  } else {
    const GibbsModel tempered = with_temperature(inst.model, gp.temperature);
    NodeMarginals node;
    if (base.kind == PredictorKind::crf_fela) {
      const Marginals m = options.backend.kind == InferenceBackend::Kind::exact
                              ? exact_marginals(tempered, options.backend.enumeration_cap)
                              : sum_product(tempered, options.backend.settings);
      node = m.node;
    } else {
      const int radius = radius_from_fraction(gp.rho, inst.model.graph.num_variables());
      node = c3rf_marginals(tempered, cands, radius, options.backend).node;
    }
    out.log_prob =
        class_mean_log_prob(log_prob_objective(node, inst.ground_truth, base.loss.num_classes));
  }
  return out;
}

double aggregate(const std::vector<std::vector<CellEval>>& cells, const std::vector<int>& instances,
                 std::size_t grid_index, const PredictorConfig& base, bool density) {
  if (instances.empty()) fail(ErrorCode::invalid_argument, "cannot score an empty instance set");
  if (density || base.loss.kind == LossKind::hamming) {
    double total = 0.0;
    for (int i : instances) {
      const CellEval& c = cells[static_cast<std::size_t>(i)][grid_index];
      total += density ? c.log_prob : c.instance_loss;
    }
    return total / static_cast<double>(instances.size());
  }
  // corpus-level intersection-over-union accuracy: per-class corpus sums, then class mean
  const std::size_t k = static_cast<std::size_t>(base.loss.num_classes);
  std::vector<double> inter(k, 0.0), uni(k, 0.0);
  for (int i : instances) {
    const CellEval& c = cells[static_cast<std::size_t>(i)][grid_index];
    for (std::size_t cls = 0; cls < k; ++cls) {
      inter[cls] += c.inter[cls];
      uni[cls] += c.uni[cls];
    }
  }
  double total = 0.0;
  int present = 0;
  for (std::size_t cls = 0; cls < k; ++cls) {
    if (uni[cls] > 0.0) {
      total += inter[cls] / uni[cls];
      ++present;
    }
  }
  if (present == 0) fail(ErrorCode::invalid_argument, "no class present in the evaluation set");
  return total / present;
}

std::vector<int> permuted_order(int n, Rng& rng) {
  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  for (int i = n - 1; i > 0; --i) {
    const int j = static_cast<int>(rng.below(static_cast<std::uint64_t>(i) + 1));
    std::swap(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(j)]);
  }
  return order;
}

// One candidate set per (instance, lambda); precomputed sets short-circuit the sweep.
std::vector<std::vector<CandidateSet>> candidate_table(const Corpus& corpus,
                                                       const std::vector<double>& lambdas,
                                                       const TuneOptions& options) {
  std::vector<std::vector<CandidateSet>> table;
  table.reserve(corpus.size());
  for (const auto& inst : corpus) {
    std::vector<CandidateSet> row;
    row.reserve(lambdas.size());
    for (double lambda : lambdas) {
      if (inst.candidates) {
        row.push_back(*inst.candidates);
      } else {
        row.push_back(divmbest(inst.model, options.num_candidates, lambda, options.solver,
                               options.backend.settings, options.enumeration_cap));
      }
    }
    table.push_back(std::move(row));
  }
  return table;
}

SearchResult run_search(const Corpus& corpus, const ParameterGrid& grid, const CVPlan& plan,
                        const PredictorConfig& base, const TuneOptions& options, bool density) {
  if (corpus.empty()) fail(ErrorCode::invalid_argument, "corpus must be nonempty");
  if (plan.permutations < 1) fail(ErrorCode::invalid_argument, "need at least one permutation");
  const int n = static_cast<int>(corpus.size());
  int folds = plan.folds;
  if (plan.mode == CVPlan::Mode::leave_one_out) {
    folds = n;
  } else if (folds < 2 || folds > n) {
    fail(ErrorCode::invalid_argument, "fold count must lie in [2, corpus size]");
  }

  const std::vector<GridPoint> points = canonical_grid(grid);
  std::vector<double> lambdas;
  for (const auto& gp : points)
    if (lambdas.empty() || gp.lambda != lambdas.back()) lambdas.push_back(gp.lambda);
  const auto candidates = candidate_table(corpus, lambdas, options);

  // Evaluations depend on (instance, grid point) only; folds just regroup them.
  std::vector<std::vector<CellEval>> cells(corpus.size());
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    cells[i].reserve(points.size());
    for (const auto& gp : points) {
      cells[i].push_back(compute_cell(corpus[i], candidates[i][static_cast<std::size_t>(gp.lambda_index)],
                                      gp, base, options, density));
    }
  }

  const bool lower_better = !density && base.loss.kind == LossKind::hamming;
  const auto better = [lower_better](double a, double b) { return lower_better ? a < b : a > b; };

  SearchResult result;
  std::vector<double> heldout_sum(points.size(), 0.0);
  for (int p = 0; p < plan.permutations; ++p) {
    Rng rng(plan.seed + static_cast<std::uint64_t>(p) * 0x9e3779b97f4a7c15ull);
    const std::vector<int> order = permuted_order(n, rng);
    int start = 0;
    for (int f = 0; f < folds; ++f) {
      const int size = n / folds + (f < n % folds ? 1 : 0);
      std::vector<int> heldout(order.begin() + start, order.begin() + start + size);
      std::vector<int> heldin;
      heldin.reserve(static_cast<std::size_t>(n - size));
      for (int i = 0; i < n; ++i) {
        if (i < start || i >= start + size) heldin.push_back(order[static_cast<std::size_t>(i)]);
      }
      start += size;

      int winner = -1;
      double winner_heldin = 0.0;
      for (std::size_t g = 0; g < points.size(); ++g) {
        const double hi = aggregate(cells, heldin, g, base, density);
        const double ho = aggregate(cells, heldout, g, base, density);
        result.report.push_back(
            {p, f, points[g].lambda, points[g].rho, points[g].temperature, hi, ho});
        heldout_sum[g] += ho;
        if (winner < 0 || better(hi, winner_heldin)) {
          winner = static_cast<int>(g);
          winner_heldin = hi;
        }
      }
      const GridPoint& w = points[static_cast<std::size_t>(winner)];
      const std::size_t row = result.report.size() - points.size() + static_cast<std::size_t>(winner);
      result.fold_winners.push_back({p, f, w.lambda, w.rho, w.temperature, result.report[row].heldout});
    }
  }

  const double denom = static_cast<double>(plan.permutations) * folds;
  std::size_t best = 0;
  for (std::size_t g = 1; g < points.size(); ++g) {
    if (better(heldout_sum[g], heldout_sum[best])) best = g;
  }
  result.best = base;
  result.best.radius_fraction = points[best].rho;
  result.best.temperature = points[best].temperature;
  result.best_lambda = points[best].lambda;
  result.best_mean_heldout = heldout_sum[best] / denom;
  return result;
}

}  // namespace

double evaluate_corpus(const Corpus& corpus, const PredictorConfig& config, double lambda,
                       const TuneOptions& options) {
  if (corpus.empty()) fail(ErrorCode::invalid_argument, "corpus must be nonempty");
  const GridPoint gp{lambda, config.radius_fraction, config.temperature, 0};
  std::vector<std::vector<CellEval>> cells(corpus.size());
  std::vector<int> all;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    const CandidateSet cands =
        corpus[i].candidates
            ? *corpus[i].candidates
            : divmbest(corpus[i].model, options.num_candidates, lambda, options.solver,
                       options.backend.settings, options.enumeration_cap);
    cells[i].push_back(compute_cell(corpus[i], cands, gp, config, options, false));
    all.push_back(static_cast<int>(i));
  }
  return aggregate(cells, all, 0, config, false);
}

SearchResult grid_search_erm(const Corpus& corpus, const ParameterGrid& grid, const CVPlan& plan,
                             const PredictorConfig& base, const TuneOptions& options) {
  return run_search(corpus, grid, plan, base, options, false);
}

SearchResult grid_search_bdt(const Corpus& corpus, const ParameterGrid& grid, const CVPlan& plan,
                             const PredictorConfig& base, const TuneOptions& options) {
  return run_search(corpus, grid, plan, base, options, true);
}

}  // namespace c3rf
