#include "c3rf/experiments.hpp"

#include <cmath>

#include "c3rf/rng.hpp"
#include "c3rf/stats.hpp"

namespace c3rf {

namespace {

constexpr std::uint64_t kMix = 0x9e3779b97f4a7c15ull;

std::uint64_t run_seed(std::uint64_t base, int side, int run) {
  return (base * kMix + static_cast<std::uint64_t>(side)) * kMix + static_cast<std::uint64_t>(run);
}

}  // namespace

std::vector<BetheSweepRow> sweep_bethe(const std::vector<int>& sides, int runs,
                                       const std::vector<int>& sample_counts, std::uint64_t seed,
                                       double potential_low, double temperature,
                                       const BPSettings& settings) {
  if (sides.empty()) fail(ErrorCode::invalid_argument, "need at least one grid side");
  for (int s : sides)
    if (s < 1) fail(ErrorCode::invalid_argument, "grid side must be >= 1");
  if (runs < 1) fail(ErrorCode::invalid_argument, "need at least one run");
  for (int s : sample_counts)
    if (s < 1) fail(ErrorCode::invalid_argument, "sample counts must be >= 1");

  std::vector<BetheSweepRow> rows;
  for (int side : sides) {
    const int n = side * side;
    const int max_radius = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(side))));
    for (int run = 0; run < runs; ++run) {
      const std::uint64_t rs = run_seed(seed, side, run);
      const GibbsModel model = gen_grid(side, rs, potential_low, temperature);
      Rng aux(rs ^ 0xa5a5a5a5a5a5a5a5ull);
      HammingBall ball;
      ball.radius = 1 + static_cast<int>(aux.below(static_cast<std::uint64_t>(max_radius)));
      ball.center.reserve(static_cast<std::size_t>(n));
      for (int i = 0; i < n; ++i) ball.center.push_back(static_cast<int>(aux.below(2)));

      const double exact = exact_constrained_oracle(model, ball).log_mass;

      const ConstrainedPosterior post = constrained_posterior(model, ball, settings);
      rows.push_back({side, run, rs, ball.radius, "bethe", 0, post.log_mass, exact,
                      std::fabs(post.log_mass - exact), post.converged});
      for (int count : sample_counts) {
        const double estimate = sample_mass_uniform_ball(model, ball, count, aux.bits());
        rows.push_back({side, run, rs, ball.radius, "sampling", count, estimate, exact,
                        std::fabs(estimate - exact), true});
      }
    }
  }
  return rows;
}

std::vector<RankCorrRow> rank_correlation(const Corpus& corpus, const std::vector<double>& rhos,
                                          const std::vector<double>& temperatures, int num_candidates,
                                          double lambda, MapSolver solver, const BPSettings& settings) {
  if (corpus.empty()) fail(ErrorCode::invalid_argument, "corpus must be nonempty");
  if (rhos.empty() || temperatures.empty())
    fail(ErrorCode::invalid_argument, "need at least one radius fraction and temperature");
  for (double r : rhos)
    if (!(r >= 0.0 && r <= 1.0)) fail(ErrorCode::invalid_argument, "radius fraction must lie in [0, 1]");
  for (double t : temperatures)
    if (!std::isfinite(t) || t <= 0.0) fail(ErrorCode::invalid_argument, "temperature must be > 0");

  std::vector<RankCorrRow> rows;
  for (std::size_t idx = 0; idx < corpus.size(); ++idx) {
    const CorpusInstance& inst = corpus[idx];
    const CandidateSet cands =
        inst.candidates ? *inst.candidates
                        : divmbest(inst.model, num_candidates, lambda, solver, settings);
    std::vector<double> scores;
    scores.reserve(cands.items.size());
    for (const auto& c : cands.items) scores.push_back(c.score);

    const int n = inst.model.graph.num_variables();
    for (double rho : rhos) {
      const int radius = radius_from_fraction(rho, n);
      for (double t : temperatures) {
        const GibbsModel tempered = with_temperature(inst.model, t);
        std::vector<double> log_masses;
        log_masses.reserve(cands.items.size());
        for (const auto& c : cands.items) {
          log_masses.push_back(constrained_posterior(tempered, {c.labels, radius}, settings).log_mass);
        }
        const std::optional<double> corr = spearman(log_masses, scores);
        rows.push_back({static_cast<int>(idx), rho, t, corr, corr ? "ok" : "degenerate"});
      }
    }
  }
  return rows;
}

}  // namespace c3rf
