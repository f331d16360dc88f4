#include "c3rf/infer.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "c3rf/logspace.hpp"

namespace c3rf {

namespace {

// Subtracts the max finite entry in place. All--inf messages mean every
// configuration consistent with some state has been forbidden.
void normalize_log_message(std::vector<double>& msg) {
  double best = kNegInf;
  for (double x : msg) best = std::max(best, x);
  if (is_neg_inf(best))
    fail(ErrorCode::all_configurations_forbidden, "message with no finite entry");
  for (double& x : msg) {
    if (!is_neg_inf(x)) x -= best;
  }
}

// Convex combination of old and new log-messages. A -inf on either side is
// absorbing for damping > 0.
double damp_entry(double old_v, double new_v, double damping) {
  if (damping <= 0.0) return new_v;
  if (is_neg_inf(old_v) || is_neg_inf(new_v)) return kNegInf;
  return damping * old_v + (1.0 - damping) * new_v;
}

double entry_change(double old_v, double new_v) {
  const bool oi = is_neg_inf(old_v), ni = is_neg_inf(new_v);
  if (oi && ni) return 0.0;
  if (oi != ni) return std::numeric_limits<double>::infinity();
  return std::abs(old_v - new_v);
}

struct Edge {
  int var = 0;
  int factor = 0;
  int scope_pos = 0;
};

class MessagePassing {
 public:
  MessagePassing(const GibbsModel& model, const BPSettings& settings, bool max_product)
      : g_(model.graph), max_product_(max_product) {
    if (g_.num_variables() == 0)
      fail(ErrorCode::invalid_argument, "message passing requires at least one variable");
    if (settings.max_iterations < 1)
      fail(ErrorCode::invalid_argument, "max_iterations must be >= 1");
    if (!(settings.convergence_tol > 0.0))
      fail(ErrorCode::invalid_argument, "convergence tolerance must be > 0");
    if (settings.damping && (*settings.damping < 0.0 || *settings.damping >= 1.0))
      fail(ErrorCode::invalid_argument, "damping must lie in [0, 1)");
    max_iterations_ = settings.max_iterations;
    tol_ = settings.convergence_tol;
    damping_ = settings.damping ? *settings.damping : (g_.is_forest() ? 0.0 : 0.5);

    // tables scaled by 1/T once up front
    scaled_.reserve(g_.factors.size());
    for (const auto& f : g_.factors) {
      std::vector<double> t(f.table);
      for (double& x : t) {
        if (!is_neg_inf(x)) x /= model.temperature;
      }
      scaled_.push_back(std::move(t));
    }

    // edges in (variable id, factor id) order; var_factors is ascending
    factor_edges_.assign(g_.factors.size(), {});
    for (std::size_t f = 0; f < g_.factors.size(); ++f)
      factor_edges_[f].assign(g_.factors[f].scope.size(), -1);
    for (int v = 0; v < g_.num_variables(); ++v) {
      for (int f : g_.var_factors[static_cast<std::size_t>(v)]) {
        const auto& scope = g_.factors[static_cast<std::size_t>(f)].scope;
        int pos = static_cast<int>(std::find(scope.begin(), scope.end(), v) - scope.begin());
        factor_edges_[static_cast<std::size_t>(f)][static_cast<std::size_t>(pos)] =
            static_cast<int>(edges_.size());
        edges_.push_back({v, f, pos});
      }
    }

    msg_vf_.reserve(edges_.size());
    msg_fv_.reserve(edges_.size());
    for (const auto& e : edges_) {
      msg_vf_.emplace_back(static_cast<std::size_t>(g_.cardinality(e.var)), 0.0);
      msg_fv_.emplace_back(static_cast<std::size_t>(g_.cardinality(e.var)), 0.0);
    }
  }

  // Runs to convergence or the iteration limit; returns (converged, sweeps).
  std::pair<bool, int> run() {
    for (int it = 1; it <= max_iterations_; ++it) {
      double change = 0.0;
      for (std::size_t e = 0; e < edges_.size(); ++e) {
        change = std::max(change, update_var_to_factor(e));
        change = std::max(change, update_factor_to_var(e));
      }
      if (change < tol_) return {true, it};
    }
    return {false, max_iterations_};
  }

  std::vector<std::vector<double>> node_beliefs_log() const {
    std::vector<std::vector<double>> out;
    out.reserve(static_cast<std::size_t>(g_.num_variables()));
    for (int v = 0; v < g_.num_variables(); ++v) {
      std::vector<double> b(static_cast<std::size_t>(g_.cardinality(v)), 0.0);
      for (int f : g_.var_factors[static_cast<std::size_t>(v)]) {
        const int e = edge_for(f, v);
        for (std::size_t x = 0; x < b.size(); ++x) b[x] = sum_neg_inf(b[x], msg_fv_[static_cast<std::size_t>(e)][x]);
      }
      out.push_back(std::move(b));
    }
    return out;
  }

  Marginals beliefs() const {
    Marginals m;
    for (auto& b : node_beliefs_log()) m.node.push_back(to_probabilities(b, "node belief"));
    m.factor.reserve(g_.factors.size());
    for (std::size_t f = 0; f < g_.factors.size(); ++f) {
      std::vector<double> b(scaled_[f].size(), 0.0);
      const auto& scope = g_.factors[f].scope;
      std::vector<int> assignment(scope.size(), 0);
      for (std::size_t idx = 0; idx < b.size(); ++idx) {
        double w = scaled_[f][idx];
        if (!is_neg_inf(w)) {
          for (std::size_t j = 0; j < scope.size(); ++j) {
            const int e = factor_edges_[f][j];
            w = sum_neg_inf(w, msg_vf_[static_cast<std::size_t>(e)][static_cast<std::size_t>(assignment[j])]);
            if (is_neg_inf(w)) break;
          }
        }
        b[idx] = w;
        for (int j = static_cast<int>(scope.size()) - 1; j >= 0; --j) {
          if (++assignment[static_cast<std::size_t>(j)] < g_.cardinality(scope[static_cast<std::size_t>(j)])) break;
          assignment[static_cast<std::size_t>(j)] = 0;
        }
      }
      m.factor.push_back(to_probabilities(b, "factor belief"));
    }
    return m;
  }

  // max-product decode: per-variable argmax with smallest-label ties
  Configuration decode() const {
    Configuration y;
    y.reserve(static_cast<std::size_t>(g_.num_variables()));
    for (auto& b : node_beliefs_log()) {
      double best = kNegInf;
      int arg = -1;
      for (std::size_t x = 0; x < b.size(); ++x) {
        if (b[x] > best) {
          best = b[x];
          arg = static_cast<int>(x);
        }
      }
      if (arg < 0) fail(ErrorCode::all_configurations_forbidden, "belief with no finite entry");
      y.push_back(arg);
    }
    return y;
  }

 private:
  static double sum_neg_inf(double a, double b) {
    if (is_neg_inf(a) || is_neg_inf(b)) return kNegInf;
    return a + b;
  }

  int edge_for(int factor, int var) const {
    const auto& scope = g_.factors[static_cast<std::size_t>(factor)].scope;
    int pos = static_cast<int>(std::find(scope.begin(), scope.end(), var) - scope.begin());
    return factor_edges_[static_cast<std::size_t>(factor)][static_cast<std::size_t>(pos)];
  }

  static std::vector<double> to_probabilities(const std::vector<double>& log_b, const char* what) {
    double best = kNegInf;
    for (double x : log_b) best = std::max(best, x);
    if (is_neg_inf(best))
      fail(ErrorCode::all_configurations_forbidden, std::string(what) + " with no finite entry");
    double total = 0.0;
    std::vector<double> p(log_b.size(), 0.0);
    for (std::size_t i = 0; i < log_b.size(); ++i) {
      p[i] = is_neg_inf(log_b[i]) ? 0.0 : std::exp(log_b[i] - best);
      total += p[i];
    }
    for (double& x : p) x /= total;
    return p;
  }

  double update_var_to_factor(std::size_t e) {
    const Edge& edge = edges_[e];
    std::vector<double> fresh(static_cast<std::size_t>(g_.cardinality(edge.var)), 0.0);
    for (int f : g_.var_factors[static_cast<std::size_t>(edge.var)]) {
      if (f == edge.factor) continue;
      const int in = edge_for(f, edge.var);
      for (std::size_t x = 0; x < fresh.size(); ++x)
        fresh[x] = sum_neg_inf(fresh[x], msg_fv_[static_cast<std::size_t>(in)][x]);
    }
    normalize_log_message(fresh);
    return commit(msg_vf_[e], fresh);
  }

  double update_factor_to_var(std::size_t e) {
    const Edge& edge = edges_[e];
    const auto& f = g_.factors[static_cast<std::size_t>(edge.factor)];
    const auto& table = scaled_[static_cast<std::size_t>(edge.factor)];
    const std::size_t arity = f.scope.size();
    const int target_card = g_.cardinality(edge.var);

    std::vector<LogSumAccumulator> acc;
    std::vector<double> best;
    if (max_product_)
      best.assign(static_cast<std::size_t>(target_card), kNegInf);
    else
      acc.assign(static_cast<std::size_t>(target_card), {});

    std::vector<int> assignment(arity, 0);
    for (std::size_t idx = 0; idx < table.size(); ++idx) {
      double w = table[idx];
      if (!is_neg_inf(w)) {
        for (std::size_t j = 0; j < arity; ++j) {
          if (static_cast<int>(j) == edge.scope_pos) continue;
          const int in = factor_edges_[static_cast<std::size_t>(edge.factor)][j];
          w = sum_neg_inf(w, msg_vf_[static_cast<std::size_t>(in)][static_cast<std::size_t>(assignment[j])]);
          if (is_neg_inf(w)) break;
        }
        if (!is_neg_inf(w)) {
          const auto target = static_cast<std::size_t>(assignment[static_cast<std::size_t>(edge.scope_pos)]);
          if (max_product_)
            best[target] = std::max(best[target], w);
          else
            acc[target].add(w);
        }
      }
      // row-major odometer over the scope
      for (int j = static_cast<int>(arity) - 1; j >= 0; --j) {
        if (++assignment[static_cast<std::size_t>(j)] < g_.cardinality(f.scope[static_cast<std::size_t>(j)])) break;
        assignment[static_cast<std::size_t>(j)] = 0;
      }
    }

    std::vector<double> fresh(static_cast<std::size_t>(target_card), kNegInf);
    for (std::size_t x = 0; x < fresh.size(); ++x)
      fresh[x] = max_product_ ? best[x] : acc[x].value();
    normalize_log_message(fresh);
    return commit(msg_fv_[e], fresh);
  }

  // Damps fresh against the stored message, renormalizes, records the change.
  double commit(std::vector<double>& stored, const std::vector<double>& fresh) {
    std::vector<double> next(fresh.size(), 0.0);
    for (std::size_t x = 0; x < fresh.size(); ++x) next[x] = damp_entry(stored[x], fresh[x], damping_);
    normalize_log_message(next);
    double change = 0.0;
    for (std::size_t x = 0; x < next.size(); ++x)
      change = std::max(change, entry_change(stored[x], next[x]));
    stored = std::move(next);
    return change;
  }

  const FactorGraph& g_;
  bool max_product_ = false;
  int max_iterations_ = 200;
  double tol_ = 1e-8;
  double damping_ = 0.0;
  std::vector<std::vector<double>> scaled_;
  std::vector<Edge> edges_;
  std::vector<std::vector<int>> factor_edges_;
  std::vector<std::vector<double>> msg_vf_, msg_fv_;
};

}  // namespace

Marginals sum_product(const GibbsModel& model, const BPSettings& settings) {
  MessagePassing mp(model, settings, /*max_product=*/false);
  auto [converged, iterations] = mp.run();
  Marginals m = mp.beliefs();
  m.converged = converged;
  m.iterations = iterations;
  return m;
}

double bethe_log_z(const GibbsModel& model, const Marginals& m) {
  const FactorGraph& g = model.graph;
  if (m.node.size() != static_cast<std::size_t>(g.num_variables()) ||
      m.factor.size() != static_cast<std::size_t>(g.num_factors()))
    fail(ErrorCode::dimension_mismatch, "marginals do not match the graph");

  double total = 0.0;
  for (int f = 0; f < g.num_factors(); ++f) {
    const auto& table = g.factors[static_cast<std::size_t>(f)].table;
    const auto& mu = m.factor[static_cast<std::size_t>(f)];
    if (mu.size() != table.size())
      fail(ErrorCode::dimension_mismatch, "factor belief size mismatch");
    for (std::size_t i = 0; i < table.size(); ++i) {
      if (mu[i] > 0.0) total += mu[i] * (table[i] / model.temperature - std::log(mu[i]));
    }
  }
  for (int v = 0; v < g.num_variables(); ++v) {
    const auto& mu = m.node[static_cast<std::size_t>(v)];
    if (mu.size() != static_cast<std::size_t>(g.cardinality(v)))
      fail(ErrorCode::dimension_mismatch, "node belief size mismatch");
    double h = 0.0;
    for (double p : mu) {
      if (p > 0.0) h += p * std::log(p);
    }
    total += static_cast<double>(g.degree(v) - 1) * h;
  }
  return total;
}

double exact_log_z(const GibbsModel& model, std::uint64_t cap) {
  LogSumAccumulator acc;
  for_each_configuration(
      model.graph, [&](const Configuration& y) { acc.add(score(model, y) / model.temperature); },
      cap);
  return acc.value();
}

Marginals exact_marginals(const GibbsModel& model, std::uint64_t cap) {
  const double log_z = exact_log_z(model, cap);
  if (is_neg_inf(log_z))
    fail(ErrorCode::all_configurations_forbidden, "every configuration is forbidden");

  const FactorGraph& g = model.graph;
  Marginals m;
  m.converged = true;
  m.iterations = 0;
  m.node.reserve(static_cast<std::size_t>(g.num_variables()));
  for (int v = 0; v < g.num_variables(); ++v)
    m.node.emplace_back(static_cast<std::size_t>(g.cardinality(v)), 0.0);
  m.factor.reserve(g.factors.size());
  for (const auto& f : g.factors) m.factor.emplace_back(f.table.size(), 0.0);

  for_each_configuration(
      g,
      [&](const Configuration& y) {
        const double lw = score(model, y) / model.temperature;
        if (is_neg_inf(lw)) return;
        const double p = std::exp(lw - log_z);
        for (int v = 0; v < g.num_variables(); ++v)
          m.node[static_cast<std::size_t>(v)][static_cast<std::size_t>(y[static_cast<std::size_t>(v)])] += p;
        for (std::size_t f = 0; f < g.factors.size(); ++f)
          m.factor[f][factor_table_index(g, g.factors[f], y)] += p;
      },
      cap);

  for (auto& dist : m.node) {
    double total = 0.0;
    for (double p : dist) total += p;
    for (double& p : dist) p /= total;
  }
  for (auto& dist : m.factor) {
    double total = 0.0;
    for (double p : dist) total += p;
    for (double& p : dist) p /= total;
  }
  return m;
}

Configuration map_exhaustive(const GibbsModel& model, std::uint64_t cap) {
  Configuration best;
  double best_score = kNegInf;
  // lexicographic enumeration + strict improvement = smallest maximizer wins
  for_each_configuration(
      model.graph,
      [&](const Configuration& y) {
        const double s = score(model, y);
        if (s > best_score) {
          best_score = s;
          best = y;
        }
      },
      cap);
  if (is_neg_inf(best_score))
    fail(ErrorCode::all_configurations_forbidden, "every configuration is forbidden");
  return best;
}

Configuration map_maxproduct(const GibbsModel& model, const BPSettings& settings) {
  MessagePassing mp(model, settings, /*max_product=*/true);
  mp.run();
  return mp.decode();
}

}  // namespace c3rf
