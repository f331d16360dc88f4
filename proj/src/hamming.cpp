#include "c3rf/hamming.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "c3rf/logspace.hpp"
#include "c3rf/rng.hpp"

namespace c3rf {

int hamming_distance(const Configuration& a, const Configuration& b) {
  if (a.size() != b.size())
    fail(ErrorCode::length_mismatch, "configurations differ in length");
  int d = 0;
  for (std::size_t i = 0; i < a.size(); ++i) d += (a[i] != b[i]) ? 1 : 0;
  return d;
}

namespace {

using u128 = unsigned __int128;

constexpr u128 kU128Max = ~static_cast<u128>(0);

u128 checked_mul(u128 a, u128 b) {
  if (a != 0 && b > kU128Max / a) fail(ErrorCode::overflow, "ball volume overflows");
  return a * b;
}

u128 checked_add(u128 a, u128 b) {
  if (a > kU128Max - b) fail(ErrorCode::overflow, "ball volume overflows");
  return a + b;
}

// ring sizes C(n,d) (k-1)^d for d = 0..radius, exact
std::vector<u128> ball_ring_sizes(int n, int k, int radius) {
  std::vector<u128> t;
  t.reserve(static_cast<std::size_t>(radius) + 1);
  t.push_back(1);
  for (int d = 1; d <= radius; ++d) {
    u128 next = checked_mul(t.back(), static_cast<u128>(n - d + 1) * static_cast<u128>(k - 1));
    t.push_back(next / static_cast<u128>(d));  // exact: d | C(n,d-1)(n-d+1)
  }
  return t;
}

void validate_ball_args(int n, int k, int radius) {
  if (n < 1) fail(ErrorCode::invalid_argument, "ball requires n >= 1");
  if (k < 2) fail(ErrorCode::invalid_argument, "ball requires label count >= 2");
  if (radius < 0 || radius > n) fail(ErrorCode::invalid_argument, "ball radius must lie in [0, n]");
}

}  // namespace

std::uint64_t ball_volume(int n, int k, int radius) {
  validate_ball_args(n, k, radius);
  u128 total = 0;
  for (u128 t : ball_ring_sizes(n, k, radius)) total = checked_add(total, t);
  if (total > static_cast<u128>(~static_cast<std::uint64_t>(0)))
    fail(ErrorCode::overflow, "ball volume exceeds 64 bits");
  return static_cast<std::uint64_t>(total);
}

namespace {

// Balanced count-aggregation trees. Each internal node is an auxiliary count
// variable; a ternary factor pins it to the sum of its children's counts and
// forbids any sum above allowed_max (sound for upper-bounded potentials: a
// subtree already past the bound can never recover). Count domains saturate
// at cap, so states are 0..min(subtree size, cap).
class HopBuilder {
 public:
  struct Subtree {
    int node = -1;  // index into the CountingTree
    int var = -1;   // graph variable id
    std::vector<int> counts;  // state -> contributed count
  };

  HopBuilder(std::vector<VariableSpec>& vars, std::vector<FactorSpec>& factors, CountingTree& tree,
             int allowed_max, int cap)
      : vars_(vars), factors_(factors), tree_(tree), allowed_max_(allowed_max), cap_(cap) {
    if (allowed_max < 0) fail(ErrorCode::invalid_argument, "count bound must be >= 0");
    if (cap < allowed_max + 1)
      fail(ErrorCode::invalid_argument, "saturation cap must be at least bound + 1");
  }

  Subtree leaf(int var, std::vector<int> counts) {
    tree_.nodes.push_back(CountNode{var, counts, -1, -1});
    return Subtree{static_cast<int>(tree_.nodes.size()) - 1, var, std::move(counts)};
  }

  Subtree balanced(const std::vector<std::pair<int, std::vector<int>>>& leaves, int lo, int hi) {
    if (hi - lo == 1)
      return leaf(leaves[static_cast<std::size_t>(lo)].first,
                  leaves[static_cast<std::size_t>(lo)].second);
    const int mid = lo + (hi - lo + 1) / 2;
    Subtree l = balanced(leaves, lo, mid);
    Subtree r = balanced(leaves, mid, hi);
    return join(l, r, hi - lo);
  }

  Subtree join(const Subtree& l, const Subtree& r, int subtree_size) {
    const int top = std::min(subtree_size, cap_);
    const int var = static_cast<int>(vars_.size());
    vars_.push_back(VariableSpec{var, top + 1});

    FactorSpec f;
    f.scope = {var, l.var, r.var};
    f.table.reserve(static_cast<std::size_t>(top + 1) * l.counts.size() * r.counts.size());
    for (int p = 0; p <= top; ++p) {
      for (int lc : l.counts) {
        for (int rc : r.counts) {
          const int total = lc + rc;
          f.table.push_back((total <= allowed_max_ && p == total) ? 0.0 : kNegInf);
        }
      }
    }
    factors_.push_back(std::move(f));

    tree_.nodes.push_back(CountNode{var, {}, l.node, r.node});
    std::vector<int> counts(static_cast<std::size_t>(top) + 1);
    for (int s = 0; s <= top; ++s) counts[static_cast<std::size_t>(s)] = s;
    return Subtree{static_cast<int>(tree_.nodes.size()) - 1, var, std::move(counts)};
  }

  void root_potential(const Subtree& root, const std::function<double(int)>& pot) {
    FactorSpec f;
    f.scope = {root.var};
    f.table.reserve(root.counts.size());
    for (int c : root.counts) f.table.push_back(pot(c));
    factors_.push_back(std::move(f));
    tree_.root = root.node;
  }

 private:
  std::vector<VariableSpec>& vars_;
  std::vector<FactorSpec>& factors_;
  CountingTree& tree_;
  int allowed_max_;
  int cap_;
};

void renumber_factors(std::vector<FactorSpec>& factors) {
  for (std::size_t i = 0; i < factors.size(); ++i) factors[i].id = static_cast<int>(i);
}

bool all_binary(const FactorGraph& g) {
  for (const auto& v : g.variables)
    if (v.cardinality != 2) return false;
  return true;
}

void validate_ball(const GibbsModel& model, const HammingBall& ball) {
  validate_configuration(model.graph, ball.center);
  if (ball.radius < 0 || ball.radius > model.graph.num_variables())
    fail(ErrorCode::invalid_argument, "ball radius must lie in [0, n]");
}

}  // namespace

ExpandedBinaryGraph expand_multilabel(const GibbsModel& model) {
  const FactorGraph& g = model.graph;
  const int n = g.num_variables();
  if (n == 0) fail(ErrorCode::invalid_argument, "expansion requires at least one variable");

  ExpandedBinaryGraph e;
  e.indicator_offset.reserve(static_cast<std::size_t>(n));
  e.original_cardinality.reserve(static_cast<std::size_t>(n));

  std::vector<VariableSpec> vars;
  int next = 0;
  for (int i = 0; i < n; ++i) {
    e.indicator_offset.push_back(next);
    e.original_cardinality.push_back(g.cardinality(i));
    for (int k = 0; k < g.cardinality(i); ++k) vars.push_back(VariableSpec{next++, 2});
  }

  // one binary factor per original factor assignment, rewarding all-ON
  std::vector<FactorSpec> factors;
  for (const auto& f : g.factors) {
    const std::size_t arity = f.scope.size();
    std::vector<int> assignment(arity, 0);
    for (std::size_t idx = 0; idx < f.table.size(); ++idx) {
      FactorSpec rep;
      rep.scope.reserve(arity);
      for (std::size_t j = 0; j < arity; ++j)
        rep.scope.push_back(e.indicator_id(f.scope[j], assignment[j]));
      rep.table.assign(static_cast<std::size_t>(1) << arity, 0.0);
      rep.table.back() = f.table[idx];
      factors.push_back(std::move(rep));
      for (int j = static_cast<int>(arity) - 1; j >= 0; --j) {
        if (++assignment[static_cast<std::size_t>(j)] < g.cardinality(f.scope[static_cast<std::size_t>(j)])) break;
        assignment[static_cast<std::size_t>(j)] = 0;
      }
    }
  }

  // 1-of-K gadget per original variable: count of ON indicators must equal 1
  for (int i = 0; i < n; ++i) {
    CountingTree tree;
    HopBuilder builder(vars, factors, tree, /*allowed_max=*/1, /*cap=*/2);
    std::vector<std::pair<int, std::vector<int>>> leaves;
    leaves.reserve(static_cast<std::size_t>(g.cardinality(i)));
    for (int k = 0; k < g.cardinality(i); ++k)
      leaves.emplace_back(e.indicator_id(i, k), std::vector<int>{0, 1});
    auto root = builder.balanced(leaves, 0, static_cast<int>(leaves.size()));
    builder.root_potential(root, [](int c) { return c == 1 ? 0.0 : kNegInf; });
    e.gadgets.push_back(std::move(tree));
  }

  renumber_factors(factors);
  e.model = make_model(build_graph(std::move(vars), std::move(factors)), model.temperature);
  return e;
}

void complete_counts(const CountingTree& tree, const FactorGraph& g, Configuration& y) {
  if (tree.empty()) return;
  // post-order: a node's state is its true subtree count clipped to its domain
  std::function<int(int)> fill = [&](int idx) -> int {
    const CountNode& node = tree.nodes[static_cast<std::size_t>(idx)];
    if (node.is_leaf())
      return node.state_count[static_cast<std::size_t>(y[static_cast<std::size_t>(node.var)])];
    const int count = fill(node.left) + fill(node.right);
    y[static_cast<std::size_t>(node.var)] =
        std::min(count, g.cardinality(node.var) - 1);
    return count;
  };
  fill(tree.root);
}

Configuration expand_configuration(const ExpandedBinaryGraph& e, const Configuration& y) {
  if (static_cast<int>(y.size()) != e.original_n())
    fail(ErrorCode::length_mismatch, "configuration length does not match the original model");
  Configuration out(static_cast<std::size_t>(e.model.graph.num_variables()), 0);
  for (int i = 0; i < e.original_n(); ++i) {
    const int k = y[static_cast<std::size_t>(i)];
    if (k < 0 || k >= e.original_cardinality[static_cast<std::size_t>(i)])
      fail(ErrorCode::invalid_configuration, "label out of range for variable " + std::to_string(i));
    out[static_cast<std::size_t>(e.indicator_id(i, k))] = 1;
  }
  for (const auto& gadget : e.gadgets) complete_counts(gadget, e.model.graph, out);
  return out;
}

double exact_log_z_expanded(const ExpandedBinaryGraph& e, std::uint64_t cap) {
  // gadget counts are a function of the indicators, and every non-1-of-K
  // indicator block is forbidden, so summing over original labelings is exact
  unsigned __int128 total = 1;
  for (int k : e.original_cardinality) {
    total *= static_cast<unsigned __int128>(k);
    if (total > cap)
      fail(ErrorCode::too_large_to_enumerate, "joint space exceeds enumeration cap");
  }

  LogSumAccumulator acc;
  const int n = e.original_n();
  Configuration y(static_cast<std::size_t>(n), 0);
  while (true) {
    const Configuration b = expand_configuration(e, y);
    acc.add(score(e.model, b) / e.model.temperature);
    int i = n - 1;
    for (; i >= 0; --i) {
      if (++y[static_cast<std::size_t>(i)] < e.original_cardinality[static_cast<std::size_t>(i)]) break;
      y[static_cast<std::size_t>(i)] = 0;
    }
    if (i < 0) break;
  }
  return acc.value();
}

HammingHopModel build_hamming_hop(const GibbsModel& model, const HammingBall& ball,
                                  const HopOptions& options) {
  validate_ball(model, ball);
  if (!all_binary(model.graph))
    fail(ErrorCode::invalid_argument,
         "direct ball attachment requires a binary model; expand multi-label models first");

  const int n = model.graph.num_variables();
  HammingHopModel out;
  out.original_n = n;
  if (ball.radius >= n) {
    out.model = model;  // vacuous constraint
    return out;
  }

  const int cap = options.saturation_cap.value_or(ball.radius + 1);
  std::vector<VariableSpec> vars = model.graph.variables;
  std::vector<FactorSpec> factors = model.graph.factors;
  HopBuilder builder(vars, factors, out.tree, /*allowed_max=*/ball.radius, cap);

  // Fig-2b split: one subtree counts disagreements where the center is ON,
  // the other where it is OFF; the root adds the two counts.
  std::vector<std::pair<int, std::vector<int>>> ons, offs;
  for (int i = 0; i < n; ++i) {
    const int c = ball.center[static_cast<std::size_t>(i)];
    std::vector<int> counts{c == 0 ? 0 : 1, c == 1 ? 0 : 1};
    (c == 1 ? ons : offs).emplace_back(i, std::move(counts));
  }

  std::optional<HopBuilder::Subtree> root;
  if (!ons.empty() && !offs.empty()) {
    auto a = builder.balanced(ons, 0, static_cast<int>(ons.size()));
    auto b = builder.balanced(offs, 0, static_cast<int>(offs.size()));
    root = builder.join(a, b, n);
  } else {
    auto& leaves = ons.empty() ? offs : ons;
    root = builder.balanced(leaves, 0, static_cast<int>(leaves.size()));
  }
  const int radius = ball.radius;
  builder.root_potential(*root, [radius](int c) { return c <= radius ? 0.0 : kNegInf; });

  renumber_factors(factors);
  out.model = make_model(build_graph(std::move(vars), std::move(factors)), model.temperature);
  return out;
}

HammingHopModel build_hamming_hop(const ExpandedBinaryGraph& e, const HammingBall& ball,
                                  const HopOptions& options) {
  const int n = e.original_n();
  if (static_cast<int>(ball.center.size()) != n)
    fail(ErrorCode::length_mismatch, "ball center does not match the original model");
  for (int i = 0; i < n; ++i) {
    if (ball.center[static_cast<std::size_t>(i)] < 0 ||
        ball.center[static_cast<std::size_t>(i)] >= e.original_cardinality[static_cast<std::size_t>(i)])
      fail(ErrorCode::invalid_configuration, "ball center label out of range");
  }
  if (ball.radius < 0 || ball.radius > n)
    fail(ErrorCode::invalid_argument, "ball radius must lie in [0, n]");

  HammingHopModel out;
  out.original_n = n;
  if (ball.radius >= n) {
    out.model = e.model;
    return out;
  }

  const int cap = options.saturation_cap.value_or(ball.radius + 1);
  std::vector<VariableSpec> vars = e.model.graph.variables;
  std::vector<FactorSpec> factors = e.model.graph.factors;
  HopBuilder builder(vars, factors, out.tree, /*allowed_max=*/ball.radius, cap);

  // distance = number of OFF nodes among the center's ON indicators
  std::vector<std::pair<int, std::vector<int>>> leaves;
  leaves.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i)
    leaves.emplace_back(e.indicator_id(i, ball.center[static_cast<std::size_t>(i)]),
                        std::vector<int>{1, 0});
  auto root = builder.balanced(leaves, 0, n);
  const int radius = ball.radius;
  builder.root_potential(root, [radius](int c) { return c <= radius ? 0.0 : kNegInf; });

  renumber_factors(factors);
  out.model = make_model(build_graph(std::move(vars), std::move(factors)), e.model.temperature);
  return out;
}

GibbsModel attach_hamming_hop(const GibbsModel& model, const HammingBall& ball,
                              const HopOptions& options) {
  if (!all_binary(model.graph)) {
    ExpandedBinaryGraph e = expand_multilabel(model);
    return build_hamming_hop(e, ball, options).model;
  }
  return build_hamming_hop(model, ball, options).model;
}

GibbsModel attach_hamming_hop(const ExpandedBinaryGraph& e, const HammingBall& ball,
                              const HopOptions& options) {
  return build_hamming_hop(e, ball, options).model;
}

ConstrainedPosterior constrained_posterior(const GibbsModel& model, const HammingBall& ball,
                                           const BPSettings& settings, const HopOptions& options) {
  validate_ball(model, ball);
  const int n = model.graph.num_variables();
  try {
    if (ball.radius >= n) {
      Marginals m = sum_product(model, settings);
      return ConstrainedPosterior{bethe_log_z(model, m), m.node, m.converged};
    }
    if (all_binary(model.graph)) {
      HammingHopModel hop = build_hamming_hop(model, ball, options);
      Marginals m = sum_product(hop.model, settings);
      ConstrainedPosterior out;
      out.log_mass = bethe_log_z(hop.model, m);
      out.node_marginals.assign(m.node.begin(), m.node.begin() + n);
      out.converged = m.converged;
      return out;
    }
    ExpandedBinaryGraph e = expand_multilabel(model);
    HammingHopModel hop = build_hamming_hop(e, ball, options);
    Marginals m = sum_product(hop.model, settings);
    ConstrainedPosterior out;
    out.log_mass = bethe_log_z(hop.model, m);
    out.node_marginals.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
      std::vector<double> p(static_cast<std::size_t>(model.graph.cardinality(i)), 0.0);
      double total = 0.0;
      for (int k = 0; k < model.graph.cardinality(i); ++k) {
        p[static_cast<std::size_t>(k)] = m.node[static_cast<std::size_t>(e.indicator_id(i, k))][1];
        total += p[static_cast<std::size_t>(k)];
      }
      if (!(total > 0.0))
        fail(ErrorCode::empty_ball, "no label carries mass for variable " + std::to_string(i));
      for (double& x : p) x /= total;
      out.node_marginals.push_back(std::move(p));
    }
    out.converged = m.converged;
    return out;
  } catch (const Error& err) {
    if (err.code() == ErrorCode::all_configurations_forbidden)
      fail(ErrorCode::empty_ball, std::string("ball contains no live configuration: ") + err.what());
    throw;
  }
}

ConstrainedPosterior exact_constrained_oracle(const GibbsModel& model, const HammingBall& ball,
                                              std::uint64_t cap) {
  validate_ball(model, ball);
  const int n = model.graph.num_variables();
  if (ball.radius >= n) {
    // vacuous constraint: defer to the unconstrained oracle
    Marginals m = exact_marginals(model, cap);
    return ConstrainedPosterior{exact_log_z(model, cap), m.node, true};
  }

  std::vector<int> cards;
  cards.reserve(static_cast<std::size_t>(n));
  for (const auto& v : model.graph.variables) cards.push_back(v.cardinality);

  LogSumAccumulator acc;
  for_each_ball_member(
      ball.center, cards, ball.radius,
      [&](const Configuration& y) { acc.add(log_gibbs_weight(model, y)); }, cap);
  if (acc.empty()) fail(ErrorCode::empty_ball, "every ball member is forbidden");
  const double log_mass = acc.value();

  ConstrainedPosterior out;
  out.log_mass = log_mass;
  out.converged = true;
  out.node_marginals.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i)
    out.node_marginals.emplace_back(static_cast<std::size_t>(cards[static_cast<std::size_t>(i)]), 0.0);
  for_each_ball_member(
      ball.center, cards, ball.radius,
      [&](const Configuration& y) {
        const double lw = log_gibbs_weight(model, y);
        if (is_neg_inf(lw)) return;
        const double p = std::exp(lw - log_mass);
        for (int i = 0; i < n; ++i)
          out.node_marginals[static_cast<std::size_t>(i)][static_cast<std::size_t>(y[static_cast<std::size_t>(i)])] += p;
      },
      cap);
  for (auto& dist : out.node_marginals) {
    double total = 0.0;
    for (double p : dist) total += p;
    for (double& p : dist) p /= total;
  }
  return out;
}

double sample_mass_uniform_ball(const GibbsModel& model, const HammingBall& ball,
                                int num_samples, std::uint64_t seed) {
  validate_ball(model, ball);
  if (num_samples < 1) fail(ErrorCode::invalid_argument, "need at least one sample");
  const int n = model.graph.num_variables();
  const int k = model.graph.cardinality(0);
  for (const auto& v : model.graph.variables) {
    if (v.cardinality != k)
      fail(ErrorCode::invalid_argument, "uniform-ball sampling requires a uniform label count");
  }

  const auto rings = ball_ring_sizes(n, k, ball.radius);
  long double volume = 0.0L;
  for (u128 t : rings) volume += static_cast<long double>(t);

  Rng rng(seed);
  std::vector<int> positions(static_cast<std::size_t>(n));
  LogSumAccumulator acc;
  Configuration y = ball.center;
  for (int s = 0; s < num_samples; ++s) {
    // distance d proportional to its ring size
    const long double u = static_cast<long double>(rng.uniform()) * volume;
    int d = 0;
    long double cum = 0.0L;
    for (std::size_t i = 0; i < rings.size(); ++i) {
      cum += static_cast<long double>(rings[i]);
      if (u < cum) {
        d = static_cast<int>(i);
        break;
      }
      d = static_cast<int>(i);  // guard against rounding at the top end
    }
    // d distinct positions via partial Fisher-Yates
    for (int i = 0; i < n; ++i) positions[static_cast<std::size_t>(i)] = i;
    for (int j = 0; j < d; ++j) {
      const int pick = j + rng.below_int(n - j);
      std::swap(positions[static_cast<std::size_t>(j)], positions[static_cast<std::size_t>(pick)]);
    }
    for (int j = 0; j < d; ++j) {
      const int pos = positions[static_cast<std::size_t>(j)];
      const int off = rng.below_int(k - 1);
      const int c = ball.center[static_cast<std::size_t>(pos)];
      y[static_cast<std::size_t>(pos)] = off < c ? off : off + 1;
    }
    acc.add(log_gibbs_weight(model, y));
    for (int j = 0; j < d; ++j) {
      const int pos = positions[static_cast<std::size_t>(j)];
      y[static_cast<std::size_t>(pos)] = ball.center[static_cast<std::size_t>(pos)];
    }
  }
  return std::log(static_cast<double>(volume)) + acc.mean_value(static_cast<std::size_t>(num_samples));
}

}  // namespace c3rf
