#pragma once

#include <unistd.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "c3rf/graph.hpp"
#include "c3rf/rng.hpp"

namespace testsupport {

using namespace c3rf;

// Random tree-structured model: n in [2, max_n], cardinalities in [2, max_k],
// each non-root variable attached to a random earlier parent.
inline GibbsModel random_tree_model(std::uint64_t seed, int max_n = 12, int max_k = 4,
                                    double temperature = 1.0) {
  Rng rng(seed);
  const int n = 2 + rng.below_int(max_n - 1);
  std::vector<VariableSpec> vars;
  for (int i = 0; i < n; ++i) vars.push_back({i, 2 + rng.below_int(max_k - 1)});

  std::vector<FactorSpec> factors;
  int fid = 0;
  for (int i = 0; i < n; ++i) {
    FactorSpec f;
    f.id = fid++;
    f.scope = {i};
    for (int k = 0; k < vars[static_cast<std::size_t>(i)].cardinality; ++k)
      f.table.push_back(rng.uniform(-3.0, 0.0));
    factors.push_back(std::move(f));
  }
  for (int i = 1; i < n; ++i) {
    const int parent = rng.below_int(i);
    FactorSpec f;
    f.id = fid++;
    f.scope = {parent, i};
    const int size = vars[static_cast<std::size_t>(parent)].cardinality *
                     vars[static_cast<std::size_t>(i)].cardinality;
    for (int k = 0; k < size; ++k) f.table.push_back(rng.uniform(-2.0, 0.0));
    factors.push_back(std::move(f));
  }
  return make_model(build_graph(std::move(vars), std::move(factors)), temperature);
}

// Unary-only model; the ball-augmented graph stays a forest.
inline GibbsModel random_unary_model(std::uint64_t seed, int n, int k, double temperature = 1.0) {
  Rng rng(seed);
  std::vector<VariableSpec> vars;
  std::vector<FactorSpec> factors;
  for (int i = 0; i < n; ++i) {
    vars.push_back({i, k});
    FactorSpec f;
    f.id = i;
    f.scope = {i};
    for (int s = 0; s < k; ++s) f.table.push_back(rng.uniform(-3.0, 0.0));
    factors.push_back(std::move(f));
  }
  return make_model(build_graph(std::move(vars), std::move(factors)), temperature);
}

// Loopy multi-label model with a chain plus random chords; joint space stays
// enumerable (max_n * log2(max_k) <= 16).
inline GibbsModel random_multilabel_model(std::uint64_t seed, int max_n = 8, int max_k = 4,
                                          double temperature = 1.0) {
  Rng rng(seed);
  const int n = 2 + rng.below_int(max_n - 1);
  std::vector<VariableSpec> vars;
  for (int i = 0; i < n; ++i) vars.push_back({i, 2 + rng.below_int(max_k - 1)});

  std::vector<FactorSpec> factors;
  int fid = 0;
  for (int i = 0; i < n; ++i) {
    FactorSpec f;
    f.id = fid++;
    f.scope = {i};
    for (int k = 0; k < vars[static_cast<std::size_t>(i)].cardinality; ++k)
      f.table.push_back(rng.uniform(-3.0, 0.0));
    factors.push_back(std::move(f));
  }
  const auto add_pair = [&](int a, int b) {
    FactorSpec f;
    f.id = fid++;
    f.scope = {a, b};
    const int size = vars[static_cast<std::size_t>(a)].cardinality *
                     vars[static_cast<std::size_t>(b)].cardinality;
    for (int k = 0; k < size; ++k) f.table.push_back(rng.uniform(-2.0, 0.0));
    factors.push_back(std::move(f));
  };
  for (int i = 1; i < n; ++i) add_pair(i - 1, i);
  const int chords = n >= 3 ? rng.below_int(n / 2 + 1) : 0;
  for (int c = 0; c < chords; ++c) {
    const int a = rng.below_int(n - 2);
    const int b = a + 2 + rng.below_int(n - a - 2);
    add_pair(a, b);
  }
  return make_model(build_graph(std::move(vars), std::move(factors)), temperature);
}

// Same chain-plus-chords shape with every variable at cardinality k; the
// iou FELA needs marginal vectors as long as the class universe.
inline GibbsModel random_uniform_loopy_model(std::uint64_t seed, int max_n, int k,
                                             double temperature = 1.0) {
  Rng rng(seed);
  const int n = 2 + rng.below_int(max_n - 1);
  std::vector<VariableSpec> vars;
  for (int i = 0; i < n; ++i) vars.push_back({i, k});

  std::vector<FactorSpec> factors;
  int fid = 0;
  for (int i = 0; i < n; ++i) {
    FactorSpec f;
    f.id = fid++;
    f.scope = {i};
    for (int s = 0; s < k; ++s) f.table.push_back(rng.uniform(-3.0, 0.0));
    factors.push_back(std::move(f));
  }
  const auto add_pair = [&](int a, int b) {
    FactorSpec f;
    f.id = fid++;
    f.scope = {a, b};
    for (int s = 0; s < k * k; ++s) f.table.push_back(rng.uniform(-2.0, 0.0));
    factors.push_back(std::move(f));
  };
  for (int i = 1; i < n; ++i) add_pair(i - 1, i);
  const int chords = n >= 3 ? rng.below_int(n / 2 + 1) : 0;
  for (int c = 0; c < chords; ++c) {
    const int a = rng.below_int(n - 2);
    const int b = a + 2 + rng.below_int(n - a - 2);
    add_pair(a, b);
  }
  return make_model(build_graph(std::move(vars), std::move(factors)), temperature);
}

inline Configuration random_configuration(const FactorGraph& g, Rng& rng) {
  Configuration y;
  y.reserve(static_cast<std::size_t>(g.num_variables()));
  for (const auto& v : g.variables) y.push_back(rng.below_int(v.cardinality));
  return y;
}

// ---- CLI process helpers ----------------------------------------------------

inline const std::string& scratch_dir() {
  static const std::string dir = [] {
    auto p = std::filesystem::temp_directory_path() /
             ("c3rf_tests_" + std::to_string(static_cast<unsigned>(::getpid())));
    std::filesystem::create_directories(p);
    return p.string();
  }();
  return dir;
}

inline std::string scratch_path(const std::string& name) { return scratch_dir() + "/" + name; }

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

struct CliResult {
  int exit_code = -1;
  std::string out;
  std::string err;
};

#ifdef C3RF_CLI_PATH
inline CliResult run_cli(const std::string& args) {
  static int counter = 0;
  const std::string out_path = scratch_path("cli_out_" + std::to_string(counter));
  const std::string err_path = scratch_path("cli_err_" + std::to_string(counter));
  ++counter;
  const std::string cmd =
      std::string(C3RF_CLI_PATH) + " " + args + " >" + out_path + " 2>" + err_path;
  const int status = std::system(cmd.c_str());
  CliResult r;
  r.exit_code = (status >= 0 && WIFEXITED(status)) ? WEXITSTATUS(status) : -1;
  r.out = read_file(out_path);
  r.err = read_file(err_path);
  return r;
}
#endif

}  // namespace testsupport
