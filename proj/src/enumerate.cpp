#include "c3rf/enumerate.hpp"

#include <string>

namespace c3rf {

std::uint64_t joint_space_size(const FactorGraph& g, std::uint64_t cap) {
  unsigned __int128 total = 1;
  for (const auto& v : g.variables) {
    total *= static_cast<unsigned __int128>(v.cardinality);
    if (total > cap)
      fail(ErrorCode::too_large_to_enumerate,
           "joint space exceeds enumeration cap of " + std::to_string(cap));
  }
  return static_cast<std::uint64_t>(total);
}

void for_each_configuration(const FactorGraph& g,
                            const std::function<void(const Configuration&)>& visit,
                            std::uint64_t cap) {
  joint_space_size(g, cap);
  const int n = g.num_variables();
  Configuration y(static_cast<std::size_t>(n), 0);
  while (true) {
    visit(y);
    int i = n - 1;
    for (; i >= 0; --i) {
      if (++y[static_cast<std::size_t>(i)] < g.cardinality(i)) break;
      y[static_cast<std::size_t>(i)] = 0;
    }
    if (i < 0) return;
  }
}

namespace {

// Recursively chooses the next disagreeing position and its replacement label.
void visit_ring(const Configuration& center, const std::vector<int>& cards, int remaining,
                int first_pos, Configuration& y, std::uint64_t cap, std::uint64_t& visited,
                const std::function<void(const Configuration&)>& visit) {
  if (remaining == 0) {
    if (++visited > cap)
      fail(ErrorCode::too_large_to_enumerate,
           "ball member count exceeds enumeration cap of " + std::to_string(cap));
    visit(y);
    return;
  }
  const int n = static_cast<int>(center.size());
  // keep enough positions to the right for the remaining disagreements
  for (int pos = first_pos; pos <= n - remaining; ++pos) {
    const int c = center[static_cast<std::size_t>(pos)];
    for (int label = 0; label < cards[static_cast<std::size_t>(pos)]; ++label) {
      if (label == c) continue;
      y[static_cast<std::size_t>(pos)] = label;
      visit_ring(center, cards, remaining - 1, pos + 1, y, cap, visited, visit);
    }
    y[static_cast<std::size_t>(pos)] = c;
  }
}

}  // namespace

void for_each_ball_member(const Configuration& center, const std::vector<int>& cardinalities,
                          int radius, const std::function<void(const Configuration&)>& visit,
                          std::uint64_t cap) {
  const int n = static_cast<int>(center.size());
  if (cardinalities.size() != center.size())
    fail(ErrorCode::length_mismatch, "center and cardinality lists differ in length");
  if (radius < 0 || radius > n)
    fail(ErrorCode::invalid_argument, "ball radius must lie in [0, n]");
  for (int i = 0; i < n; ++i) {
    if (center[static_cast<std::size_t>(i)] < 0 ||
        center[static_cast<std::size_t>(i)] >= cardinalities[static_cast<std::size_t>(i)])
      fail(ErrorCode::invalid_configuration, "ball center label out of range");
  }
  Configuration y = center;
  std::uint64_t visited = 0;
  for (int d = 0; d <= radius; ++d) visit_ring(center, cardinalities, d, 0, y, cap, visited, visit);
}

}  // namespace c3rf
