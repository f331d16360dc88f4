#pragma once

#include <cstdint>
#include <functional>

#include "c3rf/graph.hpp"

namespace c3rf {

inline constexpr std::uint64_t kDefaultEnumerationCap = 1ull << 20;

// Product of cardinalities; throws too_large_to_enumerate beyond cap.
std::uint64_t joint_space_size(const FactorGraph& g, std::uint64_t cap = kDefaultEnumerationCap);

// Visits every configuration in lexicographic order (last variable fastest).
void for_each_configuration(const FactorGraph& g,
                            const std::function<void(const Configuration&)>& visit,
                            std::uint64_t cap = kDefaultEnumerationCap);

// Visits every member of the Hamming ball around center with the given
// radius: distance ascending, disagreeing position sets lexicographic,
// replacement labels ascending. Throws too_large_to_enumerate if more than
// cap members would be visited.
void for_each_ball_member(const Configuration& center, const std::vector<int>& cardinalities,
                          int radius, const std::function<void(const Configuration&)>& visit,
                          std::uint64_t cap = kDefaultEnumerationCap);

}  // namespace c3rf
