#pragma once

#include <optional>
#include <vector>

namespace c3rf {

// Fractional (average) ranks, 1-based; ties share the mean of their rank span.
std::vector<double> average_ranks(const std::vector<double>& values);

// Spearman rank correlation with average-rank tie handling. Returns nullopt
// when undefined: fewer than two observations or zero rank variance on either
// side. Identical rank vectors return exactly 1.
std::optional<double> spearman(const std::vector<double>& a, const std::vector<double>& b);

}  // namespace c3rf
