#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace dsbs {

/// Minimum-cost perfect matching on a dense square cost matrix (row-major, n x n).
/// Returns col_for_row. Shortest augmenting paths with dual potentials
/// (Jonker-Volgenant / Crouse); O(n^3) worst case.
std::vector<std::size_t> linear_assignment(std::span<const double> cost, std::size_t n);

} // namespace dsbs
