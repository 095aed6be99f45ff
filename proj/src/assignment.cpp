#include "dsbs/assignment.hpp"

#include <algorithm>
#include <limits>

#include "dsbs/errors.hpp"

namespace dsbs {

std::vector<std::size_t> linear_assignment(std::span<const double> cost, std::size_t n) {
    if (cost.size() != n * n) throw InvalidArgument("linear_assignment: cost matrix must be n x n");
    constexpr double inf = std::numeric_limits<double>::infinity();
    constexpr std::size_t none = std::numeric_limits<std::size_t>::max();

    std::vector<double> u(n, 0.0), v(n, 0.0), shortest(n);
    std::vector<std::size_t> col4row(n, none), row4col(n, none), path(n, none), remaining(n);
    std::vector<char> row_seen(n), col_seen(n);

    for (std::size_t cur = 0; cur < n; ++cur) {
        // Dijkstra over reduced costs from the free row `cur` to the nearest free column.
        double min_val = 0.0;
        std::size_t num_remaining = n;
        for (std::size_t it = 0; it < n; ++it) remaining[it] = n - it - 1;
        std::fill(row_seen.begin(), row_seen.end(), 0);
        std::fill(col_seen.begin(), col_seen.end(), 0);
        std::fill(shortest.begin(), shortest.end(), inf);

        std::size_t sink = none;
        std::size_t i = cur;
        while (sink == none) {
            std::size_t index = none;
            double lowest = inf;
            row_seen[i] = 1;
            const double* row = cost.data() + i * n;
            const double base = min_val - u[i];
            for (std::size_t it = 0; it < num_remaining; ++it) {
                const std::size_t j = remaining[it];
                const double r = base + row[j] - v[j];
                if (r < shortest[j]) {
                    path[j] = i;
                    shortest[j] = r;
                }
                if (shortest[j] < lowest || (shortest[j] == lowest && row4col[j] == none)) {
                    lowest = shortest[j];
                    index = it;
                }
            }
            min_val = lowest;
            if (min_val == inf) throw InvalidArgument("linear_assignment: cost matrix is infeasible");
            const std::size_t j = remaining[index];
            if (row4col[j] == none) {
                sink = j;
            } else {
                i = row4col[j];
            }
            col_seen[j] = 1;
            remaining[index] = remaining[--num_remaining];
        }

        u[cur] += min_val;
        for (std::size_t r = 0; r < n; ++r)
            if (row_seen[r] && r != cur) u[r] += min_val - shortest[col4row[r]];
        for (std::size_t c = 0; c < n; ++c)
            if (col_seen[c]) v[c] -= min_val - shortest[c];

        for (std::size_t j = sink;;) {
            const std::size_t r = path[j];
            row4col[j] = r;
            std::swap(col4row[r], j);
            if (r == cur) break;
        }
    }
    return col4row;
}

} // namespace dsbs
