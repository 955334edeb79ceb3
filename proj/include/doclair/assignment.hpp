#pragma once

#include <cstddef>
#include <utility>
#include <vector>

namespace doclair::detail {

struct WeightMatrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> w;  // row-major

    WeightMatrix() = default;
    WeightMatrix(std::size_t r, std::size_t c) : rows(r), cols(c), w(r * c, 0.0) {}

    double& at(std::size_t r, std::size_t c) { return w[r * cols + c]; }
    double at(std::size_t r, std::size_t c) const { return w[r * cols + c]; }
};

struct AssignmentResult {
    // One-to-one (row, col) pairs, sorted by row; |pairs| = min(rows, cols).
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    double total = 0.0;
};

// Maximum-total-weight one-to-one assignment (Kuhn-Munkres). Among optima
// whose totals agree within tie_epsilon, returns the lexicographically
// smallest pair set ordered by (row, col), which makes the result
// independent of solver iteration order.
AssignmentResult solve_max_assignment(const WeightMatrix& weights, double tie_epsilon);

}  // namespace doclair::detail
