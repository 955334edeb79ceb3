#include "doclair/assignment.hpp"

#include <algorithm>
#include <cassert>
#include <limits>

namespace doclair::detail {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Kuhn-Munkres with potentials on a dense cost matrix, minimizing total
// cost; requires rows <= cols and matches every row. Returns col_of_row.
std::vector<std::size_t> hungarian_min(std::size_t n, std::size_t m,
                                       const std::vector<double>& cost) {
    // 1-indexed internally; p[j] = row matched to column j.
    std::vector<double> u(n + 1, 0.0), v(m + 1, 0.0), minv(m + 1, 0.0);
    std::vector<std::size_t> p(m + 1, 0), way(m + 1, 0);
    std::vector<bool> used(m + 1, false);

    for (std::size_t i = 1; i <= n; ++i) {
        p[0] = i;
        std::size_t j0 = 0;
        std::fill(minv.begin(), minv.end(), kInf);
        std::fill(used.begin(), used.end(), false);
        do {
            used[j0] = true;
            const std::size_t i0 = p[j0];
            double delta = kInf;
            std::size_t j1 = 0;
            for (std::size_t j = 1; j <= m; ++j) {
                if (used[j]) continue;
                const double cur = cost[(i0 - 1) * m + (j - 1)] - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (std::size_t j = 0; j <= m; ++j) {
                if (used[j]) {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (p[j0] != 0);
        do {
            const std::size_t j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
        } while (j0 != 0);
    }

    std::vector<std::size_t> col_of_row(n, m);
    for (std::size_t j = 1; j <= m; ++j) {
        if (p[j] != 0) col_of_row[p[j] - 1] = j - 1;
    }
    return col_of_row;
}

// Maximum-weight assignment over a sub-problem given by explicit row and
// column index lists. Returns (row, col) pairs in original indices.
std::vector<std::pair<std::size_t, std::size_t>> solve_sub(
    const WeightMatrix& weights, const std::vector<std::size_t>& rows,
    const std::vector<std::size_t>& cols) {
    const std::size_t n = rows.size();
    const std::size_t m = cols.size();
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    if (n == 0 || m == 0) return pairs;

    const bool transposed = n > m;
    const std::size_t rn = transposed ? m : n;
    const std::size_t rm = transposed ? n : m;
    std::vector<double> cost(rn * rm);
    for (std::size_t a = 0; a < rn; ++a) {
        for (std::size_t b = 0; b < rm; ++b) {
            const std::size_t r = transposed ? rows[b] : rows[a];
            const std::size_t c = transposed ? cols[a] : cols[b];
            cost[a * rm + b] = -weights.at(r, c);
        }
    }
    const std::vector<std::size_t> match = hungarian_min(rn, rm, cost);
    pairs.reserve(rn);
    for (std::size_t a = 0; a < rn; ++a) {
        const std::size_t b = match[a];
        if (transposed) {
            pairs.emplace_back(rows[b], cols[a]);
        } else {
            pairs.emplace_back(rows[a], cols[b]);
        }
    }
    return pairs;
}

// Totals are always summed in ascending row order so that equal pair sets
// produce bit-identical doubles wherever they are compared.
double canonical_total(const WeightMatrix& weights,
                       std::vector<std::pair<std::size_t, std::size_t>> pairs) {
    std::sort(pairs.begin(), pairs.end());
    double total = 0.0;
    for (const auto& [r, c] : pairs) total += weights.at(r, c);
    return total;
}

}  // namespace

AssignmentResult solve_max_assignment(const WeightMatrix& weights, double tie_epsilon) {
    AssignmentResult result;
    const std::size_t R = weights.rows;
    const std::size_t C = weights.cols;
    const std::size_t k = std::min(R, C);
    if (k == 0) return result;

    std::vector<std::size_t> all_rows(R), all_cols(C);
    for (std::size_t r = 0; r < R; ++r) all_rows[r] = r;
    for (std::size_t c = 0; c < C; ++c) all_cols[c] = c;

    const double opt = canonical_total(weights, solve_sub(weights, all_rows, all_cols));

    // Fix pairs greedily in (row, col) order; a candidate is kept when an
    // optimal completion still exists. Rows may only be left unmatched
    // when there are more rows than columns.
    std::vector<std::pair<std::size_t, std::size_t>> fixed;
    std::vector<bool> col_used(C, false);
    for (std::size_t r = 0; r < R && fixed.size() < k; ++r) {
        const std::size_t slots_left = k - fixed.size();
        const std::size_t rows_after = R - r - 1;

        std::vector<std::size_t> rows_rest;
        rows_rest.reserve(rows_after);
        for (std::size_t rr = r + 1; rr < R; ++rr) rows_rest.push_back(rr);

        std::vector<std::pair<std::size_t, std::size_t>> best_fallback;
        double best_fallback_total = -kInf;
        bool accepted = false;

        for (std::size_t c = 0; c < C; ++c) {
            if (col_used[c]) continue;
            std::vector<std::size_t> cols_rest;
            cols_rest.reserve(C);
            for (std::size_t cc = 0; cc < C; ++cc) {
                if (!col_used[cc] && cc != c) cols_rest.push_back(cc);
            }
            auto candidate = fixed;
            candidate.emplace_back(r, c);
            auto completion = solve_sub(weights, rows_rest, cols_rest);
            candidate.insert(candidate.end(), completion.begin(), completion.end());
            const double total = canonical_total(weights, candidate);
            if (total >= opt - tie_epsilon) {
                fixed.emplace_back(r, c);
                col_used[c] = true;
                accepted = true;
                break;
            }
            if (total > best_fallback_total) {
                best_fallback_total = total;
                best_fallback = {{r, c}};
            }
        }
        if (accepted) continue;

        // Skipping row r must leave enough rows to fill the remaining slots.
        if (rows_after >= slots_left) {
            std::vector<std::size_t> cols_rest;
            for (std::size_t cc = 0; cc < C; ++cc) {
                if (!col_used[cc]) cols_rest.push_back(cc);
            }
            auto candidate = fixed;
            auto completion = solve_sub(weights, rows_rest, cols_rest);
            candidate.insert(candidate.end(), completion.begin(), completion.end());
            if (canonical_total(weights, candidate) >= opt - tie_epsilon) continue;
        }

        // Numerical safety valve; unreachable when the solver and the
        // completion totals agree, which they do up to rounding.
        assert(!best_fallback.empty());
        if (!best_fallback.empty()) {
            fixed.emplace_back(best_fallback.front());
            col_used[best_fallback.front().second] = true;
        }
    }

    std::sort(fixed.begin(), fixed.end());
    result.total = canonical_total(weights, fixed);
    result.pairs = std::move(fixed);
    return result;
}

}  // namespace doclair::detail
