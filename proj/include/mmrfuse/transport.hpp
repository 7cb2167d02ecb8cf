#pragma once

/** \file transport.hpp
 *  \brief Balanced transportation problem solved by the transportation simplex (MODI).
 */

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <span>
#include <vector>

#include "mmrfuse/diagnostics.hpp"

namespace mmrfuse {

/** \brief Dense row-major cost matrix. */
class CostMatrix {
public:
    CostMatrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

private:
    std::size_t rows_;
    std::size_t cols_;
    std::vector<double> data_;
};

struct TransportPlan {
    double cost = 0.0;
    CostMatrix flow{0, 0};
    std::size_t pivots = 0;
};

namespace detail {

struct BasicCell {
    std::size_t row;
    std::size_t col;
    double flow;
};

}  // namespace detail

/** \brief Minimum-cost plan moving \p supply onto \p demand.
 *
 * Both mass vectors must be non-negative with equal totals (within 1e-9
 * relative). The initial basis comes from the north-west corner rule and
 * always has rows + cols - 1 cells, degenerate zeros included. Pivoting
 * uses the most negative reduced cost and falls back to Bland's rule after
 * a run of degenerate pivots.
 */
inline TransportPlan solve_transport(std::span<const double> supply, std::span<const double> demand,
                                     const CostMatrix& cost) {
    const std::size_t n = supply.size();
    const std::size_t m = demand.size();
    if (n == 0 || m == 0) throw DomainError("solve_transport: empty support");
    if (cost.rows() != n || cost.cols() != m) throw DomainError("solve_transport: cost shape mismatch");
    const double total_s = std::accumulate(supply.begin(), supply.end(), 0.0);
    const double total_d = std::accumulate(demand.begin(), demand.end(), 0.0);
    if (std::abs(total_s - total_d) > 1e-9 * std::max(1.0, total_s)) {
        throw DomainError("solve_transport: unbalanced problem");
    }

    std::vector<double> s(supply.begin(), supply.end());
    std::vector<double> d(demand.begin(), demand.end());
    // Put the rounding residue on the last demand so the corner walk closes exactly.
    d.back() += total_s - total_d;

    std::vector<detail::BasicCell> basis;
    basis.reserve(n + m - 1);
    {
        std::size_t i = 0;
        std::size_t j = 0;
        while (true) {
            const double x = std::min(s[i], d[j]);
            basis.push_back({i, j, std::max(0.0, x)});
            s[i] -= x;
            d[j] -= x;
            if (i == n - 1 && j == m - 1) break;
            if (j == m - 1 || (i < n - 1 && s[i] <= d[j])) {
                ++i;
            } else {
                ++j;
            }
        }
    }

    double max_cost = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < m; ++j) max_cost = std::max(max_cost, std::abs(cost(i, j)));
    }
    const double tol = 1e-12 * std::max(1.0, max_cost);
    std::vector<double> u(n);
    std::vector<double> v(m);
    std::vector<char> row_set(n);
    std::vector<char> col_set(m);
    // Adjacency of the basis tree: node r < n is a row, node n + c is a column.
    std::vector<std::vector<std::size_t>> adj(n + m);
    std::vector<std::ptrdiff_t> parent_cell(n + m);
    std::vector<std::ptrdiff_t> parent_node(n + m);
    std::vector<std::size_t> queue;
    queue.reserve(n + m);

    TransportPlan plan;
    std::size_t degenerate_run = 0;
    const std::size_t max_pivots = 50 * (n + m) * (n + m) + 1000;

    while (true) {
        for (auto& a : adj) a.clear();
        for (std::size_t c = 0; c < basis.size(); ++c) {
            adj[basis[c].row].push_back(c);
            adj[n + basis[c].col].push_back(c);
        }

        // Potentials: u[0] = 0, u_i + v_j = c_ij on basic cells.
        std::fill(row_set.begin(), row_set.end(), 0);
        std::fill(col_set.begin(), col_set.end(), 0);
        queue.clear();
        u[0] = 0.0;
        row_set[0] = 1;
        queue.push_back(0);
        for (std::size_t q = 0; q < queue.size(); ++q) {
            const std::size_t node = queue[q];
            for (auto c : adj[node]) {
                const auto& cell = basis[c];
                if (node < n) {
                    if (!col_set[cell.col]) {
                        v[cell.col] = cost(cell.row, cell.col) - u[cell.row];
                        col_set[cell.col] = 1;
                        queue.push_back(n + cell.col);
                    }
                } else if (!row_set[cell.row]) {
                    u[cell.row] = cost(cell.row, cell.col) - v[cell.col];
                    row_set[cell.row] = 1;
                    queue.push_back(cell.row);
                }
            }
        }

        // Entering cell.
        const bool bland = degenerate_run > 2 * (n + m);
        std::size_t enter_i = n;
        std::size_t enter_j = m;
        double best = -tol;
        for (std::size_t i = 0; i < n && !(bland && enter_i < n); ++i) {
            for (std::size_t j = 0; j < m; ++j) {
                const double reduced = cost(i, j) - u[i] - v[j];
                if (reduced < best) {
                    best = reduced;
                    enter_i = i;
                    enter_j = j;
                    if (bland) break;
                }
            }
        }
        if (enter_i == n) break;
        if (++plan.pivots > max_pivots) throw DomainError("solve_transport: pivot limit exceeded");

        // Tree path from the entering row to the entering column.
        std::fill(parent_cell.begin(), parent_cell.end(), -1);
        std::fill(parent_node.begin(), parent_node.end(), -1);
        queue.clear();
        queue.push_back(enter_i);
        parent_node[enter_i] = static_cast<std::ptrdiff_t>(enter_i);
        const std::size_t target = n + enter_j;
        for (std::size_t q = 0; q < queue.size() && parent_node[target] < 0; ++q) {
            const std::size_t node = queue[q];
            for (auto c : adj[node]) {
                const std::size_t other = node < n ? n + basis[c].col : basis[c].row;
                if (parent_node[other] >= 0) continue;
                parent_node[other] = static_cast<std::ptrdiff_t>(node);
                parent_cell[other] = static_cast<std::ptrdiff_t>(c);
                queue.push_back(other);
            }
        }
        if (parent_node[target] < 0) throw DomainError("solve_transport: basis is not a spanning tree");

        // Walking back from the column: the cell next to the entering cell loses flow,
        // signs alternate along the path.
        std::vector<std::size_t> path;
        for (std::size_t node = target; node != enter_i; node = static_cast<std::size_t>(parent_node[node])) {
            path.push_back(static_cast<std::size_t>(parent_cell[node]));
        }
        double theta = std::numeric_limits<double>::infinity();
        std::size_t leave = path.size();
        for (std::size_t k = 0; k < path.size(); k += 2) {
            const double f = basis[path[k]].flow;
            if (leave == path.size() || f < theta || (bland && f == theta && path[k] < path[leave])) {
                theta = f;
                leave = k;
            }
        }
        theta = std::max(0.0, theta);
        for (std::size_t k = 0; k < path.size(); ++k) {
            auto& cell = basis[path[k]];
            cell.flow += (k % 2 == 0) ? -theta : theta;
            if (cell.flow < 0.0) cell.flow = 0.0;
        }
        degenerate_run = theta > 0.0 ? 0 : degenerate_run + 1;
        basis[path[leave]] = {enter_i, enter_j, theta};
    }

    plan.flow = CostMatrix(n, m);
    for (const auto& cell : basis) {
        plan.flow(cell.row, cell.col) += cell.flow;
        plan.cost += cell.flow * cost(cell.row, cell.col);
    }
    return plan;
}

}  // namespace mmrfuse
