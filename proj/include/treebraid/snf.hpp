#pragma once

// Integer Smith normal form of sparse boundary matrices and cellular homology
// of UD^nT.
//
// Elimination runs in two stages: unit pivots are cleared from the sparse
// matrix in 64-bit arithmetic (overflow is detected, not assumed away), and
// whatever remains is reduced densely over boost::multiprecision::cpp_int,
// always pivoting on the smallest nonzero entry.

#include <algorithm>
#include <cstdint>
#include <functional>
#include <queue>
#include <string>
#include <utility>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "cell.hpp"
#include "error.hpp"

namespace treebraid {

using BigInt = boost::multiprecision::cpp_int;

struct SnfResult {
    std::int64_t rank = 0;
    std::vector<BigInt> torsion; // invariant factors > 1
};

class SparseIntMatrix {
public:
    using Entry = std::pair<int, std::int64_t>; // (column, value)

    SparseIntMatrix(int rows, int cols) : rows_(rows), cols_(cols) {}

    int rows() const { return static_cast<int>(rows_.size()); }
    int cols() const { return static_cast<int>(cols_.size()); }

    void add(int r, int c, std::int64_t v)
    {
        auto& row = rows_[r];
        auto it = std::lower_bound(row.begin(), row.end(), Entry{c, INT64_MIN});
        if (it != row.end() && it->first == c) {
            it->second += v;
            if (it->second == 0)
                row.erase(it);
            return;
        }
        row.insert(it, {c, v});
        cols_[c].push_back(r);
    }

    SnfResult smith() &&;

private:
    std::int64_t value(int r, int c) const
    {
        const auto& row = rows_[r];
        auto it = std::lower_bound(row.begin(), row.end(), Entry{c, INT64_MIN});
        return (it != row.end() && it->first == c) ? it->second : 0;
    }

    // row[target] -= f * row[pivot]; records fill-in in the column lists
    void axpy(int target, std::int64_t f, int pivot)
    {
        const auto& a = rows_[target];
        const auto& b = rows_[pivot];
        std::vector<Entry> out;
        out.reserve(a.size() + b.size());
        std::size_t i = 0, j = 0;
        while (i < a.size() || j < b.size()) {
            if (j == b.size() || (i < a.size() && a[i].first < b[j].first)) {
                out.push_back(a[i++]);
                continue;
            }
            std::int64_t prod;
            if (__builtin_mul_overflow(f, b[j].second, &prod))
                fail(ErrorKind::Budget, "integer overflow during sparse elimination");
            if (i < a.size() && a[i].first == b[j].first) {
                std::int64_t v;
                if (__builtin_sub_overflow(a[i].second, prod, &v))
                    fail(ErrorKind::Budget, "integer overflow during sparse elimination");
                if (v != 0)
                    out.push_back({a[i].first, v});
                ++i;
            } else {
                out.push_back({b[j].first, -prod});
                cols_[b[j].first].push_back(target);
            }
            ++j;
        }
        rows_[target] = std::move(out);
    }

    std::vector<std::vector<Entry>> rows_;
    std::vector<std::vector<int>> cols_; // rows that may hold an entry; may be stale
};

namespace detail {

inline void dense_smith(std::vector<std::vector<BigInt>>& a, SnfResult& out)
{
    const int m = static_cast<int>(a.size());
    const int n = m ? static_cast<int>(a[0].size()) : 0;
    for (int t = 0; t < std::min(m, n); ++t) {
        for (;;) {
            // smallest nonzero in the trailing block
            int pr = -1, pc = -1;
            for (int i = t; i < m; ++i)
                for (int j = t; j < n; ++j)
                    if (a[i][j] != 0 && (pr < 0 || abs(a[i][j]) < abs(a[pr][pc]))) {
                        pr = i;
                        pc = j;
                    }
            if (pr < 0)
                goto done;
            std::swap(a[t], a[pr]);
            for (auto& row : a)
                std::swap(row[t], row[pc]);
            bool clean = true;
            for (int i = t + 1; i < m; ++i) {
                if (a[i][t] == 0)
                    continue;
                BigInt q = a[i][t] / a[t][t];
                for (int j = t; j < n; ++j)
                    a[i][j] -= q * a[t][j];
                clean = clean && a[i][t] == 0;
            }
            for (int j = t + 1; j < n; ++j) {
                if (a[t][j] == 0)
                    continue;
                BigInt q = a[t][j] / a[t][t];
                for (int i = t; i < m; ++i)
                    a[i][j] -= q * a[i][t];
                clean = clean && a[t][j] == 0;
            }
            if (!clean)
                continue;
            // divisibility: fold in a row whose entries the pivot does not divide
            int bad = -1;
            for (int i = t + 1; i < m && bad < 0; ++i)
                for (int j = t + 1; j < n; ++j)
                    if (a[i][j] % a[t][t] != 0) {
                        bad = i;
                        break;
                    }
            if (bad < 0)
                break;
            for (int j = t; j < n; ++j)
                a[t][j] += a[bad][j];
        }
        ++out.rank;
        if (abs(a[t][t]) > 1)
            out.torsion.push_back(abs(a[t][t]));
    }
done:
    std::sort(out.torsion.begin(), out.torsion.end());
}

} // namespace detail

inline SnfResult SparseIntMatrix::smith() &&
{
    SnfResult out;
    std::vector<char> row_dead(rows_.size(), 0), col_dead(cols_.size(), 0);
    // columns with fewest holders first, keys refreshed lazily
    using Key = std::pair<std::size_t, int>;
    std::priority_queue<Key, std::vector<Key>, std::greater<>> queue;
    for (int c = 0; c < cols(); ++c)
        queue.push({cols_[c].size(), c});
    std::vector<int> deferred;
    bool progressed = false;
    for (;;) {
        if (queue.empty()) {
            // a deferred column may have gained a unit entry since
            if (deferred.empty() || !progressed)
                break;
            for (int d : deferred)
                if (!col_dead[d])
                    queue.push({0, d});
            deferred.clear();
            progressed = false;
        }
        auto [key, c] = queue.top();
        queue.pop();
        if (col_dead[c])
            continue;
        auto& list = cols_[c];
        std::sort(list.begin(), list.end());
        list.erase(std::unique(list.begin(), list.end()), list.end());
        std::vector<int> holders;
        for (int r : list)
            if (!row_dead[r] && value(r, c) != 0)
                holders.push_back(r);
        list = holders;
        if (holders.empty()) {
            col_dead[c] = 1;
            continue;
        }
        if (holders.size() > key) {
            queue.push({holders.size(), c});
            continue;
        }
        int pivot = -1;
        for (int r : holders) {
            std::int64_t v = value(r, c);
            if ((v == 1 || v == -1) && (pivot < 0 || rows_[r].size() < rows_[pivot].size()))
                pivot = r;
        }
        if (pivot < 0) {
            deferred.push_back(c);
            continue;
        }
        std::int64_t pv = value(pivot, c);
        for (int r : holders)
            if (r != pivot)
                axpy(r, value(r, c) * pv, pivot);
        row_dead[pivot] = 1;
        col_dead[c] = 1;
        rows_[pivot].clear();
        list.clear();
        ++out.rank;
        progressed = true;
    }
    // dense remainder
    std::vector<int> live_rows, live_cols;
    std::vector<int> col_slot(cols_.size(), -1);
    for (int r = 0; r < rows(); ++r)
        if (!row_dead[r] && !rows_[r].empty())
            live_rows.push_back(r);
    for (int r : live_rows)
        for (auto [c, v] : rows_[r])
            if (col_slot[c] < 0) {
                col_slot[c] = static_cast<int>(live_cols.size());
                live_cols.push_back(c);
            }
    if (live_rows.empty())
        return out;
    require(static_cast<double>(live_rows.size()) * live_cols.size() <= 4e6, ErrorKind::Budget,
            "dense remainder of Smith normal form too large");
    std::vector<std::vector<BigInt>> dense(live_rows.size(), std::vector<BigInt>(live_cols.size()));
    for (std::size_t i = 0; i < live_rows.size(); ++i)
        for (auto [c, v] : rows_[live_rows[i]])
            dense[i][col_slot[c]] = v;
    detail::dense_smith(dense, out);
    return out;
}

struct HomologyResult {
    std::vector<std::int64_t> cells;       // per dimension
    std::vector<std::int64_t> betti;       // per dimension
    std::vector<std::vector<BigInt>> torsion; // invariant factors > 1 per dimension

    bool torsion_free() const
    {
        return std::all_of(torsion.begin(), torsion.end(), [](const auto& v) { return v.empty(); });
    }
};

/// Matrix of the boundary from dimension d to d-1, over sorted cell lists.
inline SparseIntMatrix boundary_matrix(const PlanarTree& t, const std::vector<Cell>& lower,
                                       const std::vector<Cell>& upper)
{
    SparseIntMatrix m(static_cast<int>(upper.size()), static_cast<int>(lower.size()));
    // rows are upper cells: rank and invariant factors are transpose-invariant
    for (std::size_t i = 0; i < upper.size(); ++i)
        for (const auto& [face, k] : boundary(upper[i], t)) {
            auto it = std::lower_bound(lower.begin(), lower.end(), face);
            m.add(static_cast<int>(i), static_cast<int>(it - lower.begin()), k);
        }
    return m;
}

inline HomologyResult homology(const PlanarTree& t, int n, EnumerationBudget budget = {})
{
    require_subdivided(t, n);
    auto counts = cell_counts(t, n);
    std::int64_t total = 0;
    for (auto c : counts)
        total += c;
    require(total <= budget.max_cells, ErrorKind::Budget,
            "complex has " + std::to_string(total) + " cells, above the budget of " +
                std::to_string(budget.max_cells));

    const int top = static_cast<int>(counts.size()) - 1;
    std::vector<std::vector<Cell>> cells(top + 1);
    for_each_cell(t, n, -1, [&](const Cell& c) { cells[c.dim()].push_back(c); });

    HomologyResult h;
    h.cells = counts;
    std::vector<std::int64_t> rank(top + 2, 0);
    std::vector<std::vector<BigInt>> factors(top + 2);
    for (int d = 1; d <= top; ++d) {
        auto snf = boundary_matrix(t, cells[d - 1], cells[d]).smith();
        rank[d] = snf.rank;
        factors[d] = std::move(snf.torsion);
    }
    for (int d = 0; d <= top; ++d) {
        h.betti.push_back(counts[d] - rank[d] - rank[d + 1]);
        h.torsion.push_back(factors[d + 1]);
    }
    return h;
}

} // namespace treebraid
