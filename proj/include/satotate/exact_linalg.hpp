#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <cstddef>
#include <optional>
#include <vector>

#include "satotate/errors.hpp"

// Exact linear algebra over the rationals. Elimination is fraction-free:
// rows are cleared of denominators, reduced by integer cross-multiplication
// and renormalized by their content, so no rounding can occur anywhere.

namespace satotate::exact {

using Int = boost::multiprecision::cpp_int;
using Rat = boost::multiprecision::cpp_rational;

using QMat = std::vector<std::vector<Rat>>;

inline QMat qmat_zero(std::size_t r, std::size_t c) {
    return QMat(r, std::vector<Rat>(c, Rat(0)));
}

inline QMat qmat_identity(std::size_t n) {
    QMat m = qmat_zero(n, n);
    for (std::size_t i = 0; i < n; ++i) m[i][i] = 1;
    return m;
}

inline QMat qmat_mul(const QMat& a, const QMat& b) {
    const std::size_t r = a.size(), k = b.size(), c = b.empty() ? 0 : b[0].size();
    QMat out = qmat_zero(r, c);
    for (std::size_t i = 0; i < r; ++i)
        for (std::size_t t = 0; t < k; ++t) {
            if (a[i][t] == 0) continue;
            for (std::size_t j = 0; j < c; ++j) out[i][j] += a[i][t] * b[t][j];
        }
    return out;
}

inline QMat qmat_add(const QMat& a, const QMat& b) {
    QMat out = a;
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < a[i].size(); ++j) out[i][j] += b[i][j];
    return out;
}

inline QMat qmat_scale(const QMat& a, const Rat& s) {
    QMat out = a;
    for (auto& row : out)
        for (auto& v : row) v *= s;
    return out;
}

inline QMat qmat_transpose(const QMat& a) {
    if (a.empty()) return a;
    QMat out = qmat_zero(a[0].size(), a.size());
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < a[i].size(); ++j) out[j][i] = a[i][j];
    return out;
}

inline bool qmat_eq(const QMat& a, const QMat& b) { return a == b; }

inline bool qmat_is_zero(const QMat& a) {
    for (const auto& row : a)
        for (const auto& v : row)
            if (v != 0) return false;
    return true;
}

/// Row-major flattening, the coordinate convention used throughout.
inline std::vector<Rat> qmat_vec(const QMat& a) {
    std::vector<Rat> out;
    for (const auto& row : a) out.insert(out.end(), row.begin(), row.end());
    return out;
}

inline QMat qmat_unvec(const std::vector<Rat>& v, std::size_t r, std::size_t c) {
    QMat out = qmat_zero(r, c);
    for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = 0; j < c; ++j) out[i][j] = v[i * c + j];
    return out;
}

namespace detail {

inline std::vector<Int> clear_denominators(const std::vector<Rat>& row) {
    Int lcm = 1;
    for (const auto& v : row) {
        Int d = denominator(v);
        lcm = boost::multiprecision::lcm(lcm, d);
    }
    std::vector<Int> out(row.size());
    for (std::size_t j = 0; j < row.size(); ++j)
        out[j] = numerator(row[j]) * (lcm / denominator(row[j]));
    return out;
}

inline void divide_by_content(std::vector<Int>& row) {
    Int g = 0;
    for (const auto& v : row) {
        g = boost::multiprecision::gcd(g, v);
        if (g == 1) return;
    }
    if (g == 0 || g == 1) return;
    for (auto& v : row) v /= g;
}

}  // namespace detail

/// Integer row echelon form accumulated row by row. rank() is exact; the
/// pivot structure supports back-substitution for nullspaces and solves.
class Echelon {
public:
    explicit Echelon(std::size_t cols) : cols_(cols) {}

    /// Reduces the row against the current echelon and absorbs what is left.
    /// Returns true if the row was independent of the rows seen so far.
    bool add_row(const std::vector<Rat>& rat_row) {
        std::vector<Int> row = detail::clear_denominators(rat_row);
        reduce(row);
        std::size_t lead = leading_index(row);
        if (lead == cols_) return false;
        detail::divide_by_content(row);
        insert_sorted(std::move(row), lead);
        return true;
    }

    std::size_t rank() const { return rows_.size(); }
    std::size_t cols() const { return cols_; }
    const std::vector<std::vector<Int>>& rows() const { return rows_; }
    const std::vector<std::size_t>& pivots() const { return pivot_cols_; }

    bool is_pivot_col(std::size_t c) const {
        for (std::size_t p : pivot_cols_)
            if (p == c) return true;
        return false;
    }

    /// Basis of the right nullspace (one vector per free column).
    std::vector<std::vector<Rat>> nullspace_basis() const {
        std::vector<std::vector<Rat>> basis;
        for (std::size_t free_col = 0; free_col < cols_; ++free_col) {
            if (is_pivot_col(free_col)) continue;
            std::vector<Rat> x(cols_, Rat(0));
            x[free_col] = 1;
            back_substitute(x);
            basis.push_back(std::move(x));
        }
        return basis;
    }

private:
    std::size_t leading_index(const std::vector<Int>& row) const {
        for (std::size_t j = 0; j < cols_; ++j)
            if (row[j] != 0) return j;
        return cols_;
    }

    void reduce(std::vector<Int>& row) const {
        for (std::size_t r = 0; r < rows_.size(); ++r) {
            std::size_t p = pivot_cols_[r];
            if (row[p] == 0) continue;
            const Int a = rows_[r][p];
            const Int b = row[p];
            for (std::size_t j = 0; j < cols_; ++j)
                row[j] = row[j] * a - rows_[r][j] * b;
        }
    }

    void insert_sorted(std::vector<Int>&& row, std::size_t lead) {
        std::size_t pos = 0;
        while (pos < pivot_cols_.size() && pivot_cols_[pos] < lead) ++pos;
        rows_.insert(rows_.begin() + pos, std::move(row));
        pivot_cols_.insert(pivot_cols_.begin() + pos, lead);
    }

    /// Solves the homogeneous system for the pivot coordinates given the
    /// free coordinates already placed in x. Rows are processed bottom-up.
    void back_substitute(std::vector<Rat>& x) const {
        for (std::size_t ri = rows_.size(); ri-- > 0;) {
            const auto& row = rows_[ri];
            std::size_t p = pivot_cols_[ri];
            Rat acc = 0;
            for (std::size_t j = p + 1; j < cols_; ++j)
                if (row[j] != 0) acc += Rat(row[j]) * x[j];
            x[p] = -acc / Rat(row[p]);
        }
    }

    std::size_t cols_;
    std::vector<std::vector<Int>> rows_;
    std::vector<std::size_t> pivot_cols_;
};

inline std::size_t rank(const std::vector<std::vector<Rat>>& rows, std::size_t cols) {
    Echelon e(cols);
    for (const auto& r : rows) e.add_row(r);
    return e.rank();
}

/// One exact solution of A x = b (free variables set to zero), or nullopt
/// if the system is inconsistent. A is given by rows.
inline std::optional<std::vector<Rat>> solve(const std::vector<std::vector<Rat>>& a_rows,
                                             const std::vector<Rat>& b) {
    const std::size_t n = a_rows.empty() ? 0 : a_rows[0].size();
    Echelon e(n + 1);
    for (std::size_t i = 0; i < a_rows.size(); ++i) {
        std::vector<Rat> aug = a_rows[i];
        aug.push_back(b[i]);
        e.add_row(aug);
    }
    if (e.is_pivot_col(n)) return std::nullopt;  // pivot in the rhs column
    // Homogeneous solve in the augmented space with the rhs coordinate -1:
    // [A | b] (x, -1)^T = 0  <=>  A x = b. Other free coordinates stay zero.
    std::vector<Rat> full(n + 1, Rat(0));
    full[n] = -1;
    for (std::size_t ri = e.rows().size(); ri-- > 0;) {
        const auto& row = e.rows()[ri];
        std::size_t p = e.pivots()[ri];
        Rat acc = 0;
        for (std::size_t j = p + 1; j <= n; ++j)
            if (row[j] != 0) acc += Rat(row[j]) * full[j];
        full[p] = -acc / Rat(row[p]);
    }
    full.pop_back();
    return full;
}

/// Inverse of a square rational matrix; throws if singular.
inline QMat qmat_inverse(const QMat& a) {
    const std::size_t n = a.size();
    QMat cols_of_inverse = qmat_zero(n, n);
    for (std::size_t col = 0; col < n; ++col) {
        std::vector<Rat> e(n, Rat(0));
        e[col] = 1;
        auto x = solve(a, e);
        if (!x) throw invalid_input_error("matrix is singular");
        for (std::size_t i = 0; i < n; ++i) cols_of_inverse[i][col] = (*x)[i];
    }
    // solve() returns some solution; for square systems verify exactness.
    if (!qmat_eq(qmat_mul(a, cols_of_inverse), qmat_identity(n)))
        throw invalid_input_error("matrix is singular");
    return cols_of_inverse;
}

}  // namespace satotate::exact
