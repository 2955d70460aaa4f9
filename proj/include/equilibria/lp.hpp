#pragma once

// Dense two-phase simplex with Bland's rule.  Instantiated over Rational for
// exact certificates and over double (tolerance 1e-10 on row-scaled data).
// Sized for the small systems used here: a few dozen rows and columns.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "equilibria/error.hpp"
#include "equilibria/linalg.hpp"

namespace equilibria::lp {

enum class Relation { less_equal, equal, greater_equal };
enum class Status { optimal, infeasible, unbounded };

template <class Scalar>
struct Constraint {
    std::vector<Scalar> coeffs;
    Relation relation;
    Scalar rhs;
};

template <class Scalar>
struct Problem {
    explicit Problem(std::size_t variables)
        : num_vars(variables), free_var(variables, false), objective(variables, Scalar(0))
    {
    }

    void add(std::vector<Scalar> coeffs, Relation rel, Scalar rhs)
    {
        if (coeffs.size() != num_vars)
            throw Error(Errc::dimension_mismatch, "constraint width differs from variable count");
        rows.push_back({std::move(coeffs), rel, std::move(rhs)});
    }
    void set_free(std::size_t j) { free_var.at(j) = true; }

    std::size_t num_vars;
    std::vector<bool> free_var; ///< default: x_j >= 0
    std::vector<Constraint<Scalar>> rows;
    std::vector<Scalar> objective; ///< maximized
};

/// For infeasible problems `farkas` holds y (one entry per row) with
/// y·A_j <= 0 on nonnegative columns, y·A_j = 0 on free columns, y_r <= 0 on
/// <= rows, y_r >= 0 on >= rows and y·b > 0.
template <class Scalar>
struct Solution {
    Status status = Status::infeasible;
    std::vector<Scalar> x;
    Scalar value{0};
    std::vector<Scalar> farkas;
};

namespace detail {

template <class Scalar>
class Tableau {
public:
    using T = ScalarTraits<Scalar>;

    Tableau(std::size_t rows, std::size_t cols) : m_(rows), n_(cols), a_(rows + 1, std::vector<Scalar>(cols + 1, Scalar(0))), basis_(rows) {}

    Scalar& at(std::size_t r, std::size_t c) { return a_[r][c]; }
    const Scalar& at(std::size_t r, std::size_t c) const { return a_[r][c]; }
    Scalar& rhs(std::size_t r) { return a_[r][n_]; }
    Scalar& cost(std::size_t c) { return a_[m_][c]; }
    std::size_t& basis(std::size_t r) { return basis_[r]; }
    std::size_t rows() const { return m_; }
    std::size_t cols() const { return n_; }

    void pivot(std::size_t r, std::size_t c)
    {
        Scalar p = a_[r][c];
        for (auto& v : a_[r])
            v /= p;
        for (std::size_t i = 0; i <= m_; ++i) {
            if (i == r || T::is_zero(a_[i][c])) {
                if constexpr (!T::exact)
                    if (i != r)
                        a_[i][c] = 0.0;
                continue;
            }
            Scalar factor = a_[i][c];
            for (std::size_t j = 0; j <= n_; ++j)
                a_[i][j] -= factor * a_[r][j];
            if constexpr (!T::exact)
                a_[i][c] = 0.0;
        }
        basis_[r] = c;
    }

    /// Minimizes the cost row over columns with allowed[c]; false if unbounded.
    bool optimize(const std::vector<bool>& allowed, const std::vector<bool>& live_row)
    {
        for (std::size_t iter = 0; iter < 100000; ++iter) {
            std::size_t enter = n_;
            for (std::size_t c = 0; c < n_; ++c)
                if (allowed[c] && T::is_negative(a_[m_][c])) {
                    enter = c;
                    break;
                }
            if (enter == n_)
                return true;
            std::size_t leave = m_;
            Scalar best_ratio(0);
            for (std::size_t r = 0; r < m_; ++r) {
                if (!live_row[r] || !T::is_positive(a_[r][enter]))
                    continue;
                Scalar ratio = a_[r][n_] / a_[r][enter];
                if (leave == m_ || ratio < best_ratio ||
                    (!(best_ratio < ratio) && basis_[r] < basis_[leave])) {
                    if constexpr (!T::exact) {
                        if (leave != m_ && std::abs(ratio - best_ratio) <= T::eps && basis_[r] > basis_[leave])
                            continue;
                    }
                    leave = r;
                    best_ratio = ratio;
                }
            }
            if (leave == m_)
                return false;
            pivot(leave, enter);
        }
        throw Error(Errc::invalid_argument, "simplex iteration limit reached");
    }

private:
    std::size_t m_, n_;
    std::vector<std::vector<Scalar>> a_;
    std::vector<std::size_t> basis_;
};

} // namespace detail

template <class Scalar>
Solution<Scalar> solve(const Problem<Scalar>& problem)
{
    using T = ScalarTraits<Scalar>;
    const std::size_t m = problem.rows.size();

    // Column layout: structural (free vars split in two), slacks, artificials.
    std::vector<std::size_t> pos_col(problem.num_vars), neg_col(problem.num_vars, SIZE_MAX);
    std::size_t cols = 0;
    for (std::size_t j = 0; j < problem.num_vars; ++j) {
        pos_col[j] = cols++;
        if (problem.free_var[j])
            neg_col[j] = cols++;
    }
    const std::size_t structural = cols;
    std::vector<std::size_t> slack_col(m, SIZE_MAX);
    for (std::size_t r = 0; r < m; ++r)
        if (problem.rows[r].relation != Relation::equal)
            slack_col[r] = cols++;
    const std::size_t first_artificial = cols;
    cols += m;

    detail::Tableau<Scalar> tab(m, cols);
    std::vector<bool> flipped(m, false);
    std::vector<Scalar> row_scale(m, Scalar(1));
    for (std::size_t r = 0; r < m; ++r) {
        const auto& row = problem.rows[r];
        if constexpr (!T::exact) {
            double mx = std::abs(static_cast<double>(row.rhs));
            for (const auto& v : row.coeffs)
                mx = std::max(mx, std::abs(static_cast<double>(v)));
            if (mx > 0)
                row_scale[r] = 1.0 / mx;
        }
        for (std::size_t j = 0; j < problem.num_vars; ++j) {
            tab.at(r, pos_col[j]) = row.coeffs[j] * row_scale[r];
            if (neg_col[j] != SIZE_MAX)
                tab.at(r, neg_col[j]) = -row.coeffs[j] * row_scale[r];
        }
        if (slack_col[r] != SIZE_MAX)
            tab.at(r, slack_col[r]) = row.relation == Relation::less_equal ? Scalar(1) : Scalar(-1);
        tab.rhs(r) = row.rhs * row_scale[r];
        if (tab.rhs(r) < Scalar(0)) {
            flipped[r] = true;
            for (std::size_t c = 0; c <= cols; ++c)
                tab.at(r, c) = -tab.at(r, c);
        }
        tab.at(r, first_artificial + r) = Scalar(1);
        tab.basis(r) = first_artificial + r;
    }

    // Phase 1: minimize the sum of artificials.
    for (std::size_t c = 0; c <= cols; ++c) {
        Scalar s(0);
        for (std::size_t r = 0; r < m; ++r)
            s += tab.at(r, c);
        tab.at(m, c) = -s;
    }
    for (std::size_t r = 0; r < m; ++r)
        tab.cost(first_artificial + r) = Scalar(0);

    std::vector<bool> live(m, true);
    std::vector<bool> allowed(cols, true);
    tab.optimize(allowed, live);

    Solution<Scalar> out;
    Scalar phase1 = -tab.at(m, cols);
    if (T::is_positive(phase1)) {
        out.status = Status::infeasible;
        out.farkas.resize(m);
        for (std::size_t r = 0; r < m; ++r) {
            Scalar y = Scalar(1) - tab.cost(first_artificial + r);
            if (flipped[r])
                y = -y;
            out.farkas[r] = y * row_scale[r];
        }
        return out;
    }

    // Drive remaining artificials out of the basis; drop redundant rows.
    for (std::size_t r = 0; r < m; ++r) {
        if (tab.basis(r) < first_artificial)
            continue;
        std::size_t c = 0;
        for (; c < first_artificial; ++c)
            if (!T::is_zero(tab.at(r, c)))
                break;
        if (c < first_artificial)
            tab.pivot(r, c);
        else
            live[r] = false;
    }
    for (std::size_t c = first_artificial; c < cols; ++c)
        allowed[c] = false;

    // Phase 2: minimize -objective.
    std::vector<Scalar> cost(cols, Scalar(0));
    for (std::size_t j = 0; j < problem.num_vars; ++j) {
        cost[pos_col[j]] = -problem.objective[j];
        if (neg_col[j] != SIZE_MAX)
            cost[neg_col[j]] = problem.objective[j];
    }
    for (std::size_t c = 0; c <= cols; ++c) {
        Scalar s = c < cols ? cost[c] : Scalar(0);
        for (std::size_t r = 0; r < m; ++r)
            if (live[r])
                s -= cost[tab.basis(r)] * tab.at(r, c);
        tab.at(m, c) = s;
    }
    for (std::size_t r = 0; r < m; ++r)
        if (!live[r])
            for (std::size_t c = 0; c <= cols; ++c)
                tab.at(r, c) = Scalar(0);

    const bool bounded = tab.optimize(allowed, live);
    std::vector<Scalar> colval(cols, Scalar(0));
    for (std::size_t r = 0; r < m; ++r)
        if (live[r])
            colval[tab.basis(r)] = tab.rhs(r);
    out.x.resize(problem.num_vars);
    for (std::size_t j = 0; j < problem.num_vars; ++j) {
        out.x[j] = colval[pos_col[j]];
        if (neg_col[j] != SIZE_MAX)
            out.x[j] -= colval[neg_col[j]];
    }
    out.status = bounded ? Status::optimal : Status::unbounded;
    out.value = Scalar(0);
    for (std::size_t j = 0; j < problem.num_vars; ++j)
        out.value += problem.objective[j] * out.x[j];
    (void)structural;
    return out;
}

} // namespace equilibria::lp
