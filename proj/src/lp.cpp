#include "mtdgrid/lp.hpp"

#include <cmath>
#include <limits>
#include <vector>

namespace mtdgrid {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kPivTol = 1e-9;
constexpr double kFeasTol = 1e-7;

// Standard-form program: min c'y + c0, Ay = b, y >= 0, after variable
// substitutions recorded for mapping the solution back.
struct StdForm {
    Mat a;
    Vec b;
    Vec c;
    double c0 = 0.0;

    // Original variable j reconstructs as shift[j] + sign[j]*y[col[j]]
    // (+ free variables as y[col[j]] - y[neg_col[j]]).
    std::vector<double> shift, sign;
    std::vector<int> col, neg_col;
    int n_orig = 0;
};

StdForm to_standard_form(const LpProblem& p) {
    const int m = static_cast<int>(p.a.rows());
    const int n = static_cast<int>(p.a.cols());

    StdForm sf;
    sf.n_orig = n;
    sf.shift.assign(n, 0.0);
    sf.sign.assign(n, 1.0);
    sf.col.assign(n, -1);
    sf.neg_col.assign(n, -1);

    int cols = 0;
    for (int j = 0; j < n; ++j) {
        const double lo = p.var_lb[j];
        const double hi = p.var_ub[j];
        if (std::isfinite(lo)) {
            sf.shift[j] = lo;
            sf.sign[j] = 1.0;
            sf.col[j] = cols++;
        } else if (std::isfinite(hi)) {
            sf.shift[j] = hi;
            sf.sign[j] = -1.0;
            sf.col[j] = cols++;
        } else {
            sf.col[j] = cols++;
            sf.neg_col[j] = cols++;
        }
    }

    // Count rows: equalities plus one-sided inequalities (ranges split),
    // plus upper-bound rows for doubly bounded variables.
    struct RowSpec {
        int src;        // source row, or -2 for variable bound rows
        int var;        // variable for bound rows
        double rhs;
        double scale;   // +1 for <=, -1 for >=, 0 for equality
    };
    std::vector<RowSpec> rows;
    for (int i = 0; i < m; ++i) {
        const double lo = p.row_lb[i];
        const double hi = p.row_ub[i];
        if (!std::isfinite(lo) && !std::isfinite(hi)) continue;
        if (std::isfinite(lo) && std::isfinite(hi) && lo == hi) {
            rows.push_back({i, -1, lo, 0.0});
            continue;
        }
        if (std::isfinite(hi)) rows.push_back({i, -1, hi, 1.0});
        if (std::isfinite(lo)) rows.push_back({i, -1, lo, -1.0});
    }
    for (int j = 0; j < n; ++j)
        if (std::isfinite(p.var_lb[j]) && std::isfinite(p.var_ub[j]))
            rows.push_back({-2, j, p.var_ub[j] - p.var_lb[j], 1.0});

    const int n_slack = static_cast<int>(
        std::count_if(rows.begin(), rows.end(), [](const RowSpec& r) { return r.scale != 0.0; }));

    const int mr = static_cast<int>(rows.size());
    sf.a = Mat::Zero(mr, cols + n_slack);
    sf.b = Vec::Zero(mr);
    sf.c = Vec::Zero(cols + n_slack);

    for (int j = 0; j < n; ++j) {
        sf.c[sf.col[j]] = p.c[j] * sf.sign[j];
        if (sf.neg_col[j] >= 0) sf.c[sf.neg_col[j]] = -p.c[j];
        sf.c0 += p.c[j] * sf.shift[j];
    }

    int slack = cols;
    for (int i = 0; i < mr; ++i) {
        const RowSpec& rs = rows[static_cast<std::size_t>(i)];
        double rhs = rs.rhs;
        const double mult = rs.scale == 0.0 ? 1.0 : rs.scale;
        if (rs.src >= 0) {
            for (int j = 0; j < n; ++j) {
                const double aij = p.a(rs.src, j);
                if (aij == 0.0) continue;
                sf.a(i, sf.col[j]) += mult * aij * sf.sign[j];
                if (sf.neg_col[j] >= 0) sf.a(i, sf.neg_col[j]) -= mult * aij;
                rhs -= aij * sf.shift[j] * (rs.scale == 0.0 ? 1.0 : 0.0);
            }
            if (rs.scale != 0.0) {
                double shift_term = 0.0;
                for (int j = 0; j < n; ++j) shift_term += p.a(rs.src, j) * sf.shift[j];
                rhs = mult * (rs.rhs - shift_term);
            }
        } else {
            // x'_var <= ub - lb
            sf.a(i, sf.col[rs.var]) = 1.0;
            rhs = rs.rhs;
        }
        if (rs.scale != 0.0) sf.a(i, slack++) = 1.0;
        sf.b[i] = rhs;
    }

    // Normalize to b >= 0 for the phase-1 start.
    for (int i = 0; i < mr; ++i)
        if (sf.b[i] < 0) {
            sf.a.row(i) = -sf.a.row(i);
            sf.b[i] = -sf.b[i];
        }
    return sf;
}

// Full-tableau simplex over [A | b] with basis tracking. Minimizes c'y.
class Tableau {
public:
    Tableau(Mat a, Vec b) : a_(std::move(a)), b_(std::move(b)) {
        m_ = static_cast<int>(a_.rows());
        n_ = static_cast<int>(a_.cols());
        basis_.resize(static_cast<std::size_t>(m_));
    }

    int rows() const { return m_; }
    int cols() const { return n_; }
    std::vector<int>& basis() { return basis_; }
    const Mat& a() const { return a_; }
    const Vec& b() const { return b_; }

    void pivot(int row, int col) {
        const double piv = a_(row, col);
        a_.row(row) /= piv;
        b_[row] /= piv;
        a_(row, col) = 1.0;  // kill roundoff
        for (int i = 0; i < m_; ++i) {
            if (i == row) continue;
            const double f = a_(i, col);
            if (f == 0.0) continue;
            a_.row(i) -= f * a_.row(row);
            a_(i, col) = 0.0;
            b_[i] -= f * b_[row];
        }
        basis_[static_cast<std::size_t>(row)] = col;
    }

    // Reduced costs for objective c restricted to allowed columns.
    Vec reduced_costs(const Vec& c) const {
        Vec y = Vec::Zero(m_);
        for (int i = 0; i < m_; ++i) y[i] = c[basis_[static_cast<std::size_t>(i)]];
        return c - a_.transpose() * y;
    }

    double objective(const Vec& c) const {
        double v = 0.0;
        for (int i = 0; i < m_; ++i) v += c[basis_[static_cast<std::size_t>(i)]] * b_[i];
        return v;
    }

    Vec solution(int n_vars) const {
        Vec y = Vec::Zero(n_vars);
        for (int i = 0; i < m_; ++i) {
            const int j = basis_[static_cast<std::size_t>(i)];
            if (j < n_vars) y[j] = b_[i];
        }
        return y;
    }

    // Minimize c over columns [0, allowed_cols). Returns Optimal, Unbounded
    // or IterationLimit.
    LpStatus run(const Vec& c, int allowed_cols, long max_iters) {
        int stalled = 0;
        bool bland = false;
        double last_obj = objective(c);
        for (long iter = 0; iter < max_iters; ++iter) {
            const Vec rc = reduced_costs(c);
            int enter = -1;
            if (bland) {
                for (int j = 0; j < allowed_cols; ++j)
                    if (rc[j] < -kPivTol) {
                        enter = j;
                        break;
                    }
            } else {
                double best = -kPivTol;
                for (int j = 0; j < allowed_cols; ++j)
                    if (rc[j] < best) {
                        best = rc[j];
                        enter = j;
                    }
            }
            if (enter < 0) return LpStatus::Optimal;

            int leave = -1;
            double best_ratio = kInf;
            for (int i = 0; i < m_; ++i) {
                const double aij = a_(i, enter);
                if (aij <= kPivTol) continue;
                const double ratio = b_[i] / aij;
                if (ratio < best_ratio - 1e-12 ||
                    (ratio < best_ratio + 1e-12 &&
                     (leave < 0 || basis_[static_cast<std::size_t>(i)] <
                                       basis_[static_cast<std::size_t>(leave)]))) {
                    best_ratio = ratio;
                    leave = i;
                }
            }
            if (leave < 0) return LpStatus::Unbounded;

            pivot(leave, enter);

            const double obj = objective(c);
            if (obj > last_obj - 1e-12) {
                if (++stalled > 64) bland = true;
            } else {
                stalled = 0;
                bland = false;
            }
            last_obj = obj;
        }
        return LpStatus::IterationLimit;
    }

private:
    Mat a_;
    Vec b_;
    int m_, n_;
    std::vector<int> basis_;
};

}  // namespace

LpProblem LpProblem::make(int rows, int cols) {
    LpProblem p;
    p.c = Vec::Zero(cols);
    p.a = Mat::Zero(rows, cols);
    p.row_lb = Vec::Constant(rows, -kInf);
    p.row_ub = Vec::Constant(rows, kInf);
    p.var_lb = Vec::Constant(cols, -kInf);
    p.var_ub = Vec::Constant(cols, kInf);
    return p;
}

const char* to_string(LpStatus s) {
    switch (s) {
        case LpStatus::Optimal: return "optimal";
        case LpStatus::Infeasible: return "infeasible";
        case LpStatus::Unbounded: return "unbounded";
        case LpStatus::IterationLimit: return "iteration-limit";
    }
    return "?";
}

LpSolution lp_solve(const LpProblem& p) {
    if (p.a.rows() != p.row_lb.size() || p.a.rows() != p.row_ub.size() ||
        p.a.cols() != p.c.size() || p.a.cols() != p.var_lb.size() ||
        p.a.cols() != p.var_ub.size())
        throw std::invalid_argument("inconsistent LP dimensions");

    StdForm sf = to_standard_form(p);
    const int m = static_cast<int>(sf.a.rows());
    const int n = static_cast<int>(sf.a.cols());

    LpSolution sol;
    if (m == 0) {
        // No binding rows: optimum sits at a bound (or is unbounded).
        sol.x = Vec::Zero(sf.n_orig);
        sol.objective = 0.0;
        for (int j = 0; j < sf.n_orig; ++j) {
            if (p.c[j] > 0 && std::isfinite(p.var_lb[j])) sol.x[j] = p.var_lb[j];
            else if (p.c[j] < 0 && std::isfinite(p.var_ub[j])) sol.x[j] = p.var_ub[j];
            else if (p.c[j] != 0.0) {
                sol.status = LpStatus::Unbounded;
                return sol;
            } else {
                sol.x[j] = std::isfinite(p.var_lb[j]) ? p.var_lb[j]
                          : std::isfinite(p.var_ub[j]) ? p.var_ub[j] : 0.0;
            }
            sol.objective += p.c[j] * sol.x[j];
        }
        sol.status = LpStatus::Optimal;
        return sol;
    }

    // Phase 1: artificial basis.
    Mat a_ext(m, n + m);
    a_ext.leftCols(n) = sf.a;
    a_ext.rightCols(m) = Mat::Identity(m, m);
    Tableau tab(std::move(a_ext), sf.b);
    for (int i = 0; i < m; ++i) tab.basis()[static_cast<std::size_t>(i)] = n + i;

    Vec c1 = Vec::Zero(n + m);
    c1.tail(m).setOnes();
    const long max_iters = 200L * (m + n) + 5000;
    LpStatus st = tab.run(c1, n + m, max_iters);
    if (st == LpStatus::IterationLimit) {
        sol.status = st;
        return sol;
    }
    if (tab.objective(c1) > kFeasTol * (1.0 + sf.b.cwiseAbs().maxCoeff())) {
        sol.status = LpStatus::Infeasible;
        return sol;
    }

    // Drive artificials out of the basis; redundant rows get pivoted onto
    // whatever column is available or left harmlessly at zero.
    for (int i = 0; i < m; ++i) {
        if (tab.basis()[static_cast<std::size_t>(i)] < n) continue;
        int j_piv = -1;
        for (int j = 0; j < n; ++j)
            if (std::abs(tab.a()(i, j)) > 1e-7) {
                j_piv = j;
                break;
            }
        if (j_piv >= 0) tab.pivot(i, j_piv);
    }

    // Phase 2 on the real objective; artificial columns are never allowed
    // to re-enter.
    Vec c2 = Vec::Zero(n + m);
    c2.head(n) = sf.c;
    st = tab.run(c2, n, max_iters);
    if (st != LpStatus::Optimal) {
        sol.status = st;
        return sol;
    }

    const Vec y = tab.solution(n);
    sol.x = Vec::Zero(sf.n_orig);
    for (int j = 0; j < sf.n_orig; ++j) {
        double v = sf.shift[j] + sf.sign[j] * y[sf.col[j]];
        if (sf.neg_col[j] >= 0) v -= y[sf.neg_col[j]];
        sol.x[j] = v;
    }
    sol.objective = p.c.dot(sol.x);
    sol.status = LpStatus::Optimal;
    return sol;
}

}  // namespace mtdgrid
