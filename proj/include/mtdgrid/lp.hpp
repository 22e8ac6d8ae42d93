#pragma once

#include "mtdgrid/types.hpp"

namespace mtdgrid {

enum class LpStatus { Optimal, Infeasible, Unbounded, IterationLimit };

/// Dense linear program, always minimization:
///   min c'x  s.t.  row_lb <= A x <= row_ub,  var_lb <= x <= var_ub.
/// Equality rows have row_lb == row_ub; use +/-infinity for one-sided
/// bounds and free variables.
struct LpProblem {
    Vec c;
    Mat a;
    Vec row_lb, row_ub;
    Vec var_lb, var_ub;

    static LpProblem make(int rows, int cols);
};

struct LpSolution {
    LpStatus status = LpStatus::Infeasible;
    Vec x;
    double objective = 0.0;
};

const char* to_string(LpStatus s);

/// Two-phase primal simplex on the standard-form reduction of the problem.
/// Dantzig pricing with a Bland's-rule fallback when pivots stall.
LpSolution lp_solve(const LpProblem& p);

}  // namespace mtdgrid
