/** \file    simplex.hpp
    \brief   Dense revised simplex for  min c^T x  s.t.  lo <= A x <= hi,  x >= 0.

    Each row gets a bounded slack s_i in [lo_i, hi_i] with  A x - s = 0, so
    equalities are rows with lo = hi.  Columns are supplied through ColumnModel,
    which lets large structured problems price all columns without ever forming A.

    Phase I starts from a diagonal basis of slacks and signed artificials and
    minimises the artificial sum; Phase II fixes artificials to [0,0].  The
    entering column is the most negative reduced cost until a run of degenerate
    pivots, then Bland's rule (first eligible candidate in a fixed priority order)
    takes over until the objective moves again, so cycling is excluded and the
    pivot sequence is deterministic.  Any fixed order works for the anti-cycling
    argument, so models may supply one that keeps bases well conditioned.
    The basis is refactorised (dense LU) after every pivot, which keeps the method
    stable on ill-conditioned bases at a cost of O(rows^3) per pivot.
*/
#pragma once
#include "mather/hull.hpp"

#include <cstddef>
#include <limits>
#include <string>
#include <vector>

namespace mather::lp {

class ColumnModel {
public:
    virtual ~ColumnModel() = default;
    virtual std::size_t rows() const = 0;
    virtual std::size_t cols() const = 0;
    virtual double cost(std::size_t j) const = 0;
    /// Dense column j (length rows()).
    virtual void column(std::size_t j, Vec& out) const = 0;
    /// out[j] = y^T a_j for every column.
    virtual void products(const Vec& y, std::vector<double>& out) const = 0;
    virtual double row_lower(std::size_t i) const = 0;
    virtual double row_upper(std::size_t i) const = 0;
    /// Structural columns in Bland priority order; empty means natural order.
    /// Slacks and artificials always rank after every structural.
    virtual std::vector<std::size_t> priority() const { return {}; }
};

/// Explicit dense matrix, for small problems and tests.
class DenseModel : public ColumnModel {
public:
    DenseModel(Mat A, Vec c, Vec lo, Vec hi);
    std::size_t rows() const override { return static_cast<std::size_t>(A_.rows()); }
    std::size_t cols() const override { return static_cast<std::size_t>(A_.cols()); }
    double cost(std::size_t j) const override { return c_[j]; }
    void column(std::size_t j, Vec& out) const override { out = A_.col(j); }
    void products(const Vec& y, std::vector<double>& out) const override;
    double row_lower(std::size_t i) const override { return lo_[i]; }
    double row_upper(std::size_t i) const override { return hi_[i]; }
    const Mat& matrix() const { return A_; }

private:
    Mat A_;
    Vec c_, lo_, hi_;
};

enum class Status { Optimal, Infeasible, IterationLimit };
std::string to_string(Status s);

/// Entering rule.  Dantzig takes the most negative reduced cost and switches to
/// Bland's rule after `bland_after` consecutive degenerate pivots, returning to
/// Dantzig after the next pivot that moves; cycling is excluded either way.
enum class Pricing { Bland, Dantzig };

struct SimplexOptions {
    Pricing pricing = Pricing::Dantzig;
    int bland_after = 50;
    long max_pivots = 2000000;
    double feas_tol = 1e-9;   ///< Phase I optimum above this means infeasible
    double opt_tol = 1e-9;    ///< reduced-cost threshold
    double pivot_tol = 1e-9;  ///< smallest admissible pivot, relative to max(1, |B^-1 a_q|_inf)
};

struct Solution {
    Status status = Status::Infeasible;
    double objective = std::numeric_limits<double>::quiet_NaN();
    std::vector<double> x;    ///< structural values
    std::vector<double> s;    ///< row activities A x (the slack values)
    Vec y;                    ///< row duals
    long pivots = 0;
    long phase1_pivots = 0;
    long violating_row = -1;  ///< set when infeasible
    double primal_residual = 0;    ///< max over rows of the distance of A x to [lo, hi]
    double min_reduced_cost = 0;   ///< most negative signed reduced cost (>= -opt_tol when optimal)
    double dual_value = std::numeric_limits<double>::quiet_NaN();  ///< sum_i min(y_i lo_i, y_i hi_i)
    std::vector<std::size_t> redundant_rows;  ///< dependent equality rows (artificial replaced only by a fixed slack)
};

Solution simplex_solve(const ColumnModel& model, const SimplexOptions& opts = {});

}  // namespace mather::lp
