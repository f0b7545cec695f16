#include "mather/simplex.hpp"

#include "mather/errors.hpp"

#include <algorithm>
#include <cmath>

namespace mather::lp {

DenseModel::DenseModel(Mat A, Vec c, Vec lo, Vec hi)
    : A_(std::move(A)), c_(std::move(c)), lo_(std::move(lo)), hi_(std::move(hi))
{
    if (c_.size() != A_.cols() || lo_.size() != A_.rows() || hi_.size() != A_.rows())
        throw InputError("dense LP dimensions do not match");
    for (Eigen::Index i = 0; i < lo_.size(); ++i)
        if (lo_[i] > hi_[i]) throw InputError("row lower bound exceeds upper bound");
}

void DenseModel::products(const Vec& y, std::vector<double>& out) const
{
    Vec p = A_.transpose() * y;
    out.assign(p.data(), p.data() + p.size());
}

std::string to_string(Status s)
{
    switch (s) {
    case Status::Optimal: return "optimal";
    case Status::Infeasible: return "infeasible";
    case Status::IterationLimit: return "iteration-limit";
    }
    return "unknown";
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

enum class VarState : unsigned char { Basic, Lower, Upper };

class Revised {
public:
    Revised(const ColumnModel& model, const SimplexOptions& opts)
        : model_(model), opts_(opts), n_(model.cols()), m_(model.rows()), total_(n_ + 2 * m_)
    {
        lower_.assign(total_, 0.0);
        upper_.assign(total_, kInf);
        state_.assign(total_, VarState::Lower);
        pos_.assign(total_, -1);
        cost2_.assign(n_, 0.0);
        for (std::size_t j = 0; j < n_; ++j) cost2_[j] = model.cost(j);
        sign_.assign(m_, 1.0);
        basis_.resize(m_);
        order_ = model.priority();
        if (order_.empty()) {
            order_.resize(n_);
            for (std::size_t j = 0; j < n_; ++j) order_[j] = j;
        }
        if (order_.size() != n_) throw InputError("pricing order must list every column once");
        for (std::size_t j = n_; j < total_; ++j) order_.push_back(j);
        rank_.assign(total_, total_);
        for (std::size_t r = 0; r < total_; ++r) {
            if (order_[r] >= total_ || rank_[order_[r]] != total_)
                throw InputError("pricing order must list every column once");
            rank_[order_[r]] = r;
        }
        xB_ = Vec::Zero(m_);
        for (std::size_t i = 0; i < m_; ++i) {
            const double lo = model.row_lower(i), hi = model.row_upper(i);
            if (!(lo <= hi)) throw InputError("row " + std::to_string(i) + " has an empty band");
            const std::size_t s = n_ + i, a = n_ + m_ + i;
            lower_[s] = lo;
            upper_[s] = hi;
            if (lo <= 0.0 && 0.0 <= hi) {
                // A x = 0 at the start, so the slack itself is a feasible basic variable.
                set_basic(i, s);
                xB_[i] = 0.0;
                state_[a] = VarState::Lower;
            } else {
                double b = (std::fabs(lo) <= std::fabs(hi)) ? lo : hi;
                state_[s] = (b == lo) ? VarState::Lower : VarState::Upper;
                // A x - s + sign * art = 0 with A x = 0: art = |b|.
                sign_[i] = b > 0 ? 1.0 : -1.0;
                set_basic(i, a);
                xB_[i] = std::fabs(b);
            }
        }
        refactor();
    }

    Solution run()
    {
        Solution sol;
        // Phase I
        bool any_art = false;
        for (std::size_t i = 0; i < m_; ++i) any_art |= is_art(basis_[i]);
        if (any_art) {
            bool done = iterate(1, sol.pivots);
            sol.phase1_pivots = sol.pivots;
            if (!done) {
                sol.status = Status::IterationLimit;
                finish(sol, false);
                return sol;
            }
            double infeas = 0;
            long worst = -1;
            double worst_val = 0;
            for (std::size_t r = 0; r < m_; ++r) {
                if (is_art(basis_[r])) {
                    infeas += xB_[r];
                    if (xB_[r] > worst_val) {
                        worst_val = xB_[r];
                        worst = static_cast<long>(basis_[r] - n_ - m_);
                    }
                }
            }
            if (infeas > opts_.feas_tol) {
                sol.status = Status::Infeasible;
                sol.violating_row = worst;
                finish(sol, false);
                return sol;
            }
            drive_out_artificials(sol);
        }
        for (std::size_t i = 0; i < m_; ++i) {
            const std::size_t a = n_ + m_ + i;
            lower_[a] = upper_[a] = 0.0;
        }
        // Phase II
        bool done = iterate(2, sol.pivots);
        sol.status = done ? Status::Optimal : Status::IterationLimit;
        finish(sol, true);
        return sol;
    }

private:
    bool is_art(std::size_t j) const { return j >= n_ + m_; }

    void set_basic(std::size_t r, std::size_t j)
    {
        basis_[r] = j;
        pos_[j] = static_cast<long>(r);
        state_[j] = VarState::Basic;
    }

    double phase_cost(int phase, std::size_t j) const
    {
        if (phase == 1) return is_art(j) ? 1.0 : 0.0;
        return j < n_ ? cost2_[j] : 0.0;
    }

    void column(std::size_t j, Vec& out) const
    {
        if (j < n_) {
            model_.column(j, out);
            return;
        }
        out = Vec::Zero(m_);
        if (j < n_ + m_)
            out[j - n_] = -1.0;
        else
            out[j - n_ - m_] = sign_[j - n_ - m_];
    }

    double nonbasic_value(std::size_t j) const
    {
        return state_[j] == VarState::Upper ? upper_[j] : lower_[j];
    }

    /// Factorises the current basis and recomputes the basic values from scratch.
    /// Done after every pivot: the row count is small, and these measure LPs produce
    /// bases ill-conditioned enough that product-form updates drift within a few
    /// hundred pivots.
    void refactor()
    {
        Mat B(m_, m_);
        Vec col;
        for (std::size_t r = 0; r < m_; ++r) {
            column(basis_[r], col);
            B.col(r) = col;
        }
        lu_.compute(B);
        if (!(lu_.rcond() > 1e-14)) throw NumericError("basis matrix became singular");
        // Nonbasic structurals sit at zero; only slacks (and fixed artificials) contribute.
        Vec rhs = Vec::Zero(m_);
        for (std::size_t i = 0; i < m_; ++i) {
            const std::size_t s = n_ + i;
            if (state_[s] != VarState::Basic) rhs[i] += nonbasic_value(s);
            const std::size_t a = n_ + m_ + i;
            if (state_[a] != VarState::Basic) rhs[i] -= sign_[i] * nonbasic_value(a);
        }
        xB_ = lu_.solve(rhs);
    }

    Vec duals(int phase) const
    {
        Vec cB(m_);
        for (std::size_t r = 0; r < m_; ++r) cB[r] = phase_cost(phase, basis_[r]);
        return lu_.transpose().solve(cB);
    }

    double reduced_cost(int phase, std::size_t j, const Vec& y) const
    {
        if (j < n_) return phase_cost(phase, j) - prod_[j];
        if (j < n_ + m_) return y[j - n_];
        return phase_cost(phase, j) - sign_[j - n_ - m_] * y[j - n_ - m_];
    }

    bool eligible(std::size_t j, double d) const
    {
        if (state_[j] == VarState::Basic || lower_[j] == upper_[j]) return false;
        if (state_[j] == VarState::Lower) return d < -opts_.opt_tol;
        return d > opts_.opt_tol;
    }

    /// Returns true on optimality, false when the pivot budget is exhausted.
    bool iterate(int phase, long& pivots)
    {
        Vec a, alpha;
        int degenerate_run = 0;
        while (true) {
            const bool bland = opts_.pricing == Pricing::Bland || degenerate_run >= opts_.bland_after;
            Vec y = duals(phase);
            model_.products(y, prod_);
            long q = -1;
            double dq = 0;
            if (bland) {
                for (std::size_t j : order_) {
                    double d = reduced_cost(phase, j, y);
                    if (eligible(j, d)) {
                        q = static_cast<long>(j);
                        dq = d;
                        break;
                    }
                }
            } else {
                // Natural order keeps the scan sequential; equal scores go to the higher priority.
                // Structurals live in [0, inf), so only a negative reduced cost at a nonbasic
                // one qualifies; this loop dominates on large models.
                const double* c = phase == 2 ? cost2_.data() : nullptr;
                const double* p = prod_.data();
                double best = opts_.opt_tol;
                for (std::size_t j = 0; j < n_; ++j) {
                    const double d = (c ? c[j] : 0.0) - p[j];
                    if (-d < best || state_[j] == VarState::Basic) continue;
                    if (-d == best && (q < 0 || rank_[j] > rank_[static_cast<std::size_t>(q)])) continue;
                    q = static_cast<long>(j);
                    dq = d;
                    best = -d;
                }
                for (std::size_t j = n_; j < total_; ++j) {
                    double d = reduced_cost(phase, j, y);
                    if (!eligible(j, d)) continue;
                    const double score = std::fabs(d), best = std::fabs(dq);
                    if (score > best || (score == best && q >= 0 && rank_[j] < rank_[static_cast<std::size_t>(q)])) {
                        q = static_cast<long>(j);
                        dq = d;
                    }
                }
            }
            if (q < 0) return true;
            if (pivots >= opts_.max_pivots) return false;

            const std::size_t jq = static_cast<std::size_t>(q);
            const double dir = dq < 0 ? 1.0 : -1.0;
            column(jq, a);
            alpha = lu_.solve(a);

            // Entries below the relative pivot tolerance are treated as zero: in exact
            // arithmetic they usually are, and pivoting on them makes the basis singular.
            const double tiny = opts_.pivot_tol * std::max(1.0, alpha.cwiseAbs().maxCoeff());
            double t = upper_[jq] - lower_[jq];
            long leave = -1;
            std::size_t leave_var = jq;
            double leave_pivot = 1.0;
            bool to_lower = false;
            for (std::size_t r = 0; r < m_; ++r) {
                const double delta = -dir * alpha[r];
                if (std::fabs(alpha[r]) <= tiny) continue;
                const std::size_t b = basis_[r];
                double tr;
                bool hits_lower;
                if (delta < 0) {
                    if (lower_[b] == -kInf) continue;
                    tr = std::max(0.0, (xB_[r] - lower_[b]) / -delta);
                    hits_lower = true;
                } else {
                    if (upper_[b] == kInf) continue;
                    tr = std::max(0.0, (upper_[b] - xB_[r]) / delta);
                    hits_lower = false;
                }
                const double tie = std::isfinite(t) ? 1e-12 * (1.0 + t) : 0.0;
                // Ties: Bland takes the first in priority order, otherwise the largest pivot.
                const bool better_tie = bland ? rank_[b] < rank_[leave_var] : std::fabs(alpha[r]) > leave_pivot;
                if (tr < t - tie || (tr <= t + tie && better_tie)) {
                    t = tr;
                    leave = static_cast<long>(r);
                    leave_var = b;
                    leave_pivot = std::fabs(alpha[r]);
                    to_lower = hits_lower;
                }
            }
            degenerate_run = t <= 1e-12 ? degenerate_run + 1 : 0;
            if (t == kInf) throw NumericError("linear program is unbounded");

            xB_ -= (dir * t) * alpha;
            const double entering_value = nonbasic_value(jq) + dir * t;
            ++pivots;
            if (leave < 0) {
                state_[jq] = (state_[jq] == VarState::Lower) ? VarState::Upper : VarState::Lower;
                continue;
            }
            const std::size_t r = static_cast<std::size_t>(leave);
            pivot(r, jq, entering_value, to_lower ? VarState::Lower : VarState::Upper);
        }
    }

    void pivot(std::size_t r, std::size_t jq, double entering_value, VarState leaving_state)
    {
        const std::size_t out = basis_[r];
        state_[out] = leaving_state;
        pos_[out] = -1;
        set_basic(r, jq);
        xB_[r] = entering_value;
        refactor();
    }

    void drive_out_artificials(Solution& sol)
    {
        for (std::size_t r = 0; r < m_; ++r) {
            if (!is_art(basis_[r])) continue;
            Vec er = Vec::Zero(m_);
            er[r] = 1.0;
            Vec rho = lu_.transpose().solve(er);
            model_.products(rho, prod_);
            // Prefer structurals and slacks with room to move; a fixed slack can always
            // replace the artificial, but then the row is a combination of the others.
            long best = -1;
            bool fixed_only = false;
            for (int pass = 0; pass < 2 && best < 0; ++pass) {
                double best_abs = 1e-7;
                for (std::size_t j = 0; j < n_ + m_; ++j) {
                    if (state_[j] == VarState::Basic) continue;
                    if ((lower_[j] == upper_[j]) != (pass == 1)) continue;
                    double v = j < n_ ? prod_[j] : -rho[j - n_];
                    if (std::fabs(v) > best_abs) {
                        best_abs = std::fabs(v);
                        best = static_cast<long>(j);
                    }
                }
                fixed_only = pass == 1;
            }
            if (best < 0) throw NumericError("artificial variable could not be removed from the basis");
            if (fixed_only) sol.redundant_rows.push_back(basis_[r] - n_ - m_);
            const std::size_t jq = static_cast<std::size_t>(best);
            pivot(r, jq, nonbasic_value(jq), VarState::Lower);
        }
    }

    void finish(Solution& sol, bool phase2)
    {
        refactor();
        sol.x.assign(n_, 0.0);
        for (std::size_t r = 0; r < m_; ++r)
            if (basis_[r] < n_) sol.x[basis_[r]] = std::max(0.0, xB_[r]);
        Vec Ax = Vec::Zero(m_), col;
        for (std::size_t j = 0; j < n_; ++j) {
            if (sol.x[j] == 0.0) continue;
            model_.column(j, col);
            Ax += sol.x[j] * col;
        }
        sol.s.assign(Ax.data(), Ax.data() + m_);
        sol.primal_residual = 0;
        for (std::size_t i = 0; i < m_; ++i) {
            double lo = model_.row_lower(i), hi = model_.row_upper(i);
            double viol = std::max({0.0, lo - Ax[i], Ax[i] - hi});
            sol.primal_residual = std::max(sol.primal_residual, viol);
        }
        const int phase = phase2 ? 2 : 1;
        sol.y = duals(phase);
        model_.products(sol.y, prod_);
        double mrc = 0;
        for (std::size_t j = 0; j < n_ + m_; ++j) {
            if (state_[j] == VarState::Basic || lower_[j] == upper_[j]) continue;
            double d = reduced_cost(phase, j, sol.y);
            mrc = std::min(mrc, state_[j] == VarState::Lower ? d : -d);
        }
        sol.min_reduced_cost = mrc;
        if (phase2) {
            double obj = 0;
            for (std::size_t j = 0; j < n_; ++j) obj += cost2_[j] * sol.x[j];
            sol.objective = obj;
            double dv = 0;
            for (std::size_t i = 0; i < m_; ++i) {
                double lo = model_.row_lower(i), hi = model_.row_upper(i);
                dv += std::min(sol.y[i] * lo, sol.y[i] * hi);
            }
            sol.dual_value = dv;
        }
    }

    const ColumnModel& model_;
    SimplexOptions opts_;
    std::size_t n_, m_, total_;
    std::vector<double> lower_, upper_, cost2_, sign_;
    std::vector<VarState> state_;
    std::vector<long> pos_;
    std::vector<std::size_t> order_, rank_;  ///< Bland priority: order_[rank_[j]] == j
    std::vector<std::size_t> basis_;
    Vec xB_;
    Eigen::PartialPivLU<Mat> lu_;
    std::vector<double> prod_;
};

}  // namespace

Solution simplex_solve(const ColumnModel& model, const SimplexOptions& opts)
{
    if (model.rows() == 0) throw InputError("linear program has no rows");
    if (model.cols() == 0) throw InputError("linear program has no columns");
    if (opts.max_pivots < 0) throw InputError("invalid simplex options");
    Revised rs(model, opts);
    return rs.run();
}

}  // namespace mather::lp
