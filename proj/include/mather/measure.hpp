/** \file    measure.hpp
    \brief   Sparse probability measures on the velocity x hull lattice.

    Both occupation measures (time averages along trajectories) and LP solutions
    live on the product of a ControlGrid and an OmegaGrid, so they can be compared
    bin by bin.  Entries are kept sorted by (omega bin, velocity bin); that order is
    also the column order of the Mather linear program.
*/
#pragma once
#include "mather/hj.hpp"

#include <string>
#include <vector>

namespace mather {

struct MeasureEntry {
    std::size_t iv;  ///< velocity node
    std::size_t iw;  ///< hull node
    double w;
};

class DiscreteMeasure {
public:
    DiscreteMeasure(hj::ControlGrid vgrid, hj::OmegaGrid wgrid)
        : vgrid_(std::move(vgrid)), wgrid_(std::move(wgrid)) {}

    const hj::ControlGrid& vgrid() const { return vgrid_; }
    const hj::OmegaGrid& wgrid() const { return wgrid_; }
    const std::vector<MeasureEntry>& entries() const { return entries_; }

    /// Column index iw * #v + iv, the layout shared with the linear program.
    std::size_t column(const MeasureEntry& e) const { return e.iw * vgrid_.size() + e.iv; }

    /// Accumulate mass into a bin; call finalize() afterwards.
    void add(std::size_t iv, std::size_t iw, double w);
    /// Sort, merge duplicates, drop zero entries.
    void finalize();
    void normalize();

    double total() const;
    /// Hull marginal: mass per omega node (dense, length #omega).
    std::vector<double> trace() const;
    /// Velocity marginal: mass per velocity node.
    std::vector<double> velocity_marginal() const;

    /// Integral of f(v, theta) against the measure (bin centers).
    template <typename F>
    double integrate(F&& f) const
    {
        double s = 0;
        for (const auto& e : entries_) s += e.w * f(vgrid_.node(e.iv), wgrid_.node(e.iw));
        return s;
    }

    /// Sum of |w_a - w_b| over the union of bins.
    static double l1_distance(const DiscreteMeasure& a, const DiscreteMeasure& b);
    /// Deterministic mixture: sum_k c_k mu_k with entries merged in sorted order.
    static DiscreteMeasure mixture(const std::vector<DiscreteMeasure>& parts, const std::vector<double>& coeffs);

private:
    hj::ControlGrid vgrid_;
    hj::OmegaGrid wgrid_;
    std::vector<MeasureEntry> entries_;
};

}  // namespace mather
