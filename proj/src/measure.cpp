#include "mather/measure.hpp"

#include "mather/errors.hpp"

#include <algorithm>
#include <cmath>

namespace mather {

void DiscreteMeasure::add(std::size_t iv, std::size_t iw, double w)
{
    if (iv >= vgrid_.size() || iw >= wgrid_.size()) throw InputError("measure bin out of range");
    if (!(w >= 0) || !std::isfinite(w)) throw InputError("measure weight must be finite and nonnegative");
    entries_.push_back({iv, iw, w});
}

void DiscreteMeasure::finalize()
{
    std::stable_sort(entries_.begin(), entries_.end(), [](const MeasureEntry& a, const MeasureEntry& b) {
        return a.iw != b.iw ? a.iw < b.iw : a.iv < b.iv;
    });
    std::vector<MeasureEntry> merged;
    merged.reserve(entries_.size());
    for (const auto& e : entries_) {
        if (!merged.empty() && merged.back().iw == e.iw && merged.back().iv == e.iv)
            merged.back().w += e.w;
        else
            merged.push_back(e);
    }
    merged.erase(std::remove_if(merged.begin(), merged.end(), [](const MeasureEntry& e) { return e.w == 0.0; }),
                 merged.end());
    entries_ = std::move(merged);
}

void DiscreteMeasure::normalize()
{
    double t = total();
    if (!(t > 0)) throw NumericError("cannot normalize an empty measure");
    for (auto& e : entries_) e.w /= t;
}

double DiscreteMeasure::total() const
{
    double t = 0;
    for (const auto& e : entries_) t += e.w;
    return t;
}

std::vector<double> DiscreteMeasure::trace() const
{
    std::vector<double> nu(wgrid_.size(), 0.0);
    for (const auto& e : entries_) nu[e.iw] += e.w;
    return nu;
}

std::vector<double> DiscreteMeasure::velocity_marginal() const
{
    std::vector<double> m(vgrid_.size(), 0.0);
    for (const auto& e : entries_) m[e.iv] += e.w;
    return m;
}

double DiscreteMeasure::l1_distance(const DiscreteMeasure& a, const DiscreteMeasure& b)
{
    // Both entry lists are sorted by (iw, iv).
    double s = 0;
    std::size_t i = 0, j = 0;
    const auto& ea = a.entries_;
    const auto& eb = b.entries_;
    auto less = [](const MeasureEntry& x, const MeasureEntry& y) {
        return x.iw != y.iw ? x.iw < y.iw : x.iv < y.iv;
    };
    while (i < ea.size() || j < eb.size()) {
        if (j == eb.size() || (i < ea.size() && less(ea[i], eb[j]))) {
            s += ea[i++].w;
        } else if (i == ea.size() || less(eb[j], ea[i])) {
            s += eb[j++].w;
        } else {
            s += std::fabs(ea[i++].w - eb[j++].w);
        }
    }
    return s;
}

DiscreteMeasure DiscreteMeasure::mixture(const std::vector<DiscreteMeasure>& parts, const std::vector<double>& coeffs)
{
    if (parts.empty() || parts.size() != coeffs.size()) throw InputError("mixture needs one coefficient per part");
    DiscreteMeasure out(parts.front().vgrid_, parts.front().wgrid_);
    for (std::size_t k = 0; k < parts.size(); ++k)
        for (const auto& e : parts[k].entries_) out.entries_.push_back({e.iv, e.iw, coeffs[k] * e.w});
    out.finalize();
    return out;
}

}  // namespace mather
