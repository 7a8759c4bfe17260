#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <initializer_list>
#include <limits>
#include <string>
#include <vector>

namespace siclad {

inline constexpr double infinity = std::numeric_limits<double>::infinity();

/// Closed interval [lo, hi]; endpoints may be infinite.
struct interval {
    double lo = -infinity;
    double hi = infinity;

    [[nodiscard]] bool empty() const noexcept { return !(lo <= hi); }
    [[nodiscard]] bool contains(double z) const noexcept { return lo <= z && z <= hi; }
    [[nodiscard]] double width() const noexcept { return hi - lo; }

    friend bool operator==(const interval&, const interval&) = default;
};

inline interval intersect(const interval& a, const interval& b) noexcept {
    return {std::max(a.lo, b.lo), std::min(a.hi, b.hi)};
}

/// Finite union of disjoint closed intervals, kept sorted. Pieces whose gap is at most
/// merge_tolerance are fused.
class interval_set {
public:
    static constexpr double merge_tolerance = 1e-12;

    interval_set() = default;
    interval_set(std::initializer_list<interval> pieces) {
        for (const auto& p : pieces) add(p);
    }

    static interval_set real_line() { return interval_set{interval{}}; }

    [[nodiscard]] const std::vector<interval>& pieces() const noexcept { return pieces_; }
    [[nodiscard]] std::size_t size() const noexcept { return pieces_.size(); }
    [[nodiscard]] bool empty() const noexcept { return pieces_.empty(); }
    [[nodiscard]] auto begin() const noexcept { return pieces_.begin(); }
    [[nodiscard]] auto end() const noexcept { return pieces_.end(); }

    void add(interval piece) {
        if (piece.empty()) return;
        auto it = std::lower_bound(pieces_.begin(), pieces_.end(), piece.lo,
                                   [](const interval& p, double lo) { return p.hi + merge_tolerance < lo; });
        auto last = it;
        while (last != pieces_.end() && last->lo <= piece.hi + merge_tolerance) {
            piece.lo = std::min(piece.lo, last->lo);
            piece.hi = std::max(piece.hi, last->hi);
            ++last;
        }
        it = pieces_.erase(it, last);
        pieces_.insert(it, piece);
    }

    [[nodiscard]] bool contains(double z) const noexcept {
        auto it = std::lower_bound(pieces_.begin(), pieces_.end(), z,
                                   [](const interval& p, double v) { return p.hi < v; });
        return it != pieces_.end() && it->lo <= z;
    }

    [[nodiscard]] double total_width() const noexcept {
        double w = 0.0;
        for (const auto& p : pieces_) w += p.width();
        return w;
    }

    [[nodiscard]] interval_set unite(const interval_set& other) const {
        interval_set out = *this;
        for (const auto& p : other.pieces_) out.add(p);
        return out;
    }

    [[nodiscard]] interval_set intersect(const interval_set& other) const {
        interval_set out;
        std::size_t i = 0, j = 0;
        while (i < pieces_.size() && j < other.pieces_.size()) {
            const auto cut = siclad::intersect(pieces_[i], other.pieces_[j]);
            if (!cut.empty()) out.pieces_.push_back(cut);
            if (pieces_[i].hi < other.pieces_[j].hi) {
                ++i;
            } else {
                ++j;
            }
        }
        // Touching pieces from the two inputs may abut; normalize.
        interval_set merged;
        for (const auto& p : out.pieces_) merged.add(p);
        return merged;
    }

    [[nodiscard]] interval_set intersect(const interval& piece) const { return intersect(interval_set{piece}); }

    friend bool operator==(const interval_set&, const interval_set&) = default;

private:
    std::vector<interval> pieces_;
};

/// (-inf, -r] U [r, inf) for r >= 0.
inline interval_set outside_symmetric(double r) {
    r = std::fabs(r);
    if (r == 0.0) return interval_set::real_line();
    return interval_set{{-infinity, -r}, {r, infinity}};
}

inline std::string format_endpoint(double v) {
    if (v == infinity) return "inf";
    if (v == -infinity) return "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

} // namespace siclad
