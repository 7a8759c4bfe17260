#pragma once

#include "siclad/dbscan.hpp"
#include "siclad/errors.hpp"
#include "siclad/hypothesis.hpp"
#include "siclad/intervals.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace siclad {

/// sigma * (||X_i(z) - X_j(z)||^2 - eps^2) <= 0, stored as p z^2 + q z + t <= 0.
/// sigma = +1 keeps j inside the eps-neighborhood of i, sigma = -1 keeps it outside.
struct quad_constraint {
    double p = 0.0;
    double q = 0.0;
    double t = 0.0;
    std::size_t i = 0;
    std::size_t j = 0;
    int sigma = 1;

    [[nodiscard]] double operator()(double z) const noexcept { return (p * z + q) * z + t; }
};

/// Unsigned coefficients of the squared distance along the line:
/// ||X_i(z) - X_j(z)||^2 = p z^2 + q z + t.
struct pair_distance {
    double p = 0.0;
    double q = 0.0;
    double t = 0.0;
};

inline pair_distance pair_distance_coefficients(const line_param& lp, std::size_t i, std::size_t j) {
    pair_distance out;
    for (std::size_t k = 0; k < lp.d; ++k) {
        const std::size_t u = i + k * lp.n;
        const std::size_t v = j + k * lp.n;
        const double da = lp.a[u] - lp.a[v];
        const double db = lp.b[u] - lp.b[v];
        out.p += db * db;
        out.q += 2.0 * da * db;
        out.t += da * da;
    }
    return out;
}

inline quad_constraint pair_quadratic(const line_param& lp, std::size_t i, std::size_t j, int sigma, double eps) {
    if (i >= lp.n || j >= lp.n) throw invalid_argument("pair index out of range");
    if (sigma != 1 && sigma != -1) throw invalid_argument("sigma must be +1 or -1");
    const auto c = pair_distance_coefficients(lp, i, j);
    const double s = sigma;
    return {s * c.p, s * c.q, s * (c.t - eps * eps), i, j, sigma};
}

/// Real roots of p z^2 + q z + t = 0 in ascending order; cancellation-free form.
inline std::vector<double> quadratic_roots(double p, double q, double t) {
    if (p == 0.0) {
        if (q == 0.0) return {};
        return {-t / q};
    }
    const double disc = q * q - 4.0 * p * t;
    if (disc < 0.0) return {};
    const double root = std::sqrt(disc);
    const double h = -0.5 * (q + (q >= 0.0 ? root : -root));
    if (h == 0.0) return {0.0, 0.0};
    double r1 = h / p;
    double r2 = t / h;
    if (r1 > r2) std::swap(r1, r2);
    return {r1, r2};
}

/// { z : p z^2 + q z + t <= 0 }.
inline interval_set solve_quadratic_le(double p, double q, double t) {
    if (p == 0.0 && q == 0.0) return t <= 0.0 ? interval_set::real_line() : interval_set{};
    if (p == 0.0) {
        const double r = -t / q;
        return q > 0.0 ? interval_set{{-infinity, r}} : interval_set{{r, infinity}};
    }
    const auto roots = quadratic_roots(p, q, t);
    if (roots.empty()) return p > 0.0 ? interval_set{} : interval_set::real_line();
    if (p > 0.0) return interval_set{{roots[0], roots[1]}};
    return interval_set{{-infinity, roots[0]}, {roots[1], infinity}};
}

inline constexpr double constraint_slack = 1e-9;

/// Connected component containing z0 of the set where every constraint holds.
inline interval feasible_component_at(std::span<const quad_constraint> constraints, double z0) {
    interval out;
    for (const auto& c : constraints) {
        const double value = c(z0);
        const double scale = std::max({1.0, std::fabs(c.t), std::fabs(c.p * z0 * z0), std::fabs(c.q * z0)});
        if (value > constraint_slack * scale) {
            throw numerical_error("constraint for pair (" + std::to_string(c.i) + ", " + std::to_string(c.j) +
                                  ") is violated at z = " + format_endpoint(z0) + " by " + std::to_string(value));
        }
        const auto solution = solve_quadratic_le(c.p, c.q, c.t);
        std::optional<interval> piece;
        for (const auto& s : solution) {
            if (s.contains(z0)) piece = s;
        }
        if (!piece) {
            // z0 sits on a rounding-displaced boundary; take the nearest piece and stretch it to z0.
            double best = infinity;
            for (const auto& s : solution) {
                const double gap = z0 < s.lo ? s.lo - z0 : z0 - s.hi;
                if (gap < best) {
                    best = gap;
                    piece = interval{std::min(s.lo, z0), std::max(s.hi, z0)};
                }
            }
            if (!piece) piece = interval{z0, z0};
        }
        out = intersect(out, *piece);
    }
    return out;
}

/// Largest interval around z0 on which every eps-neighborhood of X(z) equals that of X(z0).
inline interval over_conditioned_region(const line_param& lp, double z0, double eps) {
    const auto x = lp.matrix(z0);
    const double eps2 = eps * eps;
    std::vector<quad_constraint> constraints;
    constraints.reserve(lp.n * (lp.n - 1) / 2);
    for (std::size_t i = 0; i < lp.n; ++i) {
        for (std::size_t j = i + 1; j < lp.n; ++j) {
            const int sigma = squared_distance(x, i, j) <= eps2 ? 1 : -1;
            constraints.push_back(pair_quadratic(lp, i, j, sigma, eps));
        }
    }
    return feasible_component_at(constraints, z0);
}

/// Linear coefficients of the feature gaps X_{j,k}(z) - mean_{l not in O} X_{l,k}(z) = c_k + g_k z.
struct gap_line {
    std::vector<double> c;
    std::vector<double> g;
};

inline gap_line gap_coefficients(const line_param& lp, const index_set& anomalies) {
    detail::check_hypothesis_indices(lp.n, anomalies, lp.index);
    const auto in = detail::membership(lp.n, anomalies);
    const double m = static_cast<double>(lp.n - anomalies.size());
    gap_line out{std::vector<double>(lp.d), std::vector<double>(lp.d)};
    for (std::size_t k = 0; k < lp.d; ++k) {
        double ma = 0.0, mb = 0.0;
        for (std::size_t i = 0; i < lp.n; ++i) {
            if (in[i]) continue;
            ma += lp.a[i + k * lp.n];
            mb += lp.b[i + k * lp.n];
        }
        out.c[k] = lp.a[lp.index + k * lp.n] - ma / m;
        out.g[k] = lp.b[lp.index + k * lp.n] - mb / m;
    }
    return out;
}

/// Component containing z0 of { z : s_k (c_k + g_k z) >= 0 for every k with s_k != 0 }.
inline interval sign_region(const line_param& lp, const index_set& anomalies, double z0, std::span<const int> sign) {
    if (sign.size() != lp.d) throw invalid_argument("sign vector length does not match d");
    const auto gaps = gap_coefficients(lp, anomalies);
    std::vector<quad_constraint> constraints;
    for (std::size_t k = 0; k < lp.d; ++k) {
        if (sign[k] == 0) continue;
        constraints.push_back({0.0, -sign[k] * gaps.g[k], -sign[k] * gaps.c[k], lp.index, k, sign[k]});
    }
    return feasible_component_at(constraints, z0);
}

inline interval sign_region(const line_param& lp, const index_set& anomalies, double z0) {
    if (!lp.sign) throw invalid_argument("sign region requested for a line without a sign vector");
    return sign_region(lp, anomalies, z0, *lp.sign);
}

struct search_options {
    double delta = 0.001;
    std::optional<double> z_min;
    std::optional<double> z_max;
    double span_sd = 20.0; ///< default half-width of the window in standard deviations
};

inline std::pair<double, double> search_window(const line_param& lp, const search_options& opt) {
    const double half = opt.span_sd * lp.sd();
    const double lo = opt.z_min.value_or(std::min(lp.z_obs, 0.0) - half);
    const double hi = opt.z_max.value_or(std::max(lp.z_obs, 0.0) + half);
    return {lo, hi};
}

struct line_search_result {
    interval_set region;
    std::size_t steps = 0; ///< over-conditioned intervals visited
};

namespace detail {

/// A pair whose neighbor status flips inside the search window: in-neighborhood exactly on [lo, hi].
struct moving_pair {
    std::size_t i;
    std::size_t j;
    double lo;
    double hi;
};

} // namespace detail

/// Walks the line from z_min to z_max, one over-conditioned interval at a time, and collects the
/// intervals on which DBSCAN reproduces the observed anomaly set (and, for d > 1, the observed sign vector).
///
/// Along the line the squared distance of every pair is a fixed quadratic with nonnegative leading
/// coefficient, so a pair is inside the eps-neighborhood exactly between the two roots of
/// dist^2(z) = eps^2. The over-conditioned interval at z is therefore the gap between consecutive
/// breakpoints around z; pairs without a breakpoint in the window keep a constant status.
inline line_search_result line_search_detailed(const line_param& lp, const dbscan_params& params,
                                               const index_set& observed, const search_options& opt = {}) {
    params.validate();
    if (!(opt.delta > 0.0)) throw invalid_argument("line search step delta must be positive");
    const auto [z_min, z_max] = search_window(lp, opt);
    if (!(z_min < lp.z_obs && lp.z_obs < z_max)) {
        throw invalid_argument("search window [" + format_endpoint(z_min) + ", " + format_endpoint(z_max) +
                               "] does not strictly contain z_obs = " + format_endpoint(lp.z_obs));
    }
    const std::size_t n = lp.n;
    const double eps2 = params.eps * params.eps;

    neighbor_graph base(n);
    std::vector<detail::moving_pair> moving;
    std::vector<double> breaks;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const auto c = pair_distance_coefficients(lp, i, j);
            const auto roots = quadratic_roots(c.p, c.q, c.t - eps2);
            // p >= 0: either never inside, or inside exactly between the roots.
            if (roots.size() < 2 || c.p <= 0.0) {
                if (c.p == 0.0 && c.q == 0.0 && c.t <= eps2) base.set(i, j, true);
                if (c.p == 0.0 && c.q != 0.0) {
                    // Only reachable through round-off in b; treat as a half-line.
                    const double r = roots.front();
                    const bool in_left = c.q > 0.0;
                    const double lo = in_left ? -infinity : r;
                    const double hi = in_left ? r : infinity;
                    if (r > z_min && r < z_max) {
                        moving.push_back({i, j, lo, hi});
                        breaks.push_back(r);
                    } else if (lo <= z_min && z_min <= hi) {
                        base.set(i, j, true);
                    }
                }
                continue;
            }
            const double lo = roots[0], hi = roots[1];
            const bool lo_inside = lo > z_min && lo < z_max;
            const bool hi_inside = hi > z_min && hi < z_max;
            if (lo_inside || hi_inside) {
                moving.push_back({i, j, lo, hi});
                if (lo_inside) breaks.push_back(lo);
                if (hi_inside) breaks.push_back(hi);
            } else if (lo <= z_min && z_max <= hi) {
                base.set(i, j, true);
            }
        }
    }

    std::optional<gap_line> gaps;
    if (lp.sign) {
        gaps = gap_coefficients(lp, observed);
        for (std::size_t k = 0; k < lp.d; ++k) {
            if (gaps->g[k] == 0.0) continue;
            const double r = -gaps->c[k] / gaps->g[k];
            if (r > z_min && r < z_max) breaks.push_back(r);
        }
    }
    std::sort(breaks.begin(), breaks.end());

    line_search_result out;
    neighbor_graph g = base;
    std::vector<int> sign_at(lp.d, 0);
    double z = z_min;
    bool covered_obs = false;
    while (z < z_max) {
        const auto above = std::lower_bound(breaks.begin(), breaks.end(), z);
        const auto below = std::upper_bound(breaks.begin(), breaks.end(), z);
        const double left = below == breaks.begin() ? z_min : std::max(z_min, *(below - 1));
        const double right = above == breaks.end() ? z_max : std::min(z_max, *above);

        for (const auto& m : moving) g.set(m.i, m.j, m.lo <= z && z <= m.hi);
        bool match = mask_to_indices(noise_mask(g, params.min_pts)) == observed;
        if (match && gaps) {
            for (std::size_t k = 0; k < lp.d; ++k) sign_at[k] = sign_of(gaps->c[k] + gaps->g[k] * z);
            match = sign_at == *lp.sign;
        }
        if (match) out.region.add({left, right});
        ++out.steps;
        if (left <= lp.z_obs && lp.z_obs <= right) covered_obs = true;

        double next = std::max(right, z) + opt.delta;
        // Never step over the observed statistic: its own interval may be narrower than delta.
        if (!covered_obs && right < lp.z_obs && next > lp.z_obs) next = lp.z_obs;
        z = next;
    }

    if (!out.region.contains(lp.z_obs)) {
        throw numerical_error("observed statistic z = " + format_endpoint(lp.z_obs) +
                              " is not in its own truncation region for index " + std::to_string(lp.index + 1));
    }
    return out;
}

inline interval_set line_search(const line_param& lp, double z_min, double z_max, const dbscan_params& params,
                                const index_set& observed, double delta = 0.001) {
    search_options opt;
    opt.z_min = z_min;
    opt.z_max = z_max;
    opt.delta = delta;
    return line_search_detailed(lp, params, observed, opt).region;
}

} // namespace siclad
