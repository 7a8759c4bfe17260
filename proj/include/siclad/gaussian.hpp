#pragma once

// Standard normal probabilities that keep relative accuracy deep into the tails.
// Everything is computed as a log-mass so that ratios of tiny masses stay finite.

#include <array>
#include <cmath>
#include <limits>
#include <numbers>

namespace siclad {

namespace detail {

inline constexpr double log_sqrt_2pi = 0.91893853320467274178;

/// Mills ratio Q(x)/phi(x) by Lentz's continued fraction; accurate for x >= ~5.
inline double mills_ratio_cf(double x) {
    constexpr double tiny = 1e-300;
    double f = x;
    double c = f;
    double d = 0.0;
    for (int k = 1; k < 1000; ++k) {
        d = x + k * d;
        if (std::fabs(d) < tiny) d = tiny;
        c = x + k / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double delta = c * d;
        f *= delta;
        if (std::fabs(delta - 1.0) < 1e-16) break;
    }
    return 1.0 / f;
}

/// 24-point Gauss-Legendre rule on [-1, 1], built once by Newton iteration.
struct gauss_legendre_rule {
    static constexpr int order = 24;
    std::array<double, order> nodes{};
    std::array<double, order> weights{};

    gauss_legendre_rule() {
        for (int i = 0; i < order; ++i) {
            double x = std::cos(std::numbers::pi * (i + 0.75) / (order + 0.5));
            double dp = 0.0;
            for (int it = 0; it < 100; ++it) {
                double p0 = 1.0, p1 = x;
                for (int k = 2; k <= order; ++k) {
                    const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                    p0 = p1;
                    p1 = p2;
                }
                dp = order * (x * p1 - p0) / (x * x - 1.0);
                const double step = p1 / dp;
                x -= step;
                if (std::fabs(step) < 1e-16) break;
            }
            nodes[i] = x;
            weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
        }
    }
};

inline const gauss_legendre_rule& legendre() {
    static const gauss_legendre_rule rule;
    return rule;
}

inline double log_add_exp(double a, double b) {
    if (a == -std::numeric_limits<double>::infinity()) return b;
    if (b == -std::numeric_limits<double>::infinity()) return a;
    const double hi = std::max(a, b);
    return hi + std::log1p(std::exp(std::min(a, b) - hi));
}

} // namespace detail

inline double log_normal_pdf(double x) { return -0.5 * x * x - detail::log_sqrt_2pi; }

/// log P(Z >= x), Z ~ N(0, 1).
inline double log_upper_tail(double x) {
    if (x == std::numeric_limits<double>::infinity()) return -std::numeric_limits<double>::infinity();
    if (x == -std::numeric_limits<double>::infinity()) return 0.0;
    if (x < 0.0) return std::log1p(-0.5 * std::erfc(-x / std::numbers::sqrt2));
    if (x < 30.0) return std::log(0.5 * std::erfc(x / std::numbers::sqrt2));
    return log_normal_pdf(x) + std::log(detail::mills_ratio_cf(x));
}

inline double upper_tail(double x) { return std::exp(log_upper_tail(x)); }

/// log P(a <= Z <= a + w) for a >= 0, w >= 0 (w may be infinite).
/// Narrow pieces, where Q(a) and Q(a + w) nearly cancel, are integrated directly as
/// phi(a) * int_0^w exp(-a t - t^2 / 2) dt.
inline double log_upper_piece_mass(double a, double w) {
    if (w == 0.0) return -std::numeric_limits<double>::infinity();
    if (std::isinf(w)) return log_upper_tail(a);
    if (a * w + 0.5 * w * w < 1.0) {
        const auto& rule = detail::legendre();
        const double half = 0.5 * w;
        double acc = 0.0;
        for (int i = 0; i < detail::gauss_legendre_rule::order; ++i) {
            const double t = half * (rule.nodes[i] + 1.0);
            acc += rule.weights[i] * std::exp(-a * t - 0.5 * t * t);
        }
        return log_normal_pdf(a) + std::log(acc * half);
    }
    const double la = log_upper_tail(a);
    const double lb = log_upper_tail(a + w);
    return la + std::log1p(-std::exp(lb - la));
}

/// log P(lo <= Z <= hi), Z ~ N(0, 1). Pieces are reflected into the upper half-line so the
/// smaller tail is always the one being evaluated.
inline double log_standard_mass(double lo, double hi) {
    constexpr double neg_inf = -std::numeric_limits<double>::infinity();
    if (!(lo < hi)) return neg_inf;
    if (lo >= 0.0) return log_upper_piece_mass(lo, hi - lo);
    if (hi <= 0.0) return log_upper_piece_mass(-hi, hi - lo);
    return detail::log_add_exp(log_upper_piece_mass(0.0, -lo), log_upper_piece_mass(0.0, hi));
}

/// log P(lo <= Z <= hi), Z ~ N(0, sd^2).
inline double log_gaussian_interval_mass(double lo, double hi, double sd) {
    return log_standard_mass(lo / sd, hi / sd);
}

/// P(lo <= Z <= hi), Z ~ N(0, sd^2).
inline double gaussian_interval_mass(double lo, double hi, double sd) {
    return std::exp(log_gaussian_interval_mass(lo, hi, sd));
}

} // namespace siclad
