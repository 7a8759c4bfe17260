#pragma once

#include "siclad/errors.hpp"
#include "siclad/gaussian.hpp"
#include "siclad/hypothesis.hpp"
#include "siclad/intervals.hpp"
#include "siclad/region.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace siclad {

enum class method { selective, oc, naive, bonferroni };

inline std::string_view to_string(method m) {
    switch (m) {
    case method::selective: return "selective";
    case method::oc: return "oc";
    case method::naive: return "naive";
    case method::bonferroni: return "bonferroni";
    }
    return "selective";
}

inline method parse_method(std::string_view s) {
    if (s == "selective") return method::selective;
    if (s == "oc") return method::oc;
    if (s == "naive") return method::naive;
    if (s == "bonferroni") return method::bonferroni;
    throw invalid_argument("unknown method '" + std::string(s) + "'");
}

struct pvalue_report {
    std::size_t index = 0;
    siclad::method method = method::selective;
    double p = 1.0;
    double z_obs = 0.0;
    double var = 0.0;
    std::optional<interval_set> region;
    double region_mass = 1.0;
};

inline constexpr double min_region_mass = 1e-300;

/// log of the N(0, sd^2) mass carried by a union of intervals.
inline double log_region_mass(const interval_set& region, double sd) {
    double acc = -infinity;
    for (const auto& piece : region) acc = detail::log_add_exp(acc, log_gaussian_interval_mass(piece.lo, piece.hi, sd));
    return acc;
}

/// P(|Z| >= |z_obs| | Z in region), Z ~ N(0, sd^2).
inline double selective_p(double z_obs, double sd, const interval_set& region) {
    if (!(sd > 0.0)) throw invalid_argument("standard deviation must be positive");
    if (!region.contains(z_obs)) {
        throw numerical_error("z_obs = " + format_endpoint(z_obs) + " lies outside its truncation region");
    }
    const double log_den = log_region_mass(region, sd);
    if (!(log_den >= std::log(min_region_mass))) {
        throw underflow_error("truncation region mass " + std::to_string(std::exp(log_den)) +
                              " (log " + std::to_string(log_den) + ") is below 1e-300 at z_obs = " +
                              format_endpoint(z_obs));
    }
    const double log_num = log_region_mass(region.intersect(outside_symmetric(z_obs)), sd);
    return std::clamp(std::exp(log_num - log_den), 0.0, 1.0);
}

/// 2 P(Z >= |z_obs|), Z ~ N(0, sd^2).
inline double naive_p(double z_obs, double sd) {
    if (!(sd > 0.0)) throw invalid_argument("standard deviation must be positive");
    return std::min(1.0, std::exp(std::numbers::ln2 + log_upper_tail(std::fabs(z_obs) / sd)));
}

/// min(1, 2^n p), evaluated in log space.
inline double bonferroni_p(double p_naive, std::size_t n) {
    if (!(p_naive >= 0.0 && p_naive <= 1.0)) throw invalid_argument("p-value must lie in [0, 1]");
    if (p_naive == 0.0) return 0.0;
    const double lg = std::log(p_naive) + static_cast<double>(n) * std::numbers::ln2;
    return lg >= 0.0 ? 1.0 : std::exp(lg);
}

/// Over-conditioned region at z_obs: neighborhood constraints, plus sign constraints when d > 1.
inline interval oc_region(const line_param& lp, double eps, const index_set& anomalies) {
    auto region = over_conditioned_region(lp, lp.z_obs, eps);
    if (lp.sign) region = intersect(region, sign_region(lp, anomalies, lp.z_obs));
    return region;
}

inline double oc_p(const line_param& lp, double eps, const index_set& anomalies) {
    return selective_p(lp.z_obs, lp.sd(), interval_set{oc_region(lp, eps, anomalies)});
}

} // namespace siclad
