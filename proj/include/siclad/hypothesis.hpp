#pragma once

#include "siclad/dbscan.hpp"
#include "siclad/errors.hpp"
#include "siclad/model.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace siclad {

/// The data restricted to the line X(z) = a + b z through the observation, for one hypothesis.
struct line_param {
    std::size_t n = 0;
    std::size_t d = 1;
    std::size_t index = 0;       ///< tested anomaly j (0-based)
    std::vector<double> eta;     ///< test direction, length n*d
    std::vector<double> a;       ///< nuisance offset, eta'a = 0
    std::vector<double> b;       ///< Sigma eta / (eta' Sigma eta)
    double z_obs = 0.0;          ///< eta' vec(X_obs)
    double var = 0.0;            ///< eta' Sigma eta
    std::optional<std::vector<int>> sign; ///< multi-dimensional sign vector s (absent for d = 1)

    [[nodiscard]] double sd() const { return std::sqrt(var); }

    /// vec(X(z)).
    [[nodiscard]] std::vector<double> point(double z) const {
        std::vector<double> out(a.size());
        for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] + b[i] * z;
        return out;
    }

    [[nodiscard]] data_matrix matrix(double z) const { return data_matrix::from_vec(n, d, point(z)); }
};

namespace detail {

inline void check_hypothesis_indices(std::size_t n, const index_set& anomalies, std::size_t j) {
    if (anomalies.empty()) throw invalid_argument("anomaly set is empty");
    if (!std::is_sorted(anomalies.begin(), anomalies.end()) ||
        std::adjacent_find(anomalies.begin(), anomalies.end()) != anomalies.end()) {
        throw invalid_argument("anomaly set must be sorted and duplicate-free");
    }
    if (anomalies.back() >= n) throw invalid_argument("anomaly index out of range");
    if (!std::binary_search(anomalies.begin(), anomalies.end(), j)) {
        throw invalid_argument("tested index " + std::to_string(j) + " is not in the anomaly set");
    }
    if (anomalies.size() >= n) throw invalid_argument("no reference points remain: every point is an anomaly");
}

inline std::vector<std::uint8_t> membership(std::size_t n, const index_set& set) {
    std::vector<std::uint8_t> in(n, 0);
    for (auto i : set) in[i] = 1;
    return in;
}

} // namespace detail

/// eta_j = e_j - e_{-O} / (n - |O|).
inline std::vector<double> test_direction_1d(std::size_t n, const index_set& anomalies, std::size_t j) {
    detail::check_hypothesis_indices(n, anomalies, j);
    const auto in = detail::membership(n, anomalies);
    const double w = 1.0 / static_cast<double>(n - anomalies.size());
    std::vector<double> eta(n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        if (!in[i]) eta[i] = -w;
    eta[j] = 1.0;
    return eta;
}

/// Per-feature gap X_{j,k} - mean_{l not in O} X_{l,k}.
inline std::vector<double> feature_gaps(const data_matrix& x, const index_set& anomalies, std::size_t j) {
    detail::check_hypothesis_indices(x.rows(), anomalies, j);
    const auto in = detail::membership(x.rows(), anomalies);
    const double m = static_cast<double>(x.rows() - anomalies.size());
    std::vector<double> gaps(x.cols());
    for (std::size_t k = 0; k < x.cols(); ++k) {
        double mean = 0.0;
        for (std::size_t i = 0; i < x.rows(); ++i)
            if (!in[i]) mean += x(i, k);
        gaps[k] = x(j, k) - mean / m;
    }
    return gaps;
}

inline int sign_of(double v) { return v > 0.0 ? 1 : (v < 0.0 ? -1 : 0); }

struct md_direction {
    std::vector<double> eta;
    std::vector<int> sign;
};

/// eta_j = (1/d) (I_d kron e_j - (I_d kron e_{-O}) / (n - |O|)) s, so that eta_j' vec(X) is the mean
/// absolute feature gap between X_j and the non-anomalous mean.
inline md_direction test_direction_md(const data_matrix& x, const index_set& anomalies, std::size_t j) {
    const std::size_t n = x.rows();
    const std::size_t d = x.cols();
    const auto gaps = feature_gaps(x, anomalies, j);
    const auto base = test_direction_1d(n, anomalies, j);
    md_direction out;
    out.sign.resize(d);
    out.eta.assign(n * d, 0.0);
    for (std::size_t k = 0; k < d; ++k) {
        out.sign[k] = sign_of(gaps[k]);
        const double scale = out.sign[k] / static_cast<double>(d);
        if (scale == 0.0) continue;
        for (std::size_t i = 0; i < n; ++i) out.eta[i + k * n] = scale * base[i];
    }
    return out;
}

inline constexpr double variance_floor = 1e-12;

/// b = Sigma eta / var, z_obs = eta'x, a = x - b z_obs.
inline line_param line_parameterization(std::span<const double> x, std::vector<double> eta, const covariance_model& cov) {
    if (x.size() != eta.size()) throw invalid_argument("direction and data lengths differ");
    if (std::all_of(eta.begin(), eta.end(), [](double v) { return v == 0.0; })) {
        throw degenerate_direction("test direction is identically zero");
    }
    line_param lp;
    lp.n = cov.rows();
    lp.d = cov.cols();
    const auto s_eta = cov.product(eta);
    double var = 0.0, z = 0.0;
    for (std::size_t i = 0; i < eta.size(); ++i) {
        var += eta[i] * s_eta[i];
        z += eta[i] * x[i];
    }
    if (!(var > variance_floor)) {
        throw degenerate_direction("test statistic variance " + std::to_string(var) + " is below the floor");
    }
    lp.var = var;
    lp.z_obs = z;
    lp.b.resize(eta.size());
    lp.a.resize(eta.size());
    for (std::size_t i = 0; i < eta.size(); ++i) {
        lp.b[i] = s_eta[i] / var;
        lp.a[i] = x[i] - lp.b[i] * z;
    }
    lp.eta = std::move(eta);
    return lp;
}

/// Full construction for hypothesis j: picks the univariate or multi-dimensional direction by d.
inline line_param make_line_param(const data_matrix& x, const index_set& anomalies, std::size_t j,
                                  const covariance_model& cov) {
    if (cov.rows() != x.rows() || cov.cols() != x.cols()) {
        throw invalid_argument("covariance shape does not match the data");
    }
    if (x.cols() == 1) {
        auto lp = line_parameterization(x.vec(), test_direction_1d(x.rows(), anomalies, j), cov);
        lp.index = j;
        return lp;
    }
    auto dir = test_direction_md(x, anomalies, j);
    if (std::all_of(dir.sign.begin(), dir.sign.end(), [](int s) { return s == 0; })) {
        throw degenerate_direction("sign vector is zero: anomaly coincides with the reference mean");
    }
    auto lp = line_parameterization(x.vec(), std::move(dir.eta), cov);
    lp.index = j;
    lp.sign = std::move(dir.sign);
    return lp;
}

} // namespace siclad
