#pragma once

#include "siclad/errors.hpp"
#include "siclad/model.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

namespace siclad {

using index_set = std::vector<std::size_t>; // sorted, 0-based

struct dbscan_params {
    double eps = 0.0;
    std::size_t min_pts = 1;

    void validate() const {
        if (!(eps > 0.0) || !std::isfinite(eps)) throw invalid_argument("eps must be positive and finite");
        if (min_pts < 1) throw invalid_argument("min_pts must be at least 1");
    }
};

enum class point_role : std::uint8_t { core, border, noise };

inline std::string_view to_string(point_role r) {
    switch (r) {
    case point_role::core: return "core";
    case point_role::border: return "border";
    case point_role::noise: return "noise";
    }
    return "noise";
}

struct detection_result {
    index_set anomalies;
    std::vector<point_role> roles;
    std::vector<std::optional<std::size_t>> labels;

    friend bool operator==(const detection_result&, const detection_result&) = default;
};

/// Dense symmetric adjacency of the eps-neighborhood relation; the diagonal is always set.
class neighbor_graph {
public:
    explicit neighbor_graph(std::size_t n) : n_(n), adj_(n * n, 0) {
        for (std::size_t i = 0; i < n; ++i) adj_[i * n + i] = 1;
    }

    [[nodiscard]] std::size_t size() const noexcept { return n_; }
    [[nodiscard]] bool linked(std::size_t i, std::size_t j) const noexcept { return adj_[i * n_ + j] != 0; }

    void set(std::size_t i, std::size_t j, bool in) noexcept {
        adj_[i * n_ + j] = in ? 1 : 0;
        adj_[j * n_ + i] = in ? 1 : 0;
    }

    [[nodiscard]] std::size_t degree(std::size_t i) const noexcept {
        std::size_t c = 0;
        const auto* row = &adj_[i * n_];
        for (std::size_t j = 0; j < n_; ++j) c += row[j];
        return c;
    }

    [[nodiscard]] std::vector<std::size_t> neighbors(std::size_t i) const {
        std::vector<std::size_t> out;
        for (std::size_t j = 0; j < n_; ++j)
            if (linked(i, j)) out.push_back(j);
        return out;
    }

    friend bool operator==(const neighbor_graph&, const neighbor_graph&) = default;

private:
    std::size_t n_;
    std::vector<std::uint8_t> adj_;
};

inline double squared_distance(const data_matrix& x, std::size_t i, std::size_t j) {
    double acc = 0.0;
    for (std::size_t k = 0; k < x.cols(); ++k) {
        const double diff = x(i, k) - x(j, k);
        acc += diff * diff;
    }
    return acc;
}

/// N[i] = { j : ||X_i - X_j||^2 <= eps^2 }, i itself included.
inline neighbor_graph eps_neighborhoods(const data_matrix& x, double eps) {
    if (!(eps > 0.0)) throw invalid_argument("eps must be positive");
    const std::size_t n = x.rows();
    const double eps2 = eps * eps;
    neighbor_graph g(n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            if (squared_distance(x, i, j) <= eps2) g.set(i, j, true);
    return g;
}

/// Noise flags only: a point is noise iff it is not core and has no core neighbor.
/// Equivalent to the anomaly set of a full DBSCAN run, without forming clusters.
inline std::vector<std::uint8_t> noise_mask(const neighbor_graph& g, std::size_t min_pts) {
    const std::size_t n = g.size();
    std::vector<std::uint8_t> core(n), noise(n);
    for (std::size_t i = 0; i < n; ++i) core[i] = g.degree(i) >= min_pts;
    for (std::size_t i = 0; i < n; ++i) {
        if (core[i]) continue;
        bool reached = false;
        for (std::size_t j = 0; j < n && !reached; ++j) reached = core[j] && g.linked(i, j);
        noise[i] = !reached;
    }
    return noise;
}

inline index_set mask_to_indices(const std::vector<std::uint8_t>& mask) {
    index_set out;
    for (std::size_t i = 0; i < mask.size(); ++i)
        if (mask[i]) out.push_back(i);
    return out;
}

/// Cluster expansion over a precomputed neighborhood graph. Clusters are seeded from core points in
/// ascending index order; a border point reachable from several clusters keeps the first label.
inline detection_result classify(const neighbor_graph& g, std::size_t min_pts) {
    const std::size_t n = g.size();
    detection_result res;
    res.roles.assign(n, point_role::noise);
    res.labels.assign(n, std::nullopt);
    for (std::size_t i = 0; i < n; ++i)
        if (g.degree(i) >= min_pts) res.roles[i] = point_role::core;

    std::size_t next_label = 0;
    std::vector<std::size_t> frontier;
    for (std::size_t seed = 0; seed < n; ++seed) {
        if (res.roles[seed] != point_role::core || res.labels[seed]) continue;
        const std::size_t label = next_label++;
        res.labels[seed] = label;
        frontier.assign(1, seed);
        while (!frontier.empty()) {
            const std::size_t c = frontier.back();
            frontier.pop_back();
            for (std::size_t j = 0; j < n; ++j) {
                if (!g.linked(c, j) || res.labels[j]) continue;
                res.labels[j] = label;
                if (res.roles[j] == point_role::core) {
                    frontier.push_back(j);
                } else {
                    res.roles[j] = point_role::border;
                }
            }
        }
    }
    for (std::size_t i = 0; i < n; ++i)
        if (res.roles[i] == point_role::noise) res.anomalies.push_back(i);
    return res;
}

inline detection_result detect_anomalies(const data_matrix& x, const dbscan_params& params) {
    params.validate();
    return classify(eps_neighborhoods(x, params.eps), params.min_pts);
}

} // namespace siclad
