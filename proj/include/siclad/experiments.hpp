#pragma once

#include "siclad/dbscan.hpp"
#include "siclad/errors.hpp"
#include "siclad/model.hpp"
#include "siclad/parallel.hpp"
#include "siclad/pipeline.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace siclad {

struct experiment_config {
    std::size_t n = 100;
    std::size_t d = 1;
    double delta = 0.0;                       ///< mean shift added to the anomalous rows
    std::optional<std::size_t> anomaly_count; ///< defaults to floor(n / 3)
    covariance_request cov = covariance_request::scalar(1.0);
    dbscan_params params{0.2, 5};
    std::size_t trials = 500;
    double alpha = 0.05;
    std::uint64_t seed = 0;
    std::vector<method> methods{method::selective, method::oc, method::naive, method::bonferroni};
    search_options search;
    std::size_t threads = 0;

    [[nodiscard]] std::size_t shifted_count() const { return anomaly_count.value_or(n / 3); }

    void validate() const {
        if (n < 1 || d < 1) throw invalid_argument("n and d must be positive");
        if (trials < 1) throw invalid_argument("trials must be at least 1");
        if (shifted_count() >= n) throw invalid_argument("anomaly count must be smaller than n");
        if (!(alpha > 0.0 && alpha < 1.0)) throw invalid_argument("alpha must lie in (0, 1)");
        if (!std::isfinite(delta)) throw invalid_argument("delta must be finite");
        params.validate();
    }
};

struct synthetic_sample {
    data_matrix x;
    index_set shifted; ///< rows that received the mean shift
};

/// SplitMix64 finalizer; keys every trial's stream by (seed, trial) independently of run order.
inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline std::mt19937_64 trial_engine(std::uint64_t seed, std::uint64_t trial) {
    return std::mt19937_64(mix64(mix64(seed) ^ mix64(trial + 0x632be59bd9b4e019ULL)));
}

namespace detail {

/// Symmetric square root S with S S' = cov (handles singular PSD matrices).
inline Eigen::MatrixXd covariance_root(const Eigen::MatrixXd& cov) {
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
    const Eigen::VectorXd root = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    return eig.eigenvectors() * root.asDiagonal() * eig.eigenvectors().transpose();
}

} // namespace detail

/// Zero-mean Gaussian data with noise per cfg.cov; floor(n/3) uniformly chosen rows get +delta on
/// every coordinate.
inline synthetic_sample gen_synthetic(const experiment_config& cfg, std::uint64_t trial) {
    cfg.validate();
    auto rng = trial_engine(cfg.seed, trial);
    std::normal_distribution<double> normal(0.0, 1.0);
    const std::size_t n = cfg.n, d = cfg.d;
    const auto cov = build_covariance(cfg.cov, n, d);

    std::vector<double> vec(n * d);
    if (cov.kind() == covariance_kind::explicit_matrix) {
        const Eigen::MatrixXd root = detail::covariance_root(cov.materialize());
        Eigen::VectorXd e(static_cast<Eigen::Index>(n * d));
        for (Eigen::Index i = 0; i < e.size(); ++i) e(i) = normal(rng);
        const Eigen::VectorXd v = root * e;
        for (std::size_t i = 0; i < vec.size(); ++i) vec[i] = v(static_cast<Eigen::Index>(i));
    } else {
        const Eigen::MatrixXd root = detail::covariance_root(cov.sigma2() * cov.feature_covariance());
        Eigen::VectorXd e(static_cast<Eigen::Index>(d));
        for (std::size_t i = 0; i < n; ++i) {
            for (Eigen::Index k = 0; k < e.size(); ++k) e(k) = normal(rng);
            const Eigen::VectorXd row = root * e;
            for (std::size_t k = 0; k < d; ++k) vec[i + k * n] = row(static_cast<Eigen::Index>(k));
        }
    }

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    const std::size_t m = cfg.shifted_count();
    for (std::size_t i = 0; i < m; ++i) {
        std::uniform_int_distribution<std::size_t> pick(i, n - 1);
        std::swap(order[i], order[pick(rng)]);
    }
    index_set shifted(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(m));
    std::sort(shifted.begin(), shifted.end());
    for (auto i : shifted)
        for (std::size_t k = 0; k < d; ++k) vec[i + k * n] += cfg.delta;

    return {data_matrix::from_vec(n, d, std::move(vec)), std::move(shifted)};
}

enum class rate_mode { fpr, tpr };

inline std::string_view to_string(rate_mode m) { return m == rate_mode::fpr ? "fpr" : "tpr"; }

/// One tested hypothesis from one trial, kept for reanalysis.
struct hypothesis_record {
    std::uint64_t trial = 0;
    double sweep_value = 0.0;
    std::size_t index = 0;
    bool shifted = false;
    bool is_null = true;
    hypothesis_status status = hypothesis_status::ok;
    std::string reason;
    std::vector<std::optional<double>> p; ///< aligned with experiment_config::methods
    hypothesis_diagnostics diagnostics;
};

struct rate_row {
    rate_mode mode = rate_mode::fpr;
    std::string sweep_param;
    double sweep_value = 0.0;
    std::string method;
    std::size_t rejections = 0;
    std::size_t tested = 0;
    std::size_t skipped = 0;
    std::size_t trials = 0;

    /// Missing (not 0/0) when nothing was tested.
    [[nodiscard]] std::optional<double> rate() const {
        if (tested == 0) return std::nullopt;
        return static_cast<double>(rejections) / static_cast<double>(tested);
    }
};

struct trial_outcome {
    std::vector<hypothesis_record> records;
    std::size_t detected = 0;
};

/// Runs every trial of one configuration; records come back in (trial, index) order.
inline std::vector<trial_outcome> run_trials(const experiment_config& cfg, double sweep_value = 0.0) {
    cfg.validate();
    const auto cov = build_covariance(cfg.cov, cfg.n, cfg.d);
    siclad_options opt;
    opt.methods = cfg.methods;
    opt.alpha = cfg.alpha;
    opt.search = cfg.search;
    opt.threads = 1;

    std::vector<trial_outcome> outcomes(cfg.trials);
    parallel_for(cfg.trials, resolve_threads(cfg.threads), [&](std::size_t t) {
        const auto sample = gen_synthetic(cfg, t);
        const auto report = si_clad(sample.x, cov, cfg.params, opt);
        auto& out = outcomes[t];
        out.detected = report.detection.anomalies.size();
        for (const auto& h : report.hypotheses) {
            hypothesis_record rec;
            rec.trial = t;
            rec.sweep_value = sweep_value;
            rec.index = h.index;
            rec.shifted = std::binary_search(sample.shifted.begin(), sample.shifted.end(), h.index);
            // With no shift every row follows the null model, shifted or not.
            rec.is_null = cfg.delta == 0.0 || !rec.shifted;
            rec.status = h.status;
            rec.reason = h.reason;
            rec.diagnostics = h.diagnostics;
            for (const auto m : cfg.methods) {
                const auto* r = h.find(m);
                rec.p.push_back(r ? std::optional<double>(r->p) : std::nullopt);
            }
            out.records.push_back(std::move(rec));
        }
    });
    return outcomes;
}

/// Per-hypothesis rejection rates for each method plus the no-inference baseline.
/// fpr counts null hypotheses, tpr counts hypotheses on shifted rows.
inline std::vector<rate_row> aggregate_rates(const experiment_config& cfg, const std::vector<trial_outcome>& outcomes,
                                             rate_mode mode, const std::string& sweep_param, double sweep_value) {
    const auto in_class = [&](const hypothesis_record& r) { return mode == rate_mode::fpr ? r.is_null : !r.is_null; };
    std::vector<rate_row> rows;
    for (std::size_t mi = 0; mi < cfg.methods.size(); ++mi) {
        rate_row row{mode, sweep_param, sweep_value, std::string(to_string(cfg.methods[mi])), 0, 0, 0, cfg.trials};
        for (const auto& o : outcomes) {
            for (const auto& r : o.records) {
                if (!in_class(r)) continue;
                if (r.status != hypothesis_status::ok || !r.p[mi]) {
                    ++row.skipped;
                    continue;
                }
                ++row.tested;
                if (*r.p[mi] <= cfg.alpha) ++row.rejections;
            }
        }
        rows.push_back(row);
    }
    // Without inference every detected anomaly is declared: the rate is the share of detections in the class.
    rate_row none{mode, sweep_param, sweep_value, "no_inference", 0, 0, 0, cfg.trials};
    for (const auto& o : outcomes) {
        for (const auto& r : o.records) {
            ++none.tested;
            if (in_class(r)) ++none.rejections;
        }
    }
    rows.push_back(none);
    return rows;
}

struct rate_experiment_result {
    std::vector<rate_row> rows;
    std::vector<hypothesis_record> records;
};

inline rate_experiment_result run_rate_experiment(const experiment_config& cfg, rate_mode mode,
                                                  const std::string& sweep_param = "", double sweep_value = 0.0) {
    if (mode == rate_mode::fpr && cfg.delta != 0.0) throw invalid_argument("fpr experiments require delta = 0");
    if (mode == rate_mode::tpr && !(cfg.delta > 0.0)) throw invalid_argument("tpr experiments require delta > 0");
    const auto outcomes = run_trials(cfg, sweep_value);
    rate_experiment_result res;
    res.rows = aggregate_rates(cfg, outcomes, mode, sweep_param, sweep_value);
    for (const auto& o : outcomes) res.records.insert(res.records.end(), o.records.begin(), o.records.end());
    return res;
}

struct sweep_spec {
    std::string param; ///< one of n, d, delta, rho; empty for a single configuration
    std::vector<double> values;
};

inline experiment_config apply_sweep_value(experiment_config cfg, const std::string& param, double value) {
    if (param.empty()) return cfg;
    if (param == "n") {
        if (value < 1 || value != std::floor(value)) throw invalid_argument("n sweep values must be positive integers");
        cfg.n = static_cast<std::size_t>(value);
    } else if (param == "d") {
        if (value < 1 || value != std::floor(value)) throw invalid_argument("d sweep values must be positive integers");
        cfg.d = static_cast<std::size_t>(value);
    } else if (param == "delta") {
        cfg.delta = value;
    } else if (param == "rho") {
        cfg.cov = covariance_request::ar1(value, cfg.cov.kind == covariance_kind::explicit_matrix ? 1.0 : cfg.cov.sigma2);
    } else {
        throw invalid_argument("cannot sweep over '" + param + "'");
    }
    return cfg;
}

inline rate_experiment_result run_rate_sweep(const experiment_config& base, rate_mode mode, const sweep_spec& sweep) {
    rate_experiment_result all;
    const std::vector<double> values = sweep.values.empty() ? std::vector<double>{0.0} : sweep.values;
    for (const double v : values) {
        const auto cfg = apply_sweep_value(base, sweep.param, v);
        auto res = run_rate_experiment(cfg, mode, sweep.param, v);
        all.rows.insert(all.rows.end(), res.rows.begin(), res.rows.end());
        all.records.insert(all.records.end(), std::make_move_iterator(res.records.begin()),
                           std::make_move_iterator(res.records.end()));
    }
    return all;
}

struct bench_row {
    std::string param;
    double value = 0.0;
    double median_seconds = 0.0;       ///< per selective p-value
    double median_intervals = 0.0;     ///< over-conditioned intervals visited per p-value
    double median_region_pieces = 0.0; ///< disjoint pieces in the final region
    std::size_t pvalues = 0;
};

inline double median(std::vector<double> v) {
    if (v.empty()) return std::nan("");
    const auto mid = v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2);
    std::nth_element(v.begin(), mid, v.end());
    if (v.size() % 2 == 1) return *mid;
    const double hi = *mid;
    return 0.5 * (hi + *std::max_element(v.begin(), mid));
}

/// Cost of the selective p-value across a sweep over n or d.
inline std::vector<bench_row> bench(experiment_config base, const sweep_spec& sweep) {
    if (sweep.param != "n" && sweep.param != "d") throw invalid_argument("bench sweeps over n or d");
    base.methods = {method::selective};
    std::vector<bench_row> rows;
    for (const double v : sweep.values) {
        const auto cfg = apply_sweep_value(base, sweep.param, v);
        const auto outcomes = run_trials(cfg, v);
        std::vector<double> secs, steps, pieces;
        for (const auto& o : outcomes) {
            for (const auto& r : o.records) {
                if (r.status != hypothesis_status::ok) continue;
                secs.push_back(r.diagnostics.seconds);
                steps.push_back(static_cast<double>(r.diagnostics.steps));
                pieces.push_back(static_cast<double>(r.diagnostics.region_intervals));
            }
        }
        rows.push_back({sweep.param, v, median(secs), median(steps), median(pieces), secs.size()});
    }
    return rows;
}

} // namespace siclad
