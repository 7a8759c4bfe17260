#pragma once

#include "siclad/dbscan.hpp"
#include "siclad/errors.hpp"
#include "siclad/hypothesis.hpp"
#include "siclad/model.hpp"
#include "siclad/parallel.hpp"
#include "siclad/pvalue.hpp"
#include "siclad/region.hpp"

#include <algorithm>
#include <chrono>
#include <optional>
#include <string>
#include <vector>

namespace siclad {

struct siclad_options {
    std::vector<method> methods{method::selective};
    double alpha = 0.05;
    search_options search;
    std::size_t threads = 0; ///< 0 = resolve_threads()
};

enum class hypothesis_status { ok, skipped };

struct hypothesis_diagnostics {
    std::size_t steps = 0;            ///< over-conditioned intervals visited by the line search
    std::size_t region_intervals = 0; ///< disjoint pieces of the selective region
    double region_width = 0.0;        ///< total length of the selective region inside the window
    double seconds = 0.0;             ///< wall time for the selective p-value
};

struct hypothesis_report {
    std::size_t index = 0;
    hypothesis_status status = hypothesis_status::ok;
    std::string reason;
    double z_obs = 0.0;
    double var = 0.0;
    std::vector<pvalue_report> pvalues; ///< one per requested method, in request order
    hypothesis_diagnostics diagnostics;

    [[nodiscard]] const pvalue_report* find(method m) const {
        for (const auto& r : pvalues)
            if (r.method == m) return &r;
        return nullptr;
    }
};

struct siclad_report {
    detection_result detection;
    dbscan_params params;
    double alpha = 0.05;
    std::vector<method> methods;
    std::vector<hypothesis_report> hypotheses; ///< sorted by index
    std::size_t n = 0;
    std::size_t d = 0;

    [[nodiscard]] std::string status() const {
        return detection.anomalies.empty() ? "no anomalies detected" : "ok";
    }

    /// { j : p_j <= alpha } for one method.
    [[nodiscard]] index_set rejected(method m) const {
        index_set out;
        for (const auto& h : hypotheses) {
            const auto* r = h.find(m);
            if (h.status == hypothesis_status::ok && r && r->p <= alpha) out.push_back(h.index);
        }
        return out;
    }
};

/// Tests one detected anomaly with every requested method.
inline hypothesis_report test_anomaly(const data_matrix& x, const covariance_model& cov, const dbscan_params& params,
                                      const index_set& anomalies, std::size_t j, const siclad_options& opt) {
    hypothesis_report rep;
    rep.index = j;
    if (anomalies.size() >= x.rows()) {
        rep.status = hypothesis_status::skipped;
        rep.reason = "no reference points: every point is an anomaly";
        return rep;
    }
    try {
        const auto lp = make_line_param(x, anomalies, j, cov);
        rep.z_obs = lp.z_obs;
        rep.var = lp.var;
        const double sd = lp.sd();
        for (const auto m : opt.methods) {
            pvalue_report pr;
            pr.index = j;
            pr.method = m;
            pr.z_obs = lp.z_obs;
            pr.var = lp.var;
            switch (m) {
            case method::selective: {
                const auto t0 = std::chrono::steady_clock::now();
                auto search = line_search_detailed(lp, params, anomalies, opt.search);
                pr.p = selective_p(lp.z_obs, sd, search.region);
                pr.region_mass = std::exp(log_region_mass(search.region, sd));
                rep.diagnostics.steps = search.steps;
                rep.diagnostics.region_intervals = search.region.size();
                rep.diagnostics.region_width = search.region.total_width();
                pr.region = std::move(search.region);
                rep.diagnostics.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
                break;
            }
            case method::oc: {
                interval_set region{oc_region(lp, params.eps, anomalies)};
                pr.p = selective_p(lp.z_obs, sd, region);
                pr.region_mass = std::exp(log_region_mass(region, sd));
                pr.region = std::move(region);
                break;
            }
            case method::naive:
                pr.p = naive_p(lp.z_obs, sd);
                break;
            case method::bonferroni:
                pr.p = bonferroni_p(naive_p(lp.z_obs, sd), x.rows());
                break;
            }
            rep.pvalues.push_back(std::move(pr));
        }
    } catch (const degenerate_direction& e) {
        rep.status = hypothesis_status::skipped;
        rep.reason = std::string("degenerate direction: ") + e.what();
        rep.pvalues.clear();
    } catch (const underflow_error& e) {
        rep.status = hypothesis_status::skipped;
        rep.reason = std::string("underflow: ") + e.what();
        rep.pvalues.clear();
    } catch (const numerical_error& e) {
        throw numerical_error("hypothesis " + std::to_string(j + 1) + ": " + e.what());
    }
    return rep;
}

/// Detect anomalies once, then compute p-values for every detected anomaly.
inline siclad_report si_clad(const data_matrix& x, const covariance_model& cov, const dbscan_params& params,
                             const siclad_options& opt = {}) {
    params.validate();
    if (!(opt.alpha > 0.0 && opt.alpha < 1.0)) throw invalid_argument("alpha must lie in (0, 1)");
    if (cov.rows() != x.rows() || cov.cols() != x.cols()) {
        throw invalid_argument("covariance dimension " + std::to_string(cov.dimension()) + " does not match n*d = " +
                               std::to_string(x.size()));
    }
    if (opt.methods.empty()) throw invalid_argument("no inference methods requested");

    siclad_report report;
    report.n = x.rows();
    report.d = x.cols();
    report.params = params;
    report.alpha = opt.alpha;
    report.methods = opt.methods;
    report.detection = detect_anomalies(x, params);

    const auto& anomalies = report.detection.anomalies;
    report.hypotheses.resize(anomalies.size());
    parallel_for(anomalies.size(), resolve_threads(opt.threads), [&](std::size_t k) {
        report.hypotheses[k] = test_anomaly(x, cov, params, anomalies, anomalies[k], opt);
    });
    return report;
}

} // namespace siclad
