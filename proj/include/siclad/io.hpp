#pragma once

// JSON / CSV serialization of reports. User-facing indices are 1-based.

#include "siclad/dbscan.hpp"
#include "siclad/experiments.hpp"
#include "siclad/intervals.hpp"
#include "siclad/pipeline.hpp"

#include <json.hpp>

#include <ostream>
#include <sstream>
#include <string>
#include <vector>

namespace siclad::io {

using json = nlohmann::ordered_json;

inline json endpoint_json(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    return v;
}

inline json region_json(const interval_set& region) {
    json arr = json::array();
    for (const auto& p : region) arr.push_back(json::array({endpoint_json(p.lo), endpoint_json(p.hi)}));
    return arr;
}

inline json indices_json(const index_set& idx) {
    json arr = json::array();
    for (auto i : idx) arr.push_back(i + 1);
    return arr;
}

inline json detection_json(const detection_result& det, std::size_t n, std::size_t d, const dbscan_params& params) {
    json roles = json::array();
    json labels = json::array();
    for (std::size_t i = 0; i < det.roles.size(); ++i) {
        roles.push_back(std::string(to_string(det.roles[i])));
        labels.push_back(det.labels[i] ? json(*det.labels[i] + 1) : json(nullptr));
    }
    return json{{"n", n},
                {"d", d},
                {"eps", params.eps},
                {"min_pts", params.min_pts},
                {"anomalies", indices_json(det.anomalies)},
                {"roles", roles},
                {"labels", labels}};
}

inline json report_json(const siclad_report& rep) {
    json methods = json::array();
    for (auto m : rep.methods) methods.push_back(std::string(to_string(m)));
    json hyps = json::array();
    for (const auto& h : rep.hypotheses) {
        json entry{{"index", h.index + 1},
                   {"status", h.status == hypothesis_status::ok ? "ok" : "skipped"},
                   {"reason", h.reason},
                   {"z_obs", h.z_obs},
                   {"var", h.var}};
        json pvals = json::object();
        for (const auto& p : h.pvalues) {
            json pv{{"p", p.p}, {"rejected", p.p <= rep.alpha}};
            if (p.region) {
                pv["region"] = region_json(*p.region);
                pv["region_mass"] = p.region_mass;
            }
            pvals[std::string(to_string(p.method))] = pv;
        }
        entry["pvalues"] = pvals;
        entry["diagnostics"] = json{{"intervals_visited", h.diagnostics.steps},
                                    {"region_intervals", h.diagnostics.region_intervals},
                                    {"region_width", h.diagnostics.region_width},
                                    {"seconds", h.diagnostics.seconds}};
        hyps.push_back(entry);
    }
    json rejected = json::object();
    for (auto m : rep.methods) rejected[std::string(to_string(m))] = indices_json(rep.rejected(m));
    json out = detection_json(rep.detection, rep.n, rep.d, rep.params);
    out["status"] = rep.status();
    out["alpha"] = rep.alpha;
    out["methods"] = methods;
    out["hypotheses"] = hyps;
    out["rejected"] = rejected;
    return out;
}

inline std::string region_text(const interval_set& region) {
    std::string s;
    for (const auto& p : region) {
        if (!s.empty()) s += ';';
        s += format_endpoint(p.lo) + ':' + format_endpoint(p.hi);
    }
    return s;
}

inline std::string number_text(double v) { return format_endpoint(v); }

inline constexpr const char* detection_csv_header = "index,role,label,anomaly";

inline void write_detection_csv(std::ostream& os, const detection_result& det) {
    os << detection_csv_header << '\n';
    for (std::size_t i = 0; i < det.roles.size(); ++i) {
        os << i + 1 << ',' << to_string(det.roles[i]) << ',';
        if (det.labels[i]) os << *det.labels[i] + 1;
        os << ',' << (det.roles[i] == point_role::noise ? 1 : 0) << '\n';
    }
}

inline constexpr const char* report_csv_header =
    "index,method,status,p,rejected,z_obs,var,region_mass,intervals_visited,region";

inline void write_report_csv(std::ostream& os, const siclad_report& rep) {
    os << report_csv_header << '\n';
    for (const auto& h : rep.hypotheses) {
        if (h.status != hypothesis_status::ok) {
            for (auto m : rep.methods) os << h.index + 1 << ',' << to_string(m) << ",skipped,,,,,,,\n";
            continue;
        }
        for (const auto& p : h.pvalues) {
            os << h.index + 1 << ',' << to_string(p.method) << ",ok," << number_text(p.p) << ','
               << (p.p <= rep.alpha ? 1 : 0) << ',' << number_text(h.z_obs) << ',' << number_text(h.var) << ',';
            if (p.region) os << number_text(p.region_mass);
            os << ',';
            if (p.method == method::selective) os << h.diagnostics.steps;
            os << ',';
            if (p.region) os << region_text(*p.region);
            os << '\n';
        }
    }
}

inline constexpr const char* rate_csv_header = "mode,sweep_param,sweep_value,method,rate,rejections,tested,skipped,trials";

inline void write_rate_csv(std::ostream& os, const std::vector<rate_row>& rows) {
    os << rate_csv_header << '\n';
    for (const auto& r : rows) {
        os << to_string(r.mode) << ',' << r.sweep_param << ',' << number_text(r.sweep_value) << ',' << r.method << ',';
        if (const auto rate = r.rate()) os << number_text(*rate);
        os << ',' << r.rejections << ',' << r.tested << ',' << r.skipped << ',' << r.trials << '\n';
    }
}

inline constexpr const char* records_csv_header_prefix = "trial,sweep_value,index,shifted,null,status,intervals_visited";

inline void write_records_csv(std::ostream& os, const std::vector<hypothesis_record>& records,
                              const std::vector<method>& methods) {
    os << records_csv_header_prefix;
    for (auto m : methods) os << ",p_" << to_string(m);
    os << '\n';
    for (const auto& r : records) {
        os << r.trial << ',' << number_text(r.sweep_value) << ',' << r.index + 1 << ',' << (r.shifted ? 1 : 0) << ','
           << (r.is_null ? 1 : 0) << ',' << (r.status == hypothesis_status::ok ? "ok" : "skipped") << ','
           << r.diagnostics.steps;
        for (const auto& p : r.p) {
            os << ',';
            if (p) os << number_text(*p);
        }
        os << '\n';
    }
}

inline constexpr const char* bench_csv_header =
    "sweep_param,value,median_seconds,median_intervals,median_region_pieces,pvalues";

inline void write_bench_csv(std::ostream& os, const std::vector<bench_row>& rows) {
    os << bench_csv_header << '\n';
    for (const auto& r : rows) {
        os << r.param << ',' << number_text(r.value) << ',' << number_text(r.median_seconds) << ','
           << number_text(r.median_intervals) << ',' << number_text(r.median_region_pieces) << ',' << r.pvalues << '\n';
    }
}

} // namespace siclad::io
