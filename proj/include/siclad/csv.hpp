#pragma once

#include "siclad/errors.hpp"
#include "siclad/model.hpp"

#include <charconv>
#include <cmath>
#include <istream>
#include <string>
#include <string_view>
#include <vector>

namespace siclad {

namespace detail {

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    if (s.size() >= 2 && s.front() == '"' && s.back() == '"') s = s.substr(1, s.size() - 2);
    return s;
}

inline std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    for (;;) {
        const auto pos = line.find(',', start);
        out.push_back(trim(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

inline double parse_cell(std::string_view cell, std::size_t row, std::size_t col) {
    double v = 0.0;
    if (!cell.empty() && cell.front() == '+') cell.remove_prefix(1);
    const auto* end = cell.data() + cell.size();
    const auto [ptr, ec] = std::from_chars(cell.data(), end, v);
    if (cell.empty() || ec != std::errc{} || ptr != end || !std::isfinite(v)) {
        throw ingest_error("row " + std::to_string(row) + ", column " + std::to_string(col) + ": '" +
                           std::string(cell) + "' is not a finite number");
    }
    return v;
}

/// Parses numeric rows; row numbers in messages are 1-based physical lines.
inline std::vector<std::vector<double>> read_numeric_rows(std::istream& in, bool has_header) {
    std::vector<std::vector<double>> rows;
    std::string line;
    std::size_t lineno = 0;
    std::size_t width = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        if (has_header && lineno == 1) continue;
        const auto fields = split_fields(line);
        if (rows.empty()) {
            width = fields.size();
        } else if (fields.size() != width) {
            throw ingest_error("row " + std::to_string(lineno) + ": expected " + std::to_string(width) + " column" +
                               (width == 1 ? "" : "s") + ", found " + std::to_string(fields.size()));
        }
        std::vector<double> values;
        values.reserve(fields.size());
        for (std::size_t c = 0; c < fields.size(); ++c) values.push_back(parse_cell(fields[c], lineno, c + 1));
        rows.push_back(std::move(values));
    }
    if (rows.empty()) throw ingest_error("input contains no data rows");
    return rows;
}

} // namespace detail

/// Reads comma-separated observations, one row per line, in file order.
inline data_matrix load_observations(std::istream& source, bool has_header = false) {
    return data_matrix::from_rows(detail::read_numeric_rows(source, has_header));
}

/// Reads a square numeric CSV (explicit covariance files).
inline Eigen::MatrixXd load_square_matrix(std::istream& source, bool has_header = false) {
    const auto rows = detail::read_numeric_rows(source, has_header);
    const auto n = static_cast<Eigen::Index>(rows.size());
    if (static_cast<Eigen::Index>(rows.front().size()) != n) {
        throw ingest_error("covariance file must be square, got " + std::to_string(rows.size()) + " rows and " +
                           std::to_string(rows.front().size()) + " columns");
    }
    Eigen::MatrixXd m(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) m(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    return m;
}

} // namespace siclad
