#pragma once

#include "siclad/errors.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace siclad {

/// n x d observation matrix stored column-major, so that the raw buffer is vec(X):
/// observation i, feature k lives at i + k * n.
class data_matrix {
public:
    data_matrix() = default;

    data_matrix(std::size_t rows, std::size_t cols)
        : rows_(rows), cols_(cols), values_(rows * cols, 0.0) {
        if (rows == 0 || cols == 0) {
            throw invalid_argument("data matrix needs at least one row and one column");
        }
    }

    /// Takes ownership of a column-stacked buffer.
    static data_matrix from_vec(std::size_t rows, std::size_t cols, std::vector<double> vec) {
        if (rows == 0 || cols == 0) {
            throw invalid_argument("data matrix needs at least one row and one column");
        }
        if (vec.size() != rows * cols) {
            throw invalid_argument("vec length " + std::to_string(vec.size()) + " does not match " +
                                   std::to_string(rows) + "x" + std::to_string(cols));
        }
        for (double v : vec) {
            if (!std::isfinite(v)) throw invalid_argument("data matrix entries must be finite");
        }
        data_matrix m;
        m.rows_ = rows;
        m.cols_ = cols;
        m.values_ = std::move(vec);
        return m;
    }

    /// Row-major nested initializer, convenient for small literals.
    static data_matrix from_rows(const std::vector<std::vector<double>>& rows) {
        if (rows.empty() || rows.front().empty()) {
            throw invalid_argument("data matrix needs at least one row and one column");
        }
        const std::size_t n = rows.size();
        const std::size_t d = rows.front().size();
        std::vector<double> vec(n * d);
        for (std::size_t i = 0; i < n; ++i) {
            if (rows[i].size() != d) throw invalid_argument("ragged rows in data matrix literal");
            for (std::size_t k = 0; k < d; ++k) vec[i + k * n] = rows[i][k];
        }
        return from_vec(n, d, std::move(vec));
    }

    [[nodiscard]] std::size_t rows() const noexcept { return rows_; }
    [[nodiscard]] std::size_t cols() const noexcept { return cols_; }
    [[nodiscard]] std::size_t size() const noexcept { return values_.size(); }

    [[nodiscard]] double operator()(std::size_t i, std::size_t k) const { return values_[i + k * rows_]; }
    double& operator()(std::size_t i, std::size_t k) { return values_[i + k * rows_]; }

    [[nodiscard]] std::span<const double> vec() const noexcept { return values_; }

    [[nodiscard]] static constexpr std::size_t vec_index(std::size_t i, std::size_t k, std::size_t n) noexcept {
        return i + k * n;
    }

    friend bool operator==(const data_matrix&, const data_matrix&) = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> values_;
};

enum class covariance_kind { scalar, ar1, explicit_matrix };

/// What the caller asks for; turned into a covariance_model by build_covariance.
struct covariance_request {
    covariance_kind kind = covariance_kind::scalar;
    double sigma2 = 1.0;
    double rho = 0.0;
    Eigen::MatrixXd matrix;

    static covariance_request scalar(double sigma2) { return {covariance_kind::scalar, sigma2, 0.0, {}}; }
    static covariance_request ar1(double rho, double sigma2 = 1.0) { return {covariance_kind::ar1, sigma2, rho, {}}; }
    static covariance_request explicit_matrix(Eigen::MatrixXd m) {
        return {covariance_kind::explicit_matrix, 1.0, 0.0, std::move(m)};
    }
};

/// Covariance of vec(X). Scalar and AR(1) kinds are never materialized:
///   scalar: sigma2 * I_{nd}
///   ar1:    sigma2 * (Xi kron I_n), Xi_{kl} = rho^|k-l|  (rows independent, features correlated)
class covariance_model {
public:
    [[nodiscard]] covariance_kind kind() const noexcept { return kind_; }
    [[nodiscard]] std::size_t rows() const noexcept { return n_; }
    [[nodiscard]] std::size_t cols() const noexcept { return d_; }
    [[nodiscard]] std::size_t dimension() const noexcept { return n_ * d_; }
    [[nodiscard]] double sigma2() const noexcept { return sigma2_; }
    [[nodiscard]] double rho() const noexcept { return rho_; }

    /// Sigma * v.
    [[nodiscard]] std::vector<double> product(std::span<const double> v) const {
        check_length(v.size());
        std::vector<double> out(v.size(), 0.0);
        switch (kind_) {
        case covariance_kind::scalar:
            for (std::size_t i = 0; i < v.size(); ++i) out[i] = sigma2_ * v[i];
            break;
        case covariance_kind::ar1:
            for (std::size_t k = 0; k < d_; ++k) {
                for (std::size_t l = 0; l < d_; ++l) {
                    const double w = sigma2_ * feature_[k * d_ + l];
                    if (w == 0.0) continue;
                    for (std::size_t i = 0; i < n_; ++i) out[i + k * n_] += w * v[i + l * n_];
                }
            }
            break;
        case covariance_kind::explicit_matrix: {
            const Eigen::Map<const Eigen::VectorXd> x(v.data(), static_cast<Eigen::Index>(v.size()));
            Eigen::Map<Eigen::VectorXd>(out.data(), static_cast<Eigen::Index>(out.size())) = matrix_ * x;
            break;
        }
        }
        return out;
    }

    /// v' Sigma v.
    [[nodiscard]] double quad_form(std::span<const double> v) const {
        const auto sv = product(v);
        double acc = 0.0;
        for (std::size_t i = 0; i < v.size(); ++i) acc += v[i] * sv[i];
        return acc;
    }

    /// Dense Sigma (nd x nd); used by tests and by the explicit kind.
    [[nodiscard]] Eigen::MatrixXd materialize() const {
        if (kind_ == covariance_kind::explicit_matrix) return matrix_;
        const auto dim = static_cast<Eigen::Index>(dimension());
        Eigen::MatrixXd m = Eigen::MatrixXd::Zero(dim, dim);
        for (std::size_t k = 0; k < d_; ++k) {
            for (std::size_t l = 0; l < d_; ++l) {
                const double w = kind_ == covariance_kind::scalar ? (k == l ? sigma2_ : 0.0) : sigma2_ * feature_[k * d_ + l];
                for (std::size_t i = 0; i < n_; ++i) {
                    m(static_cast<Eigen::Index>(i + k * n_), static_cast<Eigen::Index>(i + l * n_)) = w;
                }
            }
        }
        return m;
    }

    /// d x d feature covariance Xi (row-major); identity for scalar kind.
    [[nodiscard]] Eigen::MatrixXd feature_covariance() const {
        Eigen::MatrixXd xi = Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(d_), static_cast<Eigen::Index>(d_));
        if (kind_ == covariance_kind::ar1) {
            for (std::size_t k = 0; k < d_; ++k)
                for (std::size_t l = 0; l < d_; ++l)
                    xi(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(l)) = feature_[k * d_ + l];
        }
        return xi;
    }

    friend covariance_model build_covariance(const covariance_request& request, std::size_t n, std::size_t d);

private:
    void check_length(std::size_t len) const {
        if (len != dimension()) {
            throw invalid_argument("vector length " + std::to_string(len) + " does not match covariance dimension " +
                                   std::to_string(dimension()));
        }
    }

    covariance_kind kind_ = covariance_kind::scalar;
    std::size_t n_ = 0;
    std::size_t d_ = 0;
    double sigma2_ = 1.0;
    double rho_ = 0.0;
    std::vector<double> feature_;
    Eigen::MatrixXd matrix_;
};

inline covariance_model build_covariance(const covariance_request& request, std::size_t n, std::size_t d) {
    if (n == 0 || d == 0) throw invalid_argument("covariance needs n >= 1 and d >= 1");
    covariance_model cov;
    cov.kind_ = request.kind;
    cov.n_ = n;
    cov.d_ = d;
    switch (request.kind) {
    case covariance_kind::scalar:
        if (!(request.sigma2 > 0.0) || !std::isfinite(request.sigma2)) {
            throw invalid_argument("sigma2 must be positive and finite");
        }
        cov.sigma2_ = request.sigma2;
        break;
    case covariance_kind::ar1:
        if (!(request.rho > -1.0 && request.rho < 1.0)) throw invalid_argument("rho must lie in (-1, 1)");
        if (!(request.sigma2 > 0.0) || !std::isfinite(request.sigma2)) {
            throw invalid_argument("sigma2 must be positive and finite");
        }
        cov.sigma2_ = request.sigma2;
        cov.rho_ = request.rho;
        cov.feature_.resize(d * d);
        for (std::size_t k = 0; k < d; ++k)
            for (std::size_t l = 0; l < d; ++l)
                cov.feature_[k * d + l] = std::pow(request.rho, static_cast<double>(k > l ? k - l : l - k));
        break;
    case covariance_kind::explicit_matrix: {
        const auto& m = request.matrix;
        const auto dim = static_cast<Eigen::Index>(n * d);
        if (m.rows() != dim || m.cols() != dim) {
            throw invalid_argument("explicit covariance must be " + std::to_string(dim) + "x" + std::to_string(dim) +
                                   ", got " + std::to_string(m.rows()) + "x" + std::to_string(m.cols()));
        }
        if (!m.allFinite()) throw invalid_argument("explicit covariance has non-finite entries");
        const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
        if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-8 * scale) {
            throw invalid_argument("explicit covariance is not symmetric");
        }
        const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(m, Eigen::EigenvaluesOnly);
        const double lo = eig.eigenvalues().minCoeff();
        const double hi = eig.eigenvalues().maxCoeff();
        if (lo < -1e-8 * std::max(hi, 0.0) || hi <= 0.0) {
            throw invalid_argument("explicit covariance is not positive semidefinite (smallest eigenvalue " +
                                   std::to_string(lo) + ")");
        }
        cov.matrix_ = m;
        break;
    }
    }
    return cov;
}

} // namespace siclad
