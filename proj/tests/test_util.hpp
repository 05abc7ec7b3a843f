#pragma once

// Shared oracles for the test suites. Everything here is independent of the
// library implementation paths it checks: the eigensolver is a hand-rolled
// cyclic Jacobi sweep, the attention oracle computes softmax row by row.

#include <cmath>
#include <functional>
#include <vector>

#include "camforge/linalg.hpp"
#include "camforge/model.hpp"

namespace testutil {

using camforge::Mat;
using camforge::Vec;

inline bool close(double a, double b, double tol) { return std::fabs(a - b) <= tol; }

inline double rel_err(double got, double want) {
    return std::fabs(got - want) / std::max({1e-12, std::fabs(got), std::fabs(want)});
}

// Plain softmax attention, written directly from the definition.
inline Mat attention_oracle(const Mat& q, const Mat& k, const Mat& v) {
    const double scale = 1.0 / std::sqrt(static_cast<double>(q.cols()));
    Mat y(q.rows(), v.cols());
    for (Eigen::Index i = 0; i < q.rows(); ++i) {
        std::vector<double> logits(static_cast<std::size_t>(k.rows()));
        double mx = -1e300;
        for (Eigen::Index j = 0; j < k.rows(); ++j) {
            double dot = 0.0;
            for (Eigen::Index d = 0; d < q.cols(); ++d) dot += q(i, d) * k(j, d);
            logits[static_cast<std::size_t>(j)] = dot * scale;
            mx = std::max(mx, logits[static_cast<std::size_t>(j)]);
        }
        double z = 0.0;
        for (double& l : logits) {
            l = std::exp(l - mx);
            z += l;
        }
        for (Eigen::Index d = 0; d < v.cols(); ++d) {
            double acc = 0.0;
            for (Eigen::Index j = 0; j < k.rows(); ++j) {
                acc += logits[static_cast<std::size_t>(j)] / z * v(j, d);
            }
            y(i, d) = acc;
        }
    }
    return y;
}

// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, descending.
// Used as the independent route for singular values: sv(W) = sqrt(eig(W^T W)).
inline std::vector<double> jacobi_eigenvalues(Mat a, int sweeps = 64) {
    const Eigen::Index n = a.rows();
    for (int sweep = 0; sweep < sweeps; ++sweep) {
        double off = 0.0;
        for (Eigen::Index p = 0; p < n; ++p) {
            for (Eigen::Index q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
        }
        if (off < 1e-26) break;
        for (Eigen::Index p = 0; p < n; ++p) {
            for (Eigen::Index q = p + 1; q < n; ++q) {
                if (std::fabs(a(p, q)) < 1e-300) continue;
                const double theta = (a(q, q) - a(p, p)) / (2.0 * a(p, q));
                const double t = ((theta >= 0) ? 1.0 : -1.0) /
                                 (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (Eigen::Index i = 0; i < n; ++i) {
                    const double aip = a(i, p), aiq = a(i, q);
                    a(i, p) = c * aip - s * aiq;
                    a(i, q) = s * aip + c * aiq;
                }
                for (Eigen::Index i = 0; i < n; ++i) {
                    const double api = a(p, i), aqi = a(q, i);
                    a(p, i) = c * api - s * aqi;
                    a(q, i) = s * api + c * aqi;
                }
            }
        }
    }
    std::vector<double> eig(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) eig[static_cast<std::size_t>(i)] = a(i, i);
    std::sort(eig.begin(), eig.end(), std::greater<double>());
    return eig;
}

// Central finite-difference gradient of `loss` with respect to every entry
// behind the parameter views.
inline std::vector<double> fd_gradient(const std::vector<camforge::model::ParamView>& params,
                                       const std::function<double()>& loss, double h = 1e-5) {
    std::vector<double> grad;
    for (const auto& p : params) {
        for (std::int64_t i = 0; i < p.size; ++i) {
            const double saved = p.data[i];
            p.data[i] = saved + h;
            const double up = loss();
            p.data[i] = saved - h;
            const double down = loss();
            p.data[i] = saved;
            grad.push_back((up - down) / (2.0 * h));
        }
    }
    return grad;
}

}  // namespace testutil
