// Copyright 2026 The CommLab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Slow, direct reference computations used only by the tests. They avoid
// the library's code paths on purpose (no SVD reshapes, no closed forms).

#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <functional>
#include <vector>

namespace oracle {

using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;

/// Tr_B of an operator on C^da (x) C^db by explicit index loops.
inline Mat trace_out_b(const Mat& rho, long da, long db) {
    Mat out = Mat::Zero(da, da);
    for (long a = 0; a < da; ++a)
        for (long a2 = 0; a2 < da; ++a2)
            for (long b = 0; b < db; ++b) out(a, a2) += rho(a * db + b, a2 * db + b);
    return out;
}

inline Mat trace_out_a(const Mat& rho, long da, long db) {
    Mat out = Mat::Zero(db, db);
    for (long b = 0; b < db; ++b)
        for (long b2 = 0; b2 < db; ++b2)
            for (long a = 0; a < da; ++a) out(b, b2) += rho(a * db + b, a * db + b2);
    return out;
}

/// Minimum eigenvalue via the general (non-Hermitian) complex solver.
inline double min_eig(const Mat& m) {
    Eigen::ComplexEigenSolver<Mat> es(m);
    double lo = 1e300;
    for (long i = 0; i < es.eigenvalues().size(); ++i) lo = std::min(lo, es.eigenvalues()(i).real());
    return lo;
}

/// Entropy in bits from the general eigen solver.
inline double entropy(const Mat& m) {
    Eigen::ComplexEigenSolver<Mat> es(m);
    double s = 0;
    for (long i = 0; i < es.eigenvalues().size(); ++i) {
        double l = es.eigenvalues()(i).real();
        if (l > 1e-14) s -= l * std::log2(l);
    }
    return s;
}

/// Largest k with sigma - k rho PSD, by bisection on an eigenvalue test.
inline double substate_bisection(const Mat& rho, const Mat& sigma) {
    double lo = 0, hi = 1;
    while (min_eig(sigma - hi * rho) >= 0) hi *= 2;
    for (int it = 0; it < 200; ++it) {
        double mid = 0.5 * (lo + hi);
        (min_eig(sigma - mid * rho) >= -1e-15 ? lo : hi) = mid;
    }
    return lo;
}

/// Trace norm via sqrt(A^dagger A) singular values.
inline double trace_norm(const Mat& m) {
    return Eigen::JacobiSVD<Mat>(m).singularValues().sum();
}

/// Binary entropy in bits.
inline double h2(double p) {
    if (p <= 0 || p >= 1) return 0;
    return -p * std::log2(p) - (1 - p) * std::log2(1 - p);
}

/// Kronecker product by index loops.
inline Mat kron(const Mat& a, const Mat& b) {
    Mat out(a.rows() * b.rows(), a.cols() * b.cols());
    for (long i = 0; i < a.rows(); ++i)
        for (long j = 0; j < a.cols(); ++j)
            for (long k = 0; k < b.rows(); ++k)
                for (long l = 0; l < b.cols(); ++l) out(i * b.rows() + k, j * b.cols() + l) = a(i, j) * b(k, l);
    return out;
}

/// Classical KL divergence in bits; +inf when supp(p) is not inside supp(q).
inline double kl(const std::vector<double>& p, const std::vector<double>& q) {
    double s = 0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (p[i] <= 0) continue;
        if (q[i] <= 0) return INFINITY;
        s += p[i] * std::log2(p[i] / q[i]);
    }
    return s;
}

}  // namespace oracle
