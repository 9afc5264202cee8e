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

#pragma once

#include <complex>

#include "commlab/qmath.hpp"
#include "commlab/rng.hpp"

namespace commlab {

/// rows x cols matrix of i.i.d. standard complex Gaussians.
inline MatrixXc ginibre(Index rows, Index cols, Rng& rng) {
    MatrixXc g(rows, cols);
    for (Index j = 0; j < cols; ++j)
        for (Index i = 0; i < rows; ++i) g(i, j) = std::complex<double>(rng.normal(), rng.normal()) / std::sqrt(2.0);
    return g;
}

/// Haar-distributed unitary: QR of a Ginibre matrix with the phases of R's
/// diagonal moved into Q.
inline MatrixXc haar_unitary(Index dim, Rng& rng) {
    MatrixXc g = ginibre(dim, dim, rng);
    Eigen::HouseholderQR<MatrixXc> qr(g);
    MatrixXc q = qr.householderQ() * MatrixXc::Identity(dim, dim);
    MatrixXc r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (Index j = 0; j < dim; ++j) {
        std::complex<double> d = r(j, j);
        double a = std::abs(d);
        q.col(j) *= a > 0 ? d / a : 1.0;
    }
    return q;
}

inline VectorXc random_unit_vector(Index dim, Rng& rng) {
    VectorXc v = ginibre(dim, 1, rng);
    return v / v.norm();
}

/// Random density matrix G G^dagger / Tr with G of shape dim x rank.
inline DensityMatrix random_density_matrix(Index dim, Rng& rng, Index rank = -1) {
    if (rank < 0) rank = dim;
    MatrixXc g = ginibre(dim, rank, rng);
    return DensityMatrix::normalized(g * g.adjoint());
}

inline BipartitePureState random_bipartite_state(Index dim_a, Index dim_b, Rng& rng) {
    return BipartitePureState::normalized(dim_a, dim_b, random_unit_vector(dim_a * dim_b, rng));
}

}  // namespace commlab
