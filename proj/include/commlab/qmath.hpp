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

// Dense quantum-information primitives on small Hilbert spaces.
//
// Everything here is templated on the real scalar so the same code runs in
// double (the default aliases at the bottom) or in long double for checks.
// Multi-register vectors use row-major ordering: for registers with dims
// (d0, d1, ..., dn) the amplitude of |i0 i1 ... in> sits at
// ((i0 * d1 + i1) * d2 + i2) ... . A bipartite state therefore reshapes into
// a dimA x dimB matrix Psi with Psi(a, b) = <a b|psi>.

#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "commlab/errors.hpp"

namespace commlab {

namespace tol {
inline constexpr double kHermitian = 1e-10;
inline constexpr double kSymmetrize = 1e-8;
inline constexpr double kPsd = 1e-10;
inline constexpr double kTrace = 1e-10;
inline constexpr double kNorm = 1e-12;
inline constexpr double kEigenCutoff = 1e-14;
inline constexpr double kFullRank = 1e-12;
inline constexpr double kContraction = 1e-10;
inline constexpr double kMarginal = 1e-9;
}  // namespace tol

template <typename Real>
using CMatrix = Eigen::Matrix<std::complex<Real>, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Real>
using CVector = Eigen::Matrix<std::complex<Real>, Eigen::Dynamic, 1>;
template <typename Real>
using RVector = Eigen::Matrix<Real, Eigen::Dynamic, 1>;

using Index = Eigen::Index;
using Dims = std::vector<Index>;

enum class Side { A, B };

inline Index dims_product(const Dims& dims) {
    Index p = 1;
    for (Index d : dims) p *= d;
    return p;
}

// ---------------------------------------------------------------------------
// Spectral helpers.

/// Eigenvalues (ascending) of a Hermitian matrix.
template <typename Real>
RVector<Real> hermitian_eigenvalues(const CMatrix<Real>& m) {
    if (m.rows() == 0) return RVector<Real>();
    return Eigen::SelfAdjointEigenSolver<CMatrix<Real>>(m, Eigen::EigenvaluesOnly).eigenvalues();
}

/// Applies a scalar function to the spectrum of a Hermitian matrix.
template <typename Real, typename F>
CMatrix<Real> hermitian_function(const CMatrix<Real>& m, F&& f) {
    Eigen::SelfAdjointEigenSolver<CMatrix<Real>> es(m);
    RVector<Real> lam = es.eigenvalues();
    for (Index i = 0; i < lam.size(); ++i) lam(i) = f(lam(i));
    const CMatrix<Real>& v = es.eigenvectors();
    return v * lam.template cast<std::complex<Real>>().asDiagonal() * v.adjoint();
}

/// PSD square root; tiny negative eigenvalues are clamped to zero.
template <typename Real>
CMatrix<Real> psd_sqrt(const CMatrix<Real>& m) {
    return hermitian_function<Real>(m, [](Real x) { return x > Real(0) ? std::sqrt(x) : Real(0); });
}

/// Largest eigenvalue of a Hermitian matrix.
template <typename Real>
Real max_eigenvalue(const CMatrix<Real>& m) {
    return hermitian_eigenvalues<Real>(m).maxCoeff();
}

/// Schatten-1 norm of a Hermitian matrix.
template <typename Real>
Real hermitian_trace_norm(const CMatrix<Real>& m) {
    return hermitian_eigenvalues<Real>(m).cwiseAbs().sum();
}

template <typename Real>
Real max_entry(const CMatrix<Real>& m) {
    return m.size() == 0 ? Real(0) : m.cwiseAbs().maxCoeff();
}

/// Shannon-style entropy in bits of a spectrum; entries <= 1e-14 are dropped.
template <typename Real>
Real spectrum_entropy(const RVector<Real>& lam) {
    Real s = 0;
    for (Index i = 0; i < lam.size(); ++i)
        if (lam(i) > Real(tol::kEigenCutoff)) s -= lam(i) * std::log2(lam(i));
    return s < Real(0) ? Real(0) : s;
}

// ---------------------------------------------------------------------------
// Domain types.

/// Hermitian PSD trace-one matrix. Construction symmetrizes the input and
/// rejects it when the correction, the trace error or a negative eigenvalue
/// is outside tolerance.
template <typename Real>
class BasicDensityMatrix {
  public:
    using Matrix = CMatrix<Real>;

    BasicDensityMatrix() = default;

    explicit BasicDensityMatrix(Matrix m) : m_(std::move(m)) {
        if (m_.rows() == 0 || m_.rows() != m_.cols())
            throw DimensionMismatch("density matrix must be square and non-empty");
        if (!m_.allFinite()) throw InvalidState("density matrix has non-finite entries");
        Real asym = max_entry<Real>(Matrix(m_ - m_.adjoint())) / 2;
        if (asym > Real(tol::kSymmetrize)) throw InvalidState("density matrix is not Hermitian");
        m_ = ((m_ + m_.adjoint()) / Real(2)).eval();
        Real tr = m_.trace().real();
        if (std::abs(tr - Real(1)) > Real(tol::kTrace)) throw InvalidState("density matrix trace differs from 1");
        Real lmin = hermitian_eigenvalues<Real>(m_).minCoeff();
        if (lmin < -Real(tol::kPsd)) throw InvalidState("density matrix has a negative eigenvalue");
    }

    /// Normalizes a PSD matrix by its trace before validating.
    static BasicDensityMatrix normalized(const Matrix& m) {
        Real tr = m.trace().real();
        if (!(tr > Real(0))) throw InvalidState("cannot normalize a matrix with non-positive trace");
        return BasicDensityMatrix(Matrix(m / tr));
    }

    static BasicDensityMatrix pure(const CVector<Real>& v) {
        if (std::abs(v.squaredNorm() - Real(1)) > Real(tol::kTrace)) throw InvalidState("pure state vector is not normalized");
        return BasicDensityMatrix(Matrix(v * v.adjoint()));
    }

    static BasicDensityMatrix basis(Index dim, Index k) {
        if (k < 0 || k >= dim) throw DimensionMismatch("basis index out of range");
        Matrix m = Matrix::Zero(dim, dim);
        m(k, k) = 1;
        return BasicDensityMatrix(std::move(m));
    }

    static BasicDensityMatrix maximally_mixed(Index dim) {
        return BasicDensityMatrix(Matrix(Matrix::Identity(dim, dim) / Real(dim)));
    }

    static BasicDensityMatrix diagonal(const std::vector<Real>& probs) {
        Matrix m = Matrix::Zero(Index(probs.size()), Index(probs.size()));
        for (std::size_t i = 0; i < probs.size(); ++i) m(Index(i), Index(i)) = probs[i];
        return BasicDensityMatrix(std::move(m));
    }

    Index dim() const { return m_.rows(); }
    const Matrix& matrix() const { return m_; }
    RVector<Real> eigenvalues() const { return hermitian_eigenvalues<Real>(m_); }
    Real min_eigenvalue() const { return eigenvalues().minCoeff(); }

  private:
    Matrix m_;
};

/// Unit vector on C^dimA (x) C^dimB.
template <typename Real>
class BasicBipartitePureState {
  public:
    using Vector = CVector<Real>;
    using Matrix = CMatrix<Real>;

    BasicBipartitePureState() = default;

    BasicBipartitePureState(Index dim_a, Index dim_b, Vector amplitudes)
        : dim_a_(dim_a), dim_b_(dim_b), v_(std::move(amplitudes)) {
        if (dim_a <= 0 || dim_b <= 0) throw DimensionMismatch("register dimensions must be positive");
        if (v_.size() != dim_a * dim_b) throw DimensionMismatch("amplitude vector length differs from dimA*dimB");
        if (std::abs(v_.squaredNorm() - Real(1)) > Real(tol::kNorm)) throw InvalidState("pure state is not normalized");
    }

    static BasicBipartitePureState normalized(Index dim_a, Index dim_b, const Vector& v) {
        Real n = v.norm();
        if (!(n > Real(0))) throw InvalidState("cannot normalize the zero vector");
        return BasicBipartitePureState(dim_a, dim_b, Vector(v / n));
    }

    /// State with amplitude matrix Psi (rows index A, columns index B).
    static BasicBipartitePureState from_matrix(const Matrix& psi) {
        Vector v(psi.size());
        for (Index a = 0; a < psi.rows(); ++a)
            for (Index b = 0; b < psi.cols(); ++b) v(a * psi.cols() + b) = psi(a, b);
        return BasicBipartitePureState(psi.rows(), psi.cols(), std::move(v));
    }

    static BasicBipartitePureState product(const Vector& a, const Vector& b) {
        return BasicBipartitePureState(a.size(), b.size(), Vector(kron_vec(a, b)));
    }

    /// m EPR pairs; A and B each hold m qubits.
    static BasicBipartitePureState epr_pairs(int m) {
        Index d = Index(1) << m;
        return from_matrix(Matrix(Matrix::Identity(d, d) / std::sqrt(Real(d))));
    }

    Index dim_a() const { return dim_a_; }
    Index dim_b() const { return dim_b_; }
    const Vector& amplitudes() const { return v_; }

    Matrix matrix() const {
        Matrix psi(dim_a_, dim_b_);
        for (Index a = 0; a < dim_a_; ++a)
            for (Index b = 0; b < dim_b_; ++b) psi(a, b) = v_(a * dim_b_ + b);
        return psi;
    }

    static Vector kron_vec(const Vector& a, const Vector& b) {
        Vector out(a.size() * b.size());
        for (Index i = 0; i < a.size(); ++i) out.segment(i * b.size(), b.size()) = a(i) * b;
        return out;
    }

  private:
    Index dim_a_ = 0;
    Index dim_b_ = 0;
    Vector v_;
};

/// Contraction M with M^dagger M <= I.
template <typename Real>
class BasicKrausOp {
  public:
    using Matrix = CMatrix<Real>;

    BasicKrausOp() = default;

    explicit BasicKrausOp(Matrix m) : m_(std::move(m)) {
        if (m_.rows() == 0 || m_.rows() != m_.cols()) throw DimensionMismatch("Kraus operator must be square");
        Real top = max_eigenvalue<Real>(Matrix(m_.adjoint() * m_));
        if (top > Real(1) + Real(tol::kContraction)) throw PreconditionError("Kraus operator is not a contraction");
    }

    Index dim() const { return m_.rows(); }
    const Matrix& matrix() const { return m_; }

    /// (M (x) I)|phi> or (I (x) M)|phi>, unnormalized.
    CVector<Real> apply(const BasicBipartitePureState<Real>& phi, Side side = Side::A) const {
        Matrix psi = phi.matrix();
        Matrix out;
        if (side == Side::A) {
            if (phi.dim_a() != dim()) throw DimensionMismatch("Kraus operator dimension differs from register A");
            out = m_ * psi;
        } else {
            if (phi.dim_b() != dim()) throw DimensionMismatch("Kraus operator dimension differs from register B");
            out = psi * m_.transpose();
        }
        CVector<Real> v(out.size());
        for (Index a = 0; a < out.rows(); ++a)
            for (Index b = 0; b < out.cols(); ++b) v(a * out.cols() + b) = out(a, b);
        return v;
    }

    Real success_probability(const BasicBipartitePureState<Real>& phi, Side side = Side::A) const {
        return apply(phi, side).squaredNorm();
    }

    /// Normalized post-success state.
    BasicBipartitePureState<Real> post_state(const BasicBipartitePureState<Real>& phi, Side side = Side::A) const {
        return BasicBipartitePureState<Real>::normalized(phi.dim_a(), phi.dim_b(), apply(phi, side));
    }

  private:
    Matrix m_;
};

// ---------------------------------------------------------------------------
// Multi-register plumbing.

template <typename Real>
CVector<Real> permute_vector(const CVector<Real>& psi, const Dims& dims, const std::vector<int>& order);

/// Partial trace of an operator on registers `dims`, keeping `keep` (in the
/// given order, which must be increasing).
template <typename Real>
CMatrix<Real> reduce(const CMatrix<Real>& rho, const Dims& dims, const std::vector<int>& keep) {
    const Index total = dims_product(dims);
    if (rho.rows() != total || rho.cols() != total) throw DimensionMismatch("operator size differs from product of register dims");
    const int n = int(dims.size());
    std::vector<bool> kept(n, false);
    for (int k : keep) {
        if (k < 0 || k >= n) throw DimensionMismatch("kept register index out of range");
        kept[k] = true;
    }
    Dims kd, td;
    for (int i = 0; i < n; ++i) (kept[i] ? kd : td).push_back(dims[i]);
    const Index dk = dims_product(kd), dt = dims_product(td);
    // strides of each register in the full index
    std::vector<Index> stride(n, 1);
    for (int i = n - 2; i >= 0; --i) stride[i] = stride[i + 1] * dims[i + 1];
    auto split = [&](Index k_idx, Index t_idx) {
        Index full = 0;
        for (int i = n - 1; i >= 0; --i) {
            if (kept[i]) {
                full += (k_idx % dims[i]) * stride[i];
                k_idx /= dims[i];
            } else {
                full += (t_idx % dims[i]) * stride[i];
                t_idx /= dims[i];
            }
        }
        return full;
    };
    std::vector<Index> map(std::size_t(dk * dt));
    for (Index k = 0; k < dk; ++k)
        for (Index t = 0; t < dt; ++t) map[std::size_t(k * dt + t)] = split(k, t);
    CMatrix<Real> out = CMatrix<Real>::Zero(dk, dk);
    for (Index i = 0; i < dk; ++i)
        for (Index j = 0; j < dk; ++j) {
            std::complex<Real> acc = 0;
            for (Index t = 0; t < dt; ++t) acc += rho(map[std::size_t(i * dt + t)], map[std::size_t(j * dt + t)]);
            out(i, j) = acc;
        }
    return out;
}

/// Reduced operator of a pure vector on registers `dims`.
template <typename Real>
CMatrix<Real> reduce_pure(const CVector<Real>& psi, const Dims& dims, const std::vector<int>& keep) {
    if (psi.size() != dims_product(dims)) throw DimensionMismatch("vector length differs from product of register dims");
    // Permute kept registers to the front, then Psi Psi^dagger.
    const int n = int(dims.size());
    std::vector<int> order(keep.begin(), keep.end());
    for (int i = 0; i < n; ++i)
        if (std::find(keep.begin(), keep.end(), i) == keep.end()) order.push_back(i);
    Dims kd;
    for (int k : keep) kd.push_back(dims[std::size_t(k)]);
    const Index dk = dims_product(kd), dt = psi.size() / dk;
    CVector<Real> p = permute_vector<Real>(psi, dims, order);
    Eigen::Map<const Eigen::Matrix<std::complex<Real>, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> m(p.data(), dk, dt);
    return m * m.adjoint();
}

/// Reorders the registers of a vector: output register i is input register
/// order[i].
template <typename Real>
CVector<Real> permute_vector(const CVector<Real>& psi, const Dims& dims, const std::vector<int>& order) {
    const int n = int(dims.size());
    if (int(order.size()) != n) throw DimensionMismatch("permutation length differs from register count");
    std::vector<Index> in_stride(n, 1);
    for (int i = n - 2; i >= 0; --i) in_stride[i] = in_stride[i + 1] * dims[i + 1];
    Dims out_dims(n);
    for (int i = 0; i < n; ++i) out_dims[i] = dims[std::size_t(order[i])];
    CVector<Real> out(psi.size());
    std::vector<Index> digit(n, 0);
    for (Index idx = 0; idx < psi.size(); ++idx) {
        Index src = 0;
        for (int i = 0; i < n; ++i) src += digit[i] * in_stride[std::size_t(order[i])];
        out(idx) = psi(src);
        for (int i = n - 1; i >= 0; --i) {
            if (++digit[i] < out_dims[i]) break;
            digit[i] = 0;
        }
    }
    return out;
}

/// Applies op to a contiguous block of registers [first, first + count).
template <typename Real>
CVector<Real> apply_local(const CVector<Real>& psi, const Dims& dims, int first, int count, const CMatrix<Real>& op) {
    Index left = 1, mid = 1, right = 1;
    for (int i = 0; i < int(dims.size()); ++i) {
        if (i < first) left *= dims[i];
        else if (i < first + count) mid *= dims[i];
        else right *= dims[i];
    }
    if (psi.size() != left * mid * right) throw DimensionMismatch("vector length differs from product of register dims");
    if (op.cols() != mid) throw DimensionMismatch("operator dimension differs from target registers");
    const Index out_mid = op.rows();
    CVector<Real> out = CVector<Real>::Zero(left * out_mid * right);
    for (Index l = 0; l < left; ++l) {
        Eigen::Map<const Eigen::Matrix<std::complex<Real>, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> in(
            psi.data() + l * mid * right, mid, right);
        Eigen::Map<Eigen::Matrix<std::complex<Real>, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> o(
            out.data() + l * out_mid * right, out_mid, right);
        o.noalias() = op * in;
    }
    return out;
}

template <typename Real>
CMatrix<Real> kron(const CMatrix<Real>& a, const CMatrix<Real>& b) {
    CMatrix<Real> out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Index i = 0; i < a.rows(); ++i)
        for (Index j = 0; j < a.cols(); ++j) out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

// ---------------------------------------------------------------------------
// Entropies and distances.

template <typename Real>
Real von_neumann_entropy(const BasicDensityMatrix<Real>& rho) {
    return spectrum_entropy<Real>(rho.eigenvalues());
}

/// Entropy of a raw PSD operator (no trace check), for marginals of
/// subnormalized or already-validated states.
template <typename Real>
Real operator_entropy(const CMatrix<Real>& m) {
    return spectrum_entropy<Real>(hermitian_eigenvalues<Real>(m));
}

/// I(A:B) for a state on registers cutA (x) cutB, each possibly composite.
template <typename Real>
Real mutual_information(const BasicDensityMatrix<Real>& rho, const Dims& cut_a, const Dims& cut_b) {
    Dims all(cut_a);
    all.insert(all.end(), cut_b.begin(), cut_b.end());
    if (cut_a.empty() || cut_b.empty() || dims_product(all) != rho.dim())
        throw DimensionMismatch("cut dimensions do not multiply to the state dimension");
    const Index da = dims_product(cut_a), db = dims_product(cut_b);
    Dims two{da, db};
    Real sa = operator_entropy<Real>(reduce<Real>(rho.matrix(), two, {0}));
    Real sb = operator_entropy<Real>(reduce<Real>(rho.matrix(), two, {1}));
    return sa + sb - von_neumann_entropy(rho);
}

template <typename Real>
Real mutual_information(const BasicDensityMatrix<Real>& rho, Index dim_a, Index dim_b) {
    return mutual_information(rho, Dims{dim_a}, Dims{dim_b});
}

template <typename Real>
Real trace_distance(const BasicDensityMatrix<Real>& a, const BasicDensityMatrix<Real>& b) {
    if (a.dim() != b.dim()) throw DimensionMismatch("trace distance of states with different dimensions");
    Real d = hermitian_trace_norm<Real>(CMatrix<Real>(a.matrix() - b.matrix())) / 2;
    return std::clamp(d, Real(0), Real(1));
}

/// Trace distance between two pure vectors: sqrt(1 - |<a|b>|^2).
template <typename Real>
Real pure_trace_distance(const CVector<Real>& a, const CVector<Real>& b) {
    if (a.size() != b.size()) throw DimensionMismatch("vectors differ in length");
    Real f = std::norm(a.dot(b));
    return std::sqrt(std::max(Real(0), Real(1) - f));
}

/// |<a|b>|^2.
template <typename Real>
Real fidelity(const CVector<Real>& a, const CVector<Real>& b) {
    if (a.size() != b.size()) throw DimensionMismatch("vectors differ in length");
    return std::norm(a.dot(b));
}

/// S(rho || sigma) in bits; +inf when supp(rho) is not inside supp(sigma).
template <typename Real>
Real relative_entropy(const BasicDensityMatrix<Real>& rho, const BasicDensityMatrix<Real>& sigma) {
    if (rho.dim() != sigma.dim()) throw DimensionMismatch("relative entropy of states with different dimensions");
    Eigen::SelfAdjointEigenSolver<CMatrix<Real>> er(rho.matrix()), es(sigma.matrix());
    const RVector<Real>& lr = er.eigenvalues();
    const RVector<Real>& ls = es.eigenvalues();
    Eigen::Matrix<Real, Eigen::Dynamic, Eigen::Dynamic> overlap = (er.eigenvectors().adjoint() * es.eigenvectors()).cwiseAbs2();
    Real s = 0;
    for (Index i = 0; i < lr.size(); ++i) {
        if (lr(i) <= Real(tol::kEigenCutoff)) continue;
        Real cross = 0, outside = 0;
        for (Index j = 0; j < ls.size(); ++j) {
            Real w = overlap(i, j);
            if (ls(j) > Real(tol::kEigenCutoff)) cross += w * std::log2(ls(j));
            else outside += w;
        }
        if (outside > Real(1e-10)) return std::numeric_limits<Real>::infinity();
        s += lr(i) * (std::log2(lr(i)) - cross);
    }
    return std::max(s, Real(0));
}

// ---------------------------------------------------------------------------
// Bipartite operations.

template <typename Real>
BasicDensityMatrix<Real> partial_trace(const BasicBipartitePureState<Real>& phi, Side keep) {
    CMatrix<Real> psi = phi.matrix();
    CMatrix<Real> m = keep == Side::A ? CMatrix<Real>(psi * psi.adjoint()) : CMatrix<Real>(psi.transpose() * psi.conjugate());
    return BasicDensityMatrix<Real>(std::move(m));
}

template <typename Real>
BasicDensityMatrix<Real> partial_trace(const BasicDensityMatrix<Real>& rho, Index dim_a, Index dim_b, Side keep) {
    if (dim_a * dim_b != rho.dim()) throw DimensionMismatch("cut dimensions do not multiply to the state dimension");
    return BasicDensityMatrix<Real>(reduce<Real>(rho.matrix(), Dims{dim_a, dim_b}, {keep == Side::A ? 0 : 1}));
}

/// Canonical purification sum_i |i>_A (x) sqrt(rho)|i>_B; the fresh register
/// is A and has the same dimension as rho.
template <typename Real>
BasicBipartitePureState<Real> purify(const BasicDensityMatrix<Real>& rho) {
    CMatrix<Real> root = psd_sqrt<Real>(rho.matrix());
    CMatrix<Real> psi = root.transpose();
    CVector<Real> v(psi.size());
    for (Index a = 0; a < psi.rows(); ++a)
        for (Index b = 0; b < psi.cols(); ++b) v(a * psi.cols() + b) = psi(a, b);
    return BasicBipartitePureState<Real>::normalized(psi.rows(), psi.cols(), v);
}

template <typename Real>
struct BasicSchmidt {
    RVector<Real> coefficients;  ///< lambda_i, descending, summing to 1
    CMatrix<Real> left;          ///< columns |a_i>
    CMatrix<Real> right;         ///< columns |b_i>

    Index rank() const { return coefficients.size(); }

    CVector<Real> reconstruct() const {
        CMatrix<Real> psi = left * coefficients.cwiseSqrt().template cast<std::complex<Real>>().asDiagonal() * right.transpose();
        CVector<Real> v(psi.size());
        for (Index a = 0; a < psi.rows(); ++a)
            for (Index b = 0; b < psi.cols(); ++b) v(a * psi.cols() + b) = psi(a, b);
        return v;
    }
};

/// |phi> = sum_i sqrt(lambda_i) |a_i>|b_i>, dropping lambda_i <= 1e-14.
template <typename Real>
BasicSchmidt<Real> schmidt(const BasicBipartitePureState<Real>& phi) {
    Eigen::JacobiSVD<CMatrix<Real>> svd(phi.matrix(), Eigen::ComputeThinU | Eigen::ComputeThinV);
    const RVector<Real>& s = svd.singularValues();
    Index r = 0;
    while (r < s.size() && s(r) * s(r) > Real(tol::kEigenCutoff)) ++r;
    BasicSchmidt<Real> out;
    out.coefficients = s.head(r).cwiseAbs2();
    out.left = svd.matrixU().leftCols(r);
    out.right = svd.matrixV().leftCols(r).conjugate();
    return out;
}

template <typename Real>
Real entanglement_amount(const BasicBipartitePureState<Real>& phi) {
    return spectrum_entropy<Real>(schmidt(phi).coefficients);
}

/// Keeps the rank_bound largest Schmidt terms and renormalizes.
template <typename Real>
BasicBipartitePureState<Real> schmidt_truncate(const BasicBipartitePureState<Real>& phi, Index rank_bound) {
    if (rank_bound < 1) throw PreconditionError("Schmidt rank bound must be at least 1");
    BasicSchmidt<Real> sd = schmidt(phi);
    if (sd.rank() <= rank_bound) return phi;
    sd.coefficients.conservativeResize(rank_bound);
    sd.left.conservativeResize(Eigen::NoChange, rank_bound);
    sd.right.conservativeResize(Eigen::NoChange, rank_bound);
    return BasicBipartitePureState<Real>::normalized(phi.dim_a(), phi.dim_b(), sd.reconstruct());
}

/// Largest k with sigma - k rho >= 0, i.e. 1 / lambda_max(sigma^-1/2 rho sigma^-1/2).
template <typename Real>
Real max_substate_weight(const BasicDensityMatrix<Real>& rho, const BasicDensityMatrix<Real>& sigma) {
    if (rho.dim() != sigma.dim()) throw DimensionMismatch("substate weight of states with different dimensions");
    Eigen::SelfAdjointEigenSolver<CMatrix<Real>> es(sigma.matrix());
    if (es.eigenvalues().minCoeff() <= Real(tol::kFullRank)) throw PreconditionError("reference state is singular");
    RVector<Real> inv_root = es.eigenvalues().cwiseSqrt().cwiseInverse();
    CMatrix<Real> w = es.eigenvectors() * inv_root.template cast<std::complex<Real>>().asDiagonal() * es.eigenvectors().adjoint();
    CMatrix<Real> q = w * rho.matrix() * w;
    q = ((q + q.adjoint()) / Real(2)).eval();
    return Real(1) / max_eigenvalue<Real>(q);
}

/// Closed form for a pure rho = |v><v|: 1 / <v|sigma^-1|v>.
template <typename Real>
Real pure_substate_weight(const CVector<Real>& v, const BasicDensityMatrix<Real>& sigma) {
    if (v.size() != sigma.dim()) throw DimensionMismatch("vector length differs from state dimension");
    Eigen::SelfAdjointEigenSolver<CMatrix<Real>> es(sigma.matrix());
    if (es.eigenvalues().minCoeff() <= Real(tol::kFullRank)) throw PreconditionError("reference state is singular");
    CVector<Real> c = es.eigenvectors().adjoint() * v;
    Real acc = 0;
    for (Index i = 0; i < c.size(); ++i) acc += std::norm(c(i)) / es.eigenvalues()(i);
    return Real(1) / acc;
}

/// Local operation on A that, applied to phi (whose B-marginal is sigma),
/// succeeds with probability k and leaves B in `target`.
///
/// With Phi = U S V^dagger the B-marginal is conj(V) S^2 V^T. Taking
/// Q = k S^-1 V^T target conj(V) S^-1 (the weighted operator
/// k sigma^-1/2 target sigma^-1/2 in the Schmidt basis) and
/// M = U sqrt(Q^T) U^dagger gives (M (x) I)|phi> with B-marginal k target.
/// For the canonical purification this is conj(N) with
/// N = sqrt(k) sqrt(sigma^-1/2 target sigma^-1/2).
template <typename Real>
BasicKrausOp<Real> steering_kraus(const BasicBipartitePureState<Real>& phi, const BasicDensityMatrix<Real>& target, Real k) {
    if (target.dim() != phi.dim_b()) throw DimensionMismatch("target dimension differs from register B");
    if (!(k > Real(0))) throw PreconditionError("steering weight must be positive");
    Eigen::JacobiSVD<CMatrix<Real>> svd(phi.matrix(), Eigen::ComputeFullU | Eigen::ComputeThinV);
    const RVector<Real>& s = svd.singularValues();
    Index r = 0;
    while (r < s.size() && s(r) * s(r) > Real(tol::kFullRank)) ++r;
    CMatrix<Real> u = svd.matrixU().leftCols(r);
    CMatrix<Real> v = svd.matrixV().leftCols(r);
    CMatrix<Real> tau = v.transpose() * target.matrix() * v.conjugate();
    if (tau.trace().real() < Real(1) - Real(tol::kMarginal))
        throw PreconditionError("target is not supported on the support of the reference marginal");
    RVector<Real> sinv = s.head(r).cwiseInverse();
    CMatrix<Real> q = k * sinv.template cast<std::complex<Real>>().asDiagonal() * tau * sinv.template cast<std::complex<Real>>().asDiagonal();
    q = ((q + q.adjoint()) / Real(2)).eval();
    if (max_eigenvalue<Real>(q) > Real(1) + Real(tol::kContraction))
        throw PreconditionError("steering weight exceeds the substate bound");
    CMatrix<Real> root = psd_sqrt<Real>(CMatrix<Real>(q.transpose()));
    return BasicKrausOp<Real>(CMatrix<Real>(u * root * u.adjoint()));
}

/// Largest k accepted by steering_kraus(phi, target, k): the substate weight
/// of target in the B-marginal of phi, taken on that marginal's support.
/// Returns 0 when target leaves the support.
template <typename Real>
Real steering_weight(const BasicBipartitePureState<Real>& phi, const BasicDensityMatrix<Real>& target) {
    if (target.dim() != phi.dim_b()) throw DimensionMismatch("target dimension differs from register B");
    Eigen::JacobiSVD<CMatrix<Real>> svd(phi.matrix(), Eigen::ComputeThinU | Eigen::ComputeThinV);
    const RVector<Real>& s = svd.singularValues();
    Index r = 0;
    while (r < s.size() && s(r) * s(r) > Real(tol::kFullRank)) ++r;
    CMatrix<Real> v = svd.matrixV().leftCols(r);
    CMatrix<Real> tau = v.transpose() * target.matrix() * v.conjugate();
    if (tau.trace().real() < Real(1) - Real(tol::kMarginal)) return Real(0);
    RVector<Real> sinv = s.head(r).cwiseInverse();
    CMatrix<Real> q = sinv.template cast<std::complex<Real>>().asDiagonal() * tau * sinv.template cast<std::complex<Real>>().asDiagonal();
    q = ((q + q.adjoint()) / Real(2)).eval();
    return Real(1) / max_eigenvalue<Real>(q);
}

/// || sum_i w_i |v_i><v_i| ||_1 for a few long vectors, computed in their span.
template <typename Real>
Real mixture_trace_norm(const std::vector<CVector<Real>>& vectors, const std::vector<Real>& weights) {
    if (vectors.size() != weights.size()) throw DimensionMismatch("one weight per vector");
    if (vectors.empty()) return Real(0);
    const Index n = vectors.front().size(), m = Index(vectors.size());
    CMatrix<Real> v(n, m);
    for (Index i = 0; i < m; ++i) {
        if (vectors[std::size_t(i)].size() != n) throw DimensionMismatch("vectors differ in length");
        v.col(i) = vectors[std::size_t(i)];
    }
    // M = V W V^dagger = Q (R W R^dagger) Q^dagger
    Eigen::HouseholderQR<CMatrix<Real>> qr(v);
    const Index k = std::min(n, m);
    CMatrix<Real> r = qr.matrixQR().topRows(k).template triangularView<Eigen::Upper>();
    CMatrix<Real> w = CMatrix<Real>::Zero(m, m);
    for (Index i = 0; i < m; ++i) w(i, i) = weights[std::size_t(i)];
    CMatrix<Real> small = r * w * r.adjoint();
    small = ((small + small.adjoint()) / Real(2)).eval();
    return hermitian_trace_norm<Real>(small);
}

/// Unitary U on A with (U (x) I)|phi1> = |phi2> up to phase, for states with
/// equal B-marginals. From the SVD Phi1 Phi2^dagger = W S V^dagger, U = V W^dagger.
template <typename Real>
CMatrix<Real> uhlmann_align(const BasicBipartitePureState<Real>& phi1, const BasicBipartitePureState<Real>& phi2) {
    if (phi1.dim_a() != phi2.dim_a() || phi1.dim_b() != phi2.dim_b())
        throw DimensionMismatch("states have different register dimensions");
    CMatrix<Real> m1 = phi1.matrix(), m2 = phi2.matrix();
    CMatrix<Real> s1 = m1.transpose() * m1.conjugate();
    CMatrix<Real> s2 = m2.transpose() * m2.conjugate();
    if (max_entry<Real>(CMatrix<Real>(s1 - s2)) > Real(tol::kMarginal))
        throw PreconditionError("B-marginals differ");
    Eigen::JacobiSVD<CMatrix<Real>> svd(CMatrix<Real>(m1 * m2.adjoint()), Eigen::ComputeFullU | Eigen::ComputeFullV);
    return svd.matrixV() * svd.matrixU().adjoint();
}

template <typename Real>
bool is_unitary(const CMatrix<Real>& u, Real tolerance = Real(1e-9)) {
    if (u.rows() != u.cols()) return false;
    return max_entry<Real>(CMatrix<Real>(u.adjoint() * u - CMatrix<Real>::Identity(u.rows(), u.cols()))) <= tolerance;
}

// ---------------------------------------------------------------------------
// Double-precision aliases.

using MatrixXc = CMatrix<double>;
using VectorXc = CVector<double>;
using VectorXr = RVector<double>;
using DensityMatrix = BasicDensityMatrix<double>;
using BipartitePureState = BasicBipartitePureState<double>;
using KrausOp = BasicKrausOp<double>;
using Schmidt = BasicSchmidt<double>;

}  // namespace commlab
