#ifndef GLAESER_AFFINE_HPP
#define GLAESER_AFFINE_HPP

// Affine subspaces of R^s in canonical form (minimum-norm base point plus an
// orthonormal basis of the direction space), with fiber solving, projections,
// projector matrices and a gap metric for comparing subspaces.

#include "glaeser/errors.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>

namespace glaeser {

template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

/// Orthogonal projector onto the direction space of an affine subspace.
template <typename Scalar>
using ProjectorMatrix = MatrixX<Scalar>;

template <typename Scalar>
class AffineSubspace {
public:
    using Vector = VectorX<Scalar>;
    using Matrix = MatrixX<Scalar>;

    /// The empty subset of R^ambient.
    static AffineSubspace empty(Eigen::Index ambient) {
        AffineSubspace v;
        v.ambient_ = ambient;
        return v;
    }

    static AffineSubspace whole(Eigen::Index ambient) {
        AffineSubspace v;
        v.ambient_ = ambient;
        v.empty_ = false;
        v.base_ = Vector::Zero(ambient);
        v.basis_ = Matrix::Identity(ambient, ambient);
        return v;
    }

    static AffineSubspace point(const Vector &p) {
        AffineSubspace v;
        v.ambient_ = p.size();
        v.empty_ = false;
        v.base_ = p;
        v.basis_ = Matrix::Zero(p.size(), 0);
        return v;
    }

    /// Canonical form of {p + span(directions)}. Directions need not be
    /// orthonormal or independent; columns below `rankTol` (relative) are dropped.
    static AffineSubspace through(const Vector &p, const Matrix &directions, Scalar rankTol = Scalar(1e-12)) {
        if (directions.rows() != p.size()) throw DimensionMismatch("direction matrix rows differ from point size");
        AffineSubspace v;
        v.ambient_ = p.size();
        v.empty_ = false;
        v.basis_ = orthonormalColumns(directions, rankTol);
        v.base_ = p - v.basis_ * (v.basis_.transpose() * p);
        return v;
    }

    bool isEmpty() const { return empty_; }
    Eigen::Index ambientDim() const { return ambient_; }
    /// Dimension of the direction space, -1 for the empty set.
    Eigen::Index dim() const { return empty_ ? -1 : basis_.cols(); }

    const Vector &base() const {
        if (empty_) throw EmptySubspace();
        return base_;
    }
    const Matrix &basis() const {
        if (empty_) throw EmptySubspace();
        return basis_;
    }

    static Matrix orthonormalColumns(const Matrix &m, Scalar rankTol) {
        if (m.cols() == 0) return Matrix::Zero(m.rows(), 0);
        Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeThinU);
        const auto &sv = svd.singularValues();
        const Scalar top = sv.size() ? sv(0) : Scalar(0);
        Eigen::Index k = 0;
        while (k < sv.size() && top > Scalar(0) && sv(k) > rankTol * top) ++k;
        return svd.matrixU().leftCols(k);
    }

private:
    AffineSubspace() = default;

    bool empty_ = true;
    Eigen::Index ambient_ = 0;
    Vector base_;
    Matrix basis_;
};

using Affine = AffineSubspace<double>;

/// Fiber {lambda : A lambda = g}. Rank counts singular values >= sigmaTol * sigma_max;
/// the fiber is empty when the least-squares residual exceeds sigmaTol * (1 + |g|).
template <typename DerivedA, typename DerivedG>
AffineSubspace<typename DerivedA::Scalar> solveFiber(const Eigen::MatrixBase<DerivedA> &A,
                                                     const Eigen::MatrixBase<DerivedG> &g,
                                                     typename DerivedA::Scalar sigmaTol) {
    using Scalar = typename DerivedA::Scalar;
    using Matrix = MatrixX<Scalar>;
    using Vector = VectorX<Scalar>;
    if (A.rows() != g.size()) throw DimensionMismatch("fiber right-hand side length differs from matrix rows");
    if (!(sigmaTol > Scalar(0))) throw DimensionMismatch("sigma tolerance must be positive");
    const Eigen::Index s = A.cols();

    Eigen::JacobiSVD<Matrix> svd(Matrix(A), Eigen::ComputeThinU | Eigen::ComputeFullV);
    const auto &sv = svd.singularValues();
    const Scalar top = sv.size() ? sv(0) : Scalar(0);
    Eigen::Index rank = 0;
    while (rank < sv.size() && top > Scalar(0) && sv(rank) >= sigmaTol * top) ++rank;

    const Matrix &U = svd.matrixU();
    const Matrix &V = svd.matrixV();
    Vector coeffs = (U.leftCols(rank).transpose() * g).cwiseQuotient(sv.head(rank));
    Vector x = V.leftCols(rank) * coeffs;

    const Scalar residual = (A * x - g).norm();
    if (residual > sigmaTol * (Scalar(1) + g.norm())) return AffineSubspace<Scalar>::empty(s);

    return AffineSubspace<Scalar>::through(x, V.rightCols(s - rank));
}

/// Closest point of V to w.
template <typename Scalar, typename Derived>
VectorX<Scalar> project(const AffineSubspace<Scalar> &V, const Eigen::MatrixBase<Derived> &w) {
    if (V.isEmpty()) throw EmptySubspace();
    if (w.size() != V.ambientDim()) throw DimensionMismatch("point size differs from ambient dimension");
    const auto &B = V.basis();
    const VectorX<Scalar> d = w - V.base();
    return V.base() + B * (B.transpose() * d);
}

/// Euclidean distance from w to V; +infinity when V is empty.
template <typename Scalar, typename Derived>
Scalar distance(const AffineSubspace<Scalar> &V, const Eigen::MatrixBase<Derived> &w) {
    if (V.isEmpty()) return std::numeric_limits<Scalar>::infinity();
    return (w - project(V, w)).norm();
}

/// Minimum-norm point, i.e. the projection of the origin.
template <typename Scalar>
VectorX<Scalar> minNormPoint(const AffineSubspace<Scalar> &V) {
    if (V.isEmpty()) throw EmptySubspace();
    return V.base();
}

/// P with P v the orthogonal projection of v onto the direction space of V.
/// The complementary projector I - P is the map v -> Pi_{V-perp} v.
template <typename Scalar>
ProjectorMatrix<Scalar> projectorMatrix(const AffineSubspace<Scalar> &V) {
    if (V.isEmpty()) throw EmptySubspace();
    return V.basis() * V.basis().transpose();
}

/// Largest singular value of a symmetric matrix.
template <typename Derived>
typename Derived::Scalar symmetricOperatorNorm(const Eigen::MatrixBase<Derived> &m) {
    using Scalar = typename Derived::Scalar;
    if (m.size() == 0) return Scalar(0);
    Eigen::SelfAdjointEigenSolver<MatrixX<Scalar>> es(m, Eigen::EigenvaluesOnly);
    return es.eigenvalues().cwiseAbs().maxCoeff();
}

/// |P1 - P2|_op + |base1 - base2| / (1 + |base1|); 0 for two empty sets and
/// +infinity when exactly one is empty.
template <typename Scalar>
Scalar subspaceGap(const AffineSubspace<Scalar> &a, const AffineSubspace<Scalar> &b) {
    if (a.isEmpty() && b.isEmpty()) return Scalar(0);
    if (a.isEmpty() || b.isEmpty()) return std::numeric_limits<Scalar>::infinity();
    if (a.ambientDim() != b.ambientDim()) throw DimensionMismatch("subspaces live in different ambient spaces");
    const MatrixX<Scalar> diff = projectorMatrix(a) - projectorMatrix(b);
    return symmetricOperatorNorm(diff) + (a.base() - b.base()).norm() / (Scalar(1) + a.base().norm());
}

/// Sine of the largest principal angle between the directions of `inner` and
/// the direction space of `outer` (0 when inner's directions lie in outer's).
template <typename Scalar>
Scalar directionExcess(const AffineSubspace<Scalar> &outer, const AffineSubspace<Scalar> &inner) {
    if (outer.isEmpty() || inner.isEmpty()) throw EmptySubspace();
    if (inner.dim() == 0) return Scalar(0);
    const MatrixX<Scalar> residual = inner.basis() - outer.basis() * (outer.basis().transpose() * inner.basis());
    Eigen::JacobiSVD<MatrixX<Scalar>> svd(residual);
    return svd.singularValues()(0);
}

} // namespace glaeser

#endif
