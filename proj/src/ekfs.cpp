#include "osklad/ekfs.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include <Eigen/Eigenvalues>

#include "osklad/error.hpp"

namespace osklad {

SortedEigen sorted_eigen(const GramMatrix& K) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(K.values());
    if (es.info() != Eigen::Success)
        throw NumericalError("eigendecomposition of the Gram matrix failed");
    const Eigen::Index n = K.size();
    std::vector<Eigen::Index> order(n);
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
        return es.eigenvalues()[a] > es.eigenvalues()[b];
    });

    SortedEigen out{Vector(n), Matrix(n, n)};
    for (Eigen::Index k = 0; k < n; ++k) {
        out.values[k] = es.eigenvalues()[order[k]];
        Vector v = es.eigenvectors().col(order[k]);
        Eigen::Index arg = 0;
        for (Eigen::Index i = 1; i < n; ++i)
            if (std::abs(v[i]) > std::abs(v[arg]))
                arg = i;
        if (v[arg] < 0.0)
            v = -v;
        out.vectors.col(k) = v;
    }
    return out;
}

Whitener build_whitener(const DataMatrix& X, const KernelSpec& spec, double eigen_floor) {
    if (!(eigen_floor > 0.0 && eigen_floor < 1.0))
        throw InvalidArgument("eigen_floor must lie in (0, 1)");
    const GramMatrix K = gram(spec, X);
    const SortedEigen eig = sorted_eigen(K);
    const double lmax = eig.values[0];
    if (!(lmax > 0.0))
        throw NumericalError("degenerate kernel: Gram matrix has no positive eigenvalue");
    if (eig.values[eig.values.size() - 1] < -1e-8 * lmax)
        throw DataError("Gram matrix is not positive semidefinite");

    Eigen::Index r = 0;
    while (r < eig.values.size() && eig.values[r] > eigen_floor * lmax)
        ++r;
    if (r == 0)
        throw NumericalError("degenerate kernel: all eigenvalues below the floor");

    Whitener w;
    w.basis_ = X;
    w.spec_ = spec;
    w.eigen_floor_ = eigen_floor;
    w.transform_.resize(r, K.size());
    for (Eigen::Index k = 0; k < r; ++k)
        w.transform_.row(k) = eig.vectors.col(k).transpose() / std::sqrt(eig.values[k]);
    return w;
}

Whitener Whitener::from_parts(DataMatrix basis, KernelSpec spec, Matrix transform,
                              double eigen_floor) {
    spec.validate();
    if (transform.cols() != basis.rows() || transform.rows() < 1 ||
        transform.rows() > basis.rows())
        throw DataError("whitener transform is " + std::to_string(transform.rows()) + "x" +
                        std::to_string(transform.cols()) + " for a basis of " +
                        std::to_string(basis.rows()) + " points");
    if (!transform.allFinite())
        throw DataError("whitener transform contains non-finite values");
    Whitener w;
    w.basis_ = std::move(basis);
    w.spec_ = spec;
    w.transform_ = std::move(transform);
    w.eigen_floor_ = eigen_floor;
    return w;
}

Vector embed(const Whitener& w, VectorView z) {
    return w.transform() * cross_kernel(w.spec(), w.basis(), z);
}

DataMatrix embed_matrix(const Whitener& w, const DataMatrix& Z) {
    if (Z.cols() != w.input_dim())
        throw DataError("points have " + std::to_string(Z.cols()) + " features, whitener expects " +
                        std::to_string(w.input_dim()));
    RowMatrix out(Z.rows(), w.retained_rank());
    for (Eigen::Index i = 0; i < Z.rows(); ++i)
        out.row(i) = embed(w, Z.row(i)).transpose();
    return DataMatrix(std::move(out));
}

}  // namespace osklad
