#pragma once

#include "osklad/kernelspace.hpp"

namespace osklad {

/// Whitened empirical kernel map: z -> transform * (k(x_1,z), ..., k(x_n,z))'.
///
/// transform = Lambda_r^{-1/2} U_r' where K = U Lambda U' and only eigenpairs with
/// lambda > eigen_floor * lambda_max are kept. On the basis points the canonical dot
/// product of the images reproduces K exactly when r = n, and the best rank-r
/// approximation of K otherwise.
class Whitener {
public:
    Whitener() = default;

    /// Rebuilds a whitener from stored parts (model files). Validates shapes only.
    static Whitener from_parts(DataMatrix basis, KernelSpec spec, Matrix transform,
                               double eigen_floor);

    const DataMatrix& basis() const noexcept { return basis_; }
    const KernelSpec& spec() const noexcept { return spec_; }
    const Matrix& transform() const noexcept { return transform_; }
    Eigen::Index retained_rank() const noexcept { return transform_.rows(); }
    Eigen::Index input_dim() const noexcept { return basis_.cols(); }
    double eigen_floor() const noexcept { return eigen_floor_; }

private:
    friend Whitener build_whitener(const DataMatrix&, const KernelSpec&, double);

    DataMatrix basis_;
    KernelSpec spec_;
    Matrix transform_;  // r x n
    double eigen_floor_ = 0.0;
};

/// Eigenpairs of a symmetric matrix sorted by descending eigenvalue, each
/// eigenvector signed so that its largest-magnitude entry is positive.
struct SortedEigen {
    Vector values;
    Matrix vectors;  // columns
};
SortedEigen sorted_eigen(const GramMatrix& K);

/// Throws InvalidArgument for eigen_floor outside (0,1), DataError when the Gram
/// matrix is not PSD, NumericalError when no eigenvalue clears the floor.
Whitener build_whitener(const DataMatrix& X, const KernelSpec& spec, double eigen_floor = 1e-10);

Vector embed(const Whitener& w, VectorView z);

/// Rowwise embed; the result has one row per input row and retained_rank() columns.
DataMatrix embed_matrix(const Whitener& w, const DataMatrix& Z);

}  // namespace osklad
