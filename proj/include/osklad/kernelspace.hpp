#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include <Eigen/Core>

namespace osklad {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using VectorView = Eigen::Ref<const Vector>;

enum class KernelKind { Linear, GaussianRBF };

struct KernelSpec {
    KernelKind kind = KernelKind::Linear;
    double bandwidth = 1.0;  // sigma, GaussianRBF only

    static KernelSpec linear() { return {KernelKind::Linear, 1.0}; }
    static KernelSpec rbf(double sigma);

    /// Throws InvalidArgument when an RBF bandwidth is not a positive finite number.
    void validate() const;
};

/// N samples by M features, one sample per row. All entries finite.
class DataMatrix {
public:
    DataMatrix() = default;
    explicit DataMatrix(RowMatrix values);

    static DataMatrix from_rows(const std::vector<std::vector<double>>& rows);

    Eigen::Index rows() const noexcept { return values_.rows(); }
    Eigen::Index cols() const noexcept { return values_.cols(); }
    bool empty() const noexcept { return values_.size() == 0; }

    auto row(Eigen::Index i) const { return values_.row(i).transpose(); }
    double operator()(Eigen::Index i, Eigen::Index j) const { return values_(i, j); }
    const RowMatrix& values() const noexcept { return values_; }

    /// Copy of the selected rows, in the given order.
    DataMatrix select_rows(const std::vector<Eigen::Index>& idx) const;

private:
    RowMatrix values_;
};

/// Binary selector over M features with exactly budget() bits set, 1 <= budget <= M.
class FeatureMask {
public:
    FeatureMask() = default;
    explicit FeatureMask(std::vector<bool> bits);

    static FeatureMask from_indices(std::size_t dim, const std::vector<std::size_t>& indices);
    static FeatureMask all(std::size_t dim);

    std::size_t size() const noexcept { return bits_.size(); }
    std::size_t budget() const noexcept { return budget_; }
    bool test(std::size_t j) const { return bits_[j]; }
    const std::vector<bool>& bits() const noexcept { return bits_; }
    std::vector<std::size_t> indices() const;

    /// Elementwise product x ⊙ d.
    Vector apply(VectorView x) const;

    friend bool operator==(const FeatureMask&, const FeatureMask&) = default;

private:
    std::vector<bool> bits_;
    std::size_t budget_ = 0;
};

/// Symmetric N x N kernel matrix with its diagonal cached.
class GramMatrix {
public:
    GramMatrix() = default;
    /// Rejects non-square, non-finite, or asymmetric (beyond 1e-12 relative) input.
    explicit GramMatrix(Matrix values);

    Eigen::Index size() const noexcept { return values_.rows(); }
    const Matrix& values() const noexcept { return values_; }
    const Vector& diag() const noexcept { return diag_; }
    double operator()(Eigen::Index i, Eigen::Index j) const { return values_(i, j); }

private:
    Matrix values_;
    Vector diag_;
};

double kernel_eval(const KernelSpec& spec, VectorView x, VectorView y);

GramMatrix gram(const KernelSpec& spec, const DataMatrix& X,
                const std::optional<FeatureMask>& mask = std::nullopt);

Vector cross_kernel(const KernelSpec& spec, const DataMatrix& basis, VectorView z,
                    const std::optional<FeatureMask>& mask = std::nullopt);

/// Largest eigenvalue of a Gram matrix (0 for an all-zero matrix).
double max_eigenvalue(const GramMatrix& G);

/// True when every eigenvalue is >= -rel_tol * lambda_max.
bool is_psd(const GramMatrix& G, double rel_tol = 1e-8);

}  // namespace osklad
