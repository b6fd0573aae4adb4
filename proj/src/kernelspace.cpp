#include "osklad/kernelspace.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Eigenvalues>

#include "osklad/error.hpp"

namespace osklad {

namespace {

void require_finite(VectorView v, const char* what) {
    if (!v.allFinite())
        throw DataError(std::string(what) + " contains non-finite values");
}

// Kernel on x ⊙ d, y ⊙ d without materializing the products. `idx` lists the
// set bits of d, or is null for the unmasked kernel.
double kernel_on(const KernelSpec& spec, VectorView x, VectorView y,
                 const std::vector<std::size_t>* idx) {
    double acc = 0.0;
    if (spec.kind == KernelKind::Linear) {
        if (idx == nullptr)
            return x.dot(y);
        for (std::size_t j : *idx)
            acc += x[j] * y[j];
        return acc;
    }
    if (idx == nullptr) {
        acc = (x - y).squaredNorm();
    } else {
        for (std::size_t j : *idx) {
            const double d = x[j] - y[j];
            acc += d * d;
        }
    }
    return std::exp(-acc / (2.0 * spec.bandwidth * spec.bandwidth));
}

}  // namespace

KernelSpec KernelSpec::rbf(double sigma) {
    KernelSpec s{KernelKind::GaussianRBF, sigma};
    s.validate();
    return s;
}

void KernelSpec::validate() const {
    if (kind == KernelKind::GaussianRBF && !(std::isfinite(bandwidth) && bandwidth > 0.0))
        throw InvalidArgument("RBF bandwidth must be positive and finite, got " +
                              std::to_string(bandwidth));
}

DataMatrix::DataMatrix(RowMatrix values) : values_(std::move(values)) {
    if (values_.rows() < 1 || values_.cols() < 1)
        throw DataError("data matrix needs at least one row and one column");
    if (!values_.allFinite())
        throw DataError("data matrix contains non-finite values");
}

DataMatrix DataMatrix::from_rows(const std::vector<std::vector<double>>& rows) {
    if (rows.empty() || rows.front().empty())
        throw DataError("data matrix needs at least one row and one column");
    RowMatrix m(rows.size(), rows.front().size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].size() != rows.front().size())
            throw DataError("ragged rows: row " + std::to_string(i) + " has " +
                            std::to_string(rows[i].size()) + " values, expected " +
                            std::to_string(rows.front().size()));
        for (std::size_t j = 0; j < rows[i].size(); ++j)
            m(i, j) = rows[i][j];
    }
    return DataMatrix(std::move(m));
}

DataMatrix DataMatrix::select_rows(const std::vector<Eigen::Index>& idx) const {
    RowMatrix out(idx.size(), cols());
    for (std::size_t k = 0; k < idx.size(); ++k) {
        if (idx[k] < 0 || idx[k] >= rows())
            throw DataError("row index out of range");
        out.row(k) = values_.row(idx[k]);
    }
    return DataMatrix(std::move(out));
}

FeatureMask::FeatureMask(std::vector<bool> bits) : bits_(std::move(bits)) {
    budget_ = static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), true));
    if (budget_ < 1)
        throw InvalidArgument("feature mask must select at least one feature");
}

FeatureMask FeatureMask::from_indices(std::size_t dim, const std::vector<std::size_t>& indices) {
    std::vector<bool> bits(dim, false);
    for (std::size_t j : indices) {
        if (j >= dim)
            throw InvalidArgument("mask index " + std::to_string(j) + " out of range for " +
                                  std::to_string(dim) + " features");
        if (bits[j])
            throw InvalidArgument("mask index " + std::to_string(j) + " repeated");
        bits[j] = true;
    }
    return FeatureMask(std::move(bits));
}

FeatureMask FeatureMask::all(std::size_t dim) { return FeatureMask(std::vector<bool>(dim, true)); }

std::vector<std::size_t> FeatureMask::indices() const {
    std::vector<std::size_t> out;
    out.reserve(budget_);
    for (std::size_t j = 0; j < bits_.size(); ++j)
        if (bits_[j])
            out.push_back(j);
    return out;
}

Vector FeatureMask::apply(VectorView x) const {
    if (static_cast<std::size_t>(x.size()) != bits_.size())
        throw DataError("mask length " + std::to_string(bits_.size()) +
                        " does not match vector length " + std::to_string(x.size()));
    Vector out = Vector::Zero(x.size());
    for (std::size_t j = 0; j < bits_.size(); ++j)
        if (bits_[j])
            out[j] = x[j];
    return out;
}

GramMatrix::GramMatrix(Matrix values) : values_(std::move(values)) {
    if (values_.rows() != values_.cols())
        throw DataError("Gram matrix must be square");
    if (!values_.allFinite())
        throw DataError("Gram matrix contains non-finite values");
    const double scale = std::max(1.0, values_.cwiseAbs().maxCoeff());
    if ((values_ - values_.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
        throw DataError("Gram matrix is not symmetric");
    diag_ = values_.diagonal();
}

double kernel_eval(const KernelSpec& spec, VectorView x, VectorView y) {
    spec.validate();
    if (x.size() != y.size())
        throw DataError("kernel arguments differ in length: " + std::to_string(x.size()) +
                        " vs " + std::to_string(y.size()));
    require_finite(x, "kernel argument");
    require_finite(y, "kernel argument");
    return kernel_on(spec, x, y, nullptr);
}

GramMatrix gram(const KernelSpec& spec, const DataMatrix& X,
                const std::optional<FeatureMask>& mask) {
    spec.validate();
    std::vector<std::size_t> idx;
    if (mask) {
        if (mask->size() != static_cast<std::size_t>(X.cols()))
            throw DataError("mask length " + std::to_string(mask->size()) +
                            " does not match feature count " + std::to_string(X.cols()));
        idx = mask->indices();
    }
    const auto* sel = mask ? &idx : nullptr;
    const Eigen::Index n = X.rows();
    Matrix G(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = i; j < n; ++j) {
            G(i, j) = kernel_on(spec, X.row(i), X.row(j), sel);
            G(j, i) = G(i, j);
        }
    }
    return GramMatrix(std::move(G));
}

Vector cross_kernel(const KernelSpec& spec, const DataMatrix& basis, VectorView z,
                    const std::optional<FeatureMask>& mask) {
    spec.validate();
    if (z.size() != basis.cols())
        throw DataError("point has " + std::to_string(z.size()) + " features, basis has " +
                        std::to_string(basis.cols()));
    require_finite(z, "query point");
    std::vector<std::size_t> idx;
    if (mask) {
        if (mask->size() != static_cast<std::size_t>(basis.cols()))
            throw DataError("mask length does not match feature count");
        idx = mask->indices();
    }
    const auto* sel = mask ? &idx : nullptr;
    Vector out(basis.rows());
    for (Eigen::Index i = 0; i < basis.rows(); ++i)
        out[i] = kernel_on(spec, basis.row(i), z, sel);
    return out;
}

double max_eigenvalue(const GramMatrix& G) {
    if (G.size() == 0)
        return 0.0;
    Eigen::SelfAdjointEigenSolver<Matrix> es(G.values(), Eigen::EigenvaluesOnly);
    return std::max(0.0, es.eigenvalues().maxCoeff());
}

bool is_psd(const GramMatrix& G, double rel_tol) {
    if (G.size() == 0)
        return true;
    Eigen::SelfAdjointEigenSolver<Matrix> es(G.values(), Eigen::EigenvaluesOnly);
    const double lmax = std::max(0.0, es.eigenvalues().maxCoeff());
    return es.eigenvalues().minCoeff() >= -rel_tol * lmax;
}

}  // namespace osklad
