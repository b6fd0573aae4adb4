#pragma once

#include <vector>

#include "osklad/kernelspace.hpp"
#include "osklad/svdd.hpp"

namespace osklad {

/// Active masks d^1..d^p with their masked Gram matrices, all built from the same
/// coordinates and kernel.
class ConstraintSet {
public:
    ConstraintSet(DataMatrix coords, KernelSpec spec);

    /// Throws InvalidArgument if the mask is already present or has the wrong length.
    void add(const FeatureMask& mask);
    bool contains(const FeatureMask& mask) const;

    std::size_t size() const noexcept { return masks_.size(); }
    const std::vector<FeatureMask>& masks() const noexcept { return masks_; }
    const std::vector<GramMatrix>& grams() const noexcept { return grams_; }
    const DataMatrix& coords() const noexcept { return coords_; }
    const KernelSpec& spec() const noexcept { return spec_; }

private:
    DataMatrix coords_;
    KernelSpec spec_;
    std::vector<FeatureMask> masks_;
    std::vector<GramMatrix> grams_;
};

struct MklWeights {
    Vector mu;

    static MklWeights uniform(std::size_t p);
    /// Throws DataError unless mu has length p, is nonnegative and sums to 1 within 1e-9.
    void validate(std::size_t p) const;
};

struct MasterSolution {
    Vector alpha;
    MklWeights mu;
    double t = 0.0;         ///< sum_l mu_l S(alpha, d^l)
    Vector per_mask_S;      ///< S(alpha, d^l)
    SvddSolution svdd;      ///< alpha as an SVDD solution of the combined Gram at mu
    int iterations = 0;     ///< interior-point iterations
    bool converged = false; ///< residuals and gap reached tol within max_iter
};

/// Euclidean projection onto the probability simplex.
Vector project_to_simplex(VectorView v);

/// sum_l mu_l K^(l).
GramMatrix combined_gram(const ConstraintSet& cs, const MklWeights& w);

/// Minimizes J(mu) = max_alpha sum_l mu_l S(alpha, d^l) over the simplex. Solved in the
/// equivalent form max t s.t. S(alpha, d^l) >= t for all l, alpha in the SVDD box, by a
/// primal-dual interior-point method (Mehrotra predictor-corrector); mu is the multiplier
/// vector of the S >= t rows. Converged when the primal and dual residuals and the
/// complementarity gap are all below tol * max(1, max_l max_i K^(l)_ii).
MasterSolution solve_restricted_master(const ConstraintSet& cs, const SolverConfig& config,
                                       double tol = 1e-12, int max_iter = 200);

}  // namespace osklad
