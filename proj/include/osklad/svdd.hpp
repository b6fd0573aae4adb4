#pragma once

#include <cstddef>
#include <vector>

#include "osklad/kernelspace.hpp"

namespace osklad {

struct SolverConfig {
    double C = 1.0;            ///< box bound on each alpha_i
    double kkt_tol = 1e-6;     ///< stop when the largest pairwise violation drops below this (times max(1, max G_ii))
    int max_passes = 10000;    ///< one pass is N pair updates

    /// Throws InvalidArgument unless C >= 1/N and the tolerances are positive.
    void validate(Eigen::Index n) const;
};

/// Dual SVDD solution. The center a = sum_i alpha_i Phi(x_i) is kept implicit.
struct SvddSolution {
    Vector alpha;
    double objective = 0.0;  ///< sum_i alpha_i G_ii - alpha' G alpha
    double radius_sq = 0.0;
    std::vector<Eigen::Index> support_indices;   ///< alpha_i > floor
    std::vector<Eigen::Index> boundary_indices;  ///< floor < alpha_i < C - floor
    double max_violation = 0.0;                  ///< final pairwise KKT residual
    long iterations = 0;
};

/// Numeric floor used to classify support vectors.
inline double support_floor(double C) { return 1e-8 * C; }

/// Maximizes sum_i alpha_i G_ii - alpha' G alpha over {sum alpha = 1, 0 <= alpha_i <= C}
/// by pairwise (SMO-style) coordinate ascent started from alpha = 1/N.
SvddSolution solve_svdd(const GramMatrix& G, const SolverConfig& config);

/// S(alpha) = sum_i alpha_i G_ii - alpha' G alpha.
double svdd_objective(VectorView alpha, const GramMatrix& G);

/// Mean squared distance of the boundary support vectors to the center. Without boundary
/// vectors every support vector sits at the box bound; the smallest of their distances is used.
double radius_squared(const SvddSolution& sol, const GramMatrix& G);

/// k(z,z) - 2 sum_i alpha_i k(x_i,z) + alpha' G alpha.
double distance_sq_to_center(const SvddSolution& sol, const GramMatrix& G, VectorView kz,
                             double kzz);

/// Plain SVDD on raw inputs: the baseline detector, also used for bandwidth selection.
struct SvddModel {
    DataMatrix train;
    KernelSpec spec;
    GramMatrix gram;
    SvddSolution solution;
};

SvddModel fit_svdd(const DataMatrix& X, const KernelSpec& spec, const SolverConfig& config);

/// sqrt(dist^2(z) / R^2) per row of Z.
Vector score_svdd(const SvddModel& model, const DataMatrix& Z);

}  // namespace osklad
