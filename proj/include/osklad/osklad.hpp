#pragma once

#include <optional>
#include <string>
#include <vector>

#include "osklad/ekfs.hpp"
#include "osklad/mkl_master.hpp"
#include "osklad/svdd.hpp"

namespace osklad {

enum class Variant { LinearInputSpace, EkfsNonlinear };

struct FitConfig {
    std::size_t budget = 1;      ///< B, features per mask
    SolverConfig solver;
    double outer_tol = 1e-5;     ///< relative master-objective stall
    int max_outer = 50;          ///< cutting-plane iterations
    double master_tol = 1e-12;   ///< restricted-master residual and gap tolerance
    int master_max_iter = 200;   ///< interior-point iterations per restricted master
    double eigen_floor = 1e-10;  ///< EKFS variant only
};

enum class StopReason { DuplicateMask, ObjectiveStall, MaxIterations };

std::string to_string(StopReason r);

struct FitReport {
    int iterations = 0;
    std::vector<double> t_trace;  ///< master objective after each restricted-master solve
    StopReason stop_reason = StopReason::MaxIterations;
    bool master_converged = true; ///< every restricted-master solve certified its gap
};

/// Everything needed to score new points. Built by fit_linear / fit_ekfs or read from a
/// model file; the Gram matrices inside `constraints` are rebuilt from coordinates.
struct OskladModel {
    Variant variant = Variant::LinearInputSpace;
    KernelSpec input_kernel;            ///< kernel on raw inputs (Linear for the input-space variant)
    std::optional<Whitener> whitener;   ///< EKFS variant only
    ConstraintSet constraints;          ///< coordinates are inputs or EKFS images, kernel Linear
    MklWeights mu;
    Vector alpha;
    double radius_sq = 0.0;
    FitConfig config;

    Eigen::Index input_dim() const;
    const DataMatrix& training_coords() const { return constraints.coords(); }
};

/// Cutting-plane loop on X with the linear kernel; masks select input columns.
std::pair<OskladModel, FitReport> fit_linear(const DataMatrix& X, const FitConfig& config);

/// Embeds X into the whitened empirical kernel feature space of `spec`, then runs the
/// fit_linear loop there. Throws InvalidArgument when the budget exceeds the retained rank.
std::pair<OskladModel, FitReport> fit_ekfs(const DataMatrix& X, const KernelSpec& spec,
                                           const FitConfig& config);

/// sqrt(sum_l mu_l dist_l^2(z)) / sqrt(radius_sq) per row of Z; > 1 flags an anomaly.
Vector predict(const OskladModel& model, const DataMatrix& Z);

/// Squared distance sum_l mu_l dist_l^2(z) of one point (already in model coordinates).
double combined_distance_sq(const OskladModel& model, VectorView coords);

}  // namespace osklad
