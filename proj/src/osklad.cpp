#include "osklad/osklad.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "osklad/error.hpp"
#include "osklad/sparse_select.hpp"

namespace osklad {

std::string to_string(StopReason r) {
    switch (r) {
    case StopReason::DuplicateMask: return "duplicate-mask";
    case StopReason::ObjectiveStall: return "objective-stall";
    case StopReason::MaxIterations: return "max-iterations";
    }
    return "unknown";
}

Eigen::Index OskladModel::input_dim() const {
    return whitener ? whitener->input_dim() : constraints.coords().cols();
}

namespace {

void validate_fit(const DataMatrix& coords, const FitConfig& config) {
    const auto m = static_cast<std::size_t>(coords.cols());
    if (config.budget < 1 || config.budget > m)
        throw InvalidArgument("budget " + std::to_string(config.budget) + " outside [1, " +
                              std::to_string(m) + "]");
    if (!(config.outer_tol >= 0.0) || config.max_outer < 1)
        throw InvalidArgument("outer_tol must be nonnegative and max_outer at least 1");
    config.solver.validate(coords.rows());
}

// Cutting-plane loop on fixed coordinates with the linear kernel.
std::pair<OskladModel, FitReport> cutting_plane(DataMatrix coords, Variant variant,
                                                KernelSpec input_kernel,
                                                std::optional<Whitener> whitener,
                                                const FitConfig& config) {
    validate_fit(coords, config);
    const Eigen::Index n = coords.rows();

    ConstraintSet cs(coords, KernelSpec::linear());
    const Vector uniform = Vector::Constant(n, 1.0 / static_cast<double>(n));
    cs.add(most_violated_mask(feature_scores(uniform, coords), config.budget));

    FitReport report;
    MasterSolution master;
    for (int iter = 1;; ++iter) {
        master = solve_restricted_master(cs, config.solver, config.master_tol, config.master_max_iter);
        report.master_converged = report.master_converged && master.converged;
        report.iterations = iter;
        report.t_trace.push_back(master.t);

        if (iter >= config.max_outer) {
            report.stop_reason = StopReason::MaxIterations;
            break;
        }
        if (iter > 1) {
            const double prev = report.t_trace[report.t_trace.size() - 2];
            if (std::abs(master.t - prev) <= config.outer_tol * std::max(1.0, std::abs(master.t))) {
                report.stop_reason = StopReason::ObjectiveStall;
                break;
            }
        }
        FeatureMask next = most_violated_mask(feature_scores(master.alpha, coords), config.budget);
        if (cs.contains(next)) {
            report.stop_reason = StopReason::DuplicateMask;
            break;
        }
        cs.add(next);
    }

    OskladModel model{
        .variant = variant,
        .input_kernel = input_kernel,
        .whitener = std::move(whitener),
        .constraints = std::move(cs),
        .mu = master.mu,
        .alpha = master.alpha,
        .radius_sq = master.svdd.radius_sq,
        .config = config,
    };
    return {std::move(model), std::move(report)};
}

}  // namespace

std::pair<OskladModel, FitReport> fit_linear(const DataMatrix& X, const FitConfig& config) {
    return cutting_plane(X, Variant::LinearInputSpace, KernelSpec::linear(), std::nullopt, config);
}

std::pair<OskladModel, FitReport> fit_ekfs(const DataMatrix& X, const KernelSpec& spec,
                                           const FitConfig& config) {
    Whitener w = build_whitener(X, spec, config.eigen_floor);
    if (config.budget > static_cast<std::size_t>(w.retained_rank()))
        throw InvalidArgument("budget " + std::to_string(config.budget) +
                              " exceeds the retained EKFS rank " +
                              std::to_string(w.retained_rank()));
    DataMatrix coords = embed_matrix(w, X);
    return cutting_plane(std::move(coords), Variant::EkfsNonlinear, spec, std::move(w), config);
}

double combined_distance_sq(const OskladModel& model, VectorView z) {
    const ConstraintSet& cs = model.constraints;
    if (z.size() != cs.coords().cols())
        throw DataError("point has " + std::to_string(z.size()) + " coordinates, model expects " +
                        std::to_string(cs.coords().cols()));
    double total = 0.0;
    for (std::size_t l = 0; l < cs.size(); ++l) {
        if (model.mu.mu[l] == 0.0)
            continue;
        const FeatureMask& d = cs.masks()[l];
        const Vector kz = cross_kernel(cs.spec(), cs.coords(), z, d);
        const Vector zd = d.apply(z);
        const double kzz = kernel_eval(cs.spec(), zd, zd);
        const GramMatrix& G = cs.grams()[l];
        const double dist = kzz - 2.0 * model.alpha.dot(kz) + model.alpha.dot(G.values() * model.alpha);
        total += model.mu.mu[l] * dist;
    }
    return std::max(0.0, total);
}

Vector predict(const OskladModel& model, const DataMatrix& Z) {
    if (Z.cols() != model.input_dim())
        throw DataError("points have " + std::to_string(Z.cols()) + " features, model expects " +
                        std::to_string(model.input_dim()));
    const ConstraintSet& cs = model.constraints;

    // Precompute alpha' K^(l) alpha and the masked index lists once per call.
    std::vector<double> aKa(cs.size());
    std::vector<std::vector<std::size_t>> idx(cs.size());
    for (std::size_t l = 0; l < cs.size(); ++l) {
        aKa[l] = model.alpha.dot(cs.grams()[l].values() * model.alpha);
        idx[l] = cs.masks()[l].indices();
    }
    const RowMatrix& X = cs.coords().values();
    const Vector Xa = X.transpose() * model.alpha;  // explicit center, linear kernel on coordinates

    Vector scores(Z.rows());
    for (Eigen::Index r = 0; r < Z.rows(); ++r) {
        Vector z = model.whitener ? embed(*model.whitener, Z.row(r)) : Vector(Z.row(r));
        double dist = 0.0;
        if (cs.spec().kind != KernelKind::Linear) {
            dist = combined_distance_sq(model, z);
        } else {
            for (std::size_t l = 0; l < cs.size(); ++l) {
                const double w = model.mu.mu[l];
                if (w == 0.0)
                    continue;
                double kzz = 0.0, akz = 0.0;
                for (std::size_t j : idx[l]) {
                    kzz += z[j] * z[j];
                    akz += Xa[j] * z[j];
                }
                dist += w * (kzz - 2.0 * akz + aKa[l]);
            }
        }
        dist = std::max(0.0, dist);
        if (model.radius_sq > 0.0)
            scores[r] = std::sqrt(dist / model.radius_sq);
        else
            scores[r] = dist > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
    }
    return scores;
}

}  // namespace osklad
