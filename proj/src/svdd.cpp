#include "osklad/svdd.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "osklad/error.hpp"

namespace osklad {

namespace {

// Exact step on the face of free variables (0 < alpha_i < C), in coordinates that keep
// sum(alpha) fixed: Newton on the curved directions plus the plain gradient on directions
// with numerically zero curvature, then the exact maximizer along that line, clipped at
// the first bound. Low-rank kernels make the face (nearly) flat, and pairwise updates
// alone crawl along flat directions.
enum class FaceStep { None, Blocked, Full };

FaceStep face_step(Vector& alpha, Vector& grad, const GramMatrix& G, double C, double scale) {
    const Matrix& K = G.values();
    std::vector<Eigen::Index> F;
    for (Eigen::Index k = 0; k < alpha.size(); ++k)
        if (alpha[k] > 0.0 && alpha[k] < C)
            F.push_back(k);
    const auto f = static_cast<Eigen::Index>(F.size());
    if (f < 2)
        return FaceStep::None;

    const Matrix Q =
        Eigen::HouseholderQR<Matrix>(Matrix::Ones(f, 1)).householderQ() * Matrix::Identity(f, f);
    const Matrix Z = Q.rightCols(f - 1);  // orthonormal basis of {sum = 0}
    Matrix KF(f, f);
    Vector gF(f);
    for (Eigen::Index a = 0; a < f; ++a) {
        gF[a] = grad[F[a]];
        for (Eigen::Index c = 0; c < f; ++c)
            KF(a, c) = K(F[a], F[c]);
    }
    const Eigen::SelfAdjointEigenSolver<Matrix> es(Z.transpose() * KF * Z);
    const Vector c = es.eigenvectors().transpose() * (Z.transpose() * gF);
    const double lmax = std::max(1.0, es.eigenvalues().cwiseAbs().maxCoeff());
    Vector y = Vector::Zero(f - 1);
    for (Eigen::Index k = 0; k < f - 1; ++k) {
        const double l = es.eigenvalues()[k];
        y += (l <= 1e-14 * lmax ? c[k] : c[k] / (2.0 * l)) * es.eigenvectors().col(k);
    }
    const Vector d = Z * y;
    const double slope = gF.dot(d);
    const double curve = d.dot(KF * d);
    if (!(slope > 0.0))
        return FaceStep::None;

    double step = curve > 0.0 ? slope / (2.0 * curve) : std::numeric_limits<double>::infinity();
    Eigen::Index block = -1;
    for (Eigen::Index a = 0; a < f; ++a) {
        const double room = d[a] < 0.0 ? -alpha[F[a]] / d[a]
                            : d[a] > 0.0 ? (C - alpha[F[a]]) / d[a]
                                         : std::numeric_limits<double>::infinity();
        if (room <= step) {
            step = room;
            block = a;
        }
    }
    if (!std::isfinite(step))
        return FaceStep::None;

    Vector next = alpha;
    for (Eigen::Index a = 0; a < f; ++a)
        next[F[a]] += step * d[a];
    if (block >= 0)
        next[F[block]] = d[block] < 0.0 ? 0.0 : C;
    next = next.cwiseMax(0.0).cwiseMin(C);
    Eigen::Index big = F[0];
    for (Eigen::Index k : F)
        if (next[k] > next[big])
            big = k;
    next[big] += 1.0 - next.sum();
    if (next[big] < 0.0 || next[big] > C)
        return FaceStep::None;
    if (svdd_objective(next, G) < svdd_objective(alpha, G) - 1e-15 * scale)
        return FaceStep::None;
    alpha = std::move(next);
    grad = G.diag() - 2.0 * (K * alpha);
    return block >= 0 ? FaceStep::Blocked : FaceStep::Full;
}

// Face steps until one is not cut short by a bound, i.e. the maximizer of the current
// face is reached. Releasing variables from their bounds is left to the pairwise updates.
bool polish_face(Vector& alpha, Vector& grad, const GramMatrix& G, double C, double scale) {
    bool moved = false;
    for (Eigen::Index k = 0; k <= alpha.size(); ++k) {
        const FaceStep s = face_step(alpha, grad, G, C, scale);
        if (s == FaceStep::None)
            break;
        moved = true;
        if (s == FaceStep::Full)
            break;
    }
    return moved;
}

}  // namespace

void SolverConfig::validate(Eigen::Index n) const {
    if (n < 1)
        throw InvalidArgument("SVDD needs at least one sample");
    if (!(std::isfinite(C) && C > 0.0))
        throw InvalidArgument("C must be positive and finite");
    // Small slack so that C = 1/N typed as a decimal is still accepted.
    if (C * static_cast<double>(n) < 1.0 - 1e-12)
        throw InvalidArgument("C = " + std::to_string(C) + " is infeasible for N = " +
                              std::to_string(n) + " (need C >= 1/N)");
    if (!(kkt_tol > 0.0))
        throw InvalidArgument("kkt_tol must be positive");
    if (max_passes < 1)
        throw InvalidArgument("max_passes must be at least 1");
}

double svdd_objective(VectorView alpha, const GramMatrix& G) {
    if (alpha.size() != G.size())
        throw DataError("alpha length does not match Gram size");
    return alpha.dot(G.diag()) - alpha.dot(G.values() * alpha);
}

SvddSolution solve_svdd(const GramMatrix& G, const SolverConfig& config) {
    const Eigen::Index n = G.size();
    config.validate(n);
    const double C = config.C;
    const Matrix& K = G.values();

    SvddSolution sol;
    sol.alpha = Vector::Constant(n, 1.0 / static_cast<double>(n));

    const double scale = std::max(1.0, G.diag().maxCoeff());
    const double tol = config.kkt_tol * scale;
    const long max_iter = static_cast<long>(config.max_passes) * static_cast<long>(n);

    // grad_i = dS/dalpha_i = G_ii - 2 (G alpha)_i; it differs from the squared
    // distance of x_i to the center only by the constant alpha' G alpha.
    Vector grad = G.diag() - 2.0 * (K * sol.alpha);
    bool fresh = true;
    double violation = 0.0;
    long it = 0;
    for (;; ++it) {
        double up = -std::numeric_limits<double>::infinity();
        double low = std::numeric_limits<double>::infinity();
        Eigen::Index i = -1, j = -1;
        for (Eigen::Index k = 0; k < n; ++k) {
            if (sol.alpha[k] < C && grad[k] > up) {
                up = grad[k];
                i = k;
            }
            if (sol.alpha[k] > 0.0 && grad[k] < low) {
                low = grad[k];
                j = k;
            }
        }
        violation = (i < 0 || j < 0) ? 0.0 : std::max(0.0, up - low);
        if (violation <= tol) {
            if (fresh)
                break;
            // Incremental updates drift; confirm on an exact gradient.
            grad = G.diag() - 2.0 * (K * sol.alpha);
            fresh = true;
            continue;
        }
        if (it >= max_iter)
            throw NumericalError("SVDD solver did not converge after " + std::to_string(it) +
                                     " updates; max KKT violation " + std::to_string(violation),
                                 violation);
        if (it > 0 && it % (5 * n) == 0 && polish_face(sol.alpha, grad, G, C, scale)) {
            fresh = true;
            continue;
        }
        fresh = false;

        const double hi = std::min(C - sol.alpha[i], sol.alpha[j]);
        const double eta = K(i, i) + K(j, j) - 2.0 * K(i, j);
        double delta = eta > 1e-15 * scale ? (up - low) / (2.0 * eta) : hi;
        if (delta >= hi) {
            delta = hi;
            if (hi == sol.alpha[j]) {
                sol.alpha[i] += delta;
                sol.alpha[j] = 0.0;
            } else {
                sol.alpha[j] -= delta;
                sol.alpha[i] = C;
            }
        } else {
            sol.alpha[i] += delta;
            sol.alpha[j] -= delta;
        }
        grad.noalias() -= (2.0 * delta) * (K.col(i) - K.col(j));
    }

    sol.iterations = it;
    sol.max_violation = violation;
    sol.objective = svdd_objective(sol.alpha, G);
    const double floor = support_floor(C);
    for (Eigen::Index k = 0; k < n; ++k) {
        if (sol.alpha[k] > floor) {
            sol.support_indices.push_back(k);
            if (sol.alpha[k] < C - floor)
                sol.boundary_indices.push_back(k);
        }
    }
    sol.radius_sq = std::max(0.0, radius_squared(sol, G));
    return sol;
}

double radius_squared(const SvddSolution& sol, const GramMatrix& G) {
    if (sol.alpha.size() != G.size())
        throw DataError("solution does not match Gram size");
    if (sol.support_indices.empty())
        throw DataError("solution has no support vectors");
    const Vector Ga = G.values() * sol.alpha;
    const double aGa = sol.alpha.dot(Ga);
    auto dist = [&](Eigen::Index s) { return G(s, s) - 2.0 * Ga[s] + aGa; };
    if (!sol.boundary_indices.empty()) {
        double sum = 0.0;
        for (Eigen::Index s : sol.boundary_indices)
            sum += dist(s);
        return sum / static_cast<double>(sol.boundary_indices.size());
    }
    double r = std::numeric_limits<double>::infinity();
    for (Eigen::Index s : sol.support_indices)
        r = std::min(r, dist(s));
    return r;
}

double distance_sq_to_center(const SvddSolution& sol, const GramMatrix& G, VectorView kz,
                             double kzz) {
    if (kz.size() != G.size() || sol.alpha.size() != G.size())
        throw DataError("cross-kernel length " + std::to_string(kz.size()) +
                        " does not match training size " + std::to_string(G.size()));
    const double aGa = sol.alpha.dot(G.values() * sol.alpha);
    return kzz - 2.0 * sol.alpha.dot(kz) + aGa;
}

SvddModel fit_svdd(const DataMatrix& X, const KernelSpec& spec, const SolverConfig& config) {
    GramMatrix G = gram(spec, X);
    SvddSolution sol = solve_svdd(G, config);
    return {X, spec, std::move(G), std::move(sol)};
}

Vector score_svdd(const SvddModel& model, const DataMatrix& Z) {
    if (Z.cols() != model.train.cols())
        throw DataError("points have " + std::to_string(Z.cols()) + " features, model expects " +
                        std::to_string(model.train.cols()));
    const Vector& alpha = model.solution.alpha;
    const double aGa = alpha.dot(model.gram.values() * alpha);
    const double r2 = model.solution.radius_sq;
    Vector out(Z.rows());
    for (Eigen::Index i = 0; i < Z.rows(); ++i) {
        const Vector kz = cross_kernel(model.spec, model.train, Z.row(i));
        const double kzz = kernel_eval(model.spec, Z.row(i), Z.row(i));
        const double d2 = std::max(0.0, kzz - 2.0 * alpha.dot(kz) + aGa);
        if (r2 > 0.0)
            out[i] = std::sqrt(d2 / r2);
        else
            out[i] = d2 > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
    }
    return out;
}

}  // namespace osklad
