#include "osklad/mkl_master.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "osklad/error.hpp"

namespace osklad {

ConstraintSet::ConstraintSet(DataMatrix coords, KernelSpec spec)
    : coords_(std::move(coords)), spec_(spec) {
    spec_.validate();
    if (coords_.empty())
        throw DataError("constraint set needs training coordinates");
}

void ConstraintSet::add(const FeatureMask& mask) {
    if (mask.size() != static_cast<std::size_t>(coords_.cols()))
        throw InvalidArgument("mask length " + std::to_string(mask.size()) +
                              " does not match coordinate dimension " +
                              std::to_string(coords_.cols()));
    if (contains(mask))
        throw InvalidArgument("mask already present in constraint set");
    grams_.push_back(gram(spec_, coords_, mask));
    masks_.push_back(mask);
}

bool ConstraintSet::contains(const FeatureMask& mask) const {
    return std::find(masks_.begin(), masks_.end(), mask) != masks_.end();
}

MklWeights MklWeights::uniform(std::size_t p) {
    return {Vector::Constant(static_cast<Eigen::Index>(p), 1.0 / static_cast<double>(p))};
}

void MklWeights::validate(std::size_t p) const {
    if (static_cast<std::size_t>(mu.size()) != p)
        throw DataError("expected " + std::to_string(p) + " kernel weights, got " +
                        std::to_string(mu.size()));
    if (!mu.allFinite() || mu.minCoeff() < 0.0 || std::abs(mu.sum() - 1.0) > 1e-9)
        throw DataError("kernel weights must be nonnegative and sum to 1");
}

Vector project_to_simplex(VectorView v) {
    const Eigen::Index n = v.size();
    std::vector<double> u(v.data(), v.data() + n);
    std::sort(u.begin(), u.end(), std::greater<>());
    double cumsum = 0.0, theta = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) {
        cumsum += u[j];
        const double candidate = (cumsum - 1.0) / static_cast<double>(j + 1);
        if (u[j] - candidate > 0.0)
            theta = candidate;
    }
    return (v.array() - theta).cwiseMax(0.0).matrix();
}

GramMatrix combined_gram(const ConstraintSet& cs, const MklWeights& w) {
    w.validate(cs.size());
    Matrix G = Matrix::Zero(cs.coords().rows(), cs.coords().rows());
    for (std::size_t l = 0; l < cs.size(); ++l)
        if (w.mu[l] != 0.0)
            G += w.mu[l] * cs.grams()[l].values();
    return GramMatrix(std::move(G));
}

namespace {

SvddSolution solution_from_alpha(Vector alpha, const GramMatrix& G, double C) {
    SvddSolution sol;
    sol.alpha = std::move(alpha);
    sol.objective = svdd_objective(sol.alpha, G);
    const Vector grad = G.diag() - 2.0 * (G.values() * sol.alpha);
    double up = -std::numeric_limits<double>::infinity();
    double low = std::numeric_limits<double>::infinity();
    const double floor = support_floor(C);
    for (Eigen::Index k = 0; k < sol.alpha.size(); ++k) {
        if (sol.alpha[k] < C - floor)
            up = std::max(up, grad[k]);
        if (sol.alpha[k] > floor) {
            low = std::min(low, grad[k]);
            sol.support_indices.push_back(k);
            if (sol.alpha[k] < C - floor)
                sol.boundary_indices.push_back(k);
        }
    }
    sol.max_violation = std::isfinite(up) && std::isfinite(low) ? std::max(0.0, up - low) : 0.0;
    sol.radius_sq = std::max(0.0, radius_squared(sol, G));
    return sol;
}

MasterSolution finish(const ConstraintSet& cs, Vector alpha, Vector mu, double C) {
    MasterSolution m;
    m.per_mask_S.resize(static_cast<Eigen::Index>(cs.size()));
    for (std::size_t l = 0; l < cs.size(); ++l)
        m.per_mask_S[static_cast<Eigen::Index>(l)] = svdd_objective(alpha, cs.grams()[l]);
    m.mu.mu = std::move(mu);
    m.t = m.mu.mu.dot(m.per_mask_S);
    m.svdd = solution_from_alpha(alpha, combined_gram(cs, m.mu), C);
    m.alpha = std::move(alpha);
    return m;
}

struct Step {
    Vector da, ds, dl, dz, dw;
    double dt = 0.0, dn = 0.0;
};

}  // namespace

MasterSolution solve_restricted_master(const ConstraintSet& cs, const SolverConfig& config,
                                       double tol, int max_iter) {
    const std::size_t p = cs.size();
    if (p == 0)
        throw InvalidArgument("restricted master needs at least one mask");
    if (!(tol > 0.0) || max_iter < 1)
        throw InvalidArgument("master tolerance must be positive and max_iter at least 1");
    config.validate(cs.coords().rows());

    const Eigen::Index n = cs.coords().rows();
    const auto P = static_cast<Eigen::Index>(p);
    const double C = config.C;
    const bool upper = C < 1.0;  // otherwise alpha <= C follows from the simplex
    const double nd = static_cast<double>(n);

    // The box leaves no room: alpha is uniform and the master is min_l S_l.
    if (n == 1 || C * nd <= 1.0 + 1e-12) {
        const Vector alpha = Vector::Constant(n, 1.0 / nd);
        Vector S(P);
        for (Eigen::Index l = 0; l < P; ++l)
            S[l] = svdd_objective(alpha, cs.grams()[static_cast<std::size_t>(l)]);
        Eigen::Index best = 0;
        S.minCoeff(&best);
        MasterSolution m = finish(cs, alpha, Vector::Unit(P, best), C);
        m.converged = true;
        return m;
    }

    double scale = 1.0;
    for (const GramMatrix& G : cs.grams())
        scale = std::max(scale, G.diag().maxCoeff());

    // max t  s.t.  S_l(alpha) >= t,  sum alpha = 1,  0 <= alpha <= C.
    // By the minimax theorem this equals min_mu max_alpha sum_l mu_l S_l(alpha), and the
    // multipliers lambda of the S_l >= t rows are the optimal mu.
    Vector alpha = Vector::Constant(n, 1.0 / nd);
    Matrix g(n, P);  // columns: gradients of S_l at alpha
    Vector S(P);
    auto refresh = [&]() {
        for (Eigen::Index l = 0; l < P; ++l) {
            const GramMatrix& K = cs.grams()[static_cast<std::size_t>(l)];
            const Vector Ka = K.values() * alpha;
            g.col(l) = K.diag() - 2.0 * Ka;
            S[l] = alpha.dot(K.diag()) - alpha.dot(Ka);
        }
    };
    refresh();

    double t = S.minCoeff() - scale;
    Vector s = (S.array() - t).matrix();
    Vector lambda = Vector::Constant(P, 1.0 / static_cast<double>(P));
    const double tau0 = lambda.dot(s) / static_cast<double>(P);
    Vector z = (tau0 / alpha.array()).matrix();
    Vector w = upper ? Vector((tau0 / (C - alpha.array())).matrix()) : Vector::Zero(n);
    double nu = (g * lambda + z - w).mean();
    const double pairs = static_cast<double>(P + n + (upper ? n : 0));

    auto slack_hi = [&](const Vector& a) { return Vector((C - a.array()).matrix()); };

    int it = 0;
    bool converged = false;
    for (; it < max_iter; ++it) {
        const Vector hi = upper ? slack_hi(alpha) : Vector::Ones(n);
        const Vector r_a = -(g * lambda) - z + w + Vector::Constant(n, nu);
        const double r_t = lambda.sum() - 1.0;
        const double r_e = alpha.sum() - 1.0;
        const Vector r_s = S - Vector::Constant(P, t) - s;
        const double gap = lambda.dot(s) + z.dot(alpha) + (upper ? w.dot(hi) : 0.0);

        const double primal = std::max(r_s.cwiseAbs().maxCoeff(), std::abs(r_e) * scale);
        const double dual = std::max(r_a.cwiseAbs().maxCoeff(), std::abs(r_t) * scale);
        if (primal <= tol * scale && dual <= tol * scale && gap <= tol * scale) {
            converged = true;
            break;
        }

        // Newton system with z and w eliminated, unknowns (da, dl, dt, dn):
        //   [ H + Dz   -g          0   1 ] [da]   [b1]   H = 2 sum_l lambda_l K_l
        //   [ -g'      -diag(s/l)  1   0 ] [dl] = [b2]   Dz = diag(z/alpha + w/(C-alpha))
        //   [ 0         1'         0   0 ] [dt]   [b3]
        //   [ 1'        0          0   0 ] [dn]   [b4]
        // Kept unreduced: eliminating dl would add lambda_l/s_l g_l g_l', which swamps H
        // as the active slacks go to zero.
        const Eigen::Index dim = n + P + 2;
        Matrix A = Matrix::Zero(dim, dim);
        for (Eigen::Index l = 0; l < P; ++l)
            A.topLeftCorner(n, n).noalias() +=
                (2.0 * lambda[l]) * cs.grams()[static_cast<std::size_t>(l)].values();
        Vector barrier = (z.array() / alpha.array()).matrix();
        if (upper)
            barrier += (w.array() / hi.array()).matrix();
        A.topLeftCorner(n, n).diagonal() += barrier;
        A.block(0, n, n, P) = -g;
        A.block(n, 0, P, n) = -g.transpose();
        A.block(n, n, P, P).diagonal() = -(s.array() / lambda.array()).matrix();
        A.block(n, n + P, P, 1).setOnes();
        A.block(n + P, n, 1, P).setOnes();
        A.block(0, n + P + 1, n, 1).setOnes();
        A.block(n + P + 1, 0, 1, n).setOnes();
        const Eigen::PartialPivLU<Matrix> lu(A);

        // r_l, r_z, r_w are the complementarity residuals the step should cancel.
        auto direction = [&](const Vector& r_l, const Vector& r_z, const Vector& r_w) {
            const Vector r_tl = r_l + lambda.cwiseProduct(r_s);
            Vector rhs(dim);
            rhs.head(n) = -r_a - (r_z.array() / alpha.array()).matrix();
            if (upper)
                rhs.head(n) += (r_w.array() / hi.array()).matrix();
            rhs.segment(n, P) = (r_tl.array() / lambda.array()).matrix();
            rhs[n + P] = -r_t;
            rhs[n + P + 1] = -r_e;
            Vector x = lu.solve(rhs);
            x += lu.solve(rhs - A * x);
            Step st;
            st.da = x.head(n);
            st.dl = x.segment(n, P);
            st.dt = x[n + P];
            st.dn = x[n + P + 1];
            st.ds = r_s + g.transpose() * st.da - Vector::Constant(P, st.dt);
            st.dz = ((-r_z.array() - z.array() * st.da.array()) / alpha.array()).matrix();
            st.dw = upper ? Vector(((-r_w.array() + w.array() * st.da.array()) / hi.array()).matrix())
                          : Vector::Zero(n);
            return st;
        };
        // Largest step in (0, 1] keeping every positive quantity positive, shortened by eta.
        auto step_length = [&](const Step& st, double eta) {
            double a = 1.0;
            auto limit = [&](const Vector& v, const Vector& dv) {
                for (Eigen::Index i = 0; i < v.size(); ++i)
                    if (dv[i] < 0.0)
                        a = std::min(a, -eta * v[i] / dv[i]);
            };
            limit(alpha, st.da);
            limit(s, st.ds);
            limit(lambda, st.dl);
            limit(z, st.dz);
            if (upper) {
                limit(hi, Vector(-st.da));
                limit(w, st.dw);
            }
            return a;
        };

        const Step aff = direction(lambda.cwiseProduct(s), z.cwiseProduct(alpha),
                                   upper ? Vector(w.cwiseProduct(hi)) : Vector::Zero(n));
        if (!aff.da.allFinite() || !aff.dl.allFinite())
            break;
        const double a_aff = step_length(aff, 1.0);
        double gap_aff = (lambda + a_aff * aff.dl).dot(s + a_aff * aff.ds) +
                         (z + a_aff * aff.dz).dot(alpha + a_aff * aff.da);
        if (upper)
            gap_aff += (w + a_aff * aff.dw).dot(hi - a_aff * aff.da);
        const double sigma = std::pow(std::max(0.0, gap_aff) / gap, 3.0);
        const double target = sigma * gap / pairs;

        const Vector r_l = (lambda.array() * s.array() + aff.dl.array() * aff.ds.array() - target).matrix();
        const Vector r_z = (z.array() * alpha.array() + aff.dz.array() * aff.da.array() - target).matrix();
        const Vector r_w = upper ? Vector((w.array() * hi.array() - aff.dw.array() * aff.da.array() - target).matrix())
                                 : Vector::Zero(n);
        const Step st = direction(r_l, r_z, r_w);
        const double a = step_length(st, std::max(0.99, 1.0 - gap / (pairs * scale)));

        alpha += a * st.da;
        t += a * st.dt;
        nu += a * st.dn;
        s += a * st.ds;
        lambda += a * st.dl;
        z += a * st.dz;
        if (upper)
            w += a * st.dw;
        refresh();
    }

    // alpha stays strictly positive inside the method; put it back on the simplex exactly.
    alpha = alpha.cwiseMax(0.0);
    alpha /= alpha.sum();
    MasterSolution m = finish(cs, alpha, lambda / lambda.sum(), C);
    m.iterations = it;
    m.converged = converged;
    return m;
}

}  // namespace osklad
