#include <doctest.h>

#include <random>

#include "osklad/error.hpp"
#include "osklad/svdd.hpp"
#include "support.hpp"

using namespace osklad;

namespace {

SvddSolution checked_solve(const GramMatrix& G, const SolverConfig& cfg = {}) {
    SvddSolution s = solve_svdd(G, cfg);
    CHECK(testing::feasible(s.alpha, cfg.C));
    CHECK(testing::kkt_breach(s, G, cfg.C, cfg.kkt_tol) <= 1.0);
    CHECK(s.radius_sq >= 0.0);
    CHECK(std::abs(s.objective - svdd_objective(s.alpha, G)) <= 1e-10);
    return s;
}

}  // namespace

TEST_CASE("single point") {
    const GramMatrix G = gram(KernelSpec::rbf(1.0), DataMatrix::from_rows({{1.0, 2.0}}));
    const SvddSolution s = checked_solve(G);
    CHECK(s.alpha[0] == 1.0);
    CHECK(s.objective == doctest::Approx(0.0));
    CHECK(s.radius_sq == doctest::Approx(0.0));
}

TEST_CASE("two points on a line") {
    const GramMatrix G = gram(KernelSpec::linear(), DataMatrix::from_rows({{0.0}, {2.0}}));
    const SvddSolution s = checked_solve(G);
    CHECK(std::abs(s.alpha[0] - 0.5) <= 1e-6);
    CHECK(std::abs(s.alpha[1] - 0.5) <= 1e-6);
    CHECK(std::abs(s.objective - 1.0) <= 1e-6);
    CHECK(std::abs(s.radius_sq - 1.0) <= 1e-6);
    // grid oracle over alpha_2 in [0, 1] step 1e-4
    CHECK(std::abs(testing::grid_svdd(G, 1e-4) - s.objective) <= 1e-6);

    // the center sits at 1
    Vector kz(2);
    kz << 0.0, 2.0;
    CHECK(distance_sq_to_center(s, G, kz, 1.0) == doctest::Approx(0.0).epsilon(1e-6));
}

TEST_CASE("duplicated point") {
    const GramMatrix G = gram(KernelSpec::linear(), DataMatrix::from_rows({{0.0}, {0.0}, {2.0}}));
    const SvddSolution s = checked_solve(G);
    CHECK(std::abs(s.alpha[0] + s.alpha[1] - 0.5) <= 1e-6);
    CHECK(std::abs(s.alpha[2] - 0.5) <= 1e-6);
    CHECK(std::abs(s.objective - 1.0) <= 1e-6);
    CHECK(std::abs(radius_squared(s, G) - 1.0) <= 1e-6);
    CHECK(std::abs(testing::grid_svdd(G, 1e-3) - s.objective) <= 1e-4);
}

TEST_CASE("infeasible C and bad config") {
    const GramMatrix G = gram(KernelSpec::linear(), DataMatrix::from_rows({{0.0}, {1.0}, {2.0}}));
    CHECK_THROWS_AS(solve_svdd(G, {.C = 0.3}), InvalidArgument);
    CHECK_NOTHROW(solve_svdd(G, {.C = 1.0 / 3.0}));
    CHECK_THROWS_AS(solve_svdd(G, {.C = 1.0, .kkt_tol = 0.0}), InvalidArgument);
    CHECK_THROWS_AS(solve_svdd(G, {.C = 1.0, .kkt_tol = 1e-6, .max_passes = 0}), InvalidArgument);
}

TEST_CASE("non-convergence reports the residual") {
    std::mt19937_64 rng(1);
    const GramMatrix G = gram(KernelSpec::rbf(0.5), testing::random_data(rng, 40, 3));
    try {
        solve_svdd(G, {.C = 1.0, .kkt_tol = 1e-14, .max_passes = 1});
        FAIL("expected NumericalError");
    } catch (const NumericalError& e) {
        CHECK(e.residual() > 0.0);
    }
}

TEST_CASE("grid oracle agreement for N <= 3") {
    std::mt19937_64 rng(17);
    for (int t = 0; t < 30; ++t) {
        const Eigen::Index n = 2 + t % 2;
        const DataMatrix X = testing::random_data(rng, n, 2);
        const KernelSpec spec = t % 3 == 0 ? KernelSpec::linear() : KernelSpec::rbf(0.8);
        const GramMatrix G = gram(spec, X);
        const SvddSolution s = checked_solve(G);
        const double grid = testing::grid_svdd(G, 1e-3);
        CHECK(s.objective >= grid - 1e-10);
        CHECK(s.objective - grid <= 1e-4);
    }
}

TEST_CASE("random solves: KKT, initializer bound, enclosure") {
    std::mt19937_64 rng(23);
    for (int t = 0; t < 40; ++t) {
        const Eigen::Index n = 5 + t;
        const DataMatrix X = testing::random_data(rng, n, 3);
        const KernelSpec spec = t % 2 ? KernelSpec::linear() : KernelSpec::rbf(0.5 + 0.1 * t);
        const GramMatrix G = gram(spec, X);
        const double C = t % 4 == 0 ? 2.0 / static_cast<double>(n) : 1.0;
        const SolverConfig cfg{.C = C};
        const SvddSolution s = checked_solve(G, cfg);
        const Vector uniform = Vector::Constant(n, 1.0 / static_cast<double>(n));
        CHECK(s.objective >= svdd_objective(uniform, G) - 1e-12);
        if (C >= 1.0) {
            const Vector Ka = G.values() * s.alpha;
            const double aKa = s.alpha.dot(Ka);
            const double scale = std::max(1.0, max_eigenvalue(G));
            for (Eigen::Index i = 0; i < n; ++i)
                CHECK(G(i, i) - 2 * Ka[i] + aKa <= s.radius_sq + 1e-6 * scale);
        }
        // determinism
        const SvddSolution again = solve_svdd(G, cfg);
        CHECK(again.alpha == s.alpha);
    }
}

TEST_CASE("distance matches explicit linear center") {
    std::mt19937_64 rng(29);
    const DataMatrix X = testing::random_data(rng, 12, 4);
    const SvddModel m = fit_svdd(X, KernelSpec::linear(), {});
    Vector center = Vector::Zero(4);
    for (Eigen::Index i = 0; i < 12; ++i)
        center += m.solution.alpha[i] * X.row(i);
    const DataMatrix Z = testing::random_data(rng, 6, 4);
    const Vector scores = score_svdd(m, Z);
    for (Eigen::Index i = 0; i < 6; ++i) {
        const Vector z = Z.row(i);
        const double d2 = (z - center).squaredNorm();
        const Vector kz = cross_kernel(KernelSpec::linear(), X, z);
        CHECK(distance_sq_to_center(m.solution, m.gram, kz, z.squaredNorm()) ==
              doctest::Approx(d2).epsilon(1e-10));
        CHECK(scores[i] == doctest::Approx(std::sqrt(d2 / m.solution.radius_sq)).epsilon(1e-10));
    }
    // boundary support vectors sit on the sphere
    for (Eigen::Index s : m.solution.boundary_indices) {
        const Vector kz = cross_kernel(KernelSpec::linear(), X, X.row(s));
        CHECK(std::abs(distance_sq_to_center(m.solution, m.gram, kz, X.row(s).squaredNorm()) -
                       m.solution.radius_sq) <= 1e-6 * std::max(1.0, max_eigenvalue(m.gram)));
    }
    CHECK_THROWS_AS(score_svdd(m, testing::random_data(rng, 2, 3)), DataError);
}
