#pragma once

// Helpers shared by the unit tests and the acceptance binary: random instances, an
// independent KKT check and brute-force oracles.

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "osklad/kernelspace.hpp"
#include "osklad/mkl_master.hpp"
#include "osklad/svdd.hpp"

namespace testing {

using namespace osklad;

inline DataMatrix random_data(std::mt19937_64& rng, Eigen::Index n, Eigen::Index m,
                              double scale = 1.0) {
    std::normal_distribution<double> g(0.0, scale);
    RowMatrix v(n, m);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < m; ++j)
            v(i, j) = g(rng);
    return DataMatrix(std::move(v));
}

inline Vector random_simplex(std::mt19937_64& rng, Eigen::Index n) {
    std::exponential_distribution<double> e(1.0);
    Vector a(n);
    for (Eigen::Index i = 0; i < n; ++i)
        a[i] = e(rng);
    return a / a.sum();
}

/// Largest breach of the three-case KKT bounds, in units of kkt_tol * max(1, lambda_max).
/// A value <= 1 means the solution satisfies them.
inline double kkt_breach(const SvddSolution& sol, const GramMatrix& G, double C, double kkt_tol) {
    const Matrix& K = G.values();
    const Vector Ka = K * sol.alpha;
    const double aKa = sol.alpha.dot(Ka);
    const double scale = std::max(1.0, max_eigenvalue(G));
    const double floor = support_floor(C);
    const double r2 = sol.radius_sq;
    double worst = 0.0;
    for (Eigen::Index i = 0; i < G.size(); ++i) {
        const double d2 = K(i, i) - 2.0 * Ka[i] + aKa;
        double excess;
        if (sol.alpha[i] <= floor)
            excess = d2 - r2;
        else if (sol.alpha[i] < C - floor)
            excess = std::abs(d2 - r2);
        else
            excess = r2 - d2;
        worst = std::max(worst, excess / (kkt_tol * scale));
    }
    return worst;
}

/// Simplex invariants of a solution: sum to one, inside the box.
inline bool feasible(const Vector& alpha, double C) {
    return std::abs(alpha.sum() - 1.0) <= 1e-9 && alpha.minCoeff() >= -1e-12 &&
           alpha.maxCoeff() <= C + 1e-12;
}

/// max over the simplex grid {alpha_i = k_i * step} of the SVDD objective, N <= 3, C >= 1.
inline double grid_svdd(const GramMatrix& G, double step) {
    const Eigen::Index n = G.size();
    const int k = static_cast<int>(std::lround(1.0 / step));
    double best = -1e300;
    Vector a(n);
    if (n == 1)
        return 0.0;
    for (int i = 0; i <= k; ++i) {
        if (n == 2) {
            a << i * step, (k - i) * step;
            best = std::max(best, svdd_objective(a, G));
            continue;
        }
        for (int j = 0; i + j <= k; ++j) {
            a << i * step, j * step, (k - i - j) * step;
            best = std::max(best, svdd_objective(a, G));
        }
    }
    return best;
}

/// Nested grid oracle for a two-mask master: min over mu_1 of max over alpha.
inline double grid_master(const ConstraintSet& cs, double mu_step, double alpha_step) {
    double best = 1e300;
    const int k = static_cast<int>(std::lround(1.0 / mu_step));
    for (int i = 0; i <= k; ++i) {
        MklWeights w;
        if (cs.size() == 1) {
            w.mu = Vector::Ones(1);
        } else {
            w.mu.resize(2);
            w.mu << i * mu_step, 1.0 - i * mu_step;
            w.mu = w.mu.cwiseMax(0.0) / w.mu.cwiseMax(0.0).sum();
        }
        best = std::min(best, grid_svdd(combined_gram(cs, w), alpha_step));
        if (cs.size() == 1)
            break;
    }
    return best;
}

/// Calls f on every subset of {0..m-1} of size b.
template <typename F>
void for_each_subset(std::size_t m, std::size_t b, F&& f) {
    std::vector<bool> pick(m, false);
    std::fill(pick.begin(), pick.begin() + static_cast<long>(b), true);
    do {
        std::vector<std::size_t> idx;
        for (std::size_t j = 0; j < m; ++j)
            if (pick[j])
                idx.push_back(j);
        f(idx);
    } while (std::prev_permutation(pick.begin(), pick.end()));
}

/// Explicit-coordinates linear SVDD objective under a mask: weighted variance summed
/// over the selected columns, computed without any Gram matrix.
inline double masked_objective(const Vector& alpha, const DataMatrix& X,
                               const std::vector<std::size_t>& cols) {
    double s = 0.0;
    for (std::size_t j : cols) {
        double m1 = 0.0, m2 = 0.0;
        for (Eigen::Index i = 0; i < X.rows(); ++i) {
            const double x = X(i, static_cast<Eigen::Index>(j));
            m1 += alpha[i] * x;
            m2 += alpha[i] * x * x;
        }
        s += m2 - m1 * m1;
    }
    return s;
}

}  // namespace testing
