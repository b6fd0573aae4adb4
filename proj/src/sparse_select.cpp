#include "osklad/sparse_select.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "osklad/error.hpp"

namespace osklad {

FeatureScores feature_scores(VectorView alpha, const DataMatrix& X) {
    if (alpha.size() != X.rows())
        throw DataError("alpha has " + std::to_string(alpha.size()) + " entries for " +
                        std::to_string(X.rows()) + " samples");
    if (!alpha.allFinite() || alpha.minCoeff() < 0.0 || std::abs(alpha.sum() - 1.0) > 1e-6)
        throw DataError("alpha is not on the probability simplex");

    const RowMatrix& V = X.values();
    const Vector mean = V.transpose() * alpha;
    const Vector second = V.cwiseAbs2().transpose() * alpha;
    FeatureScores out;
    out.c = second - mean.cwiseAbs2();
    out.alpha_used = alpha;
    return out;
}

FeatureMask most_violated_mask(const FeatureScores& scores, std::size_t budget) {
    const auto m = static_cast<std::size_t>(scores.c.size());
    if (budget < 1 || budget > m)
        throw InvalidArgument("budget " + std::to_string(budget) + " outside [1, " +
                              std::to_string(m) + "]");
    std::vector<std::size_t> order(m);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return scores.c[a] < scores.c[b]; });
    order.resize(budget);
    return FeatureMask::from_indices(m, order);
}

}  // namespace osklad
