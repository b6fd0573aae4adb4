#pragma once

#include "osklad/kernelspace.hpp"

namespace osklad {

/// Per-feature contributions to the linear-kernel SVDD objective:
/// c_j = sum_i alpha_i x_ij^2 - (sum_i alpha_i x_ij)^2, the alpha-weighted variance of
/// column j. For any mask d, S(alpha, d) = sum_j d_j c_j.
struct FeatureScores {
    Vector c;
    Vector alpha_used;
};

FeatureScores feature_scores(VectorView alpha, const DataMatrix& X);

/// The B features with the smallest c_j (ties to the lower index). For the linear kernel
/// this is a global minimizer of S(alpha, d) over all masks with budget B.
FeatureMask most_violated_mask(const FeatureScores& scores, std::size_t budget);

}  // namespace osklad
