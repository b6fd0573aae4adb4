#include <algorithm>
#include <random>

#include "osklad/detector.hpp"
#include "osklad/error.hpp"

namespace osklad {

namespace {

bool all_rows_identical(const DataMatrix& X) {
    for (Eigen::Index i = 1; i < X.rows(); ++i)
        if (X.values().row(i) != X.values().row(0))
            return false;
    return true;
}

}  // namespace

std::vector<double> default_sigma_grid(const DataMatrix& X) {
    std::vector<double> d;
    d.reserve(static_cast<std::size_t>(X.rows() * (X.rows() - 1) / 2));
    for (Eigen::Index i = 0; i < X.rows(); ++i)
        for (Eigen::Index j = i + 1; j < X.rows(); ++j)
            d.push_back((X.row(i) - X.row(j)).norm());
    if (d.empty())
        throw DataError("need at least two pixels to derive a bandwidth grid");
    auto mid = d.begin() + static_cast<std::ptrdiff_t>(d.size() / 2);
    std::nth_element(d.begin(), mid, d.end());
    const double median = *mid;
    if (!(median > 0.0))
        throw DataError("degenerate patch: median pairwise distance is zero");
    return {median / 4, median / 2, median, 2 * median, 4 * median, 8 * median};
}

BandwidthResult select_bandwidth(const ImageCube& cube, const BandwidthConfig& config) {
    const DataMatrix patch = patch_pixels(cube, config.patch);
    if (all_rows_identical(patch))
        throw DataError("degenerate patch: all pixels are identical");
    if (config.n_regions < 1 || config.region_w < 1 || config.region_h < 1 ||
        config.region_w > cube.width || config.region_h > cube.height)
        throw InvalidArgument("background regions must be non-empty and fit inside the image");

    std::vector<double> grid = config.sigma_grid.empty() ? default_sigma_grid(patch)
                                                         : config.sigma_grid;
    for (double s : grid)
        if (!(s > 0.0))
            throw InvalidArgument("bandwidth candidates must be positive");
    std::sort(grid.begin(), grid.end());

    std::mt19937_64 rng(config.seed);
    std::uniform_int_distribution<int> px(0, cube.width - config.region_w);
    std::uniform_int_distribution<int> py(0, cube.height - config.region_h);
    std::vector<Eigen::Index> idx;
    for (int k = 0; k < config.n_regions; ++k) {
        const int x0 = px(rng), y0 = py(rng);
        for (int y = y0; y < y0 + config.region_h; ++y)
            for (int x = x0; x < x0 + config.region_w; ++x)
                idx.push_back(cube.index(x, y));
    }
    const DataMatrix regions = cube.pixels.select_rows(idx);

    SolverConfig solver;
    solver.C = config.C;
    BandwidthResult result;
    double best = 0.0;
    for (double sigma : grid) {
        const SvddModel m = fit_svdd(patch, KernelSpec::rbf(sigma), solver);
        const double worst = score_svdd(m, regions).maxCoeff();
        result.sigmas.push_back(sigma);
        result.max_scores.push_back(worst);
        if (result.sigmas.size() == 1 || worst < best - 1e-4) {
            best = worst;
            result.sigma = sigma;
        }
    }
    return result;
}

}  // namespace osklad
