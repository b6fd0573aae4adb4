#include <cmath>
#include <fstream>
#include <random>
#include <string>

#include "osklad/detector.hpp"
#include "osklad/error.hpp"

namespace osklad {

SyntheticScene gen_synthetic(const SyntheticConfig& config) {
    if (config.width < 1 || config.height < 1 || config.bands < 1)
        throw InvalidArgument("synthetic cube needs positive width, height and bands");
    for (std::size_t j : config.informative)
        if (j >= static_cast<std::size_t>(config.bands))
            throw InvalidArgument("informative band " + std::to_string(j) + " out of range");
    if (!(config.informative_variance > 0.0))
        throw InvalidArgument("informative variance must be positive");
    if (config.anomaly_count < 0)
        throw InvalidArgument("anomaly count must be nonnegative");

    const Eigen::Index pixels = static_cast<Eigen::Index>(config.width) * config.height;
    Vector sd = Vector::Ones(config.bands);
    for (std::size_t j : config.informative)
        sd[static_cast<Eigen::Index>(j)] = std::sqrt(config.informative_variance);

    std::mt19937_64 rng(config.seed);
    std::normal_distribution<double> noise(0.0, 1.0);
    RowMatrix values(pixels, config.bands);
    for (Eigen::Index i = 0; i < pixels; ++i)
        for (Eigen::Index j = 0; j < config.bands; ++j)
            values(i, j) = sd[j] * noise(rng);

    std::vector<Eigen::Index> candidates;
    for (int y = 0; y < config.height; ++y)
        for (int x = 0; x < config.width; ++x)
            if (!config.keep_clear || !config.keep_clear->contains(x, y))
                candidates.push_back(static_cast<Eigen::Index>(y) * config.width + x);
    if (static_cast<std::size_t>(config.anomaly_count) > candidates.size())
        throw InvalidArgument("more anomalies requested than free pixels");

    std::vector<std::uint8_t> truth(static_cast<std::size_t>(pixels), 0);
    for (int k = 0; k < config.anomaly_count; ++k) {
        std::uniform_int_distribution<std::size_t> pick(static_cast<std::size_t>(k),
                                                        candidates.size() - 1);
        std::swap(candidates[static_cast<std::size_t>(k)], candidates[pick(rng)]);
        const Eigen::Index p = candidates[static_cast<std::size_t>(k)];
        truth[static_cast<std::size_t>(p)] = 1;
        for (std::size_t j : config.informative)
            values(p, static_cast<Eigen::Index>(j)) += config.offset_scale;
    }
    return {ImageCube{config.width, config.height, DataMatrix(std::move(values))}, std::move(truth)};
}

void save_truth(const std::vector<std::uint8_t>& truth, const std::string& path) {
    std::ofstream out(path);
    if (!out)
        throw DataError("cannot open '" + path + "' for writing");
    for (std::uint8_t t : truth)
        out << (t ? '1' : '0') << '\n';
    if (!out)
        throw DataError("failed writing '" + path + "'");
}

std::vector<std::uint8_t> load_truth(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw DataError("cannot open truth file '" + path + "'");
    std::vector<std::uint8_t> truth;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line == "\r")
            continue;
        if (line[0] != '0' && line[0] != '1')
            throw DataError("truth file: expected 0 or 1, got '" + line + "'");
        truth.push_back(line[0] == '1' ? 1 : 0);
    }
    return truth;
}

}  // namespace osklad
