#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>

#include "osklad/detector.hpp"
#include "osklad/error.hpp"

namespace osklad {

Vector normalize_scores(const Vector& raw) {
    if (raw.size() == 0)
        return raw;
    if (!raw.allFinite())
        throw NumericalError("score map contains non-finite scores");
    const double lo = raw.minCoeff(), hi = raw.maxCoeff();
    if (!(hi > lo))
        return Vector::Zero(raw.size());
    return ((raw.array() - lo) / (hi - lo)).cwiseMin(1.0).cwiseMax(0.0).matrix();
}

ScoreMap make_scoremap(int width, int height, Vector raw) {
    if (width < 1 || height < 1 || raw.size() != static_cast<Eigen::Index>(width) * height)
        throw DataError("score map size does not match its geometry");
    ScoreMap map{width, height, std::move(raw), {}};
    map.normalized = normalize_scores(map.raw);
    return map;
}

ScoreMap build_scoremap(const OskladModel& model, const ImageCube& cube) {
    if (cube.bands() != model.input_dim())
        throw DataError("cube has " + std::to_string(cube.bands()) + " bands, model expects " +
                        std::to_string(model.input_dim()));
    return make_scoremap(cube.width, cube.height, predict(model, cube.pixels));
}

std::string encode_pgm(const ScoreMap& map) {
    std::string out = "P5\n" + std::to_string(map.width) + " " + std::to_string(map.height) +
                      "\n65535\n";
    out.reserve(out.size() + 2 * static_cast<std::size_t>(map.normalized.size()));
    for (Eigen::Index i = 0; i < map.normalized.size(); ++i) {
        const auto v = static_cast<unsigned>(std::lround(map.normalized[i] * 65535.0));
        out.push_back(static_cast<char>((v >> 8) & 0xFF));
        out.push_back(static_cast<char>(v & 0xFF));
    }
    return out;
}

void write_pgm(const ScoreMap& map, const std::string& path) {
    const std::string bytes = encode_pgm(map);
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw DataError("cannot open '" + path + "' for writing");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out)
        throw DataError("failed writing '" + path + "'");
}

void write_scores_csv(const ScoreMap& map, const std::string& path) {
    std::ofstream out(path);
    if (!out)
        throw DataError("cannot open '" + path + "' for writing");
    out << "x,y,raw,normalized\n";
    char buf[96];
    for (int y = 0; y < map.height; ++y) {
        for (int x = 0; x < map.width; ++x) {
            const Eigen::Index i = static_cast<Eigen::Index>(y) * map.width + x;
            std::snprintf(buf, sizeof buf, "%d,%d,%.17g,%.17g\n", x, y, map.raw[i],
                          map.normalized[i]);
            out << buf;
        }
    }
    if (!out)
        throw DataError("failed writing '" + path + "'");
}

double roc_auc(const Vector& scores, const std::vector<std::uint8_t>& labels) {
    const auto n = static_cast<std::size_t>(scores.size());
    if (labels.size() != n)
        throw DataError("label count does not match score count");
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
    double pos_rank_sum = 0.0;
    std::size_t pos = 0;
    for (std::size_t i = 0; i < n;) {
        std::size_t j = i;
        while (j < n && scores[order[j]] == scores[order[i]])
            ++j;
        const double rank = 0.5 * static_cast<double>(i + j + 1);  // mean of ranks i+1..j
        for (std::size_t k = i; k < j; ++k)
            if (labels[order[k]]) {
                pos_rank_sum += rank;
                ++pos;
            }
        i = j;
    }
    const std::size_t neg = n - pos;
    if (pos == 0 || neg == 0)
        throw DataError("ROC AUC needs both positive and negative labels");
    const double p = static_cast<double>(pos);
    return (pos_rank_sum - p * (p + 1.0) / 2.0) / (p * static_cast<double>(neg));
}

}  // namespace osklad
