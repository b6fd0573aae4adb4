#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "osklad/osklad.hpp"
#include "osklad/svdd.hpp"

namespace osklad {

/// height x width pixels with `bands` values each; pixel (x, y) is row y * width + x.
struct ImageCube {
    int width = 0;
    int height = 0;
    DataMatrix pixels;

    Eigen::Index bands() const { return pixels.cols(); }
    Eigen::Index index(int x, int y) const { return static_cast<Eigen::Index>(y) * width + x; }
};

struct Rect {
    int x = 0;
    int y = 0;
    int w = 0;
    int h = 0;

    bool contains(int px, int py) const { return px >= x && px < x + w && py >= y && py < y + h; }
};

/// Parses "x,y,w,h". Throws InvalidArgument on malformed input.
Rect parse_rect(const std::string& text);

/// Cube data is CSV, one pixel per line with bands as columns. The side header holds
/// whitespace-separated `width=W height=H bands=M` and optionally `format=csv`.
ImageCube read_cube(std::istream& csv, std::istream& header);
ImageCube load_cube(const std::string& csv_path, const std::string& header_path);
void write_cube(const ImageCube& cube, std::ostream& csv, std::ostream& header);
void save_cube(const ImageCube& cube, const std::string& csv_path, const std::string& header_path);

/// Pixels of `r` in row-major order. Throws InvalidArgument when r leaves the image.
DataMatrix patch_pixels(const ImageCube& cube, const Rect& r);

struct ScoreMap {
    int width = 0;
    int height = 0;
    Vector raw;         ///< distance-to-center over radius, per pixel
    Vector normalized;  ///< (raw - min) / (max - min); all zeros for a constant map
};

/// Global min-max normalization into [0, 1].
Vector normalize_scores(const Vector& raw);

ScoreMap make_scoremap(int width, int height, Vector raw);
ScoreMap build_scoremap(const OskladModel& model, const ImageCube& cube);

/// 16-bit binary PGM (P5, maxval 65535, big-endian), value round(normalized * 65535),
/// rows from the top-left pixel.
std::string encode_pgm(const ScoreMap& map);
void write_pgm(const ScoreMap& map, const std::string& path);

/// CSV with header `x,y,raw,normalized`, one line per pixel, 17 significant digits.
void write_scores_csv(const ScoreMap& map, const std::string& path);

struct BandwidthConfig {
    Rect patch;
    int n_regions = 10;
    int region_w = 5;
    int region_h = 5;
    std::vector<double> sigma_grid;  ///< empty: default_sigma_grid(patch pixels)
    std::uint64_t seed = 0;
    double C = 1.0;
};

struct BandwidthResult {
    double sigma = 0.0;
    std::vector<double> sigmas;
    std::vector<double> max_scores;  ///< per candidate, the largest score inside the regions
};

/// Minimax bandwidth: for each candidate sigma train a plain RBF SVDD on the patch, take
/// the largest score over n_regions random background windows, and keep the sigma whose
/// largest score is smallest. Scores within 1e-4 count as tied; ties go to the smaller sigma.
BandwidthResult select_bandwidth(const ImageCube& cube, const BandwidthConfig& config);

/// Median pairwise distance of the rows times {1/4, 1/2, 1, 2, 4, 8}.
std::vector<double> default_sigma_grid(const DataMatrix& X);

struct SyntheticConfig {
    std::uint64_t seed = 42;
    int width = 32;
    int height = 32;
    int bands = 20;
    std::vector<std::size_t> informative{0, 1, 2, 3, 4};
    double informative_variance = 10.0;  ///< non-informative bands have variance 1
    int anomaly_count = 30;
    double offset_scale = 10.0;
    std::optional<Rect> keep_clear;      ///< no anomalies are placed here
};

struct SyntheticScene {
    ImageCube cube;
    std::vector<std::uint8_t> truth;  ///< 1 for anomalous pixels, row-major
};

/// Zero-mean Gaussian background; anomalies are background pixels shifted by
/// offset_scale along every informative band. Fully determined by the seed.
SyntheticScene gen_synthetic(const SyntheticConfig& config);

void save_truth(const std::vector<std::uint8_t>& truth, const std::string& path);
std::vector<std::uint8_t> load_truth(const std::string& path);

/// Area under the ROC curve of `scores` against binary labels, ties counted half.
double roc_auc(const Vector& scores, const std::vector<std::uint8_t>& labels);

}  // namespace osklad
