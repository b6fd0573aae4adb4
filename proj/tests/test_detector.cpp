#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

#include "osklad/detector.hpp"
#include "osklad/error.hpp"
#include "osklad/osklad.hpp"
#include "support.hpp"

using namespace osklad;

namespace {

ImageCube parse(const std::string& csv, const std::string& header) {
    std::istringstream c(csv), h(header);
    return read_cube(c, h);
}

// Independent P5 reader: header tokens, then big-endian 16-bit samples.
std::vector<unsigned> read_pgm(const std::string& bytes, int& w, int& h) {
    std::istringstream in(bytes);
    std::string magic;
    int maxval = 0;
    in >> magic >> w >> h >> maxval;
    REQUIRE(magic == "P5");
    REQUIRE(maxval == 65535);
    in.get();
    std::vector<unsigned> px;
    for (int i = 0; i < w * h; ++i) {
        const int hi = in.get(), lo = in.get();
        REQUIRE(lo != EOF);
        px.push_back(static_cast<unsigned>(hi) << 8 | static_cast<unsigned>(lo));
    }
    CHECK(in.get() == EOF);
    return px;
}

ImageCube cube_from(int w, int h, const DataMatrix& X) { return ImageCube{w, h, X}; }

}  // namespace

TEST_CASE("cube parsing") {
    const ImageCube c = parse("1,2,3\n4,5,6\n7,8,9\n10,11,12\n", "width=2 height=2 bands=3\n");
    CHECK(c.width == 2);
    CHECK(c.height == 2);
    CHECK(c.bands() == 3);
    CHECK(c.pixels(c.index(1, 1), 2) == 12.0);
    CHECK(c.pixels(c.index(0, 1), 0) == 7.0);

    CHECK_NOTHROW(parse("1\n2\n", "width=1 height=2 bands=1 format=csv"));
    CHECK_THROWS_AS(parse("1\n2\n3\n4\n5\n", "width=3 height=2 bands=1"), DataError);
    CHECK_THROWS_AS(parse("1\n2\n3\n4\n5\n6\n7\n", "width=3 height=2 bands=1"), DataError);
    CHECK_THROWS_AS(parse("1,2\n3\n", "width=1 height=2 bands=2"), DataError);
    CHECK_THROWS_AS(parse("1,x\n3,4\n", "width=1 height=2 bands=2"), DataError);
    CHECK_THROWS_AS(parse("1\n2\n", "width=1 height=2"), DataError);
    CHECK_THROWS_AS(parse("1\n2\n", "width=1 height=2 bands=1 format=envi"), DataError);
    CHECK_THROWS_AS(parse("1\n2\n", "width=0 height=2 bands=1"), DataError);
    CHECK_THROWS_AS(parse("1\n2\n", "width=1 height=2 bands=1 depth=4"), DataError);
}

TEST_CASE("cube write/load round trip") {
    std::mt19937_64 rng(131);
    const ImageCube c = cube_from(4, 3, testing::random_data(rng, 12, 5, 1e3));
    std::ostringstream csv, header;
    write_cube(c, csv, header);
    const ImageCube back = parse(csv.str(), header.str());
    CHECK(back.width == 4);
    CHECK(back.height == 3);
    CHECK(back.pixels.values() == c.pixels.values());

    save_cube(c, "test_cube_tmp.csv", "test_cube_tmp.hdr");
    CHECK(load_cube("test_cube_tmp.csv", "test_cube_tmp.hdr").pixels.values() == c.pixels.values());
    std::remove("test_cube_tmp.csv");
    std::remove("test_cube_tmp.hdr");
    CHECK_THROWS_AS(load_cube("missing.csv", "missing.hdr"), DataError);
}

TEST_CASE("rectangles and patches") {
    const Rect r = parse_rect("1,2,3,4");
    CHECK((r.x == 1 && r.y == 2 && r.w == 3 && r.h == 4));
    CHECK_THROWS_AS(parse_rect("1,2,3"), InvalidArgument);
    CHECK_THROWS_AS(parse_rect("1,2,0,4"), InvalidArgument);
    CHECK_THROWS_AS(parse_rect("a,2,3,4"), InvalidArgument);

    RowMatrix v(6, 1);
    v << 0, 1, 2, 3, 4, 5;  // 3 x 2 image, value = index
    const ImageCube c = cube_from(3, 2, DataMatrix(v));
    const DataMatrix p = patch_pixels(c, {1, 0, 2, 2});
    REQUIRE(p.rows() == 4);
    CHECK(p(0, 0) == 1);
    CHECK(p(1, 0) == 2);
    CHECK(p(2, 0) == 4);
    CHECK(p(3, 0) == 5);
    CHECK_THROWS_AS(patch_pixels(c, {2, 0, 2, 1}), InvalidArgument);
}

TEST_CASE("PGM examples") {
    int w = 0, h = 0;
    CHECK(read_pgm(encode_pgm(make_scoremap(1, 1, Vector::Constant(1, 3.0))), w, h) ==
          std::vector<unsigned>{0});
    CHECK((w == 1 && h == 1));
    CHECK(read_pgm(encode_pgm(make_scoremap(2, 1, Vector{{0.2, 0.7}})), w, h) ==
          std::vector<unsigned>{0, 65535});
    CHECK((w == 2 && h == 1));
}

TEST_CASE("PGM samples equal the quantized normalized scores") {
    std::mt19937_64 rng(137);
    std::uniform_real_distribution<double> u(-5.0, 5.0);
    Vector raw(35);
    for (Eigen::Index i = 0; i < raw.size(); ++i)
        raw[i] = u(rng);
    const ScoreMap map = make_scoremap(7, 5, raw);
    int w = 0, h = 0;
    const auto px = read_pgm(encode_pgm(map), w, h);
    CHECK((w == 7 && h == 5));
    for (Eigen::Index i = 0; i < raw.size(); ++i)
        CHECK(px[static_cast<std::size_t>(i)] ==
              static_cast<unsigned>(std::lround(map.normalized[i] * 65535.0)));

    write_pgm(map, "test_map_tmp.pgm");
    std::ifstream in("test_map_tmp.pgm", std::ios::binary);
    const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    CHECK(bytes == encode_pgm(map));
    std::remove("test_map_tmp.pgm");
}

TEST_CASE("normalization") {
    CHECK(normalize_scores(Vector::Constant(4, 2.5)) == Vector::Zero(4));
    CHECK(normalize_scores(Vector{{1.0, 3.0, 2.0}}) == Vector{{0.0, 1.0, 0.5}});

    std::mt19937_64 rng(139);
    std::normal_distribution<double> g(0.0, 1e3);
    for (int rep = 0; rep < 50; ++rep) {
        Vector raw(20);
        for (Eigen::Index i = 0; i < raw.size(); ++i)
            raw[i] = g(rng);
        const Vector n = normalize_scores(raw);
        CHECK(n.minCoeff() == 0.0);
        CHECK(n.maxCoeff() == 1.0);
        for (Eigen::Index a = 0; a < raw.size(); ++a)
            for (Eigen::Index b = 0; b < raw.size(); ++b)
                if (raw[a] < raw[b])
                    CHECK(n[a] <= n[b]);
    }
    CHECK_THROWS_AS(make_scoremap(2, 2, Vector::Zero(3)), DataError);
}

TEST_CASE("score maps") {
    std::mt19937_64 rng(149);
    const DataMatrix X = testing::random_data(rng, 16, 4);
    const auto [m, r] = fit_linear(X, {.budget = 2});

    // training pixels stay inside the sphere
    const ScoreMap own = build_scoremap(m, cube_from(4, 4, X));
    CHECK(own.raw.maxCoeff() <= 1.0 + 1e-6);

    RowMatrix v = X.values();
    v.row(5) *= 100.0;
    v.row(5).array() += 100.0;
    const ScoreMap map = build_scoremap(m, cube_from(4, 4, DataMatrix(v)));
    Eigen::Index top = 0;
    map.raw.maxCoeff(&top);
    CHECK(top == 5);
    CHECK(map.normalized[5] == 1.0);

    const ScoreMap flat = build_scoremap(m, cube_from(2, 2, DataMatrix(RowMatrix::Ones(4, 4))));
    CHECK(flat.normalized == Vector::Zero(4));
    CHECK_THROWS_AS(build_scoremap(m, cube_from(2, 2, DataMatrix(RowMatrix::Ones(4, 3)))),
                    DataError);
}

TEST_CASE("bandwidth selection") {
    std::mt19937_64 rng(151);
    const ImageCube c = cube_from(8, 8, testing::random_data(rng, 64, 3));
    BandwidthConfig bc;
    bc.patch = {0, 0, 4, 4};
    bc.n_regions = 3;
    bc.region_w = 2;
    bc.region_h = 2;
    bc.sigma_grid = {0.7};
    CHECK(select_bandwidth(c, bc).sigma == 0.7);

    bc.sigma_grid = {4.0, 0.5, 1.0, 2.0};
    const BandwidthResult r1 = select_bandwidth(c, bc);
    const BandwidthResult r2 = select_bandwidth(c, bc);
    CHECK(r1.sigma == r2.sigma);
    CHECK(r1.max_scores == r2.max_scores);
    CHECK(r1.sigmas == std::vector<double>{0.5, 1.0, 2.0, 4.0});
    // the selected candidate is within the tie band of the minimum and no smaller
    // candidate beats it by more than the band
    const double best = *std::min_element(r1.max_scores.begin(), r1.max_scores.end());
    std::size_t k = 0;
    while (r1.sigmas[k] != r1.sigma)
        ++k;
    CHECK(r1.max_scores[k] <= best + 1e-4);

    bc.sigma_grid = {1.0, -1.0};
    CHECK_THROWS_AS(select_bandwidth(c, bc), InvalidArgument);
    bc.sigma_grid = {1.0};
    bc.region_w = 9;
    CHECK_THROWS_AS(select_bandwidth(c, bc), InvalidArgument);

    const ImageCube flat = cube_from(4, 4, DataMatrix(RowMatrix::Ones(16, 2)));
    bc.region_w = 2;
    CHECK_THROWS_AS(select_bandwidth(flat, bc), DataError);
}

TEST_CASE("bandwidth tie on a homogeneous background goes to the smallest sigma") {
    // Background regions drawn from the training patch itself: two identical pixel values
    // up to tiny noise, every candidate encloses them at score about 1.
    std::mt19937_64 rng(157);
    std::normal_distribution<double> g(0.0, 1e-9);
    RowMatrix v(16, 2);
    for (Eigen::Index i = 0; i < 16; ++i) {
        v(i, 0) = (i % 2) + g(rng);
        v(i, 1) = g(rng);
    }
    const ImageCube c = cube_from(4, 4, DataMatrix(v));
    BandwidthConfig bc;
    bc.patch = {0, 0, 4, 4};
    bc.n_regions = 4;
    bc.region_w = 2;
    bc.region_h = 2;
    bc.sigma_grid = {8.0, 2.0, 1.0, 4.0};
    const BandwidthResult r = select_bandwidth(c, bc);
    for (double s : r.max_scores)
        CHECK(s == doctest::Approx(r.max_scores[0]).epsilon(1e-5));
    CHECK(r.sigma == 1.0);
}

TEST_CASE("default bandwidth grid") {
    const DataMatrix X = DataMatrix::from_rows({{0, 0}, {3, 4}, {6, 8}});  // distances 5, 5, 10
    CHECK(default_sigma_grid(X) == std::vector<double>{1.25, 2.5, 5, 10, 20, 40});
    CHECK_THROWS_AS(default_sigma_grid(DataMatrix::from_rows({{1, 1}})), DataError);
}

TEST_CASE("synthetic generator") {
    SyntheticConfig sc;
    sc.width = 12;
    sc.height = 10;
    sc.bands = 6;
    sc.informative = {1, 4};
    sc.anomaly_count = 7;
    sc.keep_clear = Rect{0, 0, 5, 5};
    const SyntheticScene a = gen_synthetic(sc), b = gen_synthetic(sc);
    CHECK(a.cube.pixels.values() == b.cube.pixels.values());
    CHECK(a.truth == b.truth);
    CHECK(std::count(a.truth.begin(), a.truth.end(), 1) == 7);
    for (int y = 0; y < 5; ++y)
        for (int x = 0; x < 5; ++x)
            CHECK(a.truth[static_cast<std::size_t>(a.cube.index(x, y))] == 0);

    sc.seed = 43;
    CHECK(gen_synthetic(sc).cube.pixels.values() != a.cube.pixels.values());

    // anomalies differ from the unshifted draw only on informative bands
    sc.seed = 42;
    SyntheticConfig clean = sc;
    clean.anomaly_count = 0;
    const SyntheticScene c = gen_synthetic(clean);
    CHECK(std::count(c.truth.begin(), c.truth.end(), 1) == 0);
    const RowMatrix diff = a.cube.pixels.values() - c.cube.pixels.values();
    for (Eigen::Index p = 0; p < diff.rows(); ++p)
        for (Eigen::Index j = 0; j < diff.cols(); ++j) {
            const bool shifted = a.truth[static_cast<std::size_t>(p)] && (j == 1 || j == 4);
            CHECK(diff(p, j) == doctest::Approx(shifted ? 10.0 : 0.0));
        }

    sc.informative = {6};
    CHECK_THROWS_AS(gen_synthetic(sc), InvalidArgument);
    sc.informative = {0};
    sc.anomaly_count = 200;
    CHECK_THROWS_AS(gen_synthetic(sc), InvalidArgument);
}

TEST_CASE("offset anomalies score above the background under plain SVDD") {
    SyntheticConfig sc;
    sc.width = 20;
    sc.height = 20;
    sc.anomaly_count = 20;
    sc.keep_clear = Rect{0, 0, 10, 10};
    const SyntheticScene s = gen_synthetic(sc);
    const DataMatrix patch = patch_pixels(s.cube, {0, 0, 10, 10});
    const double sigma = default_sigma_grid(patch)[3];
    const SvddModel m = fit_svdd(patch, KernelSpec::rbf(sigma), {});
    const Vector scores = score_svdd(m, s.cube.pixels);
    double anom = 0.0, bg = 0.0;
    for (std::size_t i = 0; i < s.truth.size(); ++i)
        (s.truth[i] ? anom : bg) += scores[static_cast<Eigen::Index>(i)];
    anom /= 20.0;
    bg /= static_cast<double>(s.truth.size() - 20);
    CHECK(anom > bg);
    CHECK(roc_auc(scores, s.truth) > 0.5);
}

TEST_CASE("ROC AUC") {
    using L = std::vector<std::uint8_t>;
    CHECK(roc_auc(Vector{{0.1, 0.2, 0.9, 0.8}}, L{0, 0, 1, 1}) == 1.0);
    CHECK(roc_auc(Vector{{0.9, 0.8, 0.1, 0.2}}, L{0, 0, 1, 1}) == 0.0);
    CHECK(roc_auc(Vector{{0.5, 0.5}}, L{0, 1}) == 0.5);
    CHECK(roc_auc(Vector{{0.1, 0.4, 0.35, 0.8}}, L{0, 0, 1, 1}) == 0.75);

    // brute force pair count
    std::mt19937_64 rng(163);
    std::uniform_int_distribution<int> coarse(0, 5);
    for (int rep = 0; rep < 30; ++rep) {
        Vector s(25);
        L lab(25);
        for (int i = 0; i < 25; ++i) {
            s[i] = coarse(rng);
            lab[static_cast<std::size_t>(i)] = i % 3 == 0;
        }
        double wins = 0.0, pairs = 0.0;
        for (int i = 0; i < 25; ++i)
            for (int j = 0; j < 25; ++j)
                if (lab[static_cast<std::size_t>(i)] && !lab[static_cast<std::size_t>(j)]) {
                    pairs += 1.0;
                    wins += s[i] > s[j] ? 1.0 : s[i] == s[j] ? 0.5 : 0.0;
                }
        CHECK(roc_auc(s, lab) == doctest::Approx(wins / pairs).epsilon(1e-14));
    }
    CHECK_THROWS_AS(roc_auc(Vector::Zero(3), L{0, 0, 0}), DataError);
    CHECK_THROWS_AS(roc_auc(Vector::Zero(3), L{0, 1}), DataError);
}

TEST_CASE("truth files") {
    const std::vector<std::uint8_t> t{0, 1, 1, 0, 0};
    save_truth(t, "test_truth_tmp.txt");
    CHECK(load_truth("test_truth_tmp.txt") == t);
    std::remove("test_truth_tmp.txt");
    CHECK_THROWS_AS(load_truth("no_such_truth.txt"), DataError);
}
