// osklad: train, score, generate and tune sparse-kernel SVDD anomaly detectors.
//
// Exit codes: 0 success, 1 usage error, 2 data error, 3 numerical failure.

#include <cstdio>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "osklad/detector.hpp"
#include "osklad/error.hpp"
#include "osklad/model_io.hpp"
#include "osklad/osklad.hpp"

namespace {

using namespace osklad;

std::vector<double> parse_list(const std::string& text) {
    std::vector<double> out;
    std::istringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t used = 0;
            out.push_back(std::stod(item, &used));
            if (used != item.size())
                throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw InvalidArgument("bad number '" + item + "' in list '" + text + "'");
        }
    }
    if (out.empty())
        throw InvalidArgument("empty list");
    return out;
}

std::pair<int, int> parse_size(const std::string& text) {
    const auto v = parse_list(text);
    if (v.size() != 2 || v[0] < 1 || v[1] < 1)
        throw InvalidArgument("size must be w,h with positive entries, got '" + text + "'");
    return {static_cast<int>(v[0]), static_cast<int>(v[1])};
}

struct TrainArgs {
    std::string data, header, patch, kernel = "rbf", model_out;
    std::string sigma_grid, region_size = "5,5";
    double sigma = 0.0;
    bool sigma_auto = false;
    std::size_t budget = 0;
    double C = 1.0;
    double eigen_floor = 1e-10;
    std::uint64_t seed = 0;
    int regions = 10;
    double outer_tol = 1e-5;
    int max_outer = 50;
};

struct ScoreArgs {
    std::string model, data, header, out_pgm, out_csv, truth;
};

struct GenArgs {
    SyntheticConfig cfg;
    std::string informative = "0,1,2,3,4", keep_clear, out_data, out_header, out_truth;
};

struct BandwidthArgs {
    std::string data, header, patch, sigma_grid, region_size = "5,5";
    int regions = 10;
    std::uint64_t seed = 0;
    double C = 1.0;
};

Rect patch_or_full(const std::string& text, const ImageCube& cube) {
    return text.empty() ? Rect{0, 0, cube.width, cube.height} : parse_rect(text);
}

BandwidthResult run_bandwidth(const ImageCube& cube, const Rect& patch, int regions,
                              const std::string& region_size, const std::string& grid,
                              std::uint64_t seed, double C) {
    BandwidthConfig bc;
    bc.patch = patch;
    bc.n_regions = regions;
    std::tie(bc.region_w, bc.region_h) = parse_size(region_size);
    if (!grid.empty())
        bc.sigma_grid = parse_list(grid);
    bc.seed = seed;
    bc.C = C;
    return select_bandwidth(cube, bc);
}

int cmd_train(const TrainArgs& a) {
    const ImageCube cube = load_cube(a.data, a.header);
    const Rect patch = patch_or_full(a.patch, cube);
    const DataMatrix X = patch_pixels(cube, patch);

    FitConfig cfg;
    cfg.solver.C = a.C;
    cfg.eigen_floor = a.eigen_floor;
    cfg.outer_tol = a.outer_tol;
    cfg.max_outer = a.max_outer;

    std::pair<OskladModel, FitReport> fit = [&]() {
        if (a.kernel == "linear") {
            cfg.budget = a.budget ? a.budget : std::max<std::size_t>(1, X.cols() / 2);
            return fit_linear(X, cfg);
        }
        double sigma = a.sigma;
        if (a.sigma_auto) {
            sigma = run_bandwidth(cube, patch, a.regions, a.region_size, a.sigma_grid, a.seed, a.C)
                        .sigma;
            std::cerr << "selected sigma " << sigma << '\n';
        }
        const KernelSpec spec = KernelSpec::rbf(sigma);
        if (a.budget) {
            cfg.budget = a.budget;
        } else {
            const Whitener w = build_whitener(X, spec, cfg.eigen_floor);
            cfg.budget = std::max<Eigen::Index>(1, w.retained_rank() / 2);
        }
        return fit_ekfs(X, spec, cfg);
    }();

    const auto& [model, report] = fit;
    save_model(model, a.model_out);
    std::cerr << "iterations " << report.iterations << ", stop " << to_string(report.stop_reason)
              << ", masks " << model.constraints.size() << ", budget " << cfg.budget
              << ", t " << report.t_trace.back() << ", radius^2 " << model.radius_sq << '\n';
    return 0;
}

int cmd_score(const ScoreArgs& a) {
    const OskladModel model = load_model(a.model);
    const ImageCube cube = load_cube(a.data, a.header);
    const ScoreMap map = build_scoremap(model, cube);
    if (!a.out_pgm.empty())
        write_pgm(map, a.out_pgm);
    if (!a.out_csv.empty())
        write_scores_csv(map, a.out_csv);
    long flagged = 0;
    for (Eigen::Index i = 0; i < map.raw.size(); ++i)
        flagged += map.raw[i] > 1.0;
    std::cout << "pixels " << map.raw.size() << ", above radius " << flagged << '\n';
    if (!a.truth.empty()) {
        const auto truth = load_truth(a.truth);
        std::printf("auc %.6f\n", roc_auc(map.raw, truth));
    }
    return 0;
}

int cmd_gen(GenArgs a) {
    a.cfg.informative.clear();
    if (!a.informative.empty())
        for (double v : parse_list(a.informative)) {
            if (v < 0)
                throw InvalidArgument("informative band indices must be nonnegative");
            a.cfg.informative.push_back(static_cast<std::size_t>(v));
        }
    if (!a.keep_clear.empty())
        a.cfg.keep_clear = parse_rect(a.keep_clear);
    const SyntheticScene scene = gen_synthetic(a.cfg);
    save_cube(scene.cube, a.out_data, a.out_header);
    if (!a.out_truth.empty())
        save_truth(scene.truth, a.out_truth);
    return 0;
}

int cmd_bandwidth(const BandwidthArgs& a) {
    const ImageCube cube = load_cube(a.data, a.header);
    const BandwidthResult r = run_bandwidth(cube, patch_or_full(a.patch, cube), a.regions,
                                            a.region_size, a.sigma_grid, a.seed, a.C);
    for (std::size_t i = 0; i < r.sigmas.size(); ++i)
        std::printf("sigma %.17g max_score %.17g\n", r.sigmas[i], r.max_scores[i]);
    std::printf("selected %.17g\n", r.sigma);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Sparse-kernel SVDD anomaly detection with optimal feature-subset selection"};
    app.require_subcommand(1);

    TrainArgs ta;
    auto* train = app.add_subcommand("train", "fit a detector on a background patch");
    train->add_option("--data", ta.data, "cube CSV")->required();
    train->add_option("--header", ta.header, "cube header")->required();
    train->add_option("--patch", ta.patch, "background patch x,y,w,h (default: whole image)");
    train->add_option("--kernel", ta.kernel, "linear or rbf")
        ->check(CLI::IsMember({"linear", "rbf"}))
        ->capture_default_str();
    auto* sigma_opt = train->add_option("--sigma", ta.sigma, "RBF bandwidth");
    auto* auto_opt = train->add_flag("--sigma-auto", ta.sigma_auto, "minimax bandwidth selection");
    sigma_opt->excludes(auto_opt);
    train->add_option("--budget", ta.budget, "features per mask (default: half)");
    train->add_option("--C", ta.C, "SVDD box bound")->capture_default_str();
    train->add_option("--eigen-floor", ta.eigen_floor, "relative EKFS eigenvalue floor")
        ->capture_default_str();
    train->add_option("--seed", ta.seed, "seed for --sigma-auto regions")->capture_default_str();
    train->add_option("--regions", ta.regions, "background regions for --sigma-auto")
        ->capture_default_str();
    train->add_option("--region-size", ta.region_size, "region size w,h")->capture_default_str();
    train->add_option("--sigma-grid", ta.sigma_grid, "candidate bandwidths a,b,c");
    train->add_option("--outer-tol", ta.outer_tol, "relative objective stall")->capture_default_str();
    train->add_option("--max-outer", ta.max_outer, "cutting-plane iterations")->capture_default_str();
    train->add_option("--model-out", ta.model_out, "model file to write")->required();

    ScoreArgs sa;
    auto* score = app.add_subcommand("score", "score every pixel of a cube");
    score->add_option("--model", sa.model)->required();
    score->add_option("--data", sa.data)->required();
    score->add_option("--header", sa.header)->required();
    score->add_option("--out-pgm", sa.out_pgm, "16-bit PGM of normalized scores");
    score->add_option("--out-csv", sa.out_csv, "per-pixel raw and normalized scores");
    score->add_option("--truth", sa.truth, "truth labels; prints ROC AUC");

    GenArgs ga;
    auto* gen = app.add_subcommand("gen", "generate a synthetic cube with planted anomalies");
    gen->add_option("--seed", ga.cfg.seed)->capture_default_str();
    gen->add_option("--width", ga.cfg.width)->capture_default_str();
    gen->add_option("--height", ga.cfg.height)->capture_default_str();
    gen->add_option("--bands", ga.cfg.bands)->capture_default_str();
    gen->add_option("--informative", ga.informative, "band indices")->capture_default_str();
    gen->add_option("--informative-variance", ga.cfg.informative_variance)->capture_default_str();
    gen->add_option("--anomalies", ga.cfg.anomaly_count)->capture_default_str();
    gen->add_option("--offset", ga.cfg.offset_scale)->capture_default_str();
    gen->add_option("--keep-clear", ga.keep_clear, "x,y,w,h kept free of anomalies");
    gen->add_option("--out-data", ga.out_data)->required();
    gen->add_option("--out-header", ga.out_header)->required();
    gen->add_option("--out-truth", ga.out_truth);

    BandwidthArgs ba;
    auto* bw = app.add_subcommand("bandwidth", "minimax RBF bandwidth selection");
    bw->add_option("--data", ba.data)->required();
    bw->add_option("--header", ba.header)->required();
    bw->add_option("--patch", ba.patch, "background patch x,y,w,h");
    bw->add_option("--regions", ba.regions)->capture_default_str();
    bw->add_option("--region-size", ba.region_size)->capture_default_str();
    bw->add_option("--sigma-grid", ba.sigma_grid);
    bw->add_option("--seed", ba.seed)->capture_default_str();
    bw->add_option("--C", ba.C)->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 1;
    }

    try {
        if (*train) {
            if (ta.kernel == "rbf" && !ta.sigma_auto && !(ta.sigma > 0.0))
                throw InvalidArgument("rbf kernel needs --sigma or --sigma-auto");
            return cmd_train(ta);
        }
        if (*score)
            return cmd_score(sa);
        if (*gen)
            return cmd_gen(ga);
        return cmd_bandwidth(ba);
    } catch (const osklad::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        switch (e.kind()) {
        case ErrorKind::InvalidArgument: return 1;
        case ErrorKind::Data: return 2;
        case ErrorKind::Numerical: return 3;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 2;
}
