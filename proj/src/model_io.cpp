#include "osklad/model_io.hpp"

#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <vector>

#include "osklad/error.hpp"

namespace osklad {

namespace {

constexpr const char* kMagic = "osklad-model";
constexpr int kVersion = 1;

template <typename Derived>
void write_rows(std::ostream& out, const Eigen::MatrixBase<Derived>& m) {
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j)
            out << (j ? " " : "") << format_real(m(i, j));
        out << '\n';
    }
}

void write_vector(std::ostream& out, const char* key, const Vector& v) {
    out << key;
    for (Eigen::Index i = 0; i < v.size(); ++i)
        out << ' ' << format_real(v[i]);
    out << '\n';
}

class Reader {
public:
    explicit Reader(std::istream& in) : in_(in) {}

    std::istringstream line(const std::string& key) {
        std::string text;
        do {
            if (!std::getline(in_, text))
                throw DataError("model file truncated: expected '" + key + "'");
            ++lineno_;
        } while (text.empty());
        std::istringstream ss(text);
        std::string k;
        ss >> k;
        if (k != key)
            throw DataError("model file line " + std::to_string(lineno_) + ": expected '" + key +
                            "', found '" + k + "'");
        return ss;
    }

    std::istringstream raw() {
        std::string text;
        if (!std::getline(in_, text))
            throw DataError("model file truncated at line " + std::to_string(lineno_));
        ++lineno_;
        return std::istringstream(text);
    }

    double real(std::istringstream& ss) {
        std::string tok;
        if (!(ss >> tok))
            throw DataError("model file line " + std::to_string(lineno_) + ": missing number");
        errno = 0;
        char* end = nullptr;
        const double v = std::strtod(tok.c_str(), &end);
        if (end == tok.c_str() || *end != '\0' || errno == ERANGE)
            throw DataError("model file line " + std::to_string(lineno_) + ": bad number '" + tok +
                            "'");
        return v;
    }

    long integer(std::istringstream& ss) {
        long v = 0;
        if (!(ss >> v))
            throw DataError("model file line " + std::to_string(lineno_) + ": bad integer");
        return v;
    }

    std::string word(std::istringstream& ss) {
        std::string w;
        if (!(ss >> w))
            throw DataError("model file line " + std::to_string(lineno_) + ": missing value");
        return w;
    }

    void expect_end(std::istringstream& ss) {
        std::string extra;
        if (ss >> extra)
            throw DataError("model file line " + std::to_string(lineno_) + ": unexpected '" +
                            extra + "'");
    }

    double real_key(const std::string& key) {
        auto ss = line(key);
        const double v = real(ss);
        expect_end(ss);
        return v;
    }

    long int_key(const std::string& key) {
        auto ss = line(key);
        const long v = integer(ss);
        expect_end(ss);
        return v;
    }

    RowMatrix matrix(const std::string& key) {
        auto ss = line(key);
        const long r = integer(ss), c = integer(ss);
        expect_end(ss);
        if (r < 1 || c < 1)
            throw DataError("model file: '" + key + "' has invalid shape");
        RowMatrix m(r, c);
        for (long i = 0; i < r; ++i) {
            auto row = raw();
            for (long j = 0; j < c; ++j)
                m(i, j) = real(row);
            expect_end(row);
        }
        return m;
    }

    Vector vector(const std::string& key, Eigen::Index n) {
        auto ss = line(key);
        Vector v(n);
        for (Eigen::Index i = 0; i < n; ++i)
            v[i] = real(ss);
        expect_end(ss);
        return v;
    }

private:
    std::istream& in_;
    long lineno_ = 0;
};

}  // namespace

std::string format_real(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%a", v);
    return buf;
}

void write_model(const OskladModel& model, std::ostream& out) {
    const FitConfig& c = model.config;
    const bool ekfs = model.variant == Variant::EkfsNonlinear;
    out << kMagic << ' ' << kVersion << '\n';
    out << "variant " << (ekfs ? "ekfs" : "linear") << '\n';
    out << "kernel " << (model.input_kernel.kind == KernelKind::GaussianRBF ? "rbf" : "linear")
        << '\n';
    out << "bandwidth " << format_real(model.input_kernel.bandwidth) << '\n';
    out << "budget " << c.budget << '\n';
    out << "C " << format_real(c.solver.C) << '\n';
    out << "kkt_tol " << format_real(c.solver.kkt_tol) << '\n';
    out << "max_passes " << c.solver.max_passes << '\n';
    out << "outer_tol " << format_real(c.outer_tol) << '\n';
    out << "max_outer " << c.max_outer << '\n';
    out << "master_tol " << format_real(c.master_tol) << '\n';
    out << "master_max_iter " << c.master_max_iter << '\n';
    out << "eigen_floor " << format_real(c.eigen_floor) << '\n';
    if (ekfs) {
        if (!model.whitener)
            throw DataError("EKFS model without a whitener");
        const Whitener& w = *model.whitener;
        out << "basis " << w.basis().rows() << ' ' << w.basis().cols() << '\n';
        write_rows(out, w.basis().values());
        out << "transform " << w.transform().rows() << ' ' << w.transform().cols() << '\n';
        write_rows(out, w.transform());
    }
    const DataMatrix& coords = model.constraints.coords();
    out << "coords " << coords.rows() << ' ' << coords.cols() << '\n';
    write_rows(out, coords.values());
    out << "masks " << model.constraints.size() << ' ' << coords.cols() << '\n';
    for (const FeatureMask& m : model.constraints.masks()) {
        bool first = true;
        for (std::size_t j : m.indices()) {
            out << (first ? "" : " ") << j;
            first = false;
        }
        out << '\n';
    }
    write_vector(out, "mu", model.mu.mu);
    write_vector(out, "alpha", model.alpha);
    out << "radius_sq " << format_real(model.radius_sq) << '\n';
    out << "end\n";
}

OskladModel read_model(std::istream& in) {
    Reader rd(in);
    {
        auto ss = rd.line(kMagic);
        if (rd.integer(ss) != kVersion)
            throw DataError("unsupported model file version");
    }
    std::string variant, kernel;
    {
        auto ss = rd.line("variant");
        variant = rd.word(ss);
    }
    {
        auto ss = rd.line("kernel");
        kernel = rd.word(ss);
    }
    if (variant != "linear" && variant != "ekfs")
        throw DataError("unknown model variant '" + variant + "'");
    if (kernel != "linear" && kernel != "rbf")
        throw DataError("unknown kernel '" + kernel + "'");
    KernelSpec spec{kernel == "rbf" ? KernelKind::GaussianRBF : KernelKind::Linear,
                    rd.real_key("bandwidth")};
    spec.validate();

    FitConfig c;
    const long budget = rd.int_key("budget");
    if (budget < 1)
        throw DataError("model budget must be positive");
    c.budget = static_cast<std::size_t>(budget);
    c.solver.C = rd.real_key("C");
    c.solver.kkt_tol = rd.real_key("kkt_tol");
    c.solver.max_passes = static_cast<int>(rd.int_key("max_passes"));
    c.outer_tol = rd.real_key("outer_tol");
    c.max_outer = static_cast<int>(rd.int_key("max_outer"));
    c.master_tol = rd.real_key("master_tol");
    c.master_max_iter = static_cast<int>(rd.int_key("master_max_iter"));
    c.eigen_floor = rd.real_key("eigen_floor");

    std::optional<Whitener> whitener;
    if (variant == "ekfs") {
        DataMatrix basis(rd.matrix("basis"));
        Matrix transform = rd.matrix("transform");
        whitener = Whitener::from_parts(std::move(basis), spec, std::move(transform), c.eigen_floor);
    }
    DataMatrix coords(rd.matrix("coords"));
    if (whitener && coords.cols() != whitener->retained_rank())
        throw DataError("model coordinates do not match the whitener rank");

    ConstraintSet cs(coords, KernelSpec::linear());
    {
        auto ss = rd.line("masks");
        const long p = rd.integer(ss), dim = rd.integer(ss);
        rd.expect_end(ss);
        if (p < 1 || dim != coords.cols())
            throw DataError("model mask header is inconsistent");
        for (long l = 0; l < p; ++l) {
            auto row = rd.raw();
            std::vector<std::size_t> idx;
            long j = 0;
            while (row >> j) {
                if (j < 0)
                    throw DataError("negative mask index in model file");
                idx.push_back(static_cast<std::size_t>(j));
            }
            if (!row.eof())
                throw DataError("bad mask index in model file");
            try {
                cs.add(FeatureMask::from_indices(static_cast<std::size_t>(dim), idx));
            } catch (const InvalidArgument& e) {
                throw DataError(std::string("invalid mask in model file: ") + e.what());
            }
        }
    }
    MklWeights mu{rd.vector("mu", static_cast<Eigen::Index>(cs.size()))};
    mu.validate(cs.size());
    Vector alpha = rd.vector("alpha", coords.rows());
    const double radius_sq = rd.real_key("radius_sq");
    rd.line("end");

    return OskladModel{
        .variant = variant == "ekfs" ? Variant::EkfsNonlinear : Variant::LinearInputSpace,
        .input_kernel = spec,
        .whitener = std::move(whitener),
        .constraints = std::move(cs),
        .mu = std::move(mu),
        .alpha = std::move(alpha),
        .radius_sq = radius_sq,
        .config = c,
    };
}

void save_model(const OskladModel& model, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw DataError("cannot open '" + path + "' for writing");
    write_model(model, out);
    if (!out)
        throw DataError("failed writing '" + path + "'");
}

OskladModel load_model(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw DataError("cannot open model file '" + path + "'");
    return read_model(in);
}

}  // namespace osklad
