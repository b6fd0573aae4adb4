#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "osklad/detector.hpp"
#include "osklad/error.hpp"

namespace osklad {

namespace {

int parse_positive(const std::string& key, const std::string& value) {
    errno = 0;
    char* end = nullptr;
    const long v = std::strtol(value.c_str(), &end, 10);
    if (value.empty() || *end != '\0' || errno == ERANGE || v < 1 || v > 1'000'000)
        throw DataError("header: invalid " + key + " '" + value + "'");
    return static_cast<int>(v);
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos)
        return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

}  // namespace

Rect parse_rect(const std::string& text) {
    Rect r;
    char c1 = 0, c2 = 0, c3 = 0;
    std::istringstream ss(text);
    if (!(ss >> r.x >> c1 >> r.y >> c2 >> r.w >> c3 >> r.h) || c1 != ',' || c2 != ',' ||
        c3 != ',' || !(ss >> std::ws).eof())
        throw InvalidArgument("rectangle must be x,y,w,h, got '" + text + "'");
    if (r.x < 0 || r.y < 0 || r.w < 1 || r.h < 1)
        throw InvalidArgument("rectangle '" + text + "' has negative origin or empty size");
    return r;
}

ImageCube read_cube(std::istream& csv, std::istream& header) {
    int width = 0, height = 0, bands = 0;
    std::string tok;
    while (header >> tok) {
        const auto eq = tok.find('=');
        if (eq == std::string::npos)
            throw DataError("header: expected key=value, got '" + tok + "'");
        const std::string key = tok.substr(0, eq), value = tok.substr(eq + 1);
        if (key == "width")
            width = parse_positive(key, value);
        else if (key == "height")
            height = parse_positive(key, value);
        else if (key == "bands")
            bands = parse_positive(key, value);
        else if (key == "format") {
            if (value != "csv")
                throw DataError("header: unsupported format '" + value + "'");
        } else
            throw DataError("header: unknown key '" + key + "'");
    }
    if (width == 0 || height == 0 || bands == 0)
        throw DataError("header must declare width, height and bands");

    const long pixels = static_cast<long>(width) * height;
    RowMatrix values(pixels, bands);
    std::string line;
    long row = 0, lineno = 0;
    while (std::getline(csv, line)) {
        ++lineno;
        if (trim(line).empty())
            continue;
        if (row >= pixels)
            throw DataError("cube has more than width*height = " + std::to_string(pixels) +
                            " rows");
        std::istringstream cells(line);
        std::string cell;
        int col = 0;
        while (std::getline(cells, cell, ',')) {
            if (col >= bands)
                throw DataError("line " + std::to_string(lineno) + ": more than " +
                                std::to_string(bands) + " columns");
            const std::string t = trim(cell);
            errno = 0;
            char* end = nullptr;
            const double v = std::strtod(t.c_str(), &end);
            if (t.empty() || *end != '\0' || errno == ERANGE)
                throw DataError("line " + std::to_string(lineno) + ": non-numeric cell '" + t + "'");
            values(row, col++) = v;
        }
        if (col != bands)
            throw DataError("line " + std::to_string(lineno) + ": expected " +
                            std::to_string(bands) + " columns, found " + std::to_string(col));
        ++row;
    }
    if (row != pixels)
        throw DataError("cube has " + std::to_string(row) + " rows, header declares " +
                        std::to_string(width) + "x" + std::to_string(height) + " = " +
                        std::to_string(pixels));
    return ImageCube{width, height, DataMatrix(std::move(values))};
}

ImageCube load_cube(const std::string& csv_path, const std::string& header_path) {
    std::ifstream csv(csv_path), header(header_path);
    if (!csv)
        throw DataError("cannot open cube file '" + csv_path + "'");
    if (!header)
        throw DataError("cannot open header file '" + header_path + "'");
    return read_cube(csv, header);
}

void write_cube(const ImageCube& cube, std::ostream& csv, std::ostream& header) {
    header << "width=" << cube.width << " height=" << cube.height << " bands=" << cube.bands()
           << " format=csv\n";
    char buf[40];
    for (Eigen::Index i = 0; i < cube.pixels.rows(); ++i) {
        for (Eigen::Index j = 0; j < cube.bands(); ++j) {
            std::snprintf(buf, sizeof buf, "%.17g", cube.pixels(i, j));
            csv << (j ? "," : "") << buf;
        }
        csv << '\n';
    }
}

void save_cube(const ImageCube& cube, const std::string& csv_path, const std::string& header_path) {
    std::ofstream csv(csv_path), header(header_path);
    if (!csv || !header)
        throw DataError("cannot open '" + csv_path + "' / '" + header_path + "' for writing");
    write_cube(cube, csv, header);
    if (!csv || !header)
        throw DataError("failed writing cube files");
}

DataMatrix patch_pixels(const ImageCube& cube, const Rect& r) {
    if (r.w < 1 || r.h < 1 || r.x < 0 || r.y < 0 || r.x + r.w > cube.width ||
        r.y + r.h > cube.height)
        throw InvalidArgument("patch " + std::to_string(r.x) + "," + std::to_string(r.y) + "," +
                              std::to_string(r.w) + "," + std::to_string(r.h) +
                              " does not fit a " + std::to_string(cube.width) + "x" +
                              std::to_string(cube.height) + " image");
    std::vector<Eigen::Index> idx;
    idx.reserve(static_cast<std::size_t>(r.w) * r.h);
    for (int y = r.y; y < r.y + r.h; ++y)
        for (int x = r.x; x < r.x + r.w; ++x)
            idx.push_back(cube.index(x, y));
    return cube.pixels.select_rows(idx);
}

}  // namespace osklad
