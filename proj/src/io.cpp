#include "repcost/io.hpp"

#include "repcost/errors.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <vector>

namespace repcost {

void atomic_write_text(const std::string& path, const std::string& content) {
    const std::filesystem::path target(path);
    const std::filesystem::path tmp = target.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw InvalidInput("cannot open for writing: " + tmp.string());
        out << content;
        if (!out) throw InvalidInput("write failed: " + tmp.string());
    }
    std::filesystem::rename(tmp, target);
}

std::string read_text(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InvalidInput("cannot open: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

namespace {

std::vector<double> parse_csv_line(const std::string& line) {
    std::vector<double> vals;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
        if (cell.empty()) continue;
        try {
            vals.push_back(std::stod(cell));
        } catch (const std::exception&) {
            throw InvalidInput("CSV: cannot parse value '" + cell + "'");
        }
    }
    return vals;
}

} // namespace

std::string mat_to_csv(const Mat& M) {
    std::string out;
    char buf[64];
    for (int i = 0; i < M.rows(); ++i) {
        for (int j = 0; j < M.cols(); ++j) {
            std::snprintf(buf, sizeof buf, "%.17g", M(i, j));
            out += buf;
            out += (j + 1 < M.cols()) ? "," : "";
        }
        out += "\n";
    }
    return out;
}

Mat mat_from_csv(const std::string& text) {
    std::stringstream ss(text);
    std::string line;
    std::vector<std::vector<double>> rows;
    while (std::getline(ss, line)) {
        if (line.empty() || line == "\r") continue;
        rows.push_back(parse_csv_line(line));
    }
    if (rows.empty()) throw InvalidInput("CSV: no rows");
    Mat M((int)rows.size(), (int)rows[0].size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].size() != rows[0].size()) throw InvalidInput("CSV: ragged rows");
        for (std::size_t j = 0; j < rows[i].size(); ++j) M((int)i, (int)j) = rows[i][j];
    }
    return M;
}

std::string vec_to_csv(const Vec& v) {
    return mat_to_csv(v.transpose());
}

Vec vec_from_csv(const std::string& text) {
    Mat M = mat_from_csv(text);
    if (M.rows() != 1 && M.cols() != 1) throw InvalidInput("CSV: expected a single line or column");
    return (M.rows() == 1) ? Vec(M.row(0).transpose()) : Vec(M.col(0));
}

double parse_angle(const std::string& text) {
    constexpr double kPi = 3.141592653589793238462643383279502884;
    std::string body = text;
    double scale = 1.0;
    const auto strip = [&](const std::string& suffix) {
        if (body.size() > suffix.size() && body.compare(body.size() - suffix.size(), suffix.size(), suffix) == 0) {
            body = body.substr(0, body.size() - suffix.size());
            return true;
        }
        return false;
    };
    if (strip("pi") || strip("PI")) scale = kPi;
    try {
        std::size_t used = 0;
        const double v = std::stod(body, &used);
        if (used != body.size()) throw InvalidInput("angle: trailing characters in '" + text + "'");
        return v * scale;
    } catch (const InvalidInput&) {
        throw;
    } catch (const std::exception&) {
        throw InvalidInput("angle: cannot parse '" + text + "'");
    }
}

} // namespace repcost
