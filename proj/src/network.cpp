#include "repcost/network.hpp"

#include "repcost/errors.hpp"

#include <nlohmann/json.hpp>

#include <cmath>

namespace repcost {

void ShallowNet::validate() const {
    require_finite(W, "ShallowNet.W");
    require_finite(a, "ShallowNet.a");
    require_finite(b, "ShallowNet.b");
    if (!std::isfinite(c)) throw InvalidInput("ShallowNet.c: non-finite");
    if (W.rows() != a.size() || W.rows() != b.size())
        throw InvalidInput("ShallowNet: W rows, a, b must have equal length");
}

void DeepNet::validate() const {
    if (layers.empty()) throw InvalidInput("DeepNet: needs at least one linear layer");
    for (const Mat& M : layers) require_finite(M, "DeepNet.layer");
    for (std::size_t i = 0; i + 1 < layers.size(); ++i)
        if (layers[i + 1].cols() != layers[i].rows())
            throw InvalidInput("DeepNet: layer shapes not composable");
    require_finite(a, "DeepNet.a");
    require_finite(b, "DeepNet.b");
    if (!std::isfinite(c)) throw InvalidInput("DeepNet.c: non-finite");
    if (layers.back().rows() != a.size() || a.size() != b.size())
        throw InvalidInput("DeepNet: last layer rows, a, b must have equal length");
}

double eval(const ShallowNet& net, const Vec& x) {
    if (x.size() != net.W.cols()) throw InvalidInput("eval: input dimension mismatch");
    Vec pre = net.W * x + net.b;
    return net.a.dot(pre.cwiseMax(0.0)) + net.c;
}

double eval(const DeepNet& net, const Vec& x) {
    if (x.size() != net.layers.front().cols()) throw InvalidInput("eval: input dimension mismatch");
    Vec z = x;
    for (const Mat& M : net.layers) z = M * z;
    Vec pre = z + net.b;
    return net.a.dot(pre.cwiseMax(0.0)) + net.c;
}

ShallowNet collapse(const DeepNet& net) {
    net.validate();
    Mat W = net.layers.front();
    for (std::size_t i = 1; i < net.layers.size(); ++i) W = net.layers[i] * W;
    return ShallowNet{W, net.a, net.b, net.c};
}

double cost_CL(const DeepNet& net) {
    double acc = net.a.squaredNorm();
    for (const Mat& M : net.layers) acc += M.squaredNorm();
    return acc / double(net.depth());
}

double cost_CL(const ShallowNet& net) {
    return (net.a.squaredNorm() + net.W.squaredNorm()) / 2.0;
}

ShallowNet rescale_units(const ShallowNet& net, const Vec& lam) {
    net.validate();
    if (lam.size() != net.units()) throw InvalidInput("rescale_units: lambda length mismatch");
    if ((lam.array() <= 0.0).any()) throw InvalidInput("rescale_units: lambda entries must be positive");
    ShallowNet out = net;
    out.W = lam.asDiagonal() * net.W;
    out.a = net.a.cwiseQuotient(lam);
    out.b = net.b.cwiseProduct(lam);
    return out;
}

ShallowNet normalize_units(const ShallowNet& net) {
    net.validate();
    ShallowNet out = net;
    for (int k = 0; k < net.units(); ++k) {
        const double n = net.W.row(k).norm();
        if (n > 0.0) {
            out.W.row(k) /= n;
            out.a(k) *= n;
            out.b(k) /= n;
        }
    }
    return out;
}

DeepNet balanced_factorization(const ShallowNet& net, int L) {
    net.validate();
    if (L < 2) throw InvalidInput("balanced_factorization: L must be >= 2");
    if (L == 2) return DeepNet{{net.W}, net.a, net.b, net.c};

    SvdResult d = svd(net.W);
    const int r = std::max(d.rank(), 1);
    const double p = 1.0 / double(L - 1);
    Vec s = Vec::Zero(r);
    for (int i = 0; i < r && i < d.sigma.size(); ++i) s(i) = std::pow(d.sigma(i), p);

    std::vector<Mat> layers;
    layers.reserve(L - 1);
    layers.push_back(s.asDiagonal() * d.V.leftCols(r).transpose()); // r x d
    for (int i = 0; i < L - 3; ++i) layers.push_back(Mat(s.asDiagonal()));
    layers.push_back(d.U.leftCols(r) * s.asDiagonal()); // K x r
    return DeepNet{std::move(layers), net.a, net.b, net.c};
}

nlohmann::json mat_to_json(const Mat& M) {
    nlohmann::json rows = nlohmann::json::array();
    for (int i = 0; i < M.rows(); ++i) {
        nlohmann::json row = nlohmann::json::array();
        for (int j = 0; j < M.cols(); ++j) row.push_back(M(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

Mat mat_from_json(const nlohmann::json& j) {
    if (!j.is_array() || j.empty() || !j[0].is_array())
        throw InvalidInput("matrix JSON must be a non-empty array of rows");
    const int rows = (int)j.size();
    const int cols = (int)j[0].size();
    Mat M(rows, cols);
    for (int i = 0; i < rows; ++i) {
        if ((int)j[i].size() != cols) throw InvalidInput("matrix JSON has ragged rows");
        for (int k = 0; k < cols; ++k) M(i, k) = j[i][k].get<double>();
    }
    return M;
}

nlohmann::json vec_to_json(const Vec& v) {
    nlohmann::json a = nlohmann::json::array();
    for (int i = 0; i < v.size(); ++i) a.push_back(v(i));
    return a;
}

Vec vec_from_json(const nlohmann::json& j) {
    if (!j.is_array() || j.empty()) throw InvalidInput("vector JSON must be a non-empty array");
    Vec v(j.size());
    for (int i = 0; i < (int)j.size(); ++i) v(i) = j[i].get<double>();
    return v;
}

nlohmann::json to_json(const ShallowNet& net) {
    return {{"W", mat_to_json(net.W)}, {"a", vec_to_json(net.a)}, {"b", vec_to_json(net.b)}, {"c", net.c}};
}

nlohmann::json to_json(const DeepNet& net) {
    nlohmann::json layers = nlohmann::json::array();
    for (const Mat& M : net.layers) layers.push_back(mat_to_json(M));
    return {{"layers", std::move(layers)}, {"a", vec_to_json(net.a)}, {"b", vec_to_json(net.b)}, {"c", net.c}};
}

ShallowNet shallow_from_json(const nlohmann::json& j) {
    ShallowNet net;
    net.W = mat_from_json(j.at("W"));
    net.a = vec_from_json(j.at("a"));
    net.b = vec_from_json(j.at("b"));
    net.c = j.value("c", 0.0);
    net.validate();
    return net;
}

DeepNet deep_from_json(const nlohmann::json& j) {
    DeepNet net;
    for (const auto& layer : j.at("layers")) net.layers.push_back(mat_from_json(layer));
    net.a = vec_from_json(j.at("a"));
    net.b = vec_from_json(j.at("b"));
    net.c = j.value("c", 0.0);
    net.validate();
    return net;
}

} // namespace repcost
