#pragma once

#include "repcost/linalg.hpp"

#include <nlohmann/json_fwd.hpp>
#include <vector>

namespace repcost {

/// Two-layer ReLU network x -> a^T [W x + b]_+ + c.
struct ShallowNet {
    Mat W;      // K x d inner weights, one unit per row
    Vec a;      // K outer weights
    Vec b;      // K biases
    double c = 0.0;

    int units() const { return (int)W.rows(); }
    int input_dim() const { return (int)W.cols(); }
    void validate() const;
};

/// L-layer network with L-1 linear layers feeding one ReLU layer:
/// x -> a^T [W_{L-1} ... W_1 x + b]_+ + c.
struct DeepNet {
    std::vector<Mat> layers; // W_1 .. W_{L-1}, applied left to right
    Vec a;
    Vec b;
    double c = 0.0;

    int depth() const { return (int)layers.size() + 1; } // L
    int input_dim() const { return (int)layers.front().cols(); }
    void validate() const;
};

double eval(const ShallowNet& net, const Vec& x);
double eval(const DeepNet& net, const Vec& x);

/// Multiply out the linear layers: W = W_{L-1} ... W_1, keeping a, b, c.
ShallowNet collapse(const DeepNet& net);

/// (1/L) (|a|^2 + sum_i |W_i|_F^2). Biases excluded.
double cost_CL(const DeepNet& net);
double cost_CL(const ShallowNet& net); // L = 2 case

/// Per-unit rescaling (D_lam W, a D_lam^{-1}, D_lam b, c); the represented
/// function is unchanged. All lam_k must be > 0.
ShallowNet rescale_units(const ShallowNet& net, const Vec& lam);

/// 1-homogeneous rescale to unit-norm rows: w_k /= |w_k|, a_k *= |w_k|,
/// b_k /= |w_k|. Zero rows are left untouched. Function unchanged.
ShallowNet normalize_units(const ShallowNet& net);

/// Factor W into L-1 linear layers with minimal total squared Frobenius
/// norm. From the thin SVD W = U S V^T the chain is
///   W_1 = S^{1/(L-1)} V^T,  interior factors S^{1/(L-1)},  W_{L-1} = U S^{1/(L-1)},
/// so the product reconstructs W and
///   sum_i |W_i|_F^2 = (L-1) * schatten_qnorm_pow(W, 2/(L-1)).
/// Interior factors are r x r with r = rank(W); L = 2 returns {W} itself.
DeepNet balanced_factorization(const ShallowNet& net, int L);

// JSON schema (shared with the CLI):
//   shallow: {"W": [[...]], "a": [...], "b": [...], "c": real}
//   deep:    {"layers": [[[...]]], "a": [...], "b": [...], "c": real}
nlohmann::json to_json(const ShallowNet& net);
nlohmann::json to_json(const DeepNet& net);
ShallowNet shallow_from_json(const nlohmann::json& j);
DeepNet deep_from_json(const nlohmann::json& j);

nlohmann::json mat_to_json(const Mat& M);
Mat mat_from_json(const nlohmann::json& j);
nlohmann::json vec_to_json(const Vec& v);
Vec vec_from_json(const nlohmann::json& j);

} // namespace repcost
