#pragma once

#include "repcost/network.hpp"

#include <cstdint>
#include <vector>

namespace repcost {

/// Gradient descent with weight decay on a DeepNet. Biases are excluded
/// from the decay term, matching the cost the decay is meant to minimize.
struct TrainConfig {
    int L = 3;
    std::vector<int> widths;       // L-1 entries; widths.back() is the ReLU width K
    double lr = 0.05;
    double weight_decay = 1e-3;    // coefficient on the squared non-bias weights
    int epochs = 1000;
    int batch = 0;                 // 0 or >= n means full batch
    std::uint64_t seed = 1;
    double target_loss = 1e-4;     // MSE at or below this counts as interpolating
    double init_scale = 1.0;
    double momentum = 0.0;
    int log_every = 0;             // 0 disables the log
};

struct TrainLogRow {
    int epoch = 0;
    double mse = 0, cost = 0, sv_ratio = 0;
};

struct TrainResult {
    DeepNet net;
    double final_loss = 0;   // MSE on the full training set
    double cost = 0;         // C_L of the trained net
    Mat effective_W;         // product of the linear layers
    double sv_ratio = 0;     // sigma_2 / sigma_1 of effective_W (0 if rank one)
    int epochs_run = 0;
    bool interpolated = false;
    std::vector<TrainLogRow> log;
};

struct RankMetrics {
    double sv_ratio = 0;
    Vec singulars;
};

struct GridBounds {
    double x1_min = -1, x1_max = 1, x2_min = -1, x2_max = 1;
};

struct SurfacePoint {
    double x1 = 0, x2 = 0, f = 0;
};

/// Entries i.i.d. uniform in [-init_scale/sqrt(fan_in), +init_scale/sqrt(fan_in)]
/// (fan_in: columns for a matrix, length for a/b, 1 for c); bit-identical per seed.
DeepNet init_params(const TrainConfig& cfg, int input_dim);

/// MSE + weight_decay * (sum |W_i|_F^2 + |a|^2) under (mini-batch) gradient
/// descent; deterministic per seed; throws TrainingDiverged if the loss
/// leaves the finite range.
TrainResult train(const Mat& X, const Vec& y, const TrainConfig& cfg);

RankMetrics rank_metrics(const DeepNet& net);

/// Surface table of the collapsed net on a 2-D grid (input_dim must be 2);
/// resolution points per axis including the endpoints, x1 varying slowest.
std::vector<SurfacePoint> grid_eval(const DeepNet& net, const GridBounds& bounds, int resolution);

struct Gradients {
    std::vector<Mat> layers;
    Vec a, b;
    double c = 0;
};

/// Loss (MSE over the given samples + decay) and its gradient; the
/// training loop and the finite-difference checks share this path.
double loss_and_gradient(const DeepNet& net, const Mat& X, const Vec& y, double weight_decay,
                         Gradients* grads);

/// Max |analytic - central difference| over every parameter, relative to
/// max(1, |analytic|_inf). fd_step is the central-difference half-step.
double gradient_check(const DeepNet& net, const Mat& X, const Vec& y, double weight_decay,
                      double fd_step = 1e-5);

/// Smallest |pre-activation| over all samples (hinge proximity probe).
double min_preactivation(const DeepNet& net, const Mat& X);

} // namespace repcost
