#include "repcost/trainer.hpp"

#include "repcost/errors.hpp"
#include "repcost/random.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace repcost {

namespace {

void validate_config(const TrainConfig& cfg, int input_dim) {
    if (cfg.L < 2) throw InvalidInput("TrainConfig: L must be >= 2");
    if ((int)cfg.widths.size() != cfg.L - 1)
        throw InvalidInput("TrainConfig: widths must have L-1 entries");
    for (int w : cfg.widths)
        if (w < 1) throw InvalidInput("TrainConfig: widths must be >= 1");
    if (!(cfg.lr > 0.0)) throw InvalidInput("TrainConfig: lr must be > 0");
    if (cfg.weight_decay < 0.0) throw InvalidInput("TrainConfig: weight_decay must be >= 0");
    if (!(cfg.target_loss > 0.0)) throw InvalidInput("TrainConfig: target_loss must be > 0");
    if (input_dim < 1) throw InvalidInput("TrainConfig: input dimension must be >= 1");
}

Vec uniform_vec(Rng& rng, int n, double half_width) {
    Vec v(n);
    for (int i = 0; i < n; ++i) v(i) = rng.uniform(-half_width, half_width);
    return v;
}

} // namespace

DeepNet init_params(const TrainConfig& cfg, int input_dim) {
    validate_config(cfg, input_dim);
    Rng rng(splitmix64(cfg.seed ^ 0x1217ull));
    DeepNet net;
    int cols = input_dim;
    for (int w : cfg.widths) {
        const double hw = cfg.init_scale / std::sqrt(double(cols));
        Mat M(w, cols);
        for (int i = 0; i < w; ++i)
            for (int j = 0; j < cols; ++j) M(i, j) = rng.uniform(-hw, hw);
        net.layers.push_back(std::move(M));
        cols = w;
    }
    const int K = cfg.widths.back();
    const double hk = cfg.init_scale / std::sqrt(double(K));
    net.a = uniform_vec(rng, K, hk);
    net.b = uniform_vec(rng, K, hk);
    net.c = rng.uniform(-cfg.init_scale, cfg.init_scale);
    return net;
}

double loss_and_gradient(const DeepNet& net, const Mat& X, const Vec& y, double weight_decay,
                         Gradients* grads) {
    const int n = (int)X.cols();
    const int depth = (int)net.layers.size();
    if (grads) {
        grads->layers.assign(depth, Mat());
        for (int i = 0; i < depth; ++i)
            grads->layers[i] = Mat::Zero(net.layers[i].rows(), net.layers[i].cols());
        grads->a = Vec::Zero(net.a.size());
        grads->b = Vec::Zero(net.b.size());
        grads->c = 0.0;
    }

    double mse = 0.0;
    std::vector<Vec> z(depth + 1);
    for (int s = 0; s < n; ++s) {
        z[0] = X.col(s);
        for (int i = 0; i < depth; ++i) z[i + 1] = net.layers[i] * z[i];
        Vec u = z[depth] + net.b;
        Vec h = u.cwiseMax(0.0);
        const double out = net.a.dot(h) + net.c;
        const double resid = out - y(s);
        mse += resid * resid / double(n);
        if (!grads) continue;

        const double e = 2.0 * resid / double(n);
        grads->a += e * h;
        grads->c += e;
        Vec delta = e * net.a.cwiseProduct((u.array() > 0.0).cast<double>().matrix());
        grads->b += delta;
        for (int i = depth - 1; i >= 0; --i) {
            grads->layers[i] += delta * z[i].transpose();
            if (i > 0) delta = net.layers[i].transpose() * delta;
        }
    }

    double decay = net.a.squaredNorm();
    for (const Mat& M : net.layers) decay += M.squaredNorm();
    if (grads && weight_decay != 0.0) {
        grads->a += 2.0 * weight_decay * net.a;
        for (int i = 0; i < depth; ++i) grads->layers[i] += 2.0 * weight_decay * net.layers[i];
    }
    return mse + weight_decay * decay;
}

namespace {

double mse_only(const DeepNet& net, const Mat& X, const Vec& y) {
    const int n = (int)X.cols();
    if (n == 0) return 0.0;
    double acc = 0.0;
    for (int s = 0; s < n; ++s) {
        const double r = eval(net, Vec(X.col(s))) - y(s);
        acc += r * r;
    }
    return acc / double(n);
}

} // namespace

TrainResult train(const Mat& X, const Vec& y, const TrainConfig& cfg) {
    if (X.cols() != y.size()) throw InvalidInput("train: X columns must match y length");
    const int n = (int)X.cols();
    validate_config(cfg, (int)X.rows());

    DeepNet net = init_params(cfg, (int)X.rows());
    const int depth = (int)net.layers.size();

    Gradients vel; // momentum buffers
    vel.layers.assign(depth, Mat());
    for (int i = 0; i < depth; ++i) vel.layers[i] = Mat::Zero(net.layers[i].rows(), net.layers[i].cols());
    vel.a = Vec::Zero(net.a.size());
    vel.b = Vec::Zero(net.b.size());
    vel.c = 0.0;

    Rng shuffle_rng(splitmix64(cfg.seed ^ 0xBA7C4ull));
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    const int batch = (cfg.batch <= 0 || cfg.batch >= n) ? std::max(n, 1) : cfg.batch;

    TrainResult result;
    Gradients g;
    int epochs_run = 0;
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        if (batch < n) {
            for (int i = n - 1; i > 0; --i)
                std::swap(order[(std::size_t)i], order[(std::size_t)shuffle_rng.below(std::uint64_t(i + 1))]);
        }
        for (int start = 0; start < std::max(n, 1); start += batch) {
            const int sz = std::min(batch, std::max(n, 1) - start);
            Mat Xb(X.rows(), n == 0 ? 0 : sz);
            Vec yb(n == 0 ? 0 : sz);
            for (int i = 0; i < sz && n > 0; ++i) {
                Xb.col(i) = X.col(order[(std::size_t)(start + i)]);
                yb(i) = y(order[(std::size_t)(start + i)]);
            }
            const double loss = loss_and_gradient(net, Xb, yb, cfg.weight_decay, &g);
            if (!std::isfinite(loss))
                throw TrainingDiverged("train: loss became non-finite at epoch " + std::to_string(epoch) +
                                       " (lr " + std::to_string(cfg.lr) + ")");
            const double mu = cfg.momentum;
            for (int i = 0; i < depth; ++i) {
                vel.layers[i] = mu * vel.layers[i] + g.layers[i];
                net.layers[i] -= cfg.lr * vel.layers[i];
            }
            vel.a = mu * vel.a + g.a;
            net.a -= cfg.lr * vel.a;
            vel.b = mu * vel.b + g.b;
            net.b -= cfg.lr * vel.b;
            vel.c = mu * vel.c + g.c;
            net.c -= cfg.lr * vel.c;
            if (n == 0) break; // decay-only step, one update per epoch
        }
        ++epochs_run;
        if (cfg.log_every > 0 && (epoch % cfg.log_every == 0 || epoch + 1 == cfg.epochs)) {
            TrainLogRow row;
            row.epoch = epoch;
            row.mse = mse_only(net, X, y);
            row.cost = cost_CL(net);
            row.sv_ratio = rank_metrics(net).sv_ratio;
            result.log.push_back(row);
        }
    }

    result.net = net;
    result.final_loss = mse_only(net, X, y);
    result.cost = cost_CL(net);
    result.effective_W = collapse(net).W;
    result.sv_ratio = rank_metrics(net).sv_ratio;
    result.epochs_run = epochs_run;
    result.interpolated = result.final_loss <= cfg.target_loss;
    return result;
}

RankMetrics rank_metrics(const DeepNet& net) {
    SvdResult d = svd(collapse(net).W);
    RankMetrics out;
    out.singulars = d.sigma;
    if (d.sigma.size() >= 2 && d.sigma(0) > 0.0 && d.sigma(1) > d.rank_tol * d.sigma(0))
        out.sv_ratio = d.sigma(1) / d.sigma(0);
    return out;
}

std::vector<SurfacePoint> grid_eval(const DeepNet& net, const GridBounds& bounds, int resolution) {
    net.validate();
    if (net.input_dim() != 2) throw InvalidInput("grid_eval: surface mode needs input dimension 2");
    if (resolution < 2) throw InvalidInput("grid_eval: resolution must be >= 2");
    ShallowNet flat = collapse(net);
    std::vector<SurfacePoint> out;
    out.reserve((std::size_t)resolution * resolution);
    for (int i = 0; i < resolution; ++i) {
        const double x1 = bounds.x1_min + (bounds.x1_max - bounds.x1_min) * double(i) / double(resolution - 1);
        for (int j = 0; j < resolution; ++j) {
            const double x2 = bounds.x2_min + (bounds.x2_max - bounds.x2_min) * double(j) / double(resolution - 1);
            Vec x(2);
            x << x1, x2;
            out.push_back({x1, x2, eval(flat, x)});
        }
    }
    return out;
}

namespace {

// flat parameter views for the finite-difference comparison
int param_count(const DeepNet& net) {
    int n = 0;
    for (const Mat& M : net.layers) n += (int)M.size();
    return n + (int)net.a.size() + (int)net.b.size() + 1;
}

double* param_at(DeepNet& net, int idx) {
    for (Mat& M : net.layers) {
        if (idx < (int)M.size()) return M.data() + idx;
        idx -= (int)M.size();
    }
    if (idx < (int)net.a.size()) return net.a.data() + idx;
    idx -= (int)net.a.size();
    if (idx < (int)net.b.size()) return net.b.data() + idx;
    idx -= (int)net.b.size();
    return &net.c;
}

double grad_at(const Gradients& g, int idx) {
    for (const Mat& M : g.layers) {
        if (idx < (int)M.size()) return *(M.data() + idx);
        idx -= (int)M.size();
    }
    if (idx < (int)g.a.size()) return g.a(idx);
    idx -= (int)g.a.size();
    if (idx < (int)g.b.size()) return g.b(idx);
    idx -= (int)g.b.size();
    return g.c;
}

} // namespace

double gradient_check(const DeepNet& net, const Mat& X, const Vec& y, double weight_decay,
                      double fd_step) {
    Gradients g;
    loss_and_gradient(net, X, y, weight_decay, &g);
    double gmax = std::abs(g.c);
    const int count = param_count(net);
    for (int i = 0; i < count; ++i) gmax = std::max(gmax, std::abs(grad_at(g, i)));

    double worst = 0.0;
    DeepNet work = net;
    for (int i = 0; i < count; ++i) {
        double* p = param_at(work, i);
        const double saved = *p;
        *p = saved + fd_step;
        const double up = loss_and_gradient(work, X, y, weight_decay, nullptr);
        *p = saved - fd_step;
        const double dn = loss_and_gradient(work, X, y, weight_decay, nullptr);
        *p = saved;
        const double fd = (up - dn) / (2.0 * fd_step);
        worst = std::max(worst, std::abs(fd - grad_at(g, i)));
    }
    return worst / std::max(1.0, gmax);
}

double min_preactivation(const DeepNet& net, const Mat& X) {
    net.validate();
    double lo = std::numeric_limits<double>::infinity();
    for (int s = 0; s < X.cols(); ++s) {
        Vec z = X.col(s);
        for (const Mat& M : net.layers) z = M * z;
        z += net.b;
        lo = std::min(lo, z.cwiseAbs().minCoeff());
    }
    return lo;
}

} // namespace repcost
