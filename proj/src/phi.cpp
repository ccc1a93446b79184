#include "repcost/phi.hpp"

#include "repcost/errors.hpp"
#include "repcost/parallel.hpp"
#include "repcost/random.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace repcost {

namespace {

// ---------------------------------------------------------------------------
// shared pieces

double outer_exponent(int L) { return double(L - 1) / double(L); }

// |M|_{S^q}^{2/L} with the rank tolerance of schatten_qnorm_pow; L = 2 is the
// Frobenius norm (q = 2 there, outside schatten_qnorm_pow's domain).
double scale_objective_exact(const Mat& M, int L) {
    if (L == 2) return M.norm();
    const double q = 2.0 / double(L - 1);
    return std::pow(schatten_qnorm_pow(M, q), outer_exponent(L));
}

Mat scaled_rows(const Mat& A, const Vec& lambda) {
    return lambda.cwiseInverse().asDiagonal() * A;
}

// Smoothed surrogate sum_i (s_i^2 + eps^2)^{q/2}, eps = 1e-9 * s_max; keeps
// the q < 1 branch differentiable at zero singular values.
double smoothed_value(const Mat& M, double q) {
    Eigen::JacobiSVD<Mat> dec(M);
    const Vec& s = dec.singularValues();
    if (s.size() == 0 || s(0) <= 0.0) return 0.0;
    const double eps2 = 1e-18 * s(0) * s(0);
    double acc = 0.0;
    for (int i = 0; i < s.size(); ++i) acc += std::pow(s(i) * s(i) + eps2, 0.5 * q);
    return acc;
}

// Value and gradient (in the unconstrained log-scale coordinates u, with
// lambda = exp(u) / |exp(u)|_2) of the smoothed surrogate.
double smoothed_value_grad(const Mat& A, const Vec& lambda, double q, Vec& grad_u) {
    Mat M = scaled_rows(A, lambda);
    Eigen::JacobiSVD<Mat> dec(M, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Vec& s = dec.singularValues();
    const int K = (int)A.rows();
    grad_u = Vec::Zero(K);
    if (s.size() == 0 || s(0) <= 0.0) return 0.0;
    const double eps2 = 1e-18 * s(0) * s(0);
    double value = 0.0;
    Vec gprime(s.size());
    for (int i = 0; i < s.size(); ++i) {
        const double base = s(i) * s(i) + eps2;
        value += std::pow(base, 0.5 * q);
        gprime(i) = q * s(i) * std::pow(base, 0.5 * q - 1.0);
    }
    Mat G = dec.matrixU() * gprime.asDiagonal() * dec.matrixV().transpose();
    // dF/dlambda_k = -<G_k, M_k> / lambda_k; chain through the normalized
    // exponential gives grad_u = -S + lambda^2 * sum(S).
    Vec S(K);
    for (int k = 0; k < K; ++k) S(k) = G.row(k).dot(M.row(k));
    const double total = S.sum();
    for (int k = 0; k < K; ++k) grad_u(k) = -S(k) + lambda(k) * lambda(k) * total;
    return value;
}

Vec lambda_from_u(Vec u) {
    u.array() -= u.maxCoeff();
    Vec lam = u.array().exp();
    lam /= lam.norm();
    return lam;
}

void clamp_u(Vec& u, double lambda_floor) {
    const double lo = u.maxCoeff() + std::log(lambda_floor * std::sqrt(double(u.size())));
    for (int i = 0; i < u.size(); ++i) u(i) = std::max(u(i), lo);
}

struct RestartOutcome {
    double value = 0.0; // exact objective at lambda
    Vec lambda;
    bool converged = false;
};

RestartOutcome descend_from(const Mat& A, int L, Vec u, const PhiSolverOptions& opts) {
    const double q = (L == 2) ? 2.0 : 2.0 / double(L - 1);
    clamp_u(u, opts.lambda_floor);
    Vec lam = lambda_from_u(u);
    Vec grad;
    double F = smoothed_value_grad(A, lam, q, grad);
    double step = 1.0;
    int stall = 0;
    bool converged = false;
    for (int iter = 0; iter < opts.max_iters; ++iter) {
        const double g2 = grad.squaredNorm();
        if (g2 < 1e-30 * std::max(1.0, F * F)) {
            converged = true;
            break;
        }
        double t = step;
        Vec u_next;
        double F_next = F;
        bool accepted = false;
        for (int h = 0; h < 60; ++h) {
            Vec cand = u - t * grad;
            clamp_u(cand, opts.lambda_floor);
            const double Fc = smoothed_value(scaled_rows(A, lambda_from_u(cand)), q);
            if (Fc <= F - 1e-4 * t * g2) {
                u_next = std::move(cand);
                F_next = Fc;
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if (!accepted) {
            converged = true; // no descent direction left at this resolution
            break;
        }
        const double rel_dec = (F - F_next) / std::max(1.0, std::abs(F));
        u = std::move(u_next);
        F = F_next;
        step = std::min(1.0, 2.0 * t);
        if (rel_dec < opts.rel_tol) {
            if (++stall >= opts.stall_iters) {
                converged = true;
                break;
            }
        } else {
            stall = 0;
        }
        lam = lambda_from_u(u);
        F = smoothed_value_grad(A, lam, q, grad);
    }
    RestartOutcome out;
    out.lambda = lambda_from_u(u);
    out.value = scale_objective_exact(scaled_rows(A, out.lambda), L);
    out.converged = converged;
    return out;
}

// Content hash of a unit (its row of A plus its restart weight); random
// restarts are seeded per unit from this, so permuting units permutes the
// starting points with them and the solved value is permutation invariant.
std::uint64_t unit_hash(const Mat& A, const Vec& weights, int k) {
    std::uint64_t h = 0x8BADF00D5EEDull;
    for (int j = 0; j < A.cols(); ++j) h = hash_mix(h, A(k, j));
    return hash_mix(h, weights(k));
}

std::vector<Vec> build_starts(const Mat& A, const Vec& weights, const PhiSolverOptions& opts) {
    const int K = (int)A.rows();
    std::vector<Vec> starts;
    starts.push_back(Vec::Ones(K)); // uniform
    if (K > 1) {
        Vec by_weight(K), by_rownorm(K);
        for (int k = 0; k < K; ++k) {
            by_weight(k) = std::sqrt(std::abs(weights(k)));
            by_rownorm(k) = std::sqrt(A.row(k).norm());
        }
        if (by_weight.minCoeff() > 0.0) starts.push_back(by_weight);
        starts.push_back(by_rownorm);
        // structure-informed start from the row masses of |U| S in the SVD of A
        SvdResult d = svd(A);
        Vec mass = (d.U.cwiseAbs() * d.sigma).array().sqrt();
        if (mass.minCoeff() > 0.0) starts.push_back(mass);
    }
    std::vector<std::uint64_t> hashes(K);
    for (int k = 0; k < K; ++k) hashes[k] = unit_hash(A, weights, k);
    int r = 0;
    while ((int)starts.size() < opts.restarts) {
        Vec lam(K);
        for (int k = 0; k < K; ++k) {
            Rng rng(splitmix64(opts.seed + 0x9E37u * std::uint64_t(r + 1)) ^ hashes[k]);
            lam(k) = 0.05 + std::abs(rng.normal());
        }
        starts.push_back(lam);
        ++r;
    }
    if ((int)starts.size() > opts.restarts && opts.restarts >= 1) starts.resize(opts.restarts);
    return starts;
}

} // namespace

// ---------------------------------------------------------------------------

double phi2(const Mat& W, const Vec& a) {
    require_finite(W, "phi2: W");
    require_finite(a, "phi2: a");
    if (a.size() != W.rows()) throw InvalidInput("phi2: a length must match W rows");
    double acc = 0.0;
    for (int k = 0; k < W.rows(); ++k) acc += std::abs(a(k)) * W.row(k).norm();
    return acc;
}

double phiL_grouped(const Mat& W, const Vec& a, int L) {
    require_finite(W, "phiL_grouped: W");
    require_finite(a, "phiL_grouped: a");
    if (a.size() != W.rows()) throw InvalidInput("phiL_grouped: a length must match W rows");
    if (L < 2) throw InvalidInput("phiL_grouped: L must be >= 2");

    std::vector<int> keep;
    for (int k = 0; k < W.rows(); ++k)
        if (W.row(k).norm() > 0.0) keep.push_back(k);
    if (keep.empty()) return 0.0;

    constexpr double tol = 1e-8;
    for (int k : keep) {
        const double n = W.row(k).norm();
        if (std::abs(n - 1.0) > tol)
            throw StructureAbsent("phiL_grouped: row " + std::to_string(k) + " is not unit norm");
    }

    // cluster rows that are colinear up to sign
    const int m = (int)keep.size();
    std::vector<int> group(m, -1);
    std::vector<int> reps; // indices into keep
    for (int i = 0; i < m; ++i) {
        for (std::size_t g = 0; g < reps.size(); ++g) {
            const double cosang = W.row(keep[i]).dot(W.row(keep[reps[g]]));
            if (std::abs(cosang) > 1.0 - tol) {
                group[i] = (int)g;
                break;
            }
        }
        if (group[i] < 0) {
            group[i] = (int)reps.size();
            reps.push_back(i);
        }
    }
    for (std::size_t g = 0; g < reps.size(); ++g)
        for (std::size_t h = g + 1; h < reps.size(); ++h) {
            const double dot = W.row(keep[reps[g]]).dot(W.row(keep[reps[h]]));
            if (std::abs(dot) > tol)
                throw StructureAbsent("phiL_grouped: clusters are not mutually orthogonal");
        }

    Vec group_l1 = Vec::Zero((int)reps.size());
    for (int i = 0; i < m; ++i) group_l1(group[i]) += std::abs(a(keep[i]));
    double acc = 0.0;
    for (int g = 0; g < group_l1.size(); ++g) acc += std::pow(group_l1(g), 2.0 / double(L));
    return acc;
}

PhiEstimate minimize_over_unit_scales(const Mat& A, const Vec& restart_weights, int L,
                                      const PhiSolverOptions& opts) {
    require_finite(A, "minimize_over_unit_scales: A");
    if (restart_weights.size() != A.rows())
        throw InvalidInput("minimize_over_unit_scales: weight length must match A rows");
    if (L < 2) throw InvalidInput("minimize_over_unit_scales: L must be >= 2");
    if (opts.restarts < 1) throw InvalidInput("minimize_over_unit_scales: restarts must be >= 1");

    const int K = (int)A.rows();
    std::vector<int> keep;
    for (int k = 0; k < K; ++k)
        if (A.row(k).norm() > 0.0) keep.push_back(k);

    PhiEstimate est;
    if (keep.empty()) {
        est.value = 0.0;
        est.converged = true;
        return est;
    }

    Mat Ak((int)keep.size(), (int)A.cols());
    Vec wk((int)keep.size());
    for (std::size_t i = 0; i < keep.size(); ++i) {
        Ak.row((int)i) = A.row(keep[i]);
        wk((int)i) = restart_weights(keep[i]);
    }

    Vec lambda_kept;
    if (L == 2) {
        // the optimum is analytic: lambda_k^2 proportional to the row norm
        Vec rn(Ak.rows());
        for (int k = 0; k < Ak.rows(); ++k) rn(k) = Ak.row(k).norm();
        lambda_kept = rn.array().sqrt();
        lambda_kept /= lambda_kept.norm();
        est.converged = true;
        est.restarts_used = 0;
    } else {
        std::vector<Vec> starts = build_starts(Ak, wk, opts);
        std::vector<RestartOutcome> outcomes = parallel_map<RestartOutcome>(
            starts.size(),
            [&](std::size_t i) { return descend_from(Ak, L, starts[i].array().log().matrix(), opts); },
            opts.parallel);
        std::size_t best = 0;
        double lo = outcomes[0].value, hi = outcomes[0].value;
        for (std::size_t i = 1; i < outcomes.size(); ++i) {
            lo = std::min(lo, outcomes[i].value);
            hi = std::max(hi, outcomes[i].value);
            if (outcomes[i].value < outcomes[best].value) best = i;
        }
        lambda_kept = outcomes[best].lambda;
        est.converged = outcomes[best].converged;
        est.restarts_used = (int)outcomes.size();
        est.best_restart_gap = hi - lo;
    }

    // report lambda over all K units; dropped units sit at the floor
    Vec lambda = Vec::Constant(K, opts.lambda_floor);
    for (std::size_t i = 0; i < keep.size(); ++i) lambda(keep[i]) = lambda_kept((int)i);
    lambda /= lambda.norm();
    est.lambda_opt = lambda;
    est.value = scale_objective_exact(scaled_rows(A, lambda), L);

    for (int k = 0; k < K; ++k)
        if (lambda(k) <= 10.0 * opts.lambda_floor) est.boundary_units.push_back(k);
    est.boundary = !est.boundary_units.empty();
    if (est.boundary) {
        std::vector<int> inner;
        for (int k = 0; k < K; ++k)
            if (lambda(k) > 10.0 * opts.lambda_floor) inner.push_back(k);
        if (inner.empty()) {
            est.boundary_limit_value = 0.0;
        } else {
            Mat Ai((int)inner.size(), (int)A.cols());
            Vec li((int)inner.size());
            for (std::size_t i = 0; i < inner.size(); ++i) {
                Ai.row((int)i) = A.row(inner[i]);
                li((int)i) = lambda(inner[i]);
            }
            li /= li.norm();
            est.boundary_limit_value = scale_objective_exact(scaled_rows(Ai, li), L);
        }
    }
    return est;
}

PhiEstimate phiL_numeric(const Mat& W, const Vec& a, int L, const PhiSolverOptions& opts) {
    require_finite(W, "phiL_numeric: W");
    require_finite(a, "phiL_numeric: a");
    if (a.size() != W.rows()) throw InvalidInput("phiL_numeric: a length must match W rows");
    Mat A = a.asDiagonal() * W;
    return minimize_over_unit_scales(A, a.cwiseAbs(), L, opts);
}

// ---------------------------------------------------------------------------
// simplex grid

namespace {

void fill_compositions(int K, int R, std::vector<std::uint16_t>& out, std::vector<std::uint16_t>& cur, int pos, int left) {
    if (pos == K - 1) {
        cur[pos] = (std::uint16_t)left;
        out.insert(out.end(), cur.begin(), cur.end());
        return;
    }
    for (int m = 1; m <= left - (K - 1 - pos); ++m) {
        cur[pos] = (std::uint16_t)m;
        fill_compositions(K, R, out, cur, pos + 1, left - m);
    }
}

double composition_count(int K, int R) {
    // C(R-1, K-1)
    double c = 1.0;
    for (int i = 1; i <= K - 1; ++i) c *= double(R - i) / double(i);
    return c;
}

} // namespace

double simplex_grid_minimize(int K, int resolution, const std::function<double(const Vec&)>& obj,
                             Vec* argmin_lambda, bool parallel) {
    if (K < 1) throw InvalidInput("simplex_grid_minimize: K must be >= 1");
    if (resolution < K) throw InvalidInput("simplex_grid_minimize: resolution must be >= K");
    if (composition_count(K, resolution) > 2.5e7)
        throw InvalidInput("simplex_grid_minimize: grid too large; lower the resolution or K");

    std::vector<std::uint16_t> grid;
    std::vector<std::uint16_t> cur(K);
    fill_compositions(K, resolution, grid, cur, 0, resolution);
    const std::size_t n = grid.size() / K;

    auto lambda_at = [&](std::size_t i) {
        Vec lam(K);
        for (int k = 0; k < K; ++k) lam(k) = std::sqrt(double(grid[i * K + k]) / double(resolution));
        return lam;
    };
    auto [val, idx] = parallel_argmin(n, [&](std::size_t i) { return obj(lambda_at(i)); }, parallel);
    if (argmin_lambda) *argmin_lambda = lambda_at(idx);
    return val;
}

double oracle_grid_lambda(const Mat& W, const Vec& a, int L, int resolution,
                          Vec* argmin_lambda, bool parallel) {
    require_finite(W, "oracle_grid_lambda: W");
    require_finite(a, "oracle_grid_lambda: a");
    if (a.size() != W.rows()) throw InvalidInput("oracle_grid_lambda: a length must match W rows");
    if (L < 2) throw InvalidInput("oracle_grid_lambda: L must be >= 2");

    Mat A = a.asDiagonal() * W;
    std::vector<int> keep;
    for (int k = 0; k < A.rows(); ++k)
        if (A.row(k).norm() > 0.0) keep.push_back(k);
    if (keep.empty()) return 0.0;
    if ((int)keep.size() > 6) throw InvalidInput("oracle_grid_lambda: K > 6 after dropping zero rows");

    Mat Ak((int)keep.size(), (int)A.cols());
    for (std::size_t i = 0; i < keep.size(); ++i) Ak.row((int)i) = A.row(keep[i]);

    return simplex_grid_minimize(
        (int)keep.size(), resolution,
        [&](const Vec& lam) { return scale_objective_exact(scaled_rows(Ak, lam), L); },
        argmin_lambda, parallel);
}

// ---------------------------------------------------------------------------
// Phi_3 bounds

double phi3_dual_value(const Mat& W, const Vec& a, const Mat& Q) {
    require_finite(W, "phi3_dual_value: W");
    require_finite(a, "phi3_dual_value: a");
    require_finite(Q, "phi3_dual_value: Q");
    if (Q.rows() != W.rows() || Q.cols() != W.cols())
        throw InvalidInput("phi3_dual_value: Q must have the same shape as W");
    if (spectral_norm(Q) > 1.0 + 1e-9)
        throw InvalidInput("phi3_dual_value: Q is infeasible (spectral norm > 1)");
    double acc = 0.0;
    for (int k = 0; k < W.rows(); ++k)
        acc += std::pow(std::abs(a(k) * Q.row(k).dot(W.row(k))), 2.0 / 3.0);
    return acc;
}

namespace {

double dual_objective(const Mat& W, const Vec& a, const Mat& Q) {
    double acc = 0.0;
    for (int k = 0; k < W.rows(); ++k)
        acc += std::pow(std::abs(a(k) * Q.row(k).dot(W.row(k))), 2.0 / 3.0);
    return acc;
}

Mat dual_gradient(const Mat& W, const Vec& a, const Mat& Q) {
    const int K = (int)W.rows();
    Vec t(K);
    double tmax = 0.0;
    for (int k = 0; k < K; ++k) {
        t(k) = a(k) * Q.row(k).dot(W.row(k));
        tmax = std::max(tmax, std::abs(t(k)));
    }
    Mat G = Mat::Zero(W.rows(), W.cols());
    for (int k = 0; k < K; ++k) {
        // |t|^{2/3} has unbounded slope at 0; treat near-zero rows as flat
        if (std::abs(t(k)) < 1e-9 * tmax || t(k) == 0.0) continue;
        const double coef = (2.0 / 3.0) * std::pow(std::abs(t(k)), -1.0 / 3.0) *
                            (t(k) > 0 ? 1.0 : -1.0) * a(k);
        G.row(k) = coef * W.row(k);
    }
    return G;
}

} // namespace

std::pair<double, Mat> phi3_dual_ascend(const Mat& W, const Vec& a, const Phi3AscentOptions& opts,
                                        const std::optional<Vec>& lambda_hint) {
    require_finite(W, "phi3_dual_ascend: W");
    require_finite(a, "phi3_dual_ascend: a");
    if (a.size() != W.rows()) throw InvalidInput("phi3_dual_ascend: a length must match W rows");

    const double wnorm = spectral_norm(W);
    if (wnorm <= 0.0) return {0.0, Mat::Zero(W.rows(), W.cols())};
    const double step = opts.step_scale / wnorm;

    std::vector<Mat> starts;
    starts.push_back(W / wnorm);
    {
        Mat R = W;
        for (int k = 0; k < R.rows(); ++k) {
            const double n = R.row(k).norm();
            if (n > 0.0) R.row(k) /= n;
        }
        const double rn = spectral_norm(R);
        if (rn > 0.0) starts.push_back(R / std::max(rn, 1.0));
    }
    {
        SvdResult d = svd(Mat(a.asDiagonal() * W));
        starts.push_back(d.U * d.V.transpose());
    }
    if (lambda_hint && lambda_hint->size() == a.size() && lambda_hint->minCoeff() > 0.0) {
        Mat M = lambda_hint->cwiseInverse().asDiagonal() * (a.asDiagonal() * W);
        SvdResult d = svd(M);
        starts.push_back(d.U * d.V.transpose());
    }
    std::vector<std::uint64_t> hashes(W.rows());
    for (int k = 0; k < W.rows(); ++k) {
        std::uint64_t h = 0xA11CEull;
        for (int j = 0; j < W.cols(); ++j) h = hash_mix(h, W(k, j));
        hashes[k] = hash_mix(h, a(k));
    }
    int extra = 0;
    while ((int)starts.size() < opts.restarts) {
        Mat Q(W.rows(), W.cols());
        for (int k = 0; k < W.rows(); ++k) {
            Rng rng(splitmix64(opts.seed + 0x51ul * std::uint64_t(extra + 1)) ^ hashes[k]);
            for (int j = 0; j < W.cols(); ++j) Q(k, j) = rng.normal();
        }
        starts.push_back(project_spectral_ball(Q));
        ++extra;
    }
    if ((int)starts.size() > opts.restarts && opts.restarts >= 1) starts.resize(opts.restarts);

    struct Outcome {
        double value = 0.0;
        Mat Q;
    };
    std::vector<Outcome> outcomes = parallel_map<Outcome>(
        starts.size(),
        [&](std::size_t i) {
            Mat Q = project_spectral_ball(starts[i]);
            Outcome best{dual_objective(W, a, Q), Q};
            int since_improved = 0;
            for (int it = 0; it < opts.max_iters; ++it) {
                Q = project_spectral_ball(Q + step * dual_gradient(W, a, Q));
                const double v = dual_objective(W, a, Q);
                if (v > best.value * (1.0 + 1e-14) + 1e-300) {
                    best = {v, Q};
                    since_improved = 0;
                } else if (++since_improved > 60) {
                    break;
                }
            }
            return best;
        },
        opts.parallel);

    std::size_t best = 0;
    for (std::size_t i = 1; i < outcomes.size(); ++i)
        if (outcomes[i].value > outcomes[best].value) best = i;
    return {outcomes[best].value, outcomes[best].Q};
}

double phi3_upper_svd(const Mat& W, const Vec& a) {
    require_finite(W, "phi3_upper_svd: W");
    require_finite(a, "phi3_upper_svd: a");
    if (a.size() != W.rows()) throw InvalidInput("phi3_upper_svd: a length must match W rows");
    SvdResult d = svd(W);
    const int r = d.rank();
    double acc = 0.0;
    for (int j = 0; j < r; ++j) {
        double col = 0.0;
        for (int k = 0; k < W.rows(); ++k) col += std::abs(a(k) * d.U(k, j));
        acc += std::pow(d.sigma(j) * col, 2.0 / 3.0);
    }
    return acc;
}

double lpq_norm_form(const Mat& W, const Vec& a) {
    require_finite(W, "lpq_norm_form: W");
    require_finite(a, "lpq_norm_form: a");
    if (a.size() != W.rows()) throw InvalidInput("lpq_norm_form: a length must match W rows");
    SvdResult d = svd(W);
    const int r = d.rank();
    if (r == 0) return 0.0;
    Mat B = a.asDiagonal() * d.U.leftCols(r) * d.sigma.head(r).asDiagonal();
    double acc = 0.0;
    for (int j = 0; j < B.cols(); ++j) acc += std::pow(B.col(j).cwiseAbs().sum(), 2.0 / 3.0);
    return acc;
}

PhiBounds phi3_bounds(const Mat& W, const Vec& a, const PhiSolverOptions& solver_opts,
                      const Phi3AscentOptions& ascent_opts) {
    PhiBounds out;
    out.detail = phiL_numeric(W, a, 3, solver_opts);
    out.estimate = out.detail.value;
    std::optional<Vec> hint;
    if (out.detail.lambda_opt.size() == a.size()) hint = out.detail.lambda_opt;
    auto [lo, Q] = phi3_dual_ascend(W, a, ascent_opts, hint);
    out.lower = lo;
    out.Q_cert = Q;
    out.upper = phi3_upper_svd(W, a);
    return out;
}

} // namespace repcost
