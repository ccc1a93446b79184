#pragma once

#include "repcost/linalg.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <utility>
#include <vector>

namespace repcost {

// The depth-L unit-alignment cost of an inner/outer weight pair (W, a):
//
//     Phi_L(W, a) = inf over positive unit-norm lambda of
//                   |D_lambda^{-1} D_a W|_{S^q}^{2/L},   q = 2/(L-1),
//
// the rescaling-invariant share of the L-layer weight cost carried by one
// ReLU layer after L-1 linear layers. Phi_2 is the path norm and has a
// closed form; for L >= 3 only structured W does, so the general case is
// solved numerically and sandwiched between a dual lower bound and an
// SVD-based upper bound.

struct PhiSolverOptions {
    int restarts = 20;
    int max_iters = 5000;
    double rel_tol = 1e-10;      // relative decrease counted as progress
    int stall_iters = 20;        // consecutive no-progress iterations before stopping
    double lambda_floor = 1e-6;  // positivity clamp on the scale vector
    std::uint64_t seed = 20260810;
    bool parallel = true;        // restarts fan out over OpenMP
};

struct PhiEstimate {
    double value = 0.0;
    Vec lambda_opt;              // positive, unit 2-norm; empty if every unit dropped
    bool converged = true;
    int restarts_used = 0;
    double best_restart_gap = 0.0; // spread (max - min) of restart optima

    // Scale entries that finished within 10x the floor; the objective is
    // re-evaluated with those units removed for comparison.
    bool boundary = false;
    std::vector<int> boundary_units;
    double boundary_limit_value = 0.0;
};

struct Phi3AscentOptions {
    int restarts = 10;
    int max_iters = 400;
    double step_scale = 0.1;     // step = step_scale / |W|_2
    std::uint64_t seed = 20260810;
    bool parallel = true;
};

struct PhiBounds {
    double lower = 0.0;
    double estimate = 0.0;
    double upper = 0.0;
    Mat Q_cert;                  // dual certificate achieving `lower`, |Q|_2 <= 1
    PhiEstimate detail;          // the numeric estimate behind `estimate`
};

/// Path norm: sum_k |a_k| |w_k|.
double phi2(const Mat& W, const Vec& a);

/// Closed form when the rows of W cluster (1e-8 angular tolerance) into a
/// mutually orthonormal set {±v_1..±v_m}: sum_j |a_j|_1^{2/L} over clusters.
/// Throws StructureAbsent when the clustering or orthonormality fails.
double phiL_grouped(const Mat& W, const Vec& a, int L);

/// Multi-start smoothed gradient descent on the scale vector. L = 2
/// short-circuits to the path norm (the optimum is analytic). Exact-zero
/// rows of D_a W are dropped up front; if all drop the value is 0.
PhiEstimate phiL_numeric(const Mat& W, const Vec& a, int L, const PhiSolverOptions& opts = {});

/// Brute-force reference: minimizes the same objective over the simplex grid
/// lambda_k = sqrt(m_k / resolution), m_k >= 1 integers summing to resolution.
/// Exponential in K; requires K <= 6 after dropping zero rows.
double oracle_grid_lambda(const Mat& W, const Vec& a, int L, int resolution,
                          Vec* argmin_lambda = nullptr, bool parallel = true);

/// Minimize obj(lambda) over the same simplex grid; returns the minimum and
/// optionally the minimizing lambda. Ties break toward the lexicographically
/// first grid point, so results are thread-count independent.
double simplex_grid_minimize(int K, int resolution, const std::function<double(const Vec&)>& obj,
                             Vec* argmin_lambda = nullptr, bool parallel = true);

/// Dual objective sum_k |a_k <q_k, w_k>|^{2/3} at a feasible Q (|Q|_2 <= 1 + 1e-9).
/// Any feasible Q yields a valid lower bound on Phi_3(W, a).
double phi3_dual_value(const Mat& W, const Vec& a, const Mat& Q);

/// Projected-ascent maximization of the dual objective over the spectral
/// ball. Every iterate is projected, so the returned value is a valid lower
/// bound regardless of convergence. `lambda_hint` (e.g. from phiL_numeric)
/// seeds one start with the primal certificate U V^T.
std::pair<double, Mat> phi3_dual_ascend(const Mat& W, const Vec& a,
                                        const Phi3AscentOptions& opts = {},
                                        const std::optional<Vec>& lambda_hint = std::nullopt);

/// Upper bound from the thin SVD W = U S V^T:
/// sum_j (sigma_j sum_k |a_k u_kj|)^{2/3}; tight under the grouped structure.
double phi3_upper_svd(const Mat& W, const Vec& a);

/// Same bound written as the entrywise l_{1,2/3} quasi-norm of B = D_a U S;
/// an independent code path kept for cross-validation.
double lpq_norm_form(const Mat& W, const Vec& a);

/// Lower bound (dual ascent), numeric estimate (L = 3), and SVD upper bound.
PhiBounds phi3_bounds(const Mat& W, const Vec& a, const PhiSolverOptions& solver_opts = {},
                      const Phi3AscentOptions& ascent_opts = {});

/// Core solver behind phiL_numeric, exposed for callers that already hold
/// the row-scaled matrix A (rows a_k w_k): minimizes
/// |D_lambda^{-1} A|_{S^q}^{2/L} over positive unit-norm lambda.
/// `restart_weights` feeds the deterministic warm starts (typically |a|).
PhiEstimate minimize_over_unit_scales(const Mat& A, const Vec& restart_weights, int L,
                                      const PhiSolverOptions& opts = {});

} // namespace repcost
