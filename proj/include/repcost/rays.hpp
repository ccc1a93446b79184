#pragma once

#include "repcost/network.hpp"
#include "repcost/phi.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace repcost {

// Training features on two rays {t w1 : t > 0} and {t w2 : t > 0} with
// obtuse separation (w1^T w2 < 0). The ray-aligned interpolant f keeps a
// piecewise-linear profile per ray; the aligned interpolant g replaces all
// inner weights with +-w0, w0 = (w1 - w2)/|w1 - w2|. With theta = pi - psi
// (the acute angle between the lines), |w_j^T w0| = cos(theta/2).

struct RaysConfig {
    double psi = 2.0943951023931953; // separation angle in (pi/2, pi); default 2*pi/3
    int n1 = 4;
    int n2 = 4;
    int d = 2;
    std::vector<double> radii1, radii2;   // optional; default even spacing in [0.5, 2]
    std::vector<double> labels1, labels2; // optional; default smooth seeded generator
    std::uint64_t seed = 1;

    double theta() const { return 3.141592653589793238 - psi; }
};

struct RaysData {
    Mat X;                 // d x n, samples as columns (ray-1 block first)
    Vec y;                 // n labels
    Vec w1, w2;            // unit ray directions
    std::vector<int> ray;  // 1 or 2 per column
};

/// Ray-aligned interpolant plus which ray each unit serves.
struct RayAlignedNet {
    ShallowNet net;
    std::vector<int> ray_of_unit; // 1 or 2
    double a_l1(int ray) const;
};

struct RaysAnalysis {
    double theta = 0, psi = 0;
    double R2_f = 0, R2_g = 0;
    PhiBounds phi3_f;
    double phi3_g_closed = 0;
    PhiEstimate phi3_g_est;
    bool condition_holds = false;
    double a1_norm = 0, a2_norm = 0;
};

struct SweepRow {
    double theta = 0, psi = 0;
    double R2_f = 0, R2_g = 0;
    double phi3_f_lower = 0, phi3_f_est = 0, phi3_f_upper = 0;
    double phi3_g_closed = 0, phi3_g_est = 0;
    bool cond_holds = false;
    std::string status;          // "certified", "estimate-only", "violated", "ok", "error:..."
    double a1_norm = 0, a2_norm = 0; // carried for analysis; not part of the CSV schema
};

RaysData gen_rays(const RaysConfig& cfg);

/// Piecewise-linear interpolant of (t_i, y_i), t_i > 0 distinct, pinned to
/// (0, 0) and expressed as a 1-D ReLU sum with at most n units (slope
/// changes at 0 and the interior knots); linear extrapolation past the last
/// knot. This is the minimal-path-norm connect-the-dots profile.
ShallowNet fit_univariate_minnorm(const Vec& knots, const Vec& values);

/// Interpolant with every unit's weight vector on its own ray and
/// nonpositive ray-coordinate biases, so no unit activates on the opposite
/// ray (audited; a violation throws ConstructionInfeasible).
RayAlignedNet build_f_per_ray(const RaysData& data);

/// Replace ray-j units with +-w0 rows: a~ = a/|w_j^T w0|, b~ = |w_j^T w0| b.
/// Interpolates the same data; rank-one inner weights.
ShallowNet build_g_w0(const RayAlignedNet& f, const Vec& w1, const Vec& w2);

/// Exact Phi_3 of the aligned interpolant: (|a|_1 / cos(theta/2))^{2/3}.
double phi3_g_closed(double theta, double a_l1);

/// sec^2(theta/2) <= 1 + 4 (|a1|_1 |a2|_1 / |a|_1^2) |sin theta|; when it
/// holds the aligned interpolant has the smaller Phi_3.
bool theta_condition(double theta, double a1_l1, double a2_l1);

/// Appendix-style lower bound (|a|_1^2 + 4 |a1|_1 |a2|_1 |sin theta|)^{1/3}
/// on Phi_3 of a two-ray-aligned interpolant.
double phi3_f_lower_closed(double theta, double a1_l1, double a2_l1);

RaysAnalysis analyze_rays(const RaysData& data, const PhiSolverOptions& solver_opts = {},
                          const Phi3AscentOptions& ascent_opts = {});

/// One analysis per theta grid point (grid within (0, pi/2]); per-point
/// construction failures are recorded in the row status and the sweep
/// continues. Points run in parallel, emitted in grid order.
std::vector<SweepRow> sweep_theta(const RaysConfig& cfg, const std::vector<double>& theta_grid,
                                  const PhiSolverOptions& solver_opts = {},
                                  const Phi3AscentOptions& ascent_opts = {}, bool parallel = true);

/// CSV with columns theta, psi, R2_f, R2_g, phi3_f_lower, phi3_f_est,
/// phi3_f_upper, phi3_g_closed, phi3_g_est, cond_holds, status.
std::string sweep_csv(const std::vector<SweepRow>& rows);

} // namespace repcost
