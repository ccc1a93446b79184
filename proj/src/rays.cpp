#include "repcost/rays.hpp"

#include "repcost/errors.hpp"
#include "repcost/parallel.hpp"
#include "repcost/random.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

namespace repcost {

namespace {
constexpr double kPi = 3.141592653589793238462643383279502884;
}

double RayAlignedNet::a_l1(int ray) const {
    double acc = 0.0;
    for (std::size_t k = 0; k < ray_of_unit.size(); ++k)
        if (ray_of_unit[k] == ray) acc += std::abs(net.a((int)k));
    return acc;
}

RaysData gen_rays(const RaysConfig& cfg) {
    if (!(cfg.psi > kPi / 2.0 && cfg.psi < kPi))
        throw InvalidInput("gen_rays: psi must lie in (pi/2, pi)");
    if (cfg.d < 2) throw InvalidInput("gen_rays: need d >= 2");
    if (cfg.n1 < 1 || cfg.n2 < 1) throw InvalidInput("gen_rays: need at least one sample per ray");

    auto radii_for = [&](int n, const std::vector<double>& given) {
        std::vector<double> t(n);
        if (!given.empty()) {
            if ((int)given.size() != n) throw InvalidInput("gen_rays: radii length mismatch");
            t = given;
        } else {
            for (int i = 0; i < n; ++i)
                t[i] = (n == 1) ? 1.0 : 0.5 + 1.5 * double(i) / double(n - 1);
        }
        for (double v : t)
            if (!(v > 0.0)) throw InvalidInput("gen_rays: radii must be positive");
        return t;
    };
    auto labels_for = [&](int n, const std::vector<double>& given, const std::vector<double>& t, int ray) {
        std::vector<double> y(n);
        if (!given.empty()) {
            if ((int)given.size() != n) throw InvalidInput("gen_rays: labels length mismatch");
            return given;
        }
        Rng rng(splitmix64(cfg.seed) ^ (ray == 1 ? 0x1ecaf1ull : 0x2decaf2ull));
        const double phase = 0.3 + 0.5 * rng.uniform();
        const double freq = 1.1 + 0.6 * rng.uniform();
        for (int i = 0; i < n; ++i) y[i] = std::sin(freq * t[i] + phase);
        return y;
    };

    RaysData out;
    // the plane of the rays sits in the first two coordinates
    Vec w1 = Vec::Zero(cfg.d);
    w1(0) = 2.0 / std::sqrt(5.0);
    w1(1) = 1.0 / std::sqrt(5.0);
    Vec w2 = Vec::Zero(cfg.d);
    const double cs = std::cos(cfg.psi), sn = std::sin(cfg.psi);
    w2(0) = cs * w1(0) - sn * w1(1);
    w2(1) = sn * w1(0) + cs * w1(1);

    const std::vector<double> t1 = radii_for(cfg.n1, cfg.radii1);
    const std::vector<double> t2 = radii_for(cfg.n2, cfg.radii2);
    const std::vector<double> y1 = labels_for(cfg.n1, cfg.labels1, t1, 1);
    const std::vector<double> y2 = labels_for(cfg.n2, cfg.labels2, t2, 2);

    const int n = cfg.n1 + cfg.n2;
    out.X = Mat::Zero(cfg.d, n);
    out.y = Vec::Zero(n);
    out.ray.resize(n);
    for (int i = 0; i < cfg.n1; ++i) {
        out.X.col(i) = t1[i] * w1;
        out.y(i) = y1[i];
        out.ray[i] = 1;
    }
    for (int i = 0; i < cfg.n2; ++i) {
        out.X.col(cfg.n1 + i) = t2[i] * w2;
        out.y(cfg.n1 + i) = y2[i];
        out.ray[cfg.n1 + i] = 2;
    }
    out.w1 = w1;
    out.w2 = w2;
    return out;
}

ShallowNet fit_univariate_minnorm(const Vec& knots, const Vec& values) {
    require_finite(knots, "fit_univariate_minnorm: knots");
    require_finite(values, "fit_univariate_minnorm: values");
    if (knots.size() != values.size()) throw InvalidInput("fit_univariate_minnorm: length mismatch");
    const int n = (int)knots.size();
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int i, int j) { return knots(i) < knots(j); });

    std::vector<double> t{0.0}, y{0.0}; // profile pinned to the ray origin
    for (int i : order) {
        if (!(knots(i) > 0.0)) throw InvalidInput("fit_univariate_minnorm: knots must be positive");
        if (!t.empty() && std::abs(knots(i) - t.back()) <= 1e-12)
            throw InvalidInput("fit_univariate_minnorm: duplicate knots");
        t.push_back(knots(i));
        y.push_back(values(i));
    }

    // connect-the-dots: one unit per slope change, placed at the left knot
    std::vector<double> aa, bb;
    double prev_slope = 0.0;
    for (std::size_t m = 1; m < t.size(); ++m) {
        const double slope = (y[m] - y[m - 1]) / (t[m] - t[m - 1]);
        const double change = slope - prev_slope;
        if (change != 0.0) {
            aa.push_back(change);
            bb.push_back(-t[m - 1]);
        }
        prev_slope = slope;
    }
    const int K = std::max<int>((int)aa.size(), 1);
    ShallowNet net;
    net.W = Mat::Ones(K, 1);
    net.a = Vec::Zero(K);
    net.b = Vec::Zero(K);
    net.c = 0.0;
    for (std::size_t k = 0; k < aa.size(); ++k) {
        net.a((int)k) = aa[k];
        net.b((int)k) = bb[k];
    }
    return net;
}

RayAlignedNet build_f_per_ray(const RaysData& data) {
    const int n = (int)data.X.cols();
    RayAlignedNet out;
    std::vector<Mat> rows;
    std::vector<double> a, b;
    for (int ray = 1; ray <= 2; ++ray) {
        const Vec& w = (ray == 1) ? data.w1 : data.w2;
        std::vector<double> tv, yv;
        for (int i = 0; i < n; ++i)
            if (data.ray[i] == ray) {
                tv.push_back(w.dot(data.X.col(i)));
                yv.push_back(data.y(i));
            }
        if (tv.empty()) continue;
        Vec t = Eigen::Map<Vec>(tv.data(), (long)tv.size());
        Vec y = Eigen::Map<Vec>(yv.data(), (long)yv.size());
        ShallowNet prof = fit_univariate_minnorm(t, y);
        for (int k = 0; k < prof.units(); ++k) {
            if (prof.a(k) == 0.0) continue;
            rows.push_back(w.transpose());
            a.push_back(prof.a(k));
            b.push_back(prof.b(k));
            out.ray_of_unit.push_back(ray);
        }
    }
    if (rows.empty()) throw ConstructionInfeasible("build_f_per_ray: no active units (all labels zero?)");

    ShallowNet net;
    net.W = Mat((int)rows.size(), data.X.rows());
    net.a = Vec((int)rows.size());
    net.b = Vec((int)rows.size());
    net.c = 0.0;
    for (std::size_t k = 0; k < rows.size(); ++k) {
        net.W.row((int)k) = rows[k];
        net.a((int)k) = a[k];
        net.b((int)k) = b[k];
    }
    out.net = std::move(net);

    // audit: no unit may activate on the opposite ray, and the fit is exact
    for (std::size_t k = 0; k < out.ray_of_unit.size(); ++k)
        for (int i = 0; i < n; ++i)
            if (data.ray[i] != out.ray_of_unit[k] &&
                out.net.W.row((int)k).dot(data.X.col(i)) + out.net.b((int)k) > 0.0)
                throw ConstructionInfeasible("build_f_per_ray: unit " + std::to_string(k) +
                                             " activates across rays");
    for (int i = 0; i < n; ++i)
        if (std::abs(eval(out.net, Vec(data.X.col(i))) - data.y(i)) > 1e-8)
            throw ConstructionInfeasible("build_f_per_ray: interpolation failed at sample " + std::to_string(i));
    return out;
}

ShallowNet build_g_w0(const RayAlignedNet& f, const Vec& w1, const Vec& w2) {
    Vec w0 = w1 - w2;
    const double norm = w0.norm();
    if (norm <= 1e-12) throw InvalidInput("build_g_w0: w1 ~ -w2, the difference direction is degenerate");
    w0 /= norm;

    ShallowNet g = f.net;
    for (int k = 0; k < g.units(); ++k) {
        const int ray = f.ray_of_unit[(std::size_t)k];
        const Vec& wj = (ray == 1) ? w1 : w2;
        const double align = std::abs(wj.dot(w0));
        if (align <= 1e-12) throw ConstructionInfeasible("build_g_w0: ray direction orthogonal to w0");
        g.W.row(k) = (ray == 1 ? 1.0 : -1.0) * w0.transpose();
        g.a(k) = f.net.a(k) / align;
        g.b(k) = f.net.b(k) * align;
    }
    return g;
}

double phi3_g_closed(double theta, double a_l1) {
    if (!(theta > 0.0 && theta <= kPi / 2.0 + 1e-12))
        throw InvalidInput("phi3_g_closed: theta must lie in (0, pi/2]");
    if (!(a_l1 > 0.0)) throw InvalidInput("phi3_g_closed: |a|_1 must be positive");
    return std::pow(a_l1 / std::cos(theta / 2.0), 2.0 / 3.0);
}

bool theta_condition(double theta, double a1_l1, double a2_l1) {
    if (!(theta > 0.0 && theta <= kPi / 2.0 + 1e-12))
        throw InvalidInput("theta_condition: theta must lie in (0, pi/2]");
    if (!(a1_l1 > 0.0 && a2_l1 > 0.0)) throw InvalidInput("theta_condition: norms must be positive");
    const double c = std::cos(theta / 2.0);
    const double lhs = 1.0 / (c * c);
    const double total = a1_l1 + a2_l1;
    const double rhs = 1.0 + 4.0 * (a1_l1 * a2_l1 / (total * total)) * std::abs(std::sin(theta));
    return lhs <= rhs + 1e-12;
}

double phi3_f_lower_closed(double theta, double a1_l1, double a2_l1) {
    const double total = a1_l1 + a2_l1;
    return std::cbrt(total * total + 4.0 * a1_l1 * a2_l1 * std::abs(std::sin(theta)));
}

RaysAnalysis analyze_rays(const RaysData& data, const PhiSolverOptions& solver_opts,
                          const Phi3AscentOptions& ascent_opts) {
    RaysAnalysis out;
    out.psi = std::acos(data.w1.dot(data.w2));
    out.theta = kPi - out.psi;

    RayAlignedNet f = build_f_per_ray(data);
    ShallowNet g = build_g_w0(f, data.w1, data.w2);

    out.a1_norm = f.a_l1(1);
    out.a2_norm = f.a_l1(2);
    out.R2_f = phi2(f.net.W, f.net.a);
    out.R2_g = phi2(g.W, g.a);
    out.phi3_f = phi3_bounds(f.net.W, f.net.a, solver_opts, ascent_opts);
    out.phi3_g_closed = phi3_g_closed(out.theta, out.R2_f);
    out.phi3_g_est = phiL_numeric(g.W, g.a, 3, solver_opts);
    out.condition_holds = theta_condition(out.theta, out.a1_norm, out.a2_norm);
    return out;
}

std::vector<SweepRow> sweep_theta(const RaysConfig& cfg, const std::vector<double>& theta_grid,
                                  const PhiSolverOptions& solver_opts,
                                  const Phi3AscentOptions& ascent_opts, bool parallel) {
    for (double th : theta_grid)
        if (!(th > 0.0 && th <= kPi / 2.0 + 1e-12))
            throw InvalidInput("sweep_theta: grid must lie within (0, pi/2]");

    return parallel_map<SweepRow>(
        theta_grid.size(),
        [&](std::size_t i) {
            SweepRow row;
            row.theta = theta_grid[i];
            row.psi = kPi - theta_grid[i];
            try {
                RaysConfig point = cfg;
                point.psi = row.psi;
                point.seed = cfg.seed + i;
                RaysAnalysis an = analyze_rays(gen_rays(point), solver_opts, ascent_opts);
                row.R2_f = an.R2_f;
                row.R2_g = an.R2_g;
                row.phi3_f_lower = an.phi3_f.lower;
                row.phi3_f_est = an.phi3_f.estimate;
                row.phi3_f_upper = an.phi3_f.upper;
                row.phi3_g_closed = an.phi3_g_closed;
                row.phi3_g_est = an.phi3_g_est.value;
                row.cond_holds = an.condition_holds;
                row.a1_norm = an.a1_norm;
                row.a2_norm = an.a2_norm;
                if (!an.condition_holds)
                    row.status = "ok";
                else if (an.phi3_g_closed < an.phi3_f.lower)
                    row.status = "certified";
                else if (an.phi3_g_closed < an.phi3_f.estimate)
                    row.status = "estimate-only";
                else
                    row.status = "violated";
            } catch (const std::exception& e) {
                row.status = std::string("error:") + e.what();
            }
            return row;
        },
        parallel);
}

std::string sweep_csv(const std::vector<SweepRow>& rows) {
    std::string out = "theta,psi,R2_f,R2_g,phi3_f_lower,phi3_f_est,phi3_f_upper,phi3_g_closed,phi3_g_est,cond_holds,status\n";
    char buf[512];
    for (const SweepRow& r : rows) {
        std::snprintf(buf, sizeof buf, "%.12g,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g,%d,%s\n",
                      r.theta, r.psi, r.R2_f, r.R2_g, r.phi3_f_lower, r.phi3_f_est, r.phi3_f_upper,
                      r.phi3_g_closed, r.phi3_g_est, r.cond_holds ? 1 : 0, r.status.c_str());
        out += buf;
    }
    return out;
}

} // namespace repcost
