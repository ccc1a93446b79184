#include "repcost/subspace.hpp"

#include "repcost/errors.hpp"

#include <cmath>
#include <string>

namespace repcost {

void ProjectionSpec::validate(int input_dim) const {
    require_finite(basis, "ProjectionSpec.basis");
    if (basis.rows() != input_dim)
        throw InvalidInput("ProjectionSpec: basis rows must equal the input dimension");
    if (basis.cols() < 1 || basis.cols() > basis.rows())
        throw InvalidInput("ProjectionSpec: need 1 <= dim(S) <= d");
    if (gram_deviation(basis) > 1e-10)
        throw InvalidInput("ProjectionSpec: basis columns are not orthonormal");
}

double project_data_check(const ShallowNet& net, const ProjectionSpec& S, const std::vector<Vec>& probes) {
    net.validate();
    S.validate(net.input_dim());
    const Mat P = S.projector();
    double worst = 0.0;
    for (const Vec& x : probes)
        worst = std::max(worst, std::abs(eval(net, x) - eval(net, Vec(P * x))));
    return worst;
}

ActiveSets active_sets(const ShallowNet& net, const Mat& X) {
    net.validate();
    require_finite(X, "active_sets: X");
    if (X.rows() != net.input_dim()) throw InvalidInput("active_sets: X rows must equal input dim");
    constexpr double tie = 1e-12;
    ActiveSets out;
    out.active.resize(net.units());
    out.boundary.resize(net.units());
    for (int k = 0; k < net.units(); ++k) {
        for (int i = 0; i < X.cols(); ++i) {
            const double pre = net.W.row(k).dot(X.col(i)) + net.b(k);
            if (std::abs(pre) <= tie)
                out.boundary[k].push_back(i);
            else if (pre > 0.0)
                out.active[k].push_back(i);
        }
    }
    return out;
}

namespace {

void require_unit_rows(const ShallowNet& net, const char* what) {
    for (int k = 0; k < net.units(); ++k)
        if (std::abs(net.W.row(k).norm() - 1.0) > 1e-10)
            throw InvalidInput(std::string(what) +
                               ": rows must be unit norm (apply normalize_units first); offending unit " +
                               std::to_string(k));
}

} // namespace

std::pair<Vec, Vec> rk_qk(const ShallowNet& net, const Mat& X, const ProjectionSpec& S) {
    net.validate();
    S.validate(net.input_dim());
    require_unit_rows(net, "rk_qk");
    const ActiveSets act = active_sets(net, X);
    const Mat P = S.projector();

    const int K = net.units();
    Vec r(K), q(K);
    for (int k = 0; k < K; ++k) {
        const auto& idx = act.active[k];
        if (idx.empty())
            throw ConstructionInfeasible("rk_qk: unit " + std::to_string(k) + " has an empty active set");
        Mat Xk((int)X.rows(), (int)idx.size());
        for (std::size_t i = 0; i < idx.size(); ++i) Xk.col((int)i) = X.col(idx[i]);
        const Mat Sig = Xk * Xk.transpose();
        const Vec w = net.W.row(k).transpose();
        const Vec p = P * w;
        const double pnorm = p.norm();
        if (pnorm <= 1e-10)
            throw ConstructionInfeasible("rk_qk: unit " + std::to_string(k) + " projects to ~0");
        const double denom = w.dot(Sig * w);
        if (denom <= 1e-12)
            throw ConstructionInfeasible("rk_qk: unit " + std::to_string(k) + " has a degenerate denominator");
        const double num = w.dot(Sig * p);
        r(k) = num / (denom * pnorm);
        q(k) = r(k) * pnorm;
    }
    return {r, q};
}

GsConstruction build_g(const ShallowNet& net, const Mat& X, const ProjectionSpec& S) {
    auto [r, q] = rk_qk(net, X, S);
    for (int k = 0; k < r.size(); ++k)
        if (std::abs(r(k)) <= 1e-8)
            throw ConstructionInfeasible("build_g: r ~ 0 at unit " + std::to_string(k));

    const Mat P = S.projector();
    ShallowNet g = net;
    for (int k = 0; k < net.units(); ++k) {
        const Vec p = P * net.W.row(k).transpose();
        g.W.row(k) = p.transpose() / p.norm();
        g.a(k) = net.a(k) / r(k);
        g.b(k) = net.b(k) * r(k);
    }

    // The construction preserves the fit only when projection leaves every
    // unit's active set intact; verify per unit on every sample.
    for (int k = 0; k < net.units(); ++k) {
        for (int i = 0; i < X.cols(); ++i) {
            const double lhs = net.a(k) * std::max(0.0, net.W.row(k).dot(X.col(i)) + net.b(k));
            const double rhs = g.a(k) * std::max(0.0, g.W.row(k).dot(X.col(i)) + g.b(k));
            if (std::abs(lhs - rhs) > 1e-8 * std::max(1.0, std::abs(lhs)))
                throw AgreementViolated("build_g: unit " + std::to_string(k) + " disagrees with its source on sample " +
                                        std::to_string(i));
        }
    }
    return GsConstruction{std::move(g), std::move(r), std::move(q), net};
}

std::vector<bool> r2_condition(const ShallowNet& net, const Mat& X, const ProjectionSpec& S) {
    auto [r, q] = rk_qk(net, X, S);
    const Mat P = S.projector();
    std::vector<bool> flags(net.units());
    for (int k = 0; k < net.units(); ++k) {
        const double pnorm = (P * net.W.row(k).transpose()).norm();
        flags[k] = std::abs(q(k)) <= pnorm + 1e-12;
    }
    return flags;
}

PhiEstimate phi3_tilde(const ShallowNet& net, const Mat& X, const ProjectionSpec& S,
                       const PhiSolverOptions& opts) {
    GsConstruction gs = build_g(net, X, S);

    // source-coordinate form D_q^{-1} D_a W P_S, row-identical to D_a~ W~
    const Mat P = S.projector();
    Mat A = gs.q.cwiseInverse().asDiagonal() * Mat(net.a.asDiagonal() * net.W) * P;
    PhiEstimate tilde = minimize_over_unit_scales(A, gs.g.a.cwiseAbs(), 3, opts);

    PhiEstimate direct = phiL_numeric(gs.g.W, gs.g.a, 3, opts);
    const double scale = std::max({1.0, tilde.value, direct.value});
    if (std::abs(tilde.value - direct.value) > 1e-3 * scale)
        throw AgreementViolated("phi3_tilde: source-coordinate and projected-network paths disagree (" +
                                std::to_string(tilde.value) + " vs " + std::to_string(direct.value) + ")");
    return tilde;
}

} // namespace repcost
