#pragma once

#include "repcost/network.hpp"
#include "repcost/phi.hpp"

#include <utility>
#include <vector>

namespace repcost {

/// Orthonormal basis of a subspace S of the input space.
struct ProjectionSpec {
    Mat basis; // d x s, orthonormal columns (1 <= s <= d, Gram deviation <= 1e-10)

    void validate(int input_dim) const;
    Mat projector() const { return basis * basis.transpose(); } // P_S
};

struct ActiveSets {
    std::vector<std::vector<int>> active;   // sample indices with pre-activation > 1e-12
    std::vector<std::vector<int>> boundary; // |pre-activation| <= 1e-12: excluded, reported
};

/// Projection of a network's units onto S with outer weights rescaled so
/// the fit on the training samples is preserved.
struct GsConstruction {
    ShallowNet g;      // tilde parameters: rows P_S w_k / |P_S w_k|
    Vec r;             // per-unit rescale factors
    Vec q;             // q_k = r_k |P_S w_k|, the data-alignment weights
    ShallowNet source; // the network the construction started from
};

/// max over probes of |f(x) - f(P_S x)|; 0 means the function is invariant
/// orthogonal to S on the probe set.
double project_data_check(const ShallowNet& net, const ProjectionSpec& S, const std::vector<Vec>& probes);

/// Samples (columns of X, d x n) strictly active under each unit.
ActiveSets active_sets(const ShallowNet& net, const Mat& X);

/// Alignment factors r_k = (w_k^T Sig_k P_S w_k) / (w_k^T Sig_k w_k |P_S w_k|)
/// with Sig_k = X_k X_k^T over unit k's active samples, and q_k = r_k |P_S w_k|.
/// Requires unit-norm rows (use normalize_units first). Throws
/// ConstructionInfeasible naming the unit on an empty active set, a
/// projected weight ~ 0, or a degenerate denominator.
std::pair<Vec, Vec> rk_qk(const ShallowNet& net, const Mat& X, const ProjectionSpec& S);

/// The projected network: w~_k = P_S w_k / |P_S w_k|, a~_k = a_k / r_k,
/// b~_k = b_k r_k. Per-unit agreement with the source is verified on every
/// sample (tolerance 1e-8); a mismatch (projection changed an active set)
/// raises AgreementViolated rather than returning a non-interpolant.
GsConstruction build_g(const ShallowNet& net, const Mat& X, const ProjectionSpec& S);

/// Per-unit flags |q_k| <= |P_S w_k|; when all hold, the path norm of the
/// source is a lower bound for the path norm of the projected network.
std::vector<bool> r2_condition(const ShallowNet& net, const Mat& X, const ProjectionSpec& S);

/// Phi_3 of the projected network, computed in source coordinates as
/// inf_lambda |D_q^{-1} (D_lambda^{-1} D_a W) P_S|_*^{2/3} and cross-checked
/// against phiL_numeric on the projected network itself (1e-3 relative);
/// a larger discrepancy raises AgreementViolated.
PhiEstimate phi3_tilde(const ShallowNet& net, const Mat& X, const ProjectionSpec& S,
                       const PhiSolverOptions& opts = {});

} // namespace repcost
