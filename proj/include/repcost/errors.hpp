#pragma once

#include <stdexcept>
#include <string>

namespace repcost {

/// Bad numeric input: non-finite entries, dimension mismatch, parameter out of range.
struct InvalidInput : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// The weight matrix does not have the clustered ± orthonormal-row structure.
struct StructureAbsent : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A subspace construction cannot be carried out (empty active set, projected
/// weight ~ 0, degenerate denominator, r_k ~ 0). Message names the unit.
struct ConstructionInfeasible : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// The projected network disagrees with its source on a training sample.
struct AgreementViolated : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Training loss became non-finite.
struct TrainingDiverged : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace repcost
