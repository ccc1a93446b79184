#pragma once

#include <nlohmann/json_fwd.hpp>

#include <string>
#include <vector>

namespace repcost {

/// One measured assertion inside a suite. `measured` is compared against
/// `limit` with the direction baked into the producing suite; time-kind
/// checks carry wall-clock seconds and are kept out of report files.
struct CheckResult {
    std::string name;
    bool pass = false;
    double measured = 0.0;
    double limit = 0.0;
    std::string note;
    bool is_time = false;
};

struct SuiteReport {
    std::string suite;
    std::vector<CheckResult> checks;
    double seconds = 0.0;

    bool passed() const;
};

// Suites, one per structural claim the library is expected to reproduce.
SuiteReport suite_univariate(bool parallel = true);        // depth collapse for 1-D inputs
SuiteReport suite_grouped(bool parallel = true);           // grouped closed form vs numeric
SuiteReport suite_sandwich(bool parallel = true);          // dual lower / numeric / SVD upper ordering
SuiteReport suite_oracle(bool parallel = true);            // numeric solver vs simplex grid search
SuiteReport suite_lambda_lemmas(bool parallel = true);     // analytic scale-vector optima on the grid
SuiteReport suite_rankone_pairs(bool parallel = true);     // aligned beats unaligned at equal path norm
SuiteReport suite_rays(bool parallel = true);              // two-rays sweep relations
SuiteReport suite_factorization(bool parallel = true);     // balanced factorization identities
SuiteReport suite_colinear_training(bool parallel = true); // training on subspace data aligns units
SuiteReport suite_depth_trend(bool parallel = true);       // deeper linear stacks align more
SuiteReport suite_gradient_check(bool parallel = true);    // trainer gradients vs central differences

std::vector<std::string> suite_names();
SuiteReport run_suite(const std::string& name, bool parallel = true);
std::vector<SuiteReport> run_suites(const std::vector<std::string>& names, bool parallel = true);

/// Machine-readable report. Time-kind checks are emitted without their
/// measured value so rerunning a command reproduces the file byte for byte.
nlohmann::json report_json(const std::vector<SuiteReport>& reports);

} // namespace repcost
