// Times the serial reference against the OpenMP fan-out on the three hot
// loops: the simplex grid oracle, multi-start scale solves, and a rays sweep.
// Both paths produce identical values (ordered reduction); only time differs.

#include "repcost/parallel.hpp"
#include "repcost/phi.hpp"
#include "repcost/random.hpp"
#include "repcost/rays.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>

using namespace repcost;

namespace {

double now_s() {
    return std::chrono::duration<double>(std::chrono::steady_clock::now().time_since_epoch()).count();
}

Mat random_unit_rows(std::uint64_t seed, int K, int d) {
    Rng rng(seed);
    Mat W(K, d);
    for (int i = 0; i < K; ++i) {
        for (int j = 0; j < d; ++j) W(i, j) = rng.normal();
        W.row(i).normalize();
    }
    return W;
}

struct Timing {
    double serial = 0, parallel = 0, value_serial = 0, value_parallel = 0;
};

void report(const char* name, const Timing& t) {
    std::printf("%-28s serial %8.3f s   omp %8.3f s   speedup %5.2fx   values %s\n", name, t.serial,
                t.parallel, t.serial / t.parallel, t.value_serial == t.value_parallel ? "identical" : "DIFFER");
}

} // namespace

int main() {
    std::printf("openmp backend: %s\n", openmp_enabled() ? "on" : "off (serial only)");

    {
        Mat W = random_unit_rows(41, 4, 3);
        Rng rng(42);
        Vec a(4);
        for (int i = 0; i < 4; ++i) a(i) = 0.3 + rng.uniform();
        Timing t;
        double t0 = now_s();
        t.value_serial = oracle_grid_lambda(W, a, 3, 180, nullptr, false);
        t.serial = now_s() - t0;
        t0 = now_s();
        t.value_parallel = oracle_grid_lambda(W, a, 3, 180, nullptr, true);
        t.parallel = now_s() - t0;
        report("grid oracle K=4 res=180", t);
    }
    {
        Mat W = random_unit_rows(43, 8, 5);
        Rng rng(44);
        Vec a(8);
        for (int i = 0; i < 8; ++i) a(i) = (rng.uniform() < 0.5 ? -1 : 1) * (0.3 + rng.uniform());
        PhiSolverOptions serial_opts, par_opts;
        serial_opts.parallel = false;
        par_opts.parallel = true;
        serial_opts.restarts = par_opts.restarts = 40;
        Timing t;
        double t0 = now_s();
        t.value_serial = phiL_numeric(W, a, 4, serial_opts).value;
        t.serial = now_s() - t0;
        t0 = now_s();
        t.value_parallel = phiL_numeric(W, a, 4, par_opts).value;
        t.parallel = now_s() - t0;
        report("40-restart solve K=8 L=4", t);
    }
    {
        std::vector<double> thetas;
        for (int i = 0; i < 12; ++i) thetas.push_back((0.08 + 0.4 * i / 11.0) * 3.14159265358979);
        RaysConfig cfg;
        cfg.seed = 7;
        PhiSolverOptions sopts;
        sopts.parallel = false;
        Timing t;
        double t0 = now_s();
        auto rows_s = sweep_theta(cfg, thetas, sopts, {}, false);
        t.serial = now_s() - t0;
        t0 = now_s();
        auto rows_p = sweep_theta(cfg, thetas, sopts, {}, true);
        t.parallel = now_s() - t0;
        t.value_serial = rows_s.back().phi3_f_est;
        t.value_parallel = rows_p.back().phi3_f_est;
        report("rays sweep 12 points", t);
    }
    return 0;
}
