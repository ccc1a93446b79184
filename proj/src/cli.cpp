#include "repcost/cli.hpp"

#include "repcost/errors.hpp"
#include "repcost/io.hpp"
#include "repcost/network.hpp"
#include "repcost/phi.hpp"
#include "repcost/rays.hpp"
#include "repcost/subspace.hpp"
#include "repcost/trainer.hpp"
#include "repcost/verify.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <ostream>

namespace repcost {

namespace {

using nlohmann::json;

// net files may hold either schema; phi-style commands collapse deep nets
ShallowNet load_shallow(const std::string& path) {
    json j = json::parse(read_text(path));
    if (j.contains("layers")) return collapse(deep_from_json(j));
    return shallow_from_json(j);
}

json phi_estimate_json(const PhiEstimate& est) {
    json j{{"phi", est.value},
           {"converged", est.converged},
           {"restarts", est.restarts_used},
           {"best_restart_gap", est.best_restart_gap},
           {"boundary", est.boundary}};
    j["lambda"] = vec_to_json(est.lambda_opt.size() ? est.lambda_opt : Vec());
    return j;
}

struct SolverFlags {
    int restarts = PhiSolverOptions{}.restarts;
    int max_iters = PhiSolverOptions{}.max_iters;
    std::uint64_t seed = PhiSolverOptions{}.seed;
    bool serial = false;

    PhiSolverOptions options() const {
        PhiSolverOptions o;
        o.restarts = restarts;
        o.max_iters = max_iters;
        o.seed = seed;
        o.parallel = !serial;
        return o;
    }
    void attach(CLI::App* cmd) {
        cmd->add_option("--restarts", restarts, "solver restarts");
        cmd->add_option("--max-iters", max_iters, "solver iteration cap");
        cmd->add_option("--seed", seed, "random seed");
        cmd->add_flag("--serial", serial, "disable OpenMP fan-out");
    }
};

TrainConfig train_config_from_json(const json& j) {
    TrainConfig cfg;
    cfg.L = j.value("L", cfg.L);
    if (j.contains("widths")) cfg.widths = j.at("widths").get<std::vector<int>>();
    cfg.lr = j.value("lr", cfg.lr);
    cfg.weight_decay = j.value("weight_decay", cfg.weight_decay);
    cfg.epochs = j.value("epochs", cfg.epochs);
    cfg.batch = j.value("batch", cfg.batch);
    cfg.seed = j.value("seed", cfg.seed);
    cfg.target_loss = j.value("target_loss", cfg.target_loss);
    cfg.init_scale = j.value("init_scale", cfg.init_scale);
    cfg.momentum = j.value("momentum", cfg.momentum);
    cfg.log_every = j.value("log_every", cfg.log_every);
    return cfg;
}

void load_train_data(const json& j, Mat& X, Vec& y) {
    const std::string kind = j.value("kind", "csv");
    if (kind == "csv") {
        X = mat_from_csv(read_text(j.at("X").get<std::string>()));
        y = vec_from_csv(read_text(j.at("y").get<std::string>()));
    } else if (kind == "rays") {
        RaysConfig cfg;
        if (j.contains("psi")) {
            if (j.at("psi").is_string())
                cfg.psi = parse_angle(j.at("psi").get<std::string>());
            else
                cfg.psi = j.at("psi").get<double>();
        }
        cfg.n1 = j.value("n1", cfg.n1);
        cfg.n2 = j.value("n2", cfg.n2);
        cfg.d = j.value("d", cfg.d);
        cfg.seed = j.value("seed", cfg.seed);
        if (j.contains("radii1")) cfg.radii1 = j.at("radii1").get<std::vector<double>>();
        if (j.contains("radii2")) cfg.radii2 = j.at("radii2").get<std::vector<double>>();
        if (j.contains("labels1")) cfg.labels1 = j.at("labels1").get<std::vector<double>>();
        if (j.contains("labels2")) cfg.labels2 = j.at("labels2").get<std::vector<double>>();
        RaysData data = gen_rays(cfg);
        X = data.X;
        y = data.y;
    } else if (kind == "colinear") {
        Vec dir = j.contains("direction") ? vec_from_json(j.at("direction")) : (Vec(2) << 1.0, 2.0).finished();
        dir.normalize();
        std::vector<double> t = j.contains("t") ? j.at("t").get<std::vector<double>>()
                                                : std::vector<double>{-1.6, -0.9, -0.3, 0.4, 1.0, 1.7};
        X = Mat((int)dir.size(), (int)t.size());
        y = Vec((int)t.size());
        std::vector<double> labels;
        if (j.contains("labels")) labels = j.at("labels").get<std::vector<double>>();
        for (std::size_t i = 0; i < t.size(); ++i) {
            X.col((int)i) = t[i] * dir;
            y((int)i) = labels.empty() ? std::sin(1.9 * t[i]) : labels.at(i);
        }
    } else {
        throw InvalidInput("train config: unknown data kind '" + kind + "'");
    }
}

std::string train_log_csv(const std::vector<TrainLogRow>& log) {
    std::string out = "epoch,mse,cost,sv_ratio\n";
    char buf[256];
    for (const TrainLogRow& r : log) {
        std::snprintf(buf, sizeof buf, "%d,%.12g,%.12g,%.12g\n", r.epoch, r.mse, r.cost, r.sv_ratio);
        out += buf;
    }
    return out;
}

std::string surface_csv(const std::vector<SurfacePoint>& pts) {
    std::string out = "x1,x2,f\n";
    char buf[160];
    for (const SurfacePoint& p : pts) {
        std::snprintf(buf, sizeof buf, "%.12g,%.12g,%.12g\n", p.x1, p.x2, p.f);
        out += buf;
    }
    return out;
}

} // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"representation-cost toolkit for ReLU networks with linear layers"};
    app.require_subcommand(1);

    // ---- phi ----
    auto* phi_cmd = app.add_subcommand("phi", "cost of a network's weight pair (W, a) at depth L");
    std::string phi_net;
    int phi_L = 3;
    bool phi_grouped = false;
    std::string phi_out;
    SolverFlags phi_flags;
    phi_cmd->add_option("--net", phi_net, "network JSON file")->required();
    phi_cmd->add_option("--L", phi_L, "depth (>= 2)");
    phi_cmd->add_flag("--grouped", phi_grouped, "use the grouped closed form instead of the solver");
    phi_cmd->add_option("--out", phi_out, "also write the JSON result here");
    phi_flags.attach(phi_cmd);

    // ---- bounds ----
    auto* bounds_cmd = app.add_subcommand("bounds", "lower/estimate/upper for the depth-3 cost");
    std::string bounds_net, bounds_out;
    SolverFlags bounds_flags;
    bounds_cmd->add_option("--net", bounds_net, "network JSON file")->required();
    bounds_cmd->add_option("--out", bounds_out, "also write the JSON result here");
    bounds_flags.attach(bounds_cmd);

    // ---- factorize ----
    auto* fact_cmd = app.add_subcommand("factorize", "balanced linear-layer factorization of a shallow net");
    std::string fact_net, fact_out;
    int fact_L = 3;
    fact_cmd->add_option("--net", fact_net, "shallow network JSON file")->required();
    fact_cmd->add_option("--L", fact_L, "target depth (>= 2)");
    fact_cmd->add_option("--out", fact_out, "deep network JSON output")->required();

    // ---- rays-sweep ----
    auto* sweep_cmd = app.add_subcommand("rays-sweep", "two-rays angle sweep, CSV output");
    std::string sweep_psi_min = "0.51pi", sweep_psi_max = "0.95pi", sweep_out;
    int sweep_points = 45, sweep_n = 4;
    std::uint64_t sweep_seed = 7;
    bool sweep_serial = false;
    sweep_cmd->add_option("--psi-min", sweep_psi_min, "smallest separation angle (e.g. 0.51pi)");
    sweep_cmd->add_option("--psi-max", sweep_psi_max, "largest separation angle (e.g. 0.95pi)");
    sweep_cmd->add_option("--points", sweep_points, "grid size");
    sweep_cmd->add_option("--n-per-ray", sweep_n, "samples per ray");
    sweep_cmd->add_option("--seed", sweep_seed, "label generator seed");
    sweep_cmd->add_flag("--serial", sweep_serial, "disable OpenMP fan-out");
    sweep_cmd->add_option("--out", sweep_out, "CSV output path")->required();

    // ---- project ----
    auto* proj_cmd = app.add_subcommand("project", "project a net's units onto a subspace, preserving the fit");
    std::string proj_net, proj_data, proj_basis, proj_out;
    SolverFlags proj_flags;
    proj_cmd->add_option("--net", proj_net, "shallow network JSON (unit-norm rows)")->required();
    proj_cmd->add_option("--data", proj_data, "samples CSV, d rows x n columns")->required();
    proj_cmd->add_option("--basis", proj_basis, "subspace basis CSV, d rows x s columns, orthonormal")->required();
    proj_cmd->add_option("--out", proj_out, "write the projected network JSON here");
    proj_flags.attach(proj_cmd);

    // ---- train ----
    auto* train_cmd = app.add_subcommand("train", "gradient descent with weight decay");
    std::string train_cfg_path, train_out, train_log_path, train_net_out, train_grid_out;
    int train_grid_res = 41;
    double grid_half_width = 2.0;
    train_cmd->add_option("--config", train_cfg_path, "train config JSON")->required();
    train_cmd->add_option("--out", train_out, "also write the JSON result here");
    train_cmd->add_option("--log", train_log_path, "training log CSV (epoch, mse, cost, sv_ratio)");
    train_cmd->add_option("--net-out", train_net_out, "checkpoint JSON for the trained net");
    train_cmd->add_option("--grid-out", train_grid_out, "surface CSV (d = 2 only)");
    train_cmd->add_option("--grid-res", train_grid_res, "surface resolution per axis");
    train_cmd->add_option("--grid-half-width", grid_half_width, "surface extent (centered box)");

    // ---- verify ----
    auto* verify_cmd = app.add_subcommand("verify", "run verification suites");
    std::string verify_suite = "all", verify_out;
    bool verify_serial = false;
    verify_cmd->add_option("--suite", verify_suite, "suite name or 'all'");
    verify_cmd->add_option("--out", verify_out, "write the JSON report here");
    verify_cmd->add_flag("--serial", verify_serial, "disable OpenMP fan-out");

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp& e) {
        out << app.help() << std::flush;
        return 0;
    } catch (const CLI::CallForAllHelp& e) {
        out << app.help("", CLI::AppFormatMode::All) << std::flush;
        return 0;
    } catch (const CLI::ParseError& e) {
        err << e.what() << "\n";
        return 2;
    }

    try {
        json result;
        int exit_code = 0;

        if (phi_cmd->parsed()) {
            ShallowNet net = load_shallow(phi_net);
            if (phi_grouped) {
                result = {{"phi", phiL_grouped(net.W, net.a, phi_L)}, {"L", phi_L}, {"method", "grouped"}};
            } else {
                PhiEstimate est = phiL_numeric(net.W, net.a, phi_L, phi_flags.options());
                result = phi_estimate_json(est);
                result["L"] = phi_L;
                result["method"] = "numeric";
            }
            if (!phi_out.empty()) atomic_write_text(phi_out, result.dump() + "\n");
        } else if (bounds_cmd->parsed()) {
            ShallowNet net = load_shallow(bounds_net);
            PhiBounds b = phi3_bounds(net.W, net.a, bounds_flags.options());
            result = {{"lower", b.lower},
                      {"estimate", b.estimate},
                      {"upper", b.upper},
                      {"converged", b.detail.converged},
                      {"restarts", b.detail.restarts_used}};
            if (!bounds_out.empty()) atomic_write_text(bounds_out, result.dump() + "\n");
        } else if (fact_cmd->parsed()) {
            json j = json::parse(read_text(fact_net));
            ShallowNet net = j.contains("layers") ? collapse(deep_from_json(j)) : shallow_from_json(j);
            DeepNet deep = balanced_factorization(net, fact_L);
            atomic_write_text(fact_out, to_json(deep).dump(2) + "\n");
            double sum = 0.0;
            for (const Mat& M : deep.layers) sum += M.squaredNorm();
            const double target =
                (fact_L == 2) ? net.W.squaredNorm() : (fact_L - 1) * schatten_qnorm_pow(net.W, 2.0 / (fact_L - 1));
            const double recon = (collapse(deep).W - net.W).norm() / std::max(1e-300, net.W.norm());
            result = {{"L", fact_L},
                      {"cost_CL", cost_CL(deep)},
                      {"factor_sq_norm_sum", sum},
                      {"schatten_target", target},
                      {"reconstruction_rel_err", recon},
                      {"out", fact_out}};
        } else if (sweep_cmd->parsed()) {
            const double kPi = 3.141592653589793238462643383279502884;
            const double psi_lo = parse_angle(sweep_psi_min);
            const double psi_hi = parse_angle(sweep_psi_max);
            if (sweep_points < 1) throw InvalidInput("rays-sweep: need at least one point");
            std::vector<double> thetas(sweep_points);
            for (int i = 0; i < sweep_points; ++i) {
                const double psi = (sweep_points == 1)
                                       ? psi_lo
                                       : psi_lo + (psi_hi - psi_lo) * double(i) / double(sweep_points - 1);
                thetas[i] = kPi - psi;
            }
            std::sort(thetas.begin(), thetas.end());
            RaysConfig cfg;
            cfg.n1 = cfg.n2 = sweep_n;
            cfg.seed = sweep_seed;
            PhiSolverOptions sopts;
            sopts.parallel = false;
            std::vector<SweepRow> rows = sweep_theta(cfg, thetas, sopts, {}, !sweep_serial);
            atomic_write_text(sweep_out, sweep_csv(rows));
            int ok = 0;
            for (const SweepRow& r : rows)
                if (r.status.rfind("error:", 0) != 0) ++ok;
            result = {{"points", (int)rows.size()}, {"rows_ok", ok}, {"csv", sweep_out}};
            if (ok != (int)rows.size()) exit_code = 1;
        } else if (proj_cmd->parsed()) {
            ShallowNet net = shallow_from_json(json::parse(read_text(proj_net)));
            Mat X = mat_from_csv(read_text(proj_data));
            ProjectionSpec S{mat_from_csv(read_text(proj_basis))};
            GsConstruction gs = build_g(net, X, S);
            std::vector<bool> flags = r2_condition(net, X, S);
            bool all_hold = true;
            for (bool f : flags) all_hold = all_hold && f;
            PhiSolverOptions sopts = proj_flags.options();
            PhiEstimate tilde = phi3_tilde(net, X, S, sopts);
            PhiEstimate orig = phiL_numeric(net.W, net.a, 3, sopts);
            result = {{"r", vec_to_json(gs.r)},
                      {"q", vec_to_json(gs.q)},
                      {"r2_condition", flags},
                      {"all_conditions_hold", all_hold},
                      {"R2_f", phi2(net.W, net.a)},
                      {"R2_g", phi2(gs.g.W, gs.g.a)},
                      {"phi3_source_est", orig.value},
                      {"phi3_projected_est", tilde.value}};
            if (!proj_out.empty()) atomic_write_text(proj_out, to_json(gs.g).dump(2) + "\n");
        } else if (train_cmd->parsed()) {
            json cfg_json = json::parse(read_text(train_cfg_path));
            TrainConfig cfg = train_config_from_json(cfg_json.value("trainer", json::object()));
            Mat X;
            Vec y;
            load_train_data(cfg_json.value("data", json::object()), X, y);
            TrainResult res = train(X, y, cfg);
            result = {{"final_loss", res.final_loss},
                      {"cost", res.cost},
                      {"sv_ratio", res.sv_ratio},
                      {"epochs_run", res.epochs_run},
                      {"interpolated", res.interpolated}};
            if (!train_out.empty()) atomic_write_text(train_out, result.dump() + "\n");
            if (!train_log_path.empty()) atomic_write_text(train_log_path, train_log_csv(res.log));
            if (!train_net_out.empty()) atomic_write_text(train_net_out, to_json(res.net).dump(2) + "\n");
            if (!train_grid_out.empty()) {
                GridBounds b{-grid_half_width, grid_half_width, -grid_half_width, grid_half_width};
                atomic_write_text(train_grid_out, surface_csv(grid_eval(res.net, b, train_grid_res)));
            }
        } else if (verify_cmd->parsed()) {
            std::vector<std::string> names =
                (verify_suite == "all") ? suite_names() : std::vector<std::string>{verify_suite};
            std::vector<SuiteReport> reports = run_suites(names, !verify_serial);
            for (const SuiteReport& r : reports)
                err << "suite " << r.suite << ": " << (r.passed() ? "pass" : "FAIL") << " (" << r.seconds
                    << " s)\n";
            result = report_json(reports);
            if (!verify_out.empty()) atomic_write_text(verify_out, result.dump(2) + "\n");
            if (!result.at("pass").get<bool>()) exit_code = 1;
        }

        out << result.dump() << "\n";
        return exit_code;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
}

} // namespace repcost
