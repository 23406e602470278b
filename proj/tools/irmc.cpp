// irmc: solve, evaluate and inspect impulse-control policies.

#include "irmc/config.hpp"
#include "irmc/errors.hpp"
#include "irmc/oracle.hpp"
#include "irmc/policy.hpp"
#include "irmc/report_io.hpp"
#include "irmc/stack_io.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

namespace fs = std::filesystem;
using namespace irmc;

namespace {

enum Exit { kOk = 0, kConfig = 2, kSolver = 3, kVersion = 4 };

struct Common {
    std::string config;
    std::string out = ".";
    std::optional<std::uint64_t> seed;
    int threads = 1;
};

struct Loaded {
    RunConfig config;
    PolicyStack stack;
};

Loaded load_run(const std::string& stack_path) {
    const StackFile file = load_stack(stack_path);
    Loaded l;
    l.config = default_config("federico");
    apply_stack_metadata(file.metadata, l.config);
    auto model = build_model(l.config.model);
    l.stack = rebuild_stack(file, model, l.config.solver.intervention);
    return l;
}

State start_state(const RunConfig& config, const ImpulseModel& model) {
    return config.forward.x0 ? *config.forward.x0 : model.x0;
}

void write_boundary(const fs::path& dir, const std::vector<BoundaryPoint>& boundary) {
    std::ostringstream b;
    write_boundary_csv(b, boundary);
    write_text_file((dir / "boundary.csv").string(), b.str());
}

int run_forward(const std::string& stack_path, const fs::path& out, std::optional<std::uint64_t> seed, int threads,
                bool use_zhat, std::optional<int> n_paths) {
    Loaded l = load_run(stack_path);
    RunConfig& c = l.config;
    ForwardOptions fo;
    fo.n_paths = n_paths.value_or(c.forward.n_paths);
    fo.seed = seed.value_or(c.forward.seed);
    fo.threads = threads;
    fo.use_zhat = use_zhat || c.forward.use_zhat;
    fo.keep_path_values = false;
    const ForwardReport rep = forward_evaluate(l.stack, start_state(c, l.stack.model()), fo);
    fs::create_directories(out);
    write_text_file((out / "forward_report.json").string(), forward_report_json(rep));
    std::ostringstream ev;
    std::vector<int> coords(static_cast<std::size_t>(l.stack.dim()));
    for (int i = 0; i < l.stack.dim(); ++i) coords[static_cast<std::size_t>(i)] = i;
    write_events_csv(ev, rep, coords);
    write_text_file((out / "impulse_events.csv").string(), ev.str());
    std::vector<BoundaryPoint> boundary;
    if (c.boundary_mode == BoundaryMode::Scan || rep.events.empty()) {
        boundary = scan_boundary(l.stack);
    } else {
        boundary = extract_boundary(rep, l.stack, BoundaryMode::Forward);
    }
    write_boundary(out, boundary);
    std::cout << "value_estimate " << format_double(rep.value_estimate) << " std_error " << format_double(rep.std_error)
              << " events " << rep.events.size() << "\n";
    return kOk;
}

template <class F>
int guarded(F&& f) {
    try {
        return f();
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kConfig;
    } catch (const VersionMismatch& e) {
        std::cerr << "version mismatch: " << e.what() << "\n";
        return kVersion;
    } catch (const FormatError& e) {
        std::cerr << "format error: " << e.what() << "\n";
        return kVersion;
    } catch (const std::exception& e) {
        std::cerr << "solver error: " << e.what() << "\n";
        return kSolver;
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Regression Monte Carlo for impulse control"};
    app.require_subcommand(1);

    // solve
    Common solve_opts;
    bool trace = false;
    auto* solve_cmd = app.add_subcommand("solve", "Fit the policy stack and write stack.bin");
    solve_cmd->add_option("--config", solve_opts.config, "Config file")->required();
    solve_cmd->add_option("--out", solve_opts.out, "Output directory");
    solve_cmd->add_option("--seed", solve_opts.seed, "Training seed (overrides the config)");
    solve_cmd->add_option("--threads", solve_opts.threads, "Worker threads")->check(CLI::PositiveNumber);
    solve_cmd->add_flag("--trace", trace, "Print one JSON line per fitted step");

    // forward
    Common fwd_opts;
    std::string stack_path;
    bool use_zhat = false;
    std::optional<int> n_paths;
    auto* fwd_cmd = app.add_subcommand("forward", "Evaluate a stored policy on fresh paths");
    fwd_cmd->add_option("--stack", stack_path, "Policy stack (default: <out>/stack.bin)");
    fwd_cmd->add_option("--out", fwd_opts.out, "Output directory");
    fwd_cmd->add_option("--seed", fwd_opts.seed, "Forward seed");
    fwd_cmd->add_option("--threads", fwd_opts.threads, "Worker threads")->check(CLI::PositiveNumber);
    fwd_cmd->add_option("--n-paths", n_paths, "Number of forward paths")->check(CLI::PositiveNumber);
    fwd_cmd->add_flag("--use-zhat", use_zhat, "Take impulse amounts from the auxiliary regression");

    // boundary
    Common bnd_opts;
    std::string bnd_stack;
    auto* bnd_cmd = app.add_subcommand("boundary", "Write boundary.csv from the stored policies (grid scan)");
    bnd_cmd->add_option("--stack", bnd_stack, "Policy stack (default: <out>/stack.bin)");
    bnd_cmd->add_option("--out", bnd_opts.out, "Output directory");

    // oracle
    auto* oracle_cmd = app.add_subcommand("oracle", "Reference solutions");
    oracle_cmd->require_subcommand(1);
    FedericoParams fp;
    auto* fed_cmd = oracle_cmd->add_subcommand("federico", "Stationary (s,S) solution; prints JSON");
    fed_cmd->add_option("--r", fp.r);
    fed_cmd->add_option("--mu", fp.mu);
    fed_cmd->add_option("--sigma", fp.sigma);
    fed_cmd->add_option("--gamma", fp.gamma);
    fed_cmd->add_option("--c0", fp.c0);
    fed_cmd->add_option("--c1", fp.c1);
    fed_cmd->add_option("--x0", fp.x0);
    std::string dp_config, dp_out;
    DpGrid grid;
    std::optional<double> dp_lo, dp_hi;
    auto* dp_cmd = oracle_cmd->add_subcommand("dp", "Grid dynamic programming on a 1-D preset; writes CSV");
    dp_cmd->add_option("--config", dp_config, "Config file")->required();
    dp_cmd->add_option("--out", dp_out, "CSV path (default: stdout)");
    dp_cmd->add_option("--n", grid.n, "Grid points")->check(CLI::Range(3, 400));
    dp_cmd->add_option("--lo", dp_lo, "Grid lower end (default: design domain)");
    dp_cmd->add_option("--hi", dp_hi, "Grid upper end (default: design domain)");
    dp_cmd->add_flag("--log", grid.log_spacing, "Log-spaced grid");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kConfig;
    }

    if (*solve_cmd) {
        return guarded([&] {
            RunConfig c = load_config(solve_opts.config);
            if (solve_opts.seed) c.solver.seed = *solve_opts.seed;
            c.solver.threads = solve_opts.threads;
            auto model = build_model(c.model);
            const fs::path out(solve_opts.out);
            fs::create_directories(out);
            std::ostringstream traces;
            c.solver.on_step = [&](const StepTrace& t) {
                const std::string line = trace_json_line(t);
                traces << line << '\n';
                if (trace) std::cout << line << std::endl;
            };
            SolveResult res = solve(model, c.solver);
            save_stack((out / "stack.bin").string(), stack_to_file(res.stack, stack_metadata(c)));
            write_text_file((out / "trace.jsonl").string(), traces.str());
            if (!trace) std::cerr << "wrote " << (out / "stack.bin").string() << " (" << res.stack.steps() << " steps)\n";
            return static_cast<int>(kOk);
        });
    }
    if (*fwd_cmd) {
        return guarded([&] {
            const fs::path out(fwd_opts.out);
            const std::string path = stack_path.empty() ? (out / "stack.bin").string() : stack_path;
            return run_forward(path, out, fwd_opts.seed, fwd_opts.threads, use_zhat, n_paths);
        });
    }
    if (*bnd_cmd) {
        return guarded([&] {
            const fs::path out(bnd_opts.out);
            const std::string path = bnd_stack.empty() ? (out / "stack.bin").string() : bnd_stack;
            Loaded l = load_run(path);
            fs::create_directories(out);
            write_boundary(out, scan_boundary(l.stack));
            return static_cast<int>(kOk);
        });
    }
    if (*fed_cmd) {
        return guarded([&] {
            const FedericoSolution s = federico_solution(fp.r, fp.mu, fp.sigma, fp.gamma, fp.c0, fp.c1);
            nlohmann::ordered_json j;
            j["r"] = fp.r;
            j["mu"] = fp.mu;
            j["sigma"] = fp.sigma;
            j["gamma"] = fp.gamma;
            j["c0"] = fp.c0;
            j["c1"] = fp.c1;
            j["m"] = s.m;
            j["C"] = s.C;
            j["B"] = s.B;
            j["s"] = s.s;
            j["S"] = s.S;
            j["x0"] = fp.x0;
            j["v_x0"] = s.v(fp.x0);
            std::cout << j.dump(2) << "\n";
            return static_cast<int>(kOk);
        });
    }
    if (*dp_cmd) {
        return guarded([&] {
            RunConfig c = load_config(dp_config);
            auto model = build_model(c.model);
            if (model->dim != 1) throw ConfigError("key 'model.preset': grid DP needs a one-dimensional preset");
            grid.lo = dp_lo.value_or(c.solver.design.domain.lo[0]);
            grid.hi = dp_hi.value_or(c.solver.design.domain.hi[0]);
            const DpResult dp = brute_force_dp(*model, grid);
            if (dp_out.empty()) {
                write_dp_csv(std::cout, dp);
            } else {
                std::ostringstream s;
                write_dp_csv(s, dp);
                write_text_file(dp_out, s.str());
            }
            return static_cast<int>(kOk);
        });
    }
    return kOk;
}
