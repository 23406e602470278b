#include "fixtures.hpp"

#include "irmc/config.hpp"
#include "irmc/errors.hpp"
#include "irmc/report_io.hpp"
#include "irmc/stack_io.hpp"

#include <doctest.h>
#include <json.hpp>

#include <cmath>
#include <limits>
#include <sstream>

using namespace irmc;
using namespace irmc::test;

namespace {

std::string config_error(const std::string& text) {
    try {
        parse_config(text);
    } catch (const ConfigError& e) {
        return e.what();
    }
    return "";
}

std::string stack_bytes(const StackFile& f) {
    std::ostringstream out;
    write_stack(out, f);
    return out.str();
}

} // namespace

TEST_SUITE("io") {

TEST_CASE("config parsing") {
    const RunConfig c = parse_config(
        "# comment\n"
        "[model]\n"
        "preset = \"faustmann\"\n"
        "r = 0.05\n"
        "[design]\n"
        "scheme = sobol\n"
        "lo = -0.5\n"
        "hi = 2.5\n"
        "n_unique = 64\n"
        "[surrogate]\n"
        "kind = gp\n"
        "[solver]\n"
        "seed = 12\n"
        "antithetic = false\n");
    CHECK(c.model.preset == "faustmann");
    CHECK(c.model.params.at("r") == 0.05);
    CHECK(c.solver.design.scheme == DesignScheme::Sobol);
    CHECK(c.solver.design.domain.lo == std::vector<double>{-0.5});
    CHECK(c.solver.design.n_unique == 64);
    CHECK(c.solver.surrogate.kind == SurrogateKind::Gp);
    CHECK(c.solver.seed == 12u);
    CHECK_FALSE(c.solver.antithetic);

    const RunConfig g = parse_config("[model]\npreset = guthrie\n[design]\nlo = 1, 1\nhi = 5, 1000\nlog_coords = 1\n");
    CHECK(g.solver.design.domain.hi == std::vector<double>{5.0, 1000.0});
    CHECK(g.solver.design.log_coords == std::vector<int>{1});

    const RunConfig d = parse_config("");
    CHECK(d.model.preset == "federico");
    CHECK(d.solver.design.n_unique == 600);
}

TEST_CASE("config errors name the key") {
    CHECK(config_error("[design]\nn_rep = two\n").find("design.n_rep") != std::string::npos);
    CHECK(config_error("[design]\nbogus = 1\n").find("design.bogus") != std::string::npos);
    CHECK(config_error("[model]\nalpha = 1\n").find("model.alpha") != std::string::npos);
    CHECK(config_error("[nowhere]\nx = 1\n").find("nowhere") != std::string::npos);
    CHECK(config_error("[surrogate]\nkind = spline\n").find("surrogate.kind") != std::string::npos);
    CHECK(config_error("[solver]\nthreads = 0\n").find("solver.threads") != std::string::npos);
    CHECK(config_error("[forward]\nx0 = 1, 2, 3\n").find("forward.x0") != std::string::npos);
    CHECK_FALSE(config_error("[design\n").empty());
    CHECK_THROWS_AS(load_config("/nonexistent/run.toml"), ConfigError);
    ModelSpec bad;
    bad.preset = "federico";
    bad.params["sigma"] = -1.0;
    CHECK_THROWS_AS(build_model(bad), ConfigError);
}

TEST_CASE("stack round trip") {
    const PolicyStack stack = short_federico_stack();
    RunConfig rc = default_config("federico");
    rc.model.params["horizon"] = 1.0;
    const StackFile f = stack_to_file(stack, stack_metadata(rc));
    std::istringstream in(stack_bytes(f));
    const StackFile g = read_stack(in);
    CHECK(g.steps == 10u);
    CHECK(g.dim == 1u);
    CHECK(g.metadata == f.metadata);

    RunConfig back = default_config("federico");
    apply_stack_metadata(g.metadata, back);
    CHECK(back.model.params == rc.model.params);
    CHECK(back.solver.intervention.mode == rc.solver.intervention.mode);

    const PolicyStack re = rebuild_stack(g, stack.model_ptr(), stack.at(0).options());
    for (int k = 0; k < 10; ++k)
        for (int i = 0; i < 100; ++i) {
            const State x = make_state(1.0 + 89.0 * i / 99.0);
            const double a = stack.value(k, x), b = re.value(k, x);
            CHECK(std::abs(a - b) <= 1e-12 * (1.0 + std::abs(a)));
        }
}

TEST_CASE("stack format errors") {
    const StackFile f = stack_to_file(short_federico_stack(), "{}");
    std::string bytes = stack_bytes(f);

    std::string magic = bytes;
    magic[0] = 'X';
    std::istringstream m(magic);
    CHECK_THROWS_AS(read_stack(m), FormatError);

    std::string version = bytes;
    version[4] = 9;
    std::istringstream v(version);
    CHECK_THROWS_AS(read_stack(v), VersionMismatch);

    for (std::size_t cut : {std::size_t(3), std::size_t(10), bytes.size() / 2, bytes.size() - 1}) {
        std::istringstream t(bytes.substr(0, cut));
        CHECK_THROWS_AS(read_stack(t), FormatError);
    }
    CHECK_THROWS_AS(load_stack("/nonexistent/stack.bin"), FormatError);
    RunConfig rc;
    CHECK_THROWS_AS(apply_stack_metadata("{}", rc), FormatError);
}

TEST_CASE("number formatting") {
    CHECK(format_double(std::numeric_limits<double>::quiet_NaN()) == "NA");
    CHECK(format_double(0.1) == "0.10000000000000001");
    const double x = 122.58123456789012;
    CHECK(std::stod(format_double(x)) == x);
}

TEST_CASE("reports and tables") {
    ForwardReport r;
    r.value_estimate = 1.5;
    r.std_error = 0.25;
    r.n_paths = 2;
    r.x0 = make_state(5.0);
    r.mean_impulse_size = std::numeric_limits<double>::quiet_NaN();
    r.events.push_back({1, 3, make_state(2.0, 7.0), make_state(0.0, 4.0)});
    const auto j = nlohmann::json::parse(forward_report_json(r));
    for (const char* k : {"value_estimate", "std_error", "n_paths", "x0", "mean_running", "mean_impulse", "mean_terminal",
                          "n_events", "mean_events_per_path", "mean_impulse_size", "mean_interimpulse_time", "metadata"})
        CHECK(j.contains(k));
    CHECK(j["value_estimate"].get<double>() == 1.5);
    CHECK(j["n_events"].get<int>() == 1);

    std::ostringstream ev;
    write_events_csv(ev, r, {0, 1});
    CHECK(ev.str() == "path,step,coord,pre_state,impulse\n1,3,0,2,0\n1,3,1,7,4\n");

    std::ostringstream bd;
    write_boundary_csv(bd, {{0, 8.5, std::numeric_limits<double>::quiet_NaN()}});
    CHECK(bd.str() == "step,s_k,S_k\n0,8.5,NA\n");

    StepTrace t;
    t.k = 4;
    t.surrogate = "tps";
    const auto tj = nlohmann::json::parse(trace_json_line(t));
    CHECK(tj["k"].get<int>() == 4);
    CHECK_FALSE(tj.contains("seconds"));
}

TEST_CASE("dynamic programming table") {
    FedericoParams p;
    p.horizon = 0.2;
    DpGrid g;
    g.lo = 1.0;
    g.hi = 90.0;
    g.n = 20;
    const DpResult dp = brute_force_dp(make_federico_model(p), g);
    std::ostringstream out;
    write_dp_csv(out, dp);
    std::istringstream in(out.str());
    std::string line;
    int rows = 0;
    std::getline(in, line);
    CHECK(line == "step,x,value,act,target");
    while (std::getline(in, line)) ++rows;
    CHECK(rows == 2 * 20);
}

}
