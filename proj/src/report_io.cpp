#include "irmc/report_io.hpp"

#include "irmc/errors.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>

namespace irmc {

namespace {

nlohmann::ordered_json number(double v) {
    if (std::isnan(v)) return nullptr;
    return v;
}

nlohmann::ordered_json state_json(const State& x) {
    auto a = nlohmann::ordered_json::array();
    for (Eigen::Index i = 0; i < x.size(); ++i) a.push_back(number(x(i)));
    return a;
}

} // namespace

std::string format_double(double v) {
    if (std::isnan(v)) return "NA";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string forward_report_json(const ForwardReport& r) {
    nlohmann::ordered_json j;
    j["value_estimate"] = number(r.value_estimate);
    j["std_error"] = number(r.std_error);
    j["n_paths"] = r.n_paths;
    j["x0"] = state_json(r.x0);
    j["mean_running"] = number(r.mean_running);
    j["mean_impulse"] = number(r.mean_impulse);
    j["mean_terminal"] = number(r.mean_terminal);
    j["n_events"] = r.events.size();
    j["mean_events_per_path"] = number(r.mean_events_per_path);
    j["mean_impulse_size"] = number(r.mean_impulse_size);
    j["mean_interimpulse_time"] = number(r.mean_interimpulse_time);
    j["metadata"] = {{"use_zhat", r.use_zhat}};
    return j.dump(2, ' ', false, nlohmann::json::error_handler_t::replace) + "\n";
}

void write_events_csv(std::ostream& out, const ForwardReport& report, const std::vector<int>& coords) {
    out << "path,step,coord,pre_state,impulse\n";
    for (const auto& e : report.events) {
        for (int c : coords) {
            out << e.path << ',' << e.step << ',' << c << ',' << format_double(e.pre_state(c)) << ','
                << format_double(e.impulse(c)) << '\n';
        }
    }
}

void write_boundary_csv(std::ostream& out, const std::vector<BoundaryPoint>& boundary) {
    out << "step,s_k,S_k\n";
    for (const auto& b : boundary) out << b.step << ',' << format_double(b.s) << ',' << format_double(b.S) << '\n';
}

std::string trace_json_line(const StepTrace& t) {
    nlohmann::ordered_json j;
    j["k"] = t.k;
    j["n_paths"] = t.n_paths;
    j["mean_response"] = number(t.mean_response);
    j["fraction_acted"] = number(t.fraction_acted);
    j["rmse"] = number(t.rmse);
    j["surrogate"] = t.surrogate;
    auto d = nlohmann::ordered_json::array();
    for (double v : t.fit_diagnostics) d.push_back(number(v));
    j["fit_diagnostics"] = d;
    return j.dump();
}

void write_dp_csv(std::ostream& out, const DpResult& dp) {
    out << "step,x,value,act,target\n";
    const int K = dp.steps();
    for (int k = 0; k < K; ++k) {
        for (Eigen::Index i = 0; i < dp.grid.size(); ++i) {
            out << k << ',' << format_double(dp.grid(i)) << ',' << format_double(dp.value(k, i)) << ',' << dp.act(k, i)
                << ',' << format_double(dp.target(k, i)) << '\n';
        }
    }
}

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw FormatError("cannot write '" + path + "'");
    out << text;
    if (!out) throw FormatError("write failed for '" + path + "'");
}

} // namespace irmc
