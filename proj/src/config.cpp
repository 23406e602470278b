#include "irmc/config.hpp"

#include "irmc/errors.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <json.hpp>

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

namespace irmc {

namespace pt = boost::property_tree;

namespace {

const std::map<std::string, std::set<std::string>>& model_keys() {
    static const std::map<std::string, std::set<std::string>> keys = {
        {"federico", {"r", "mu", "sigma", "gamma", "c0", "c1", "x0", "horizon", "dt", "z_max"}},
        {"faustmann", {"r", "mu", "sigma", "threshold", "target", "x0", "horizon", "dt", "z_bound"}},
        {"guthrie", {"r", "mu", "sigma", "delta", "beta", "alpha", "p0", "cap0", "horizon", "dt", "z_max", "terminal_decay"}},
    };
    return keys;
}

const std::map<std::string, std::set<std::string>>& section_keys() {
    static const std::map<std::string, std::set<std::string>> keys = {
        {"model", {"preset"}},
        {"design",
         {"scheme", "lo", "hi", "n_unique", "n_rep", "scramble", "lattice", "spread_coord", "spread_center",
          "spread_base", "spread_vol", "spread_nsd", "log_coords"}},
        {"surrogate", {"kind", "kernel", "lambda_mode", "lambda", "tps_kernel", "restarts", "max_evals", "warm_start", "log_coords"}},
        {"intervention", {"mode", "use_zhat", "grid_points", "polish_iters", "root_scan_points", "tie_eps", "cache_points"}},
        {"solver", {"lookahead", "w", "mpc_mode", "seed", "threads", "common_random_numbers", "antithetic"}},
        {"forward", {"n_paths", "seed", "x0", "use_zhat"}},
        {"boundary", {"mode"}},
    };
    return keys;
}

std::string unquote(std::string s) {
    const auto b = s.find_first_not_of(" \t");
    const auto e = s.find_last_not_of(" \t");
    s = b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    if (s.size() >= 2 && ((s.front() == '"' && s.back() == '"') || (s.front() == '\'' && s.back() == '\''))) {
        s = s.substr(1, s.size() - 2);
    }
    return s;
}

double to_double(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        const double d = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument("trailing characters");
        return d;
    } catch (const std::exception&) {
        throw ConfigError("key '" + key + "': expected a number, got '" + v + "'");
    }
}

long to_int(const std::string& key, const std::string& v) {
    const double d = to_double(key, v);
    if (d != static_cast<double>(static_cast<long>(d))) throw ConfigError("key '" + key + "': expected an integer");
    return static_cast<long>(d);
}

std::uint64_t to_u64(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        const unsigned long long u = std::stoull(v, &pos);
        if (pos != v.size() || v.front() == '-') throw std::invalid_argument("bad");
        return u;
    } catch (const std::exception&) {
        throw ConfigError("key '" + key + "': expected a nonnegative integer, got '" + v + "'");
    }
}

bool to_bool(const std::string& key, std::string v) {
    std::transform(v.begin(), v.end(), v.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    throw ConfigError("key '" + key + "': expected a boolean, got '" + v + "'");
}

std::vector<double> to_list(const std::string& key, std::string v) {
    if (!v.empty() && v.front() == '[' && v.back() == ']') v = v.substr(1, v.size() - 2);
    std::vector<double> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(to_double(key, unquote(item)));
    if (out.empty()) throw ConfigError("key '" + key + "': empty list");
    return out;
}

std::vector<int> to_index_list(const std::string& key, const std::string& v) {
    std::vector<int> out;
    for (double d : to_list(key, v)) {
        if (d < 0 || d > 1 || d != static_cast<int>(d)) throw ConfigError("key '" + key + "': coordinate indices must be 0 or 1");
        out.push_back(static_cast<int>(d));
    }
    return out;
}

template <class E>
E to_enum(const std::string& key, const std::string& v, const std::map<std::string, E>& table) {
    const auto it = table.find(v);
    if (it == table.end()) {
        std::string allowed;
        for (const auto& [name, _] : table) allowed += (allowed.empty() ? "" : ", ") + name;
        throw ConfigError("key '" + key + "': unknown value '" + v + "' (allowed: " + allowed + ")");
    }
    return it->second;
}

const std::map<std::string, OptimizerMode> kModes = {{"root", OptimizerMode::LinearRootSearch},
                                                      {"grid", OptimizerMode::GridThenPolish},
                                                      {"target", OptimizerMode::TargetState}};

std::string mode_name(OptimizerMode m) {
    for (const auto& [name, mode] : kModes)
        if (mode == m) return name;
    return "grid";
}

} // namespace

RunConfig default_config(const std::string& preset) {
    RunConfig c;
    c.model.preset = preset;
    SolverConfig& s = c.solver;
    if (preset == "federico") {
        s.design.scheme = DesignScheme::ExplicitLattice;
        s.design.explicit_sites = federico_lattice();
        s.design.domain = Box({1.0}, {90.0});
        s.design.n_unique = 600;
        s.design.n_rep = 40;
        s.surrogate.kind = SurrogateKind::Tps;
        s.intervention.mode = OptimizerMode::LinearRootSearch;
    } else if (preset == "faustmann") {
        s.design.scheme = DesignScheme::ExplicitLattice;
        s.design.explicit_sites = linspace(-0.25, 2.5, 100);
        s.design.domain = Box({-0.25}, {2.5});
        s.design.n_unique = 100;
        s.design.n_rep = 100;
        s.surrogate.kind = SurrogateKind::Gp;
        s.intervention.mode = OptimizerMode::TargetState;
        c.boundary_mode = BoundaryMode::Scan;
    } else if (preset == "guthrie") {
        s.design.scheme = DesignScheme::Sobol;
        s.design.domain = Box({1.0, 20.0}, {5.0, 500.0});
        s.design.n_unique = 256;
        s.design.n_rep = 8;
        s.design.spreads.push_back(GeometricSpread{0, 2.2, 0.35, 0.08, 2.0});
        s.surrogate.kind = SurrogateKind::Gp;
        s.intervention.mode = OptimizerMode::GridThenPolish;
        s.intervention.use_zhat = true;
        s.lookahead = Lookahead::one_step();
    } else {
        throw ConfigError("key 'model.preset': unknown preset '" + preset + "' (allowed: faustmann, federico, guthrie)");
    }
    return c;
}

RunConfig parse_config(const std::string& text) {
    pt::ptree tree;
    std::istringstream in(text);
    try {
        pt::ini_parser::read_ini(in, tree);
    } catch (const pt::ini_parser_error& e) {
        throw ConfigError(std::string("malformed config: ") + e.message() + " (line " + std::to_string(e.line()) + ")");
    }
    std::string preset = "federico";
    if (auto m = tree.get_child_optional("model")) {
        if (auto p = m->get_optional<std::string>("preset")) preset = unquote(*p);
    }
    RunConfig c = default_config(preset);
    SolverConfig& s = c.solver;
    std::optional<std::string> lattice;
    std::optional<GeometricSpread> spread;
    bool lo_set = false, hi_set = false;

    for (const auto& [section, body] : tree) {
        const auto sk = section_keys().find(section);
        if (sk == section_keys().end()) throw ConfigError("unknown section '" + section + "'");
        if (body.data().size() && body.empty()) throw ConfigError("key '" + section + "' must be a section");
        for (const auto& [key, node] : body) {
            const std::string full = section + "." + key;
            const std::string v = unquote(node.get_value<std::string>());
            if (section == "model") {
                if (key == "preset") continue;
                if (!model_keys().at(preset).count(key)) throw ConfigError("unknown key '" + full + "'");
                c.model.params[key] = to_double(full, v);
                continue;
            }
            if (!sk->second.count(key)) throw ConfigError("unknown key '" + full + "'");
            if (section == "design") {
                if (key == "scheme") {
                    s.design.scheme = to_enum<DesignScheme>(full, v,
                                                            {{"lattice", DesignScheme::ExplicitLattice},
                                                             {"uniform", DesignScheme::IidUniform},
                                                             {"lhs", DesignScheme::LatinHypercube},
                                                             {"sobol", DesignScheme::Sobol}});
                } else if (key == "lo") {
                    s.design.domain.lo = to_list(full, v);
                    lo_set = true;
                } else if (key == "hi") {
                    s.design.domain.hi = to_list(full, v);
                    hi_set = true;
                } else if (key == "n_unique") {
                    s.design.n_unique = static_cast<int>(to_int(full, v));
                } else if (key == "n_rep") {
                    s.design.n_rep = static_cast<int>(to_int(full, v));
                } else if (key == "scramble") {
                    s.design.scramble = to_bool(full, v);
                } else if (key == "log_coords") {
                    s.design.log_coords = to_index_list(full, v);
                } else if (key == "lattice") {
                    if (v != "federico" && v != "linspace") throw ConfigError("key '" + full + "': expected federico or linspace");
                    lattice = v;
                } else {
                    if (!spread) spread = s.design.spreads.empty() ? GeometricSpread{} : s.design.spreads.front();
                    if (key == "spread_coord") spread->coord = static_cast<int>(to_int(full, v));
                    else if (key == "spread_center") spread->center = to_double(full, v);
                    else if (key == "spread_base") spread->base_log_width = to_double(full, v);
                    else if (key == "spread_vol") spread->vol = to_double(full, v);
                    else if (key == "spread_nsd") spread->n_sd = to_double(full, v);
                }
            } else if (section == "surrogate") {
                if (key == "kind") s.surrogate.kind = to_enum<SurrogateKind>(full, v, {{"gp", SurrogateKind::Gp}, {"tps", SurrogateKind::Tps}});
                else if (key == "kernel")
                    s.surrogate.kernel = to_enum<KernelKind>(full, v, {{"se", KernelKind::SquaredExponential}, {"matern52", KernelKind::Matern52}});
                else if (key == "lambda_mode") {
                    const auto kind = to_enum<LambdaMode::Kind>(full, v, {{"gcv", LambdaMode::Kind::Gcv}, {"fixed", LambdaMode::Kind::Fixed}});
                    s.surrogate.lambda.kind = kind;
                } else if (key == "lambda") {
                    s.surrogate.lambda.lambda = to_double(full, v);
                } else if (key == "tps_kernel")
                    s.surrogate.tps_kernel = to_enum<TpsKernel>(full, v, {{"thin_plate", TpsKernel::ThinPlate}, {"cubic", TpsKernel::Cubic}});
                else if (key == "restarts") s.surrogate.restarts = static_cast<int>(to_int(full, v));
                else if (key == "max_evals") s.surrogate.max_evals = static_cast<int>(to_int(full, v));
                else if (key == "warm_start") s.surrogate.warm_start = to_bool(full, v);
                else if (key == "log_coords") s.surrogate.log_coords = to_index_list(full, v);
            } else if (section == "intervention") {
                if (key == "mode") s.intervention.mode = to_enum<OptimizerMode>(full, v, kModes);
                else if (key == "use_zhat") s.intervention.use_zhat = to_bool(full, v);
                else if (key == "grid_points") s.intervention.grid_points = static_cast<int>(to_int(full, v));
                else if (key == "polish_iters") s.intervention.polish_iters = static_cast<int>(to_int(full, v));
                else if (key == "root_scan_points") s.intervention.root_scan_points = static_cast<int>(to_int(full, v));
                else if (key == "tie_eps") s.intervention.tie_rel = to_double(full, v);
                else if (key == "cache_points") s.intervention.cache_points = static_cast<int>(to_int(full, v));
            } else if (section == "solver") {
                if (key == "lookahead") {
                    const auto kind = to_enum<Lookahead::Kind>(full, v,
                                                               {{"one_step", Lookahead::Kind::OneStep},
                                                                {"fixed", Lookahead::Kind::FixedW},
                                                                {"to_maturity", Lookahead::Kind::ToMaturity}});
                    s.lookahead.kind = kind;
                } else if (key == "w") {
                    s.lookahead.w = static_cast<int>(to_int(full, v));
                } else if (key == "mpc_mode") {
                    s.mpc_mode = to_bool(full, v);
                } else if (key == "seed") {
                    s.seed = to_u64(full, v);
                } else if (key == "threads") {
                    s.threads = static_cast<int>(to_int(full, v));
                } else if (key == "common_random_numbers") {
                    s.common_random_numbers = to_bool(full, v);
                } else if (key == "antithetic") {
                    s.antithetic = to_bool(full, v);
                }
            } else if (section == "forward") {
                if (key == "n_paths") c.forward.n_paths = static_cast<int>(to_int(full, v));
                else if (key == "seed") c.forward.seed = to_u64(full, v);
                else if (key == "use_zhat") c.forward.use_zhat = to_bool(full, v);
                else if (key == "x0") {
                    const auto xs = to_list(full, v);
                    if (xs.size() < 1 || xs.size() > 2) throw ConfigError("key '" + full + "': expected 1 or 2 values");
                    c.forward.x0 = xs.size() == 1 ? make_state(xs[0]) : make_state(xs[0], xs[1]);
                }
            } else if (section == "boundary") {
                c.boundary_mode = to_enum<BoundaryMode>(full, v, {{"forward", BoundaryMode::Forward}, {"scan", BoundaryMode::Scan}});
            }
        }
    }

    if (spread) {
        s.design.spreads.clear();
        s.design.spreads.push_back(*spread);
    }
    if (lo_set != hi_set) throw ConfigError("key 'design.lo': lo and hi must be given together");
    if (s.design.domain.lo.size() != s.design.domain.hi.size()) throw ConfigError("key 'design.hi': lo and hi differ in length");
    if (lattice == std::optional<std::string>("federico")) {
        s.design.explicit_sites = federico_lattice();
    } else if (lattice == std::optional<std::string>("linspace") ||
               (s.design.scheme == DesignScheme::ExplicitLattice && (lo_set || tree.get_optional<std::string>("design.n_unique")))) {
        if (s.design.domain.dim() != 1) throw ConfigError("key 'design.lattice': linspace lattices are one-dimensional");
        s.design.explicit_sites = linspace(s.design.domain.lo[0], s.design.domain.hi[0], s.design.n_unique);
    }
    if (s.design.scheme == DesignScheme::ExplicitLattice) s.design.n_unique = static_cast<int>(s.design.explicit_sites.rows());
    if (s.design.n_rep < 1) throw ConfigError("key 'design.n_rep': must be at least 1");
    if (s.design.n_unique < 2) throw ConfigError("key 'design.n_unique': must be at least 2");
    if (c.forward.n_paths < 1) throw ConfigError("key 'forward.n_paths': must be positive");
    if (s.threads < 1) throw ConfigError("key 'solver.threads': must be positive");
    if (s.lookahead.kind == Lookahead::Kind::FixedW && s.lookahead.w < 1) throw ConfigError("key 'solver.w': must be positive");
    if (s.surrogate.restarts < 1) throw ConfigError("key 'surrogate.restarts': must be positive");
    return c;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

std::shared_ptr<const ImpulseModel> build_model(const ModelSpec& spec) {
    const auto keys = model_keys().find(spec.preset);
    if (keys == model_keys().end()) throw ConfigError("key 'model.preset': unknown preset '" + spec.preset + "'");
    for (const auto& [k, _] : spec.params)
        if (!keys->second.count(k)) throw ConfigError("unknown key 'model." + k + "'");
    auto get = [&](const char* k, double& target) {
        const auto it = spec.params.find(k);
        if (it != spec.params.end()) target = it->second;
    };
    try {
        if (spec.preset == "federico") {
            FedericoParams p;
            get("r", p.r);
            get("mu", p.mu);
            get("sigma", p.sigma);
            get("gamma", p.gamma);
            get("c0", p.c0);
            get("c1", p.c1);
            get("x0", p.x0);
            get("horizon", p.horizon);
            get("dt", p.dt);
            get("z_max", p.z_max);
            return std::make_shared<const ImpulseModel>(make_federico_model(p));
        }
        if (spec.preset == "faustmann") {
            FaustmannParams p;
            get("r", p.r);
            get("mu", p.mu);
            get("sigma", p.sigma);
            get("threshold", p.threshold);
            get("target", p.target);
            get("x0", p.x0);
            get("horizon", p.horizon);
            get("dt", p.dt);
            get("z_bound", p.z_bound);
            return std::make_shared<const ImpulseModel>(make_faustmann_model(p));
        }
        GuthrieParams p;
        get("r", p.r);
        get("mu", p.mu);
        get("sigma", p.sigma);
        get("delta", p.delta);
        get("beta", p.beta);
        get("alpha", p.alpha);
        get("p0", p.p0);
        get("cap0", p.c0);
        get("horizon", p.horizon);
        get("dt", p.dt);
        get("z_max", p.z_max);
        get("terminal_decay", p.terminal_decay);
        return std::make_shared<const ImpulseModel>(make_guthrie_model(p));
    } catch (const InvalidModel& e) {
        throw ConfigError(std::string("invalid model parameters: ") + e.what());
    }
}

std::string stack_metadata(const RunConfig& config) {
    nlohmann::ordered_json j;
    j["model"]["preset"] = config.model.preset;
    j["model"]["params"] = nlohmann::ordered_json::object();
    for (const auto& [k, v] : config.model.params) j["model"]["params"][k] = v;
    const auto& iv = config.solver.intervention;
    j["intervention"] = {{"mode", mode_name(iv.mode)},     {"grid_points", iv.grid_points},
                         {"polish_iters", iv.polish_iters}, {"root_scan_points", iv.root_scan_points},
                         {"tie_eps", iv.tie_rel},          {"cache_points", iv.cache_points},
                         {"use_zhat", iv.use_zhat}};
    j["seed"] = config.solver.seed;
    const auto& fw = config.forward;
    j["forward"] = {{"n_paths", fw.n_paths}, {"seed", fw.seed}, {"use_zhat", fw.use_zhat}};
    if (fw.x0) {
        auto x = nlohmann::ordered_json::array();
        for (Eigen::Index i = 0; i < fw.x0->size(); ++i) x.push_back((*fw.x0)(i));
        j["forward"]["x0"] = x;
    }
    j["boundary"] = {{"mode", config.boundary_mode == BoundaryMode::Scan ? "scan" : "forward"}};
    return j.dump();
}

void apply_stack_metadata(const std::string& text, RunConfig& config) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
        config.model.preset = j.at("model").at("preset").get<std::string>();
        config.model.params.clear();
        for (const auto& [k, v] : j.at("model").at("params").items()) config.model.params[k] = v.get<double>();
        const auto& iv = j.at("intervention");
        auto& o = config.solver.intervention;
        o.mode = to_enum<OptimizerMode>("intervention.mode", iv.at("mode").get<std::string>(), kModes);
        o.grid_points = iv.at("grid_points").get<int>();
        o.polish_iters = iv.at("polish_iters").get<int>();
        o.root_scan_points = iv.at("root_scan_points").get<int>();
        o.tie_rel = iv.at("tie_eps").get<double>();
        o.cache_points = iv.at("cache_points").get<int>();
        o.use_zhat = iv.at("use_zhat").get<bool>();
        config.solver.seed = j.at("seed").get<std::uint64_t>();
        const auto& fw = j.at("forward");
        config.forward.n_paths = fw.at("n_paths").get<int>();
        config.forward.seed = fw.at("seed").get<std::uint64_t>();
        config.forward.use_zhat = fw.at("use_zhat").get<bool>();
        config.forward.x0.reset();
        if (fw.contains("x0")) {
            const auto xs = fw.at("x0").get<std::vector<double>>();
            if (xs.size() == 1) config.forward.x0 = make_state(xs[0]);
            else if (xs.size() == 2) config.forward.x0 = make_state(xs[0], xs[1]);
            else throw FormatError("bad x0 in stack metadata");
        }
        config.boundary_mode = j.at("boundary").at("mode").get<std::string>() == "scan" ? BoundaryMode::Scan : BoundaryMode::Forward;
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("bad stack metadata: ") + e.what());
    }
}

} // namespace irmc
