#include "polyfrac/config.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cctype>
#include <fstream>
#include <set>
#include <sstream>

namespace polyfrac {

namespace {

using nlohmann::json;

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r");
    std::size_t b = s.find_last_not_of(" \t\r");
    if (a == std::string::npos) return "";
    return s.substr(a, b - a + 1);
}

json parse_toml_scalar(const std::string& raw, const std::string& where) {
    const std::string v = trim(raw);
    if (v.empty()) throw ConfigError(where + ": empty value");
    if (v.front() == '"') {
        if (v.size() < 2 || v.back() != '"')
            throw ConfigError(where + ": unterminated string");
        return v.substr(1, v.size() - 2);
    }
    if (v == "true") return true;
    if (v == "false") return false;
    try {
        std::size_t used = 0;
        if (v.find_first_of(".eE") == std::string::npos &&
            v.find("inf") == std::string::npos && v.find("nan") == std::string::npos) {
            const long long i = std::stoll(v, &used);
            if (used == v.size()) return i;
        }
        const double d = std::stod(v, &used);
        if (used == v.size()) return d;
    } catch (const std::exception&) {
    }
    throw ConfigError(where + ": cannot parse value '" + v + "'");
}

json parse_toml_value(const std::string& raw, const std::string& where) {
    const std::string v = trim(raw);
    if (!v.empty() && v.front() == '[') {
        if (v.back() != ']') throw ConfigError(where + ": unterminated array");
        json arr = json::array();
        std::string inner = v.substr(1, v.size() - 2);
        std::string item;
        int depth = 0;
        bool in_str = false;
        for (char ch : inner) {
            if (ch == '"') in_str = !in_str;
            if (!in_str && ch == '[') ++depth;
            if (!in_str && ch == ']') --depth;
            if (!in_str && depth == 0 && ch == ',') {
                if (!trim(item).empty()) arr.push_back(parse_toml_value(item, where));
                item.clear();
            } else {
                item += ch;
            }
        }
        if (!trim(item).empty()) arr.push_back(parse_toml_value(item, where));
        return arr;
    }
    return parse_toml_scalar(v, where);
}

// Strips a trailing comment that is not inside a string literal.
std::string strip_comment(const std::string& line) {
    bool in_str = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        if (line[i] == '"') in_str = !in_str;
        if (line[i] == '#' && !in_str) return line.substr(0, i);
    }
    return line;
}

json parse_toml(const std::string& text) {
    json root = json::object();
    json* section = &root;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string l = trim(strip_comment(line));
        if (l.empty()) continue;
        const std::string where = "line " + std::to_string(lineno);
        if (l.front() == '[') {
            if (l.back() != ']') throw ConfigError(where + ": malformed section header");
            const std::string name = trim(l.substr(1, l.size() - 2));
            if (name.empty() || name.find('.') != std::string::npos)
                throw ConfigError(where + ": unsupported section name '" + name + "'");
            if (!root.contains(name)) root[name] = json::object();
            section = &root[name];
            continue;
        }
        const std::size_t eq = l.find('=');
        if (eq == std::string::npos) throw ConfigError(where + ": expected key = value");
        const std::string key = trim(l.substr(0, eq));
        if (key.empty()) throw ConfigError(where + ": empty key");
        (*section)[key] = parse_toml_value(l.substr(eq + 1), where + " (" + key + ")");
    }
    return root;
}

void reject_unknown(const json& obj, const std::set<std::string>& allowed,
                    const std::string& path) {
    for (const auto& [key, _] : obj.items())
        if (!allowed.count(key))
            throw ConfigError("unknown key '" + path + "." + key + "'");
}

double num(const json& v, const std::string& path) {
    if (!v.is_number()) throw ConfigError(path + ": expected a number");
    return v.get<double>();
}

std::vector<double> num_list(const json& v, const std::string& path) {
    if (!v.is_array()) throw ConfigError(path + ": expected an array of numbers");
    std::vector<double> out;
    for (const auto& e : v) out.push_back(num(e, path));
    return out;
}

// term syntax: "e1 e2 ... : coeff", e.g. "2: 1.0" for x^2, "1 1: 0.5" for 0.5xy
std::pair<std::vector<int>, double> parse_term(const std::string& term, const std::string& path) {
    const std::size_t colon = term.find(':');
    if (colon == std::string::npos)
        throw ConfigError(path + ": term '" + term + "' must look like 'exponents : coeff'");
    std::istringstream exps(term.substr(0, colon));
    std::vector<int> e;
    int v = 0;
    while (exps >> v) {
        if (v < 0) throw ConfigError(path + ": negative exponent");
        e.push_back(v);
    }
    if (e.empty()) throw ConfigError(path + ": term '" + term + "' has no exponents");
    try {
        return {e, std::stod(term.substr(colon + 1))};
    } catch (const std::exception&) {
        throw ConfigError(path + ": bad coefficient in '" + term + "'");
    }
}

std::vector<std::pair<std::vector<int>, double>> parse_terms(const json& v,
                                                             const std::string& path) {
    if (!v.is_array()) throw ConfigError(path + ": expected an array of term strings");
    std::vector<std::pair<std::vector<int>, double>> out;
    for (const auto& e : v) {
        if (!e.is_string()) throw ConfigError(path + ": terms must be strings");
        out.push_back(parse_term(e.get<std::string>(), path));
    }
    if (out.empty()) throw ConfigError(path + ": polynomial must have at least one term");
    return out;
}

ModelSpec parse_model(const json& m) {
    if (!m.is_object() || !m.contains("kind"))
        throw ConfigError("model: section with a 'kind' key required");
    const std::string kind = m["kind"].is_string() ? m["kind"].get<std::string>() : "";
    auto get = [&](const char* key, double fallback) {
        return m.contains(key) ? num(m[key], std::string("model.") + key) : fallback;
    };
    if (kind == "brownian") {
        reject_unknown(m, {"kind"}, "model");
        return ModelSpec{BrownianMotionParams{}};
    }
    if (kind == "pearson") {
        reject_unknown(m, {"kind", "beta", "theta", "a0", "a1", "a2"}, "model");
        return ModelSpec{PearsonParams{get("beta", 1.0), get("theta", 0.0), get("a0", 1.0),
                                       get("a1", 0.0), get("a2", 0.0)}};
    }
    if (kind == "jacobi") {
        reject_unknown(m, {"kind", "beta", "theta", "sigma", "lambda"}, "model");
        return ModelSpec{JacobiJumpParams{get("beta", 1.0), get("theta", 0.5), get("sigma", 0.5),
                                          get("lambda", 0.0)}};
    }
    if (kind == "levyou") {
        reject_unknown(m,
                       {"kind", "beta", "theta", "sigma", "levy_b", "levy_a", "levy_m2",
                        "levy_moments", "jump_rate", "jump_mean"},
                       "model");
        LevyOUParams p{get("beta", 1.0),   get("theta", 0.0),  get("sigma", 1.0),
                       get("levy_b", 0.0), get("levy_a", 0.0), get("levy_m2", 0.0),
                       {},                 get("jump_rate", 0.0), get("jump_mean", 0.0)};
        if (m.contains("levy_moments")) p.levy_moments = num_list(m["levy_moments"], "model.levy_moments");
        return ModelSpec{p};
    }
    if (kind == "qtsm") {
        reject_unknown(m, {"kind", "b", "beta", "sigma", "r0", "r1", "r2"}, "model");
        return ModelSpec{QTSMParams{get("b", 0.0), get("beta", 1.0), get("sigma", 1.0),
                                    get("r0", 0.0), get("r1", 0.0), get("r2", 1.0)}};
    }
    throw ConfigError("model.kind: unknown model '" + kind + "'");
}

JobConfig from_json(const json& root) {
    if (!root.is_object()) throw ConfigError("config root must be a table");
    reject_unknown(root, {"model", "query", "grids", "sim", "output"}, "");
    if (!root.contains("model")) throw ConfigError("missing [model] section");
    if (!root.contains("query")) throw ConfigError("missing [query] section");

    JobConfig cfg;
    cfg.model = parse_model(root["model"]);

    const json& q = root["query"];
    reject_unknown(q, {"kind", "p", "q", "x0", "max_degree"}, "query");
    if (!q.contains("kind") || !q["kind"].is_string())
        throw ConfigError("query.kind: required string");
    cfg.query = q["kind"].get<std::string>();
    const std::set<std::string> kinds{"moments", "correlation", "cross-moments", "simulate",
                                      "validate"};
    if (!kinds.count(cfg.query)) throw ConfigError("query.kind: unknown job '" + cfg.query + "'");
    if (q.contains("max_degree")) {
        cfg.max_degree = static_cast<int>(num(q["max_degree"], "query.max_degree"));
        if (cfg.max_degree < 1) throw ConfigError("query.max_degree: must be >= 1");
    }
    if (q.contains("p")) cfg.p_terms = parse_terms(q["p"], "query.p");
    if (q.contains("q")) cfg.q_terms = parse_terms(q["q"], "query.q");
    const int dim = cfg.model.state_dim();
    if (q.contains("x0")) {
        const auto xs = num_list(q["x0"], "query.x0");
        if (static_cast<int>(xs.size()) != dim)
            throw ConfigError("query.x0: dimension mismatch with the model");
        cfg.x0 = Eigen::Map<const Eigen::VectorXd>(xs.data(), static_cast<long>(xs.size()));
    } else {
        cfg.x0 = Eigen::VectorXd::Zero(dim);
    }
    for (const auto& terms : {cfg.p_terms, cfg.q_terms})
        for (const auto& [e, _] : terms) {
            if (static_cast<int>(e.size()) != dim)
                throw ConfigError("query polynomial: exponent tuple dimension mismatch");
            int deg = 0;
            for (int x : e) deg += x;
            if (deg > cfg.max_degree)
                throw ConfigError("query polynomial: degree exceeds max_degree");
        }

    if (root.contains("grids")) {
        const json& g = root["grids"];
        reject_unknown(g, {"t", "s", "alpha"}, "grids");
        if (g.contains("t")) cfg.t_grid = num_list(g["t"], "grids.t");
        if (g.contains("s")) cfg.s_grid = num_list(g["s"], "grids.s");
        if (g.contains("alpha")) cfg.alpha_grid = num_list(g["alpha"], "grids.alpha");
    }
    for (double a : cfg.alpha_grid)
        if (!(a > 0.0) || a > 1.0) throw ConfigError("grids.alpha: values must lie in (0,1]");
    for (double t : cfg.t_grid)
        if (t < 0.0) throw ConfigError("grids.t: values must be >= 0");
    for (double s : cfg.s_grid)
        if (s < 0.0) throw ConfigError("grids.s: values must be >= 0");

    if (root.contains("sim")) {
        const json& s = root["sim"];
        reject_unknown(s, {"n_paths", "dt_operational", "dt_subordinator", "seed", "horizon"},
                       "sim");
        if (s.contains("n_paths")) cfg.sim.n_paths = static_cast<long>(num(s["n_paths"], "sim.n_paths"));
        if (s.contains("dt_operational"))
            cfg.sim.dt_operational = num(s["dt_operational"], "sim.dt_operational");
        if (s.contains("dt_subordinator"))
            cfg.sim.dt_subordinator = num(s["dt_subordinator"], "sim.dt_subordinator");
        if (s.contains("seed"))
            cfg.sim.seed = static_cast<std::uint64_t>(num(s["seed"], "sim.seed"));
        if (s.contains("horizon")) cfg.sim.horizon = num(s["horizon"], "sim.horizon");
        try {
            validate(cfg.sim);
        } catch (const std::invalid_argument& e) {
            throw ConfigError(std::string("sim: ") + e.what());
        }
    }

    if (root.contains("output")) {
        const json& o = root["output"];
        reject_unknown(o, {"path", "format"}, "output");
        if (o.contains("path")) {
            if (!o["path"].is_string()) throw ConfigError("output.path: expected string");
            cfg.output_path = o["path"].get<std::string>();
        }
        if (o.contains("format")) {
            if (!o["format"].is_string()) throw ConfigError("output.format: expected string");
            cfg.format = o["format"].get<std::string>();
            if (cfg.format != "csv" && cfg.format != "json")
                throw ConfigError("output.format: must be 'csv' or 'json'");
        }
    }
    return cfg;
}

}  // namespace

JobConfig parse_config_text(const std::string& text, bool is_json) {
    json root;
    if (is_json) {
        try {
            root = json::parse(text);
        } catch (const json::exception& e) {
            throw ConfigError(std::string("json: ") + e.what());
        }
    } else {
        root = parse_toml(text);
    }
    return from_json(root);
}

JobConfig parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    const bool is_json = path.size() >= 5 && path.substr(path.size() - 5) == ".json";
    return parse_config_text(buf.str(), is_json);
}

PolyVec build_polynomial(const std::vector<std::pair<std::vector<int>, double>>& terms, int dim,
                         int degree) {
    auto basis = build_basis(dim, degree);
    PolyVec p(basis);
    for (const auto& [e, coeff] : terms)
        p.coeffs()[basis->index_of(MultiIndex{e})] += coeff;
    return p;
}

}  // namespace polyfrac
