#include "dheom/config.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <vector>

namespace dheom {

namespace {

const std::map<std::string, std::set<std::string>>& schema() {
    static const std::map<std::string, std::set<std::string>> s = {
        {"system", {"dim", "h0", "v", "rho0"}},
        {"process", {"kind", "gamma", "mu", "sigma2", "c0", "c1", "omega1", "omega2", "c"}},
        {"grid", {"t_final", "output_points", "dt"}},
        {"truncation", {"mode", "depth", "kappa", "tol", "max_depth"}},
        {"mc", {"trajectories", "dt_sde", "seed", "boundary"}},
        {"rydberg", {"j0", "t", "delta_min", "delta_max", "delta_points", "noise"}},
    };
    return s;
}

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

[[noreturn]] void parse_fail(const std::string& name, int line, const std::string& msg) {
    fail("ParseError", name + ":" + std::to_string(line) + ": " + msg);
}

[[noreturn]] void missing(const std::string& section, const std::string& key) {
    fail("ValidationError", "missing required key '" + key + "' in [" + section + "]");
}

double to_double(const std::string& section, const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        double x = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return x;
    } catch (const std::exception&) {
        fail("ValidationError", "[" + section + "] " + key + ": not a number: '" + v + "'");
    }
}

long to_long(const std::string& section, const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        long x = std::stol(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return x;
    } catch (const std::exception&) {
        fail("ValidationError", "[" + section + "] " + key + ": not an integer: '" + v + "'");
    }
}

std::vector<std::string> split_list(const std::string& v) {
    std::vector<std::string> out;
    std::string tok;
    std::stringstream ss(v);
    while (std::getline(ss, tok, ',')) {
        tok = trim(tok);
        if (!tok.empty()) out.push_back(tok);
    }
    return out;
}

Matrix parse_matrix(const std::string& section, const std::string& key,
                    const std::string& v, int dim) {
    std::vector<std::string> toks = split_list(v);
    if (static_cast<int>(toks.size()) != dim * dim)
        fail("ValidationError", "[" + section + "] " + key + ": expected " +
                                    std::to_string(dim * dim) + " entries, got " +
                                    std::to_string(toks.size()));
    Matrix m(dim, dim);
    for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j)
            m(i, j) = parse_complex(toks[i * dim + j]); // row-major list
    return m;
}

std::vector<double> uniform_grid(double t_final, int points) {
    std::vector<double> g(points);
    for (int i = 0; i < points; ++i)
        g[i] = t_final * i / static_cast<double>(points - 1);
    g.front() = 0.0;
    g.back() = t_final;
    return g;
}

} // namespace

std::string format_double(double x) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

Complex parse_complex(const std::string& token) {
    const std::string t = trim(token);
    if (t.empty()) fail("ValidationError", "empty complex literal");
    if (t.back() != 'j' && t.back() != 'J') {
        // pure real
        try {
            std::size_t pos = 0;
            double re = std::stod(t, &pos);
            if (pos == t.size()) return Complex(re, 0.0);
        } catch (const std::exception&) {
        }
        fail("ValidationError", "bad complex literal '" + token + "'");
    }
    std::string body = t.substr(0, t.size() - 1);
    // split at the last +/- that is not an exponent sign and not leading
    std::size_t split = std::string::npos;
    for (std::size_t i = body.size(); i-- > 1;) {
        if ((body[i] == '+' || body[i] == '-') &&
            body[i - 1] != 'e' && body[i - 1] != 'E') {
            split = i;
            break;
        }
    }
    try {
        if (split == std::string::npos) {
            // pure imaginary, e.g. "1.5j" or "-j"
            std::string im = body.empty() || body == "+" ? "1" : (body == "-" ? "-1" : body);
            return Complex(0.0, std::stod(im));
        }
        double re = std::stod(body.substr(0, split));
        std::string ims = body.substr(split);
        if (ims == "+") ims = "1";
        if (ims == "-") ims = "-1";
        return Complex(re, std::stod(ims));
    } catch (const std::exception&) {
        fail("ValidationError", "bad complex literal '" + token + "'");
    }
}

bool ConfigFile::has(const std::string& section, const std::string& key) const {
    auto it = sections.find(section);
    return it != sections.end() && it->second.count(key) > 0;
}

const std::string& ConfigFile::get(const std::string& section, const std::string& key) const {
    auto it = sections.find(section);
    if (it == sections.end() || !it->second.count(key)) missing(section, key);
    return it->second.at(key);
}

std::string ConfigFile::canonical() const {
    std::string out;
    for (const auto& [sec, kv] : sections) {
        out += "[" + sec + "]\n";
        for (const auto& [k, v] : kv) {
            // normalize list spacing
            std::vector<std::string> toks = split_list(v);
            std::string nv;
            for (std::size_t i = 0; i < toks.size(); ++i)
                nv += (i ? ", " : "") + toks[i];
            out += k + " = " + nv + "\n";
        }
    }
    return out;
}

std::string ConfigFile::hash() const {
    const std::string c = canonical();
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : c) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

ConfigFile parse_config_text(const std::string& text, const std::string& name) {
    ConfigFile cfg;
    std::istringstream in(text);
    std::string line;
    std::string section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::size_t hash_pos = line.find_first_of("#;");
        if (hash_pos != std::string::npos) line = line.substr(0, hash_pos);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') parse_fail(name, lineno, "unterminated section header");
            section = trim(line.substr(1, line.size() - 2));
            if (!schema().count(section))
                parse_fail(name, lineno, "unknown section [" + section + "]");
            cfg.sections[section]; // create even if empty
            continue;
        }
        std::size_t eq = line.find('=');
        if (eq == std::string::npos) parse_fail(name, lineno, "expected 'key = value'");
        if (section.empty()) parse_fail(name, lineno, "key outside any [section]");
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (!schema().at(section).count(key))
            parse_fail(name, lineno, "unknown key '" + key + "' in [" + section + "]");
        if (cfg.sections[section].count(key))
            parse_fail(name, lineno, "duplicate key '" + key + "'");
        cfg.sections[section][key] = value;
    }
    return cfg;
}

ConfigFile parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail("ParseError", "cannot open config file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str(), path);
}

ProcessSpec process_from(const ConfigFile& cfg, const BuildOptions& opt) {
    const std::string kind = cfg.get("process", "kind");
    const double gamma = to_double("process", "gamma", cfg.get("process", "gamma"));
    const double mu = to_double("process", "mu", cfg.get("process", "mu"));
    auto forbid = [&](const char* key) {
        if (cfg.has("process", key))
            fail("ValidationError",
                 std::string("[process] key '") + key + "' does not apply to kind '" + kind + "'");
    };
    ProcessSpec spec;
    if (kind == "ou") {
        for (const char* k : {"c0", "c1", "omega1", "omega2", "c"}) forbid(k);
        if (!cfg.has("process", "sigma2")) missing("process", "sigma2");
        spec = ProcessSpec::ornstein_uhlenbeck(
            mu, gamma, to_double("process", "sigma2", cfg.get("process", "sigma2")));
    } else if (kind == "sr") {
        for (const char* k : {"sigma2", "omega1", "omega2", "c"}) forbid(k);
        if (!cfg.has("process", "c1")) missing("process", "c1");
        const double c0 = cfg.has("process", "c0")
                              ? to_double("process", "c0", cfg.get("process", "c0"))
                              : 0.0;
        spec = ProcessSpec::square_root(mu, gamma,
                                        c0,
                                        to_double("process", "c1", cfg.get("process", "c1")),
                                        opt.allow_unsound_truncation);
    } else if (kind == "jacobi") {
        for (const char* k : {"sigma2", "c0", "c1"}) forbid(k);
        for (const char* k : {"omega1", "omega2", "c"})
            if (!cfg.has("process", k)) missing("process", k);
        spec = ProcessSpec::jacobi(mu, gamma,
                                   to_double("process", "omega1", cfg.get("process", "omega1")),
                                   to_double("process", "omega2", cfg.get("process", "omega2")),
                                   to_double("process", "c", cfg.get("process", "c")));
    } else {
        fail("ValidationError", "[process] kind must be one of ou, sr, jacobi");
    }
    validate(spec);
    return spec;
}

namespace {

TruncationPolicy truncation_from(const ConfigFile& cfg, const BuildOptions& opt) {
    TruncationPolicy p;
    if (opt.depth_override > 0) {
        p = TruncationPolicy::fixed(opt.depth_override);
        return p;
    }
    if (cfg.has("truncation", "mode")) {
        const std::string& mode = cfg.get("truncation", "mode");
        if (mode == "fixed")
            p.mode = TruncationPolicy::Mode::Fixed;
        else if (mode == "auto")
            p.mode = TruncationPolicy::Mode::Auto;
        else
            fail("ValidationError", "[truncation] mode must be 'auto' or 'fixed'");
    }
    if (p.mode == TruncationPolicy::Mode::Fixed) {
        if (!cfg.has("truncation", "depth")) missing("truncation", "depth");
        p.depth = static_cast<int>(to_long("truncation", "depth", cfg.get("truncation", "depth")));
    }
    if (cfg.has("truncation", "kappa"))
        p.kappa = to_double("truncation", "kappa", cfg.get("truncation", "kappa"));
    if (cfg.has("truncation", "tol"))
        p.convergence_tol = to_double("truncation", "tol", cfg.get("truncation", "tol"));
    if (cfg.has("truncation", "max_depth"))
        p.max_depth =
            static_cast<int>(to_long("truncation", "max_depth", cfg.get("truncation", "max_depth")));
    if (!(p.kappa > 1.0)) fail("ValidationError", "[truncation] kappa must be > 1");
    if (!(p.convergence_tol > 0.0)) fail("ValidationError", "[truncation] tol must be > 0");
    return p;
}

struct SystemBlock {
    Matrix h0, v, rho0;
    std::vector<double> t_grid;
    double dt;
};

SystemBlock system_from(const ConfigFile& cfg) {
    SystemBlock sb;
    const int dim = static_cast<int>(to_long("system", "dim", cfg.get("system", "dim")));
    if (dim < 1) fail("ValidationError", "[system] dim must be >= 1");
    sb.h0 = parse_matrix("system", "h0", cfg.get("system", "h0"), dim);
    sb.v = parse_matrix("system", "v", cfg.get("system", "v"), dim);
    sb.rho0 = parse_matrix("system", "rho0", cfg.get("system", "rho0"), dim);
    const double t_final = to_double("grid", "t_final", cfg.get("grid", "t_final"));
    if (!(t_final > 0.0)) fail("ValidationError", "[grid] t_final must be > 0");
    int points = 11;
    if (cfg.has("grid", "output_points"))
        points = static_cast<int>(
            to_long("grid", "output_points", cfg.get("grid", "output_points")));
    if (points < 2) fail("ValidationError", "[grid] output_points must be >= 2");
    sb.t_grid = uniform_grid(t_final, points);
    sb.dt = cfg.has("grid", "dt") ? to_double("grid", "dt", cfg.get("grid", "dt")) : 1e-3;
    return sb;
}

} // namespace

SolverConfig solver_config_from(const ConfigFile& cfg, const BuildOptions& opt) {
    SystemBlock sb = system_from(cfg);
    SolverConfig sc;
    sc.h0 = std::move(sb.h0);
    sc.v = std::move(sb.v);
    sc.rho0 = std::move(sb.rho0);
    sc.t_grid = std::move(sb.t_grid);
    sc.dt = sb.dt;
    sc.process = process_from(cfg, opt);
    sc.truncation = truncation_from(cfg, opt);
    return sc;
}

McConfig mc_config_from(const ConfigFile& cfg, const BuildOptions& opt) {
    SystemBlock sb = system_from(cfg);
    McConfig mc;
    mc.h0 = std::move(sb.h0);
    mc.v = std::move(sb.v);
    mc.rho0 = std::move(sb.rho0);
    mc.t_grid = std::move(sb.t_grid);
    mc.dt = sb.dt;
    mc.process = process_from(cfg, opt);
    if (cfg.has("mc", "trajectories"))
        mc.trajectories =
            static_cast<int>(to_long("mc", "trajectories", cfg.get("mc", "trajectories")));
    if (cfg.has("mc", "dt_sde"))
        mc.dt_sde = to_double("mc", "dt_sde", cfg.get("mc", "dt_sde"));
    if (cfg.has("mc", "seed"))
        mc.seed = static_cast<std::uint64_t>(to_long("mc", "seed", cfg.get("mc", "seed")));
    if (opt.seed_overridden) mc.seed = opt.seed;
    if (cfg.has("mc", "boundary")) {
        const std::string& b = cfg.get("mc", "boundary");
        if (b == "reflect")
            mc.boundary = McConfig::Boundary::Reflect;
        else if (b == "clamp")
            mc.boundary = McConfig::Boundary::Clamp;
        else
            fail("ValidationError", "[mc] boundary must be 'reflect' or 'clamp'");
    }
    mc.threads = opt.threads;
    return mc;
}

RydbergConfig rydberg_config_from(const ConfigFile& cfg, const BuildOptions& opt) {
    RydbergConfig rc;
    if (cfg.has("rydberg", "j0")) rc.j0 = to_double("rydberg", "j0", cfg.get("rydberg", "j0"));
    if (cfg.has("rydberg", "t")) rc.T = to_double("rydberg", "t", cfg.get("rydberg", "t"));
    double dmin = -3.0, dmax = 3.0;
    int dpoints = 121;
    if (cfg.has("rydberg", "delta_min"))
        dmin = to_double("rydberg", "delta_min", cfg.get("rydberg", "delta_min"));
    if (cfg.has("rydberg", "delta_max"))
        dmax = to_double("rydberg", "delta_max", cfg.get("rydberg", "delta_max"));
    if (cfg.has("rydberg", "delta_points"))
        dpoints = static_cast<int>(
            to_long("rydberg", "delta_points", cfg.get("rydberg", "delta_points")));
    if (dpoints < 1 || !(dmax >= dmin))
        fail("ValidationError", "[rydberg] bad detuning range");
    rc.detunings.clear();
    for (int i = 0; i < dpoints; ++i)
        rc.detunings.push_back(dpoints == 1 ? dmin
                                            : dmin + (dmax - dmin) * i / (dpoints - 1.0));
    if (cfg.has("rydberg", "noise")) {
        const std::string& n = cfg.get("rydberg", "noise");
        if (n == "none")
            rc.noise = RydbergConfig::Noise::None;
        else if (n == "ou")
            rc.noise = RydbergConfig::Noise::OU;
        else if (n == "sr")
            rc.noise = RydbergConfig::Noise::SquareRoot;
        else if (n == "jacobi")
            rc.noise = RydbergConfig::Noise::Jacobi;
        else
            fail("ValidationError", "[rydberg] noise must be none, ou, sr or jacobi");
    }
    // Optional [process] overrides for the noise parameters.
    if (cfg.sections.count("process") && rc.noise != RydbergConfig::Noise::None) {
        ProcessSpec spec = process_from(cfg, opt);
        rc.mu = spec.mu;
        rc.gamma = spec.gamma;
        switch (spec.kind) {
        case ProcessKind::OrnsteinUhlenbeck:
            if (rc.noise != RydbergConfig::Noise::OU)
                fail("ValidationError", "[process] kind conflicts with [rydberg] noise");
            rc.sigma2 = spec.sigma2;
            break;
        case ProcessKind::SquareRoot:
            if (rc.noise != RydbergConfig::Noise::SquareRoot)
                fail("ValidationError", "[process] kind conflicts with [rydberg] noise");
            rc.c0 = spec.c0;
            rc.c1 = spec.c1;
            break;
        case ProcessKind::Jacobi:
            if (rc.noise != RydbergConfig::Noise::Jacobi)
                fail("ValidationError", "[process] kind conflicts with [rydberg] noise");
            rc.omega1 = spec.omega1;
            rc.omega2 = spec.omega2;
            rc.c = spec.c;
            break;
        }
    }
    rc.allow_unsound_truncation = opt.allow_unsound_truncation;
    if (cfg.sections.count("grid") && cfg.has("grid", "dt"))
        rc.dt = to_double("grid", "dt", cfg.get("grid", "dt"));
    if (cfg.sections.count("truncation")) rc.truncation = truncation_from(cfg, opt);
    else if (opt.depth_override > 0)
        rc.truncation = TruncationPolicy::fixed(opt.depth_override);
    if (cfg.sections.count("mc")) {
        if (cfg.has("mc", "trajectories"))
            rc.trajectories =
                static_cast<int>(to_long("mc", "trajectories", cfg.get("mc", "trajectories")));
        if (cfg.has("mc", "dt_sde"))
            rc.dt_sde = to_double("mc", "dt_sde", cfg.get("mc", "dt_sde"));
        if (cfg.has("mc", "seed"))
            rc.seed = static_cast<std::uint64_t>(to_long("mc", "seed", cfg.get("mc", "seed")));
    }
    if (opt.seed_overridden) rc.seed = opt.seed;
    rc.threads = opt.threads;
    return rc;
}

} // namespace dheom
