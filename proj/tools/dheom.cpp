#include <chrono>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <iostream>
#include <random>
#include <set>
#include <sstream>

#include <CLI11.hpp>

#include "dheom/config.hpp"
#include "dheom/threading.hpp"

namespace {

constexpr const char* kToolVersion = "0.1.0";

using namespace dheom;

int resolve_threads(int flag_value) {
    if (flag_value > 0) return flag_value;
    if (const char* env = std::getenv("DHEOM_THREADS")) {
        int v = std::atoi(env);
        if (v > 0) return v;
    }
    return default_thread_count();
}

std::string timestamp() {
    std::time_t now = std::time(nullptr);
    char buf[64];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
    return buf;
}

struct OutputWriter {
    std::ofstream file;
    std::ostream* out;

    explicit OutputWriter(const std::string& path) {
        if (path.empty() || path == "-") {
            out = &std::cout;
        } else {
            file.open(path);
            if (!file) fail("ParseError", "cannot open output file '" + path + "'");
            out = &file;
        }
    }
    std::ostream& stream() { return *out; }
};

void write_manifest(const std::string& output_path, const std::string& subcommand,
                    const std::string& config_hash,
                    const std::vector<std::pair<std::string, std::string>>& extra) {
    std::ostringstream m;
    m << "tool_version = " << kToolVersion << "\n";
    m << "subcommand = " << subcommand << "\n";
    m << "config_hash = " << config_hash << "\n";
    for (const auto& [k, v] : extra) m << k << " = " << v << "\n";
    if (output_path.empty() || output_path == "-") {
        std::cerr << m.str();
    } else {
        std::ofstream f(output_path + ".manifest");
        f << m.str();
    }
}

void write_matrix_row(std::ostream& os, double t, const Matrix& m) {
    os << format_double(t);
    for (int i = 0; i < m.rows(); ++i)
        for (int j = 0; j < m.cols(); ++j)
            os << "," << format_double(m(i, j).real()) << ","
               << format_double(m(i, j).imag());
    os << "\n";
}

void write_matrix_header(std::ostream& os, const char* name, int rows, int cols) {
    os << "t";
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j)
            os << "," << name << "_" << i << j << "_re," << name << "_" << i << j << "_im";
    os << "\n";
}

int run_simulate(const std::string& config_path, const std::string& output,
                 const BuildOptions& opt) {
    ConfigFile cfg = parse_config_file(config_path);
    SolverConfig sc = solver_config_from(cfg, opt);
    SolveResult res = integrate(sc);

    OutputWriter w(output);
    w.stream() << "# generated " << timestamp() << "\n";
    write_matrix_header(w.stream(), "rho", static_cast<int>(sc.h0.rows()),
                        static_cast<int>(sc.h0.cols()));
    for (std::size_t k = 0; k < res.t.size(); ++k)
        write_matrix_row(w.stream(), res.t[k], res.rho[k]);

    write_manifest(output, "simulate", cfg.hash(),
                   {{"depth", std::to_string(res.diagnostics.depth)},
                    {"steps", std::to_string(res.diagnostics.steps)},
                    {"trace_drift", format_double(res.diagnostics.trace_drift)},
                    {"aux_trace", format_double(res.diagnostics.aux_trace)},
                    {"hermiticity_drift", format_double(res.diagnostics.hermiticity_drift)},
                    {"wall_solver_s", format_double(res.diagnostics.wall_seconds)}});
    return 0;
}

int run_propagator(const std::string& config_path, const std::string& output,
                   const BuildOptions& opt) {
    ConfigFile cfg = parse_config_file(config_path);
    SolverConfig sc = solver_config_from(cfg, opt);
    PropagatorResult res = integrate_propagator(sc);

    const int dd = static_cast<int>(sc.h0.rows() * sc.h0.rows());
    OutputWriter w(output);
    w.stream() << "# generated " << timestamp() << "\n";
    write_matrix_header(w.stream(), "E", dd, dd);
    for (std::size_t k = 0; k < res.t.size(); ++k)
        write_matrix_row(w.stream(), res.t[k], res.maps[k]);

    write_manifest(output, "propagator", cfg.hash(),
                   {{"depth", std::to_string(res.diagnostics.depth)},
                    {"wall_solver_s", format_double(res.diagnostics.wall_seconds)}});
    return 0;
}

int run_montecarlo(const std::string& config_path, const std::string& output,
                   const BuildOptions& opt) {
    ConfigFile cfg = parse_config_file(config_path);
    McConfig mc = mc_config_from(cfg, opt);
    McResult res = average(mc);

    const int d = static_cast<int>(mc.h0.rows());
    OutputWriter w(output);
    w.stream() << "# generated " << timestamp() << "\n";
    w.stream() << "t";
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
            w.stream() << ",rho_" << i << j << "_re,rho_" << i << j << "_im,rho_" << i
                       << j << "_se";
    w.stream() << "\n";
    for (std::size_t k = 0; k < res.t.size(); ++k) {
        w.stream() << format_double(res.t[k]);
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j)
                w.stream() << "," << format_double(res.mean[k](i, j).real()) << ","
                           << format_double(res.mean[k](i, j).imag()) << ","
                           << format_double(res.se[k](i, j));
        w.stream() << "\n";
    }

    write_manifest(output, "montecarlo", cfg.hash(),
                   {{"trajectories", std::to_string(mc.trajectories)},
                    {"seed", std::to_string(mc.seed)},
                    {"wall_mc_s", format_double(res.wall_seconds)}});
    return 0;
}

int run_rydberg_sweep(const std::string& config_path, const std::string& output,
                      const std::string& method, const std::string& noise,
                      const BuildOptions& opt) {
    ConfigFile cfg;
    if (!config_path.empty()) cfg = parse_config_file(config_path);
    RydbergConfig rc = rydberg_config_from(cfg, opt);
    if (!noise.empty()) {
        if (noise == "none")
            rc.noise = RydbergConfig::Noise::None;
        else if (noise == "ou")
            rc.noise = RydbergConfig::Noise::OU;
        else if (noise == "sr")
            rc.noise = RydbergConfig::Noise::SquareRoot;
        else if (noise == "jacobi")
            rc.noise = RydbergConfig::Noise::Jacobi;
        else
            fail("ValidationError", "--noise must be none, ou, sr or jacobi");
    }
    SweepMethod m = SweepMethod::Dheom;
    if (method == "dheom")
        m = SweepMethod::Dheom;
    else if (method == "mc")
        m = SweepMethod::MonteCarlo;
    else if (method == "coherent")
        m = SweepMethod::Coherent;
    else
        fail("ValidationError", "--method must be dheom, mc or coherent");
    if (rc.noise == RydbergConfig::Noise::None) m = SweepMethod::Coherent;

    SweepResult res = sweep(rc, m);

    OutputWriter w(output);
    w.stream() << "# generated " << timestamp() << "\n";
    w.stream() << (m == SweepMethod::MonteCarlo ? "delta,population,se\n"
                                                : "delta,population\n");
    for (const SweepRow& row : res.rows) {
        w.stream() << format_double(row.delta) << "," << format_double(row.population);
        if (m == SweepMethod::MonteCarlo) w.stream() << "," << format_double(row.se);
        w.stream() << "\n";
    }

    write_manifest(output, "rydberg-sweep", cfg.hash(),
                   {{"method", method.empty() ? "dheom" : method},
                    {"depth", std::to_string(res.depth)},
                    {"wall_sweep_s", format_double(res.wall_seconds)}});
    return 0;
}

// DHEOM vs Monte Carlo cross-check on seeded random 2-level problems,
// reporting max deviation against the statistical allowance and the
// wall-time ratio.
int run_validate(const std::string& process, std::uint64_t seed, const BuildOptions& opt) {
    ProcessSpec spec;
    if (process == "ou")
        spec = ProcessSpec::ornstein_uhlenbeck(1.0, 1.5, 0.3);
    else if (process == "sr")
        spec = ProcessSpec::square_root(1.0, 1.5, 0.0, 1.0, opt.allow_unsound_truncation);
    else if (process == "jacobi")
        spec = ProcessSpec::jacobi(1.0, 1.5, 0.125, 8.0, 1.0);
    else
        fail("ValidationError", "--process must be ou, sr or jacobi");
    validate(spec);

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    auto random_hermitian = [&](double scale) {
        Matrix m(2, 2);
        m(0, 0) = scale * normal(rng);
        m(1, 1) = scale * normal(rng);
        Complex off(scale * normal(rng), scale * normal(rng));
        m(0, 1) = off;
        m(1, 0) = std::conj(off);
        return m;
    };

    const double t_final = 2.0 / spec.gamma;
    double worst_margin = -1e300;
    double dheom_wall = 0.0, mc_wall = 0.0;
    bool pass = true;
    for (int problem = 0; problem < 5; ++problem) {
        SolverConfig sc;
        sc.h0 = random_hermitian(1.0);
        sc.v = random_hermitian(1.0);
        sc.v *= 0.4 / spectral_norm_hermitian(sc.v); // fixed coupling strength
        const double p = uni(rng);
        Matrix rho0 = Matrix::Zero(2, 2);
        rho0(0, 0) = p;
        rho0(1, 1) = 1.0 - p;
        Complex coh = std::sqrt(p * (1.0 - p)) * std::exp(Complex(0, 2 * M_PI * uni(rng)));
        rho0(0, 1) = coh;
        rho0(1, 0) = std::conj(coh);
        sc.rho0 = rho0;
        sc.process = spec;
        sc.t_grid = {0.0, t_final};
        sc.dt = 5e-4;
        sc.truncation.kappa = spec.kind == ProcessKind::SquareRoot ? 1.5 : 10.0;

        SolveResult dh = integrate(sc);
        dheom_wall += dh.diagnostics.wall_seconds;

        McConfig mc;
        mc.h0 = sc.h0;
        mc.v = sc.v;
        mc.rho0 = sc.rho0;
        mc.process = spec;
        mc.t_grid = sc.t_grid;
        mc.dt = 1e-3;
        mc.dt_sde = 1e-4;
        mc.trajectories = 1000;
        mc.seed = seed + 7919ULL * problem;
        mc.threads = opt.threads;
        McResult avg = average(mc);
        mc_wall += avg.wall_seconds;

        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) {
                const double dev = std::abs(dh.rho.back()(i, j) - avg.mean.back()(i, j));
                const double allow = std::max(3.0 * avg.se.back()(i, j), 1e-2);
                worst_margin = std::max(worst_margin, dev - allow);
                if (dev > allow) pass = false;
            }
    }
    std::cout << "process = " << process << "\n";
    std::cout << "max (deviation - allowance) = " << format_double(worst_margin) << "\n";
    std::cout << "dheom_wall_s = " << format_double(dheom_wall) << "\n";
    std::cout << "mc_wall_s = " << format_double(mc_wall) << "\n";
    std::cout << "mc/dheom speedup = " << format_double(mc_wall / std::max(dheom_wall, 1e-12))
              << "\n";
    std::cout << (pass ? "VALIDATION PASS" : "VALIDATION FAIL") << "\n";
    return pass ? 0 : 1;
}

bool is_config_error(const std::string& code) {
    static const std::set<std::string> codes = {
        "ParseError",      "ValidationError", "InvalidParameter", "TruncationUnsound",
        "MeanOutOfDomain", "NotHermitian",    "NotDensityMatrix", "DimensionMismatch",
        "DomainError",     "DegenerateRecurrence", "StepTooLarge"};
    return codes.count(code) > 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Hierarchical solver for quantum systems driven by diffusive Markov noise"};
    app.require_subcommand(1);

    std::string config_path, output, method = "dheom", noise, process = "ou";
    int threads_flag = 0, depth = 0;
    std::uint64_t seed = 0;
    bool seed_set = false, allow_unsound = false;

    auto add_common = [&](CLI::App* sub, bool config_required) {
        auto* c = sub->add_option("--config", config_path, "path to .cfg file");
        if (config_required) c->required();
        sub->add_option("--output", output, "output CSV path ('-' for stdout)");
        sub->add_option("--seed", seed, "RNG seed override")->each([&](const std::string&) {
            seed_set = true;
        });
        sub->add_option("--threads", threads_flag,
                        "worker threads (default: DHEOM_THREADS or machine parallelism)");
        sub->add_option("--depth", depth, "fixed hierarchy depth override");
        sub->add_flag("--allow-unsound-truncation", allow_unsound,
                      "accept square-root processes with gamma <= 1");
    };

    auto* sim = app.add_subcommand("simulate", "integrate the density-matrix hierarchy");
    add_common(sim, true);
    auto* prop = app.add_subcommand("propagator", "integrate the propagator hierarchy");
    add_common(prop, true);
    auto* mc = app.add_subcommand("montecarlo", "trajectory-averaged Monte Carlo reference");
    add_common(mc, true);
    auto* ryd = app.add_subcommand("rydberg-sweep", "Stark-detuning transfer sweep");
    add_common(ryd, false);
    ryd->add_option("--method", method, "dheom | mc | coherent");
    ryd->add_option("--noise", noise, "none | ou | sr | jacobi");
    auto* val = app.add_subcommand("validate", "DHEOM vs Monte Carlo cross-check");
    val->add_option("--process", process, "ou | sr | jacobi");
    val->add_option("--seed", seed, "RNG seed");
    val->add_option("--threads", threads_flag, "worker threads");
    val->add_flag("--allow-unsound-truncation", allow_unsound,
                  "accept square-root processes with gamma <= 1");

    CLI11_PARSE(app, argc, argv);

    BuildOptions opt;
    opt.seed = seed;
    opt.seed_overridden = seed_set;
    opt.depth_override = depth;
    opt.allow_unsound_truncation = allow_unsound;
    opt.threads = resolve_threads(threads_flag);

    try {
        if (sim->parsed()) return run_simulate(config_path, output, opt);
        if (prop->parsed()) return run_propagator(config_path, output, opt);
        if (mc->parsed()) return run_montecarlo(config_path, output, opt);
        if (ryd->parsed()) return run_rydberg_sweep(config_path, output, method, noise, opt);
        if (val->parsed()) return run_validate(process, seed, opt);
    } catch (const dheom::Error& e) {
        std::cerr << e.what() << "\n";
        std::cerr << "ERROR " << e.code() << ": " << e.what() << std::endl;
        return is_config_error(e.code()) ? 2 : 1;
    } catch (const std::exception& e) {
        std::cerr << "ERROR Internal: " << e.what() << std::endl;
        return 1;
    }
    return 0;
}
