#include "dheom/rydberg.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "dheom/threading.hpp"

namespace dheom {

namespace {

Matrix initial_state() {
    Matrix rho = Matrix::Zero(2, 2);
    rho(0, 0) = 1.0;
    return rho;
}

} // namespace

std::vector<double> RydbergConfig::default_detunings() {
    std::vector<double> d(121);
    for (int i = 0; i < 121; ++i) d[i] = -3.0 + 6.0 * i / 120.0;
    return d;
}

ProcessSpec RydbergConfig::process() const {
    switch (noise) {
    case Noise::OU:
        return ProcessSpec::ornstein_uhlenbeck(mu, gamma, sigma2);
    case Noise::SquareRoot:
        return ProcessSpec::square_root(mu, gamma, c0, c1, allow_unsound_truncation);
    case Noise::Jacobi:
        return ProcessSpec::jacobi(mu, gamma, omega1, omega2, c);
    case Noise::None:
        break;
    }
    fail("InvalidParameter", "noise model 'none' has no diffusion process");
}

std::pair<Matrix, Matrix> build_hamiltonians(double delta, double j0) {
    Matrix h0 = Matrix::Zero(2, 2);
    h0(0, 0) = delta;
    h0(1, 1) = -delta;
    Matrix v = Matrix::Zero(2, 2);
    v(0, 1) = j0;
    v(1, 0) = j0;
    return {h0, v};
}

double transfer_population(const DensityMatrix& rho) {
    if (rho.dim() != 2)
        fail("DimensionMismatch", "transfer_population expects the 2x2 subspace state");
    const double p = rho.matrix()(1, 1).real();
    if (p < -1e-8 || p > 1.0 + 1e-8)
        fail("PopulationOutOfRange",
             "population " + std::to_string(p) + " outside [0,1] beyond clip tolerance");
    return std::clamp(p, 0.0, 1.0);
}

SweepResult sweep(const RydbergConfig& config, SweepMethod method) {
    const auto start = std::chrono::steady_clock::now();
    if (config.detunings.empty())
        fail("InvalidParameter", "detuning list must be nonempty");
    if (!(config.j0 > 0.0) || !(config.T > 0.0))
        fail("InvalidParameter", "J0 and T must be positive");
    if (config.noise == RydbergConfig::Noise::None && method != SweepMethod::Coherent)
        fail("InvalidParameter", "noise 'none' is only meaningful with the coherent method");

    std::vector<double> deltas = config.detunings;
    std::sort(deltas.begin(), deltas.end());
    const int rows = static_cast<int>(deltas.size());

    SweepResult result;
    result.rows.resize(rows);

    switch (method) {
    case SweepMethod::Coherent: {
        parallel_for(rows, config.threads, [&](int i) {
            auto [h0, v] = build_hamiltonians(deltas[i], config.j0);
            Matrix heff = h0 + config.mu * v;
            DensityMatrix rho =
                evolve_exact(heff, DensityMatrix(initial_state()), config.T);
            result.rows[i] = {deltas[i], transfer_population(rho), 0.0};
        });
        break;
    }
    case SweepMethod::Dheom: {
        ProcessSpec spec = config.process();
        // One depth selection at the largest |Delta| covers the whole sweep:
        // the separation bound only tightens as ||H0|| grows.
        double dmax = 0.0;
        for (double d : deltas) dmax = std::max(dmax, std::abs(d));
        SolverConfig ref;
        std::tie(ref.h0, ref.v) = build_hamiltonians(dmax, config.j0);
        ref.process = spec;
        ref.rho0 = initial_state();
        ref.t_grid = {0.0, config.T};
        ref.dt = config.dt;
        ref.truncation = config.truncation;
        if (spec.kind == ProcessKind::SquareRoot)
            ref.truncation.kappa = std::min(ref.truncation.kappa, 1.5);
        const int depth = select_depth(ref);
        const double dt_eff =
            std::min(config.dt, 0.09 / eigenvalue(spec, depth));
        result.depth = depth;

        parallel_for(rows, config.threads, [&](int i) {
            SolverConfig cfg = ref;
            std::tie(cfg.h0, cfg.v) = build_hamiltonians(deltas[i], config.j0);
            cfg.dt = dt_eff;
            SolveResult sol = integrate_at_depth(cfg, depth);
            result.rows[i] = {deltas[i],
                              transfer_population(DensityMatrix(sol.rho.back())), 0.0};
        });
        break;
    }
    case SweepMethod::MonteCarlo: {
        ProcessSpec spec = config.process();
        for (int i = 0; i < rows; ++i) {
            McConfig mc;
            std::tie(mc.h0, mc.v) = build_hamiltonians(deltas[i], config.j0);
            mc.process = spec;
            mc.rho0 = initial_state();
            mc.t_grid = {0.0, config.T};
            mc.dt = config.dt;
            mc.dt_sde = config.dt_sde;
            mc.trajectories = config.trajectories;
            mc.seed = config.seed + 1000003ULL * static_cast<std::uint64_t>(i);
            mc.threads = config.threads;
            McResult r = average(mc);
            result.rows[i] = {deltas[i],
                              transfer_population(DensityMatrix(hermitian_part(r.mean.back()))),
                              r.se.back()(1, 1)};
        }
        break;
    }
    }
    result.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return result;
}

} // namespace dheom
