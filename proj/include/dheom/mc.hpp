#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "dheom/matrix.hpp"
#include "dheom/process.hpp"

namespace dheom {

struct McConfig {
    Matrix h0;
    Matrix v;
    ProcessSpec process;
    Matrix rho0;
    std::vector<double> t_grid; // strictly increasing, starting at 0
    double dt = 1e-3;           // quantum step
    double dt_sde = 1e-4;       // Euler-Maruyama sub-step
    int trajectories = 500;
    std::uint64_t seed = 0;
    enum class Boundary { Reflect, Clamp };
    Boundary boundary = Boundary::Reflect;
    int threads = 1;
};

struct McResult {
    std::vector<double> t;
    std::vector<Matrix> mean;            // sample mean per grid time
    std::vector<Eigen::MatrixXd> se;     // elementwise standard error per grid time
    double wall_seconds = 0.0;
};

/// Deterministic per-trajectory RNG stream, independent of thread scheduling.
std::mt19937_64 stream_rng(std::uint64_t seed, std::uint64_t stream);

/// One Euler-Maruyama step with boundary handling on exit from the domain.
double sde_step(const ProcessSpec& spec, double omega, double dt,
                McConfig::Boundary boundary, std::mt19937_64& rng);

/// One noise realization: Omega(0) from the stationary law, SDE sub-steps
/// alternating with exact quantum steps under H0 + mean(Omega) V.
std::vector<Matrix> run_trajectory(const McConfig& config, std::uint64_t stream);

/// Trajectory average with elementwise standard errors. Reduction is a
/// pairwise tree over trajectory index, so results do not depend on the
/// thread count.
McResult average(const McConfig& config);

} // namespace dheom
