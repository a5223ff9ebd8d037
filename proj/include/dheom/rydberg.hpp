#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "dheom/hierarchy.hpp"
#include "dheom/mc.hpp"

namespace dheom {

/// Stark-tuned excitation transfer between two Rydberg atoms in the
/// single-excitation subspace {|r+ r->, |r- r+>}, with the dipole-dipole
/// coupling J(t) = J0 Omega(t) fluctuating as one of the three diffusion
/// processes.
struct RydbergConfig {
    enum class Noise { None, OU, SquareRoot, Jacobi };

    double j0 = 0.5;  // base coupling, rad/us
    double T = 1.0;   // interaction time, us
    std::vector<double> detunings = default_detunings();
    Noise noise = Noise::None;

    // Noise parameters (defaults reproduce the bundled transfer sweep).
    double mu = 1.0;
    double gamma = 1.5;
    double sigma2 = 0.3;                   // OU
    double c0 = 0.0, c1 = 1.0;             // SquareRoot
    double omega1 = 0.125, omega2 = 8.0, c = 1.0; // Jacobi
    bool allow_unsound_truncation = false;

    double dt = 1e-3;
    TruncationPolicy truncation;

    int trajectories = 500;
    double dt_sde = 1e-4;
    std::uint64_t seed = 0;
    int threads = 1;

    static std::vector<double> default_detunings(); // 121 points on [-3, 3]
    ProcessSpec process() const;                    // throws for Noise::None
};

/// H0 = Delta diag(1, -1), V = J0 sigma_x in the single-excitation subspace.
std::pair<Matrix, Matrix> build_hamiltonians(double delta, double j0);

/// <2|rho|2>, clipped to [0, 1]; values outside [-1e-8, 1+1e-8] before
/// clipping signal a solver defect.
double transfer_population(const DensityMatrix& rho);

enum class SweepMethod { Dheom, MonteCarlo, Coherent };

struct SweepRow {
    double delta = 0.0;
    double population = 0.0;
    double se = 0.0; // Monte Carlo only
};

struct SweepResult {
    std::vector<SweepRow> rows; // ordered by detuning
    double wall_seconds = 0.0;
    int depth = 0; // DHEOM only
};

SweepResult sweep(const RydbergConfig& config, SweepMethod method);

} // namespace dheom
