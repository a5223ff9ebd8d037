#pragma once

#include <span>
#include <vector>

#include "dheom/matrix.hpp"
#include "dheom/process.hpp"

namespace dheom {

struct TruncationPolicy {
    enum class Mode { Fixed, Auto };
    Mode mode = Mode::Auto;
    int depth = 0;                 // Fixed mode
    double kappa = 10.0;           // separation factor for the eigenvalue bound
    double convergence_tol = 1e-6; // depth-scan tolerance on rho_0
    int max_depth = 512;

    static TruncationPolicy fixed(int n) {
        TruncationPolicy p;
        p.mode = Mode::Fixed;
        p.depth = n;
        return p;
    }
};

struct SolverConfig {
    Matrix h0;
    Matrix v;
    ProcessSpec process;
    Matrix rho0;
    std::vector<double> t_grid; // strictly increasing, starting at 0
    double dt = 1e-3;
    TruncationPolicy truncation;
};

struct SolverDiagnostics {
    int depth = 0;
    double trace_drift = 0.0;       // max |tr rho_0(t) - tr rho_0(0)|
    double aux_trace = 0.0;         // max_n>=1 |tr rho_n(t)|
    double hermiticity_drift = 0.0; // max defect of rho_0 before re-symmetrization
    double wall_seconds = 0.0;
    long steps = 0;
};

struct SolveResult {
    std::vector<double> t;
    std::vector<Matrix> rho; // re-symmetrized rho_0 at each grid time
    SolverDiagnostics diagnostics;
};

struct PropagatorResult {
    std::vector<double> t;
    std::vector<Matrix> maps; // d^2 x d^2 averaged propagator at each grid time
    SolverDiagnostics diagnostics;
};

/// Hierarchy coefficients for levels 0..depth, derived from the process
/// recurrence triples: level n evolves as
///   d rho_n/dt = -(i [H0,.] + i b_n [V,.] + lam_n) rho_n
///                - i up_n [V, rho_{n+1}] - i down_n [V, rho_{n-1}]
/// with up_n = a_{n+1}, down_n = c_{n-1}, and at n = depth the up-coupling
/// replaced by the terminator double commutator with coefficient
/// a_{N+1} c_N / lam_{N+1}.
struct HierarchyCoefficients {
    int depth = 0;
    std::vector<double> b, lam, up, down;
    double terminator = 0.0;

    static HierarchyCoefficients build(const ProcessSpec& spec, int depth);
};

/// Depth selection: smallest N with lam_N >= kappa (2||H0|| + 2|b_N| ||V||),
/// then increased until rho_0 at depth N agrees with depth N+4 to
/// convergence_tol over the whole grid. Fixed mode returns the configured
/// depth unchanged.
int select_depth(const SolverConfig& config);

/// Full hierarchy right-hand side (all levels, terminator closure at the top).
/// state/out hold depth+1 column-major d x d blocks.
void hierarchy_rhs(const SolverConfig& config, int depth, std::span<const Complex> state,
                   std::span<Complex> out);

SolveResult integrate(const SolverConfig& config);
SolveResult integrate_at_depth(const SolverConfig& config, int depth);

/// Map-valued variant of the hierarchy: same ladder acting by left
/// multiplication with the Liouvillian matrices of H0 and V on d^2 x d^2
/// maps, from E_0(0) = identity.
PropagatorResult integrate_propagator(const SolverConfig& config);
PropagatorResult integrate_propagator_at_depth(const SolverConfig& config, int depth);

Matrix apply_map(const Matrix& map, const Matrix& rho);
DensityMatrix apply_map(const Matrix& map, const DensityMatrix& rho);

} // namespace dheom
