#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "dheom/hierarchy.hpp"
#include "test_util.hpp"

using namespace dheom;
using namespace testutil;

namespace {

ProcessSpec ou_ref() { return ProcessSpec::ornstein_uhlenbeck(1.0, 1.5, 0.3); }

std::vector<double> grid(double t_final, int points) {
    std::vector<double> g(points);
    for (int i = 0; i < points; ++i) g[i] = t_final * i / (points - 1.0);
    return g;
}

SolverConfig dephasing_config() {
    SolverConfig sc;
    sc.h0 = Matrix::Zero(2, 2);
    sc.v = sigma_z();
    sc.process = ou_ref();
    sc.rho0 = plus_state();
    sc.t_grid = grid(2.0, 9);
    sc.dt = 1e-3;
    return sc;
}

} // namespace

TEST_CASE("hierarchy coefficients from the recurrence triples") {
    const double s = std::sqrt(0.1);
    HierarchyCoefficients hc = HierarchyCoefficients::build(ou_ref(), 4);
    REQUIRE(hc.depth == 4);
    for (int n = 0; n <= 4; ++n) {
        CHECK(hc.b[n] == doctest::Approx(1.0));
        CHECK(hc.lam[n] == doctest::Approx(1.5 * n));
        if (n < 4) CHECK(hc.up[n] == doctest::Approx(s)); // a_{n+1}; terminator at top
        CHECK(hc.down[n] == doctest::Approx(n * s));      // c_{n-1}
    }
    // terminator a_{N+1} c_N / lam_{N+1} = s^2 / gamma
    CHECK(hc.terminator == doctest::Approx(0.1 / 1.5));

    HierarchyCoefficients sr = HierarchyCoefficients::build(
        ProcessSpec::square_root(1.0, 1.5, 0.0, 1.0), 2);
    CHECK(sr.terminator == doctest::Approx(0.37037037037037035));
    CHECK(sr.up[1] == doctest::Approx(-2.0 / 3.0));  // a_2 = -k (alpha+2)/2
    CHECK(sr.down[1] == doctest::Approx(-1.0 / 3.0)); // c_0

    HierarchyCoefficients jac = HierarchyCoefficients::build(
        ProcessSpec::jacobi(1.0, 1.5, 0.125, 8.0, 1.0), 3);
    CHECK(jac.terminator == doctest::Approx(0.3012876157407407));
    CHECK(jac.down[1] == doctest::Approx(2.625)); // c_0
}

TEST_CASE("ladder right-hand side matches a hand-built evaluation") {
    SolverConfig sc = dephasing_config();
    sc.h0 = 0.3 * sigma_x();
    const int depth = 2;
    HierarchyCoefficients hc = HierarchyCoefficients::build(sc.process, depth);

    std::mt19937_64 rng(3);
    std::vector<Matrix> level;
    std::vector<Complex> state;
    for (int n = 0; n <= depth; ++n) {
        level.push_back(random_complex(rng, 2));
        for (int j = 0; j < 2; ++j)
            for (int i = 0; i < 2; ++i) state.push_back(level[n](i, j)); // column-major
    }
    std::vector<Complex> out(state.size());
    hierarchy_rhs(sc, depth, state, out);

    const Complex I(0, 1);
    for (int n = 0; n <= depth; ++n) {
        Matrix expect = -I * commutator(sc.h0, level[n]) -
                        I * hc.b[n] * commutator(sc.v, level[n]) - hc.lam[n] * level[n];
        if (n < depth)
            expect -= I * hc.up[n] * commutator(sc.v, level[n + 1]);
        else
            expect -= hc.terminator * commutator(sc.v, commutator(sc.v, level[n]));
        if (n > 0) expect -= I * hc.down[n] * commutator(sc.v, level[n - 1]);
        Matrix got(2, 2);
        for (int j = 0; j < 2; ++j)
            for (int i = 0; i < 2; ++i) got(i, j) = out[4 * n + 2 * j + i];
        CHECK(max_abs(got - expect) < 1e-13);
    }
}

TEST_CASE("zero coupling reduces to exact unitary evolution") {
    std::mt19937_64 rng(41);
    SolverConfig sc;
    sc.h0 = random_hermitian(rng, 3);
    sc.v = Matrix::Zero(3, 3);
    sc.process = ou_ref();
    sc.rho0 = random_density(rng, 3);
    sc.t_grid = grid(1.5, 7);
    sc.dt = 1e-3;
    SolveResult res = integrate(sc);
    CHECK(res.diagnostics.depth == 1);
    for (std::size_t k = 0; k < res.t.size(); ++k)
        CHECK(max_abs(res.rho[k] - evolve_exact(sc.h0, sc.rho0, res.t[k])) < 1e-8);
}

TEST_CASE("pure dephasing reproduces the closed-form coherence decay") {
    SolverConfig sc = dephasing_config();
    SolveResult res = integrate(sc);
    const double mu = 1.0, gamma = 1.5, s2 = 0.1; // stationary variance
    for (std::size_t k = 0; k < res.t.size(); ++k) {
        const double t = res.t[k];
        const double mag =
            0.5 * std::exp(-4.0 * s2 / (gamma * gamma) *
                           (gamma * t - 1.0 + std::exp(-gamma * t)));
        const Complex expect = mag * std::exp(Complex(0, -2.0 * mu * t));
        CHECK(std::abs(res.rho[k](0, 1) - expect) < 1e-6);
        CHECK(res.rho[k](0, 0).real() == doctest::Approx(0.5).epsilon(1e-9));
        CHECK(res.rho[k](1, 1).real() == doctest::Approx(0.5).epsilon(1e-9));
    }
    CHECK(res.diagnostics.trace_drift < 1e-10);
    CHECK(res.diagnostics.hermiticity_drift < 1e-8);
}

TEST_CASE("vanishing noise variance approaches coherent driving at the mean") {
    std::mt19937_64 rng(43);
    SolverConfig sc;
    sc.h0 = random_hermitian(rng, 2);
    sc.v = 0.5 * sigma_x();
    sc.process = ProcessSpec::ornstein_uhlenbeck(1.0, 1.5, 1e-10);
    sc.rho0 = random_density(rng, 2);
    sc.t_grid = grid(1.0, 5);
    sc.dt = 1e-3;
    SolveResult res = integrate(sc);
    for (std::size_t k = 0; k < res.t.size(); ++k) {
        Matrix coherent = evolve_exact(sc.h0 + 1.0 * sc.v, sc.rho0, res.t[k]);
        CHECK(max_abs(res.rho[k] - coherent) < 1e-5);
    }
}

TEST_CASE("trace and hermiticity invariants at fixed depth") {
    std::mt19937_64 rng(47);
    SolverConfig sc;
    sc.h0 = random_hermitian(rng, 2);
    sc.v = random_hermitian(rng, 2, 0.5);
    sc.process = ProcessSpec::jacobi(1.0, 1.5, 0.125, 8.0, 1.0);
    sc.rho0 = random_density(rng, 2);
    sc.t_grid = grid(1.0, 5);
    sc.dt = 5e-4;
    SolveResult res = integrate_at_depth(sc, 12);
    CHECK(res.diagnostics.trace_drift < 1e-9);
    CHECK(res.diagnostics.aux_trace < 1e-9);
    CHECK(res.diagnostics.hermiticity_drift < 1e-7);
    for (const Matrix& r : res.rho) {
        CHECK(hermiticity_defect(r) < 1e-14); // re-symmetrized on output
        CHECK(std::abs(r.trace() - Complex(1.0)) < 1e-9);
    }
}

TEST_CASE("integrator error scales down with the step") {
    SolverConfig sc = dephasing_config();
    sc.t_grid = {0.0, 1.0};
    sc.truncation = TruncationPolicy::fixed(10);
    sc.dt = 4e-3;
    Matrix coarse = integrate(sc).rho.back();
    sc.dt = 2e-3;
    Matrix fine = integrate(sc).rho.back();
    sc.dt = 5e-4;
    Matrix ref = integrate(sc).rho.back();
    const double e_coarse = max_abs(coarse - ref);
    const double e_fine = max_abs(fine - ref);
    CHECK(e_coarse < 1e-6);
    // RK4: halving the step should cut the error by roughly 2^4
    CHECK(e_fine < e_coarse / 8.0);
}

TEST_CASE("step guard rejects dt incompatible with the top eigenvalue") {
    SolverConfig sc = dephasing_config();
    sc.truncation = TruncationPolicy::fixed(80);
    sc.dt = 1e-2; // dt * lam_80 = 1.2 > 0.1
    try {
        integrate(sc);
        FAIL("expected throw");
    } catch (const Error& e) {
        CHECK(e.code() == "StepTooLarge");
    }
}

TEST_CASE("automatic depth converges against a deeper reference") {
    SolverConfig sc = dephasing_config();
    sc.t_grid = grid(1.0, 5);
    const int depth = select_depth(sc);
    CHECK(depth >= 2);
    SolveResult at = integrate_at_depth(sc, depth);
    SolveResult deeper = integrate_at_depth(sc, depth + 8);
    for (std::size_t k = 0; k < at.t.size(); ++k)
        CHECK(max_abs(at.rho[k] - deeper.rho[k]) < 1e-5);
}

TEST_CASE("propagator with zero coupling is the coherent superoperator") {
    std::mt19937_64 rng(53);
    SolverConfig sc;
    sc.h0 = random_hermitian(rng, 2);
    sc.v = Matrix::Zero(2, 2);
    sc.process = ou_ref();
    sc.rho0 = 0.5 * Matrix::Identity(2, 2);
    sc.t_grid = grid(1.0, 5);
    sc.dt = 1e-3;
    PropagatorResult res = integrate_propagator(sc);
    for (std::size_t k = 0; k < res.t.size(); ++k) {
        Matrix u = unitary_of(sc.h0, res.t[k]);
        Matrix expect = Matrix::Zero(4, 4);
        // vec(U rho U^dag) = (conj(U) (x) U) vec(rho), column stacking
        for (int bi = 0; bi < 2; ++bi)
            for (int bj = 0; bj < 2; ++bj)
                expect.block(2 * bi, 2 * bj, 2, 2) = std::conj(u(bi, bj)) * u;
        CHECK(max_abs(res.maps[k] - expect) < 1e-8);
    }
}

TEST_CASE("averaged propagator agrees with the density-matrix hierarchy") {
    std::mt19937_64 rng(59);
    SolverConfig sc;
    sc.h0 = random_hermitian(rng, 2);
    sc.v = random_hermitian(rng, 2, 0.5);
    sc.process = ou_ref();
    sc.rho0 = random_density(rng, 2);
    sc.t_grid = grid(1.0, 5);
    sc.dt = 1e-3;
    sc.truncation = TruncationPolicy::fixed(14);
    SolveResult direct = integrate(sc);
    PropagatorResult prop = integrate_propagator(sc);
    for (std::size_t k = 0; k < direct.t.size(); ++k)
        CHECK(max_abs(apply_map(prop.maps[k], sc.rho0) - direct.rho[k]) < 1e-8);
    // the same map applied to a different initial state
    Matrix rho1 = random_density(rng, 2);
    sc.rho0 = rho1;
    SolveResult direct1 = integrate(sc);
    CHECK(max_abs(apply_map(prop.maps.back(), rho1) - direct1.rho.back()) < 1e-8);

    DensityMatrix out = apply_map(prop.maps.back(), DensityMatrix(rho1));
    CHECK(std::abs(out.matrix().trace() - Complex(1.0)) < 1e-9);
}

TEST_CASE("propagator maps preserve trace") {
    SolverConfig sc = dephasing_config();
    sc.t_grid = grid(1.0, 3);
    sc.truncation = TruncationPolicy::fixed(10);
    PropagatorResult prop = integrate_propagator(sc);
    std::mt19937_64 rng(61);
    for (int trial = 0; trial < 3; ++trial) {
        Matrix rho = random_density(rng, 2);
        for (const Matrix& m : prop.maps)
            CHECK(std::abs(apply_map(m, rho).trace() - Complex(1.0)) < 1e-9);
    }
}
