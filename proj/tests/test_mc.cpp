#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "dheom/mc.hpp"
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

} // namespace

TEST_CASE("per-trajectory RNG streams are deterministic and distinct") {
    std::mt19937_64 a = stream_rng(42, 0);
    std::mt19937_64 b = stream_rng(42, 0);
    std::mt19937_64 c = stream_rng(42, 1);
    std::mt19937_64 d = stream_rng(43, 0);
    bool same_ab = true, diff_ac = false, diff_ad = false;
    for (int i = 0; i < 64; ++i) {
        auto va = a(), vb = b(), vc = c(), vd = d();
        same_ab = same_ab && va == vb;
        diff_ac = diff_ac || va != vc;
        diff_ad = diff_ad || va != vd;
    }
    CHECK(same_ab);
    CHECK(diff_ac);
    CHECK(diff_ad);
}

TEST_CASE("Euler-Maruyama step has the right drift and diffusion") {
    std::mt19937_64 rng(7);
    const double dt = 1e-3;
    const int m = 400000;
    double s1 = 0.0, s2 = 0.0;
    for (int i = 0; i < m; ++i) {
        const double w = sde_step(ou_ref(), 2.0, dt, McConfig::Boundary::Reflect, rng);
        s1 += w;
        s2 += (w - 2.0) * (w - 2.0);
    }
    const double mean = s1 / m;
    // E[step] = 2 + drift * dt = 2 - 1.5e-3
    CHECK(mean == doctest::Approx(2.0 - 1.5e-3).epsilon(1e-4));
    // Var[step] ~ B dt = 0.3e-3 (drift contribution is second order)
    CHECK(s2 / m == doctest::Approx(0.3e-3).epsilon(0.02));
}

TEST_CASE("reflecting boundary keeps bounded processes inside their domain") {
    ProcessSpec jac = ProcessSpec::jacobi(1.0, 1.5, 0.125, 8.0, 1.0);
    ProcessSpec sr = ProcessSpec::square_root(1.0, 1.5, 0.0, 1.0);
    std::mt19937_64 rng(11);
    for (const ProcessSpec& spec : {jac, sr}) {
        Interval dom = domain(spec);
        int outside = 0;
        for (int traj = 0; traj < 64; ++traj) {
            double w = sample_stationary(spec, rng);
            for (int k = 0; k < 2000; ++k) {
                w = sde_step(spec, w, 1e-3, McConfig::Boundary::Reflect, rng);
                if (!dom.contains(w)) ++outside;
            }
        }
        CHECK(outside == 0);
    }
}

TEST_CASE("clamping boundary keeps the state in the closed domain") {
    ProcessSpec jac = ProcessSpec::jacobi(1.0, 1.5, 0.125, 8.0, 1.0);
    std::mt19937_64 rng(13);
    int outside = 0;
    double w = 7.99; // start near the upper end to exercise the boundary
    for (int k = 0; k < 20000; ++k) {
        w = sde_step(jac, w, 1e-3, McConfig::Boundary::Clamp, rng);
        if (w < 0.125 || w > 8.0) ++outside;
    }
    CHECK(outside == 0);
}

TEST_CASE("SDE mean reversion from a displaced start") {
    // From w = 3 the mean relaxes as mu + (3 - mu) exp(-gamma t).
    const double t = 0.5, dt = 1e-3;
    const int m = 20000;
    double acc = 0.0;
    std::mt19937_64 rng(17);
    for (int i = 0; i < m; ++i) {
        double w = 3.0;
        for (int k = 0; k < static_cast<int>(t / dt + 0.5); ++k)
            w = sde_step(ou_ref(), w, dt, McConfig::Boundary::Reflect, rng);
        acc += w;
    }
    const double expect = 1.0 + 2.0 * std::exp(-1.5 * t);
    CHECK(acc / m == doctest::Approx(expect).epsilon(0.01));
}

TEST_CASE("stationary law is preserved by the SDE (Kolmogorov-Smirnov, OU)") {
    // Push 10^4 stationary draws through T = 2 of SDE evolution and compare
    // the final empirical law to the stationary normal CDF.
    const int m = 10000;
    const double dt = 1e-3, t_final = 2.0;
    std::vector<double> samples(m);
    std::mt19937_64 rng(19);
    for (int i = 0; i < m; ++i) {
        double w = sample_stationary(ou_ref(), rng);
        for (int k = 0; k < static_cast<int>(t_final / dt + 0.5); ++k)
            w = sde_step(ou_ref(), w, dt, McConfig::Boundary::Reflect, rng);
        samples[i] = w;
    }
    std::sort(samples.begin(), samples.end());
    const double sd = std::sqrt(0.1);
    double dstat = 0.0;
    for (int i = 0; i < m; ++i) {
        const double cdf = 0.5 * std::erfc(-(samples[i] - 1.0) / (sd * std::sqrt(2.0)));
        dstat = std::max(dstat, std::abs(cdf - (i + 1.0) / m));
        dstat = std::max(dstat, std::abs(cdf - i / static_cast<double>(m)));
    }
    // 1% critical value 1.63 / sqrt(m); allows a little Euler bias on top of
    // sampling noise
    CHECK(dstat * std::sqrt(static_cast<double>(m)) < 1.63);
}

TEST_CASE("trajectories and averages are reproducible") {
    McConfig mc;
    mc.h0 = 0.4 * sigma_z();
    mc.v = 0.5 * sigma_x();
    mc.process = ou_ref();
    mc.rho0 = plus_state();
    mc.t_grid = grid(0.5, 3);
    mc.trajectories = 16;
    mc.seed = 99;
    mc.threads = 1;

    std::vector<Matrix> t0 = run_trajectory(mc, 5);
    std::vector<Matrix> t1 = run_trajectory(mc, 5);
    REQUIRE(t0.size() == t1.size());
    for (std::size_t k = 0; k < t0.size(); ++k) CHECK(max_abs(t0[k] - t1[k]) == 0.0);

    McResult r1 = average(mc);
    mc.threads = 3;
    McResult r3 = average(mc);
    for (std::size_t k = 0; k < r1.mean.size(); ++k) {
        CHECK(max_abs(r1.mean[k] - r3.mean[k]) == 0.0); // identical reduction tree
        CHECK((r1.se[k] - r3.se[k]).cwiseAbs().maxCoeff() == 0.0);
    }
}

TEST_CASE("zero coupling: every trajectory coincides with the coherent answer") {
    std::mt19937_64 rng(23);
    McConfig mc;
    mc.h0 = random_hermitian(rng, 2);
    mc.v = Matrix::Zero(2, 2);
    mc.process = ou_ref();
    mc.rho0 = random_density(rng, 2);
    mc.t_grid = grid(1.0, 5);
    mc.trajectories = 32;
    mc.seed = 1;
    McResult res = average(mc);
    for (std::size_t k = 0; k < res.t.size(); ++k) {
        CHECK(max_abs(res.mean[k] - evolve_exact(mc.h0, mc.rho0, res.t[k])) < 1e-10);
        CHECK(res.se[k].maxCoeff() < 1e-13);
    }
}

TEST_CASE("trajectory average reproduces the closed-form dephasing decay") {
    McConfig mc;
    mc.h0 = Matrix::Zero(2, 2);
    mc.v = sigma_z();
    mc.process = ou_ref();
    mc.rho0 = plus_state();
    mc.t_grid = grid(1.0, 3);
    mc.dt = 1e-3;
    mc.dt_sde = 1e-4;
    mc.trajectories = 2000;
    mc.seed = 2024;
    mc.threads = 2;
    McResult res = average(mc);
    const double mu = 1.0, gamma = 1.5, s2 = 0.1;
    for (std::size_t k = 1; k < res.t.size(); ++k) {
        const double t = res.t[k];
        const Complex expect =
            0.5 *
            std::exp(-4.0 * s2 / (gamma * gamma) * (gamma * t - 1.0 + std::exp(-gamma * t))) *
            std::exp(Complex(0, -2.0 * mu * t));
        const double allow = 3.0 * res.se[k](0, 1) + 1e-3; // noise + discretization
        CHECK(std::abs(res.mean[k](0, 1) - expect) < allow);
        CHECK(res.mean[k](0, 0).real() == doctest::Approx(0.5).epsilon(1e-10));
    }
}

TEST_CASE("standard error shrinks like one over sqrt(trajectories)") {
    McConfig mc;
    mc.h0 = 0.4 * sigma_z();
    mc.v = 0.5 * sigma_x();
    mc.process = ou_ref();
    mc.rho0 = plus_state();
    mc.t_grid = grid(0.5, 2);
    mc.dt = 1e-3;
    mc.dt_sde = 1e-4;
    mc.seed = 5;
    mc.threads = 2;

    mc.trajectories = 400;
    const double se_small = average(mc).se.back().maxCoeff();
    mc.trajectories = 1600;
    const double se_large = average(mc).se.back().maxCoeff();
    CHECK(se_small / se_large == doctest::Approx(2.0).epsilon(0.3));
}
