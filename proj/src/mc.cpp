#include "dheom/mc.hpp"

#include <chrono>
#include <cmath>

#include "dheom/threading.hpp"

namespace dheom {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

// In-place rho <- U rho U^dag for 2x2 Hermitian H via the Pauli closed form.
void unitary_step_2x2(const Matrix& h, Matrix& rho, double t) {
    const double a = 0.5 * (h(0, 0).real() + h(1, 1).real());
    const double bz = 0.5 * (h(0, 0).real() - h(1, 1).real());
    const double bx = h(0, 1).real();
    const double by = -h(0, 1).imag();
    const double bn = std::sqrt(bx * bx + by * by + bz * bz);
    Complex u00, u01, u10, u11;
    if (bn < 1e-300) {
        u00 = u11 = Complex(1.0, 0.0);
        u01 = u10 = Complex(0.0, 0.0);
    } else {
        const double ct = std::cos(bn * t);
        const double st = std::sin(bn * t);
        u00 = Complex(ct, -st * bz / bn);
        u11 = Complex(ct, st * bz / bn);
        u01 = Complex(-st * by / bn, -st * bx / bn);
        u10 = Complex(st * by / bn, -st * bx / bn);
    }
    (void)a; // global phase cancels in U rho U^dag
    const Complex r00 = rho(0, 0), r01 = rho(0, 1), r10 = rho(1, 0), r11 = rho(1, 1);
    const Complex s00 = u00 * r00 + u01 * r10;
    const Complex s01 = u00 * r01 + u01 * r11;
    const Complex s10 = u10 * r00 + u11 * r10;
    const Complex s11 = u10 * r01 + u11 * r11;
    rho(0, 0) = s00 * std::conj(u00) + s01 * std::conj(u01);
    rho(0, 1) = s00 * std::conj(u10) + s01 * std::conj(u11);
    rho(1, 0) = s10 * std::conj(u00) + s11 * std::conj(u01);
    rho(1, 1) = s10 * std::conj(u10) + s11 * std::conj(u11);
}

double apply_boundary(const Interval& dom, double w, McConfig::Boundary mode) {
    constexpr double kInset = 1e-12;
    switch (mode) {
    case McConfig::Boundary::Reflect:
        for (int iter = 0; iter < 64 && !(w > dom.lo && w < dom.hi); ++iter) {
            if (w <= dom.lo) w = 2.0 * dom.lo - w + 2.0 * kInset;
            if (w >= dom.hi) w = 2.0 * dom.hi - w - 2.0 * kInset;
        }
        if (!(w > dom.lo && w < dom.hi)) w = 0.5 * (dom.lo + dom.hi);
        return w;
    case McConfig::Boundary::Clamp:
        if (w <= dom.lo) return dom.lo + kInset;
        if (w >= dom.hi) return dom.hi - kInset;
        return w;
    }
    return w;
}

// Pairwise tree reduction over [lo, hi): deterministic regardless of the
// order individual trajectories completed in.
template <class T, class Get>
T pairwise_sum(int lo, int hi, const Get& get) {
    if (hi - lo == 1) return get(lo);
    const int mid = lo + (hi - lo) / 2;
    return pairwise_sum<T>(lo, mid, get) + pairwise_sum<T>(mid, hi, get);
}

} // namespace

std::mt19937_64 stream_rng(std::uint64_t seed, std::uint64_t stream) {
    return std::mt19937_64(splitmix64(seed ^ splitmix64(stream + 1)));
}

double sde_step(const ProcessSpec& spec, double omega, double dt,
                McConfig::Boundary boundary, std::mt19937_64& rng) {
    const SdeCoefficients sc = sde_coefficients(spec, omega);
    std::normal_distribution<double> normal(0.0, 1.0);
    double next = omega + sc.drift * dt + std::sqrt(sc.diffusion * dt) * normal(rng);
    const Interval dom = domain(spec);
    if (!(next > dom.lo && next < dom.hi)) next = apply_boundary(dom, next, boundary);
    return next;
}

std::vector<Matrix> run_trajectory(const McConfig& config, std::uint64_t stream) {
    const int d = static_cast<int>(config.h0.rows());
    std::mt19937_64 rng = stream_rng(config.seed, stream);
    double omega = sample_stationary(config.process, rng);

    Matrix rho = config.rho0;
    Matrix h(d, d);
    std::vector<Matrix> out;
    out.reserve(config.t_grid.size());

    auto quantum_step = [&](double hstep) {
        const int nsub = std::max(1, static_cast<int>(std::lround(hstep / config.dt_sde)));
        const double hsub = hstep / nsub;
        double omega_sum = 0.0;
        for (int s = 0; s < nsub; ++s) {
            omega_sum += omega;
            omega = sde_step(config.process, omega, hsub, config.boundary, rng);
        }
        const double omega_bar = omega_sum / nsub;
        h = config.h0 + omega_bar * config.v;
        if (d == 2)
            unitary_step_2x2(h, rho, hstep);
        else
            rho = evolve_exact(h, rho, hstep);
    };

    double t = 0.0;
    for (double tg : config.t_grid) {
        while (t < tg - 1e-12) {
            const double hstep = std::min(config.dt, tg - t);
            quantum_step(hstep);
            t = (tg - t <= config.dt + 1e-12) ? tg : t + config.dt;
        }
        out.push_back(rho);
    }
    return out;
}

McResult average(const McConfig& config) {
    const auto start = std::chrono::steady_clock::now();
    if (config.trajectories < 2)
        fail("InvalidParameter", "Monte Carlo needs at least 2 trajectories");
    if (config.dt_sde > config.dt + 1e-15)
        fail("InvalidParameter", "dt_sde must not exceed the quantum step dt");
    validate(config.process);
    DensityMatrix check(config.rho0);

    const int m = config.trajectories;
    const int d = static_cast<int>(config.h0.rows());
    const std::size_t nt = config.t_grid.size();

    std::vector<std::vector<Matrix>> traj(m);
    parallel_for(m, config.threads,
                 [&](int i) { traj[i] = run_trajectory(config, static_cast<std::uint64_t>(i)); });

    McResult result;
    result.t = config.t_grid;
    result.mean.reserve(nt);
    result.se.reserve(nt);
    for (std::size_t k = 0; k < nt; ++k) {
        Matrix sum = pairwise_sum<Matrix>(0, m, [&](int i) { return traj[i][k]; });
        Matrix mean = sum / static_cast<double>(m);
        Eigen::MatrixXd sq = pairwise_sum<Eigen::MatrixXd>(0, m, [&](int i) {
            return Eigen::MatrixXd((traj[i][k] - mean).cwiseAbs2());
        });
        result.mean.push_back(std::move(mean));
        result.se.push_back(
            (sq / (static_cast<double>(m - 1) * m)).cwiseSqrt());
    }
    result.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return result;
}

} // namespace dheom
