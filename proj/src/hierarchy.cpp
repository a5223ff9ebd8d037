#include "dheom/hierarchy.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstring>

namespace dheom {

namespace {

constexpr double kDivergenceGuard = 1e6;
constexpr double kStepGuard = 0.1; // dt * lam_N must stay below this

// out += coef * (A X - X A), column-major d x d blocks
struct CommutatorAction {
    static void apply(int d, Complex coef, const Complex* a, const Complex* x,
                      Complex* out) {
        for (int j = 0; j < d; ++j)
            for (int i = 0; i < d; ++i) {
                Complex acc(0.0, 0.0);
                for (int k = 0; k < d; ++k)
                    acc += a[i + k * d] * x[k + j * d] - x[i + k * d] * a[k + j * d];
                out[i + j * d] += coef * acc;
            }
    }
};

// out += coef * A X (plain left multiplication, for the propagator ladder)
struct LeftMultiplyAction {
    static void apply(int d, Complex coef, const Complex* a, const Complex* x,
                      Complex* out) {
        for (int j = 0; j < d; ++j)
            for (int i = 0; i < d; ++i) {
                Complex acc(0.0, 0.0);
                for (int k = 0; k < d; ++k)
                    acc += a[i + k * d] * x[k + j * d];
                out[i + j * d] += coef * acc;
            }
    }
};

template <class Action>
void ladder_rhs(int d, const HierarchyCoefficients& hc, const Complex* a0,
                const Complex* av, const Complex* state, Complex* out,
                Complex* scratch) {
    const int bs = d * d;
    const Complex mi(0.0, -1.0);
    const int depth = hc.depth;
    for (int n = 0; n <= depth; ++n) {
        const Complex* x = state + n * bs;
        Complex* o = out + n * bs;
        std::fill(o, o + bs, Complex(0.0, 0.0));
        Action::apply(d, mi, a0, x, o);
        if (hc.b[n] != 0.0) Action::apply(d, mi * hc.b[n], av, x, o);
        const double lam = hc.lam[n];
        for (int k = 0; k < bs; ++k) o[k] -= lam * x[k];
        if (n > 0) Action::apply(d, mi * hc.down[n], av, state + (n - 1) * bs, o);
        if (n < depth) {
            Action::apply(d, mi * hc.up[n], av, state + (n + 1) * bs, o);
        } else {
            std::fill(scratch, scratch + bs, Complex(0.0, 0.0));
            Action::apply(d, Complex(1.0, 0.0), av, x, scratch);
            Action::apply(d, Complex(-hc.terminator, 0.0), av, scratch, o);
        }
    }
}

struct GridEmit {
    double t;
    const Complex* block0; // leading block of the state at time t
    const Complex* full;
};

// Fixed-step RK4 over the ladder, landing exactly on every grid time.
// emit is called with the raw state at each grid time.
template <class Action, class Emit>
SolverDiagnostics run_ladder(int d, const HierarchyCoefficients& hc, const Matrix& a0m,
                             const Matrix& avm, std::vector<Complex> state,
                             const std::vector<double>& t_grid, double dt, Emit&& emit) {
    const auto start = std::chrono::steady_clock::now();
    const int bs = d * d;
    const std::size_t size = state.size();
    std::vector<Complex> k1(size), k2(size), k3(size), k4(size), tmp(size), scratch(bs);
    const Complex* a0 = a0m.data();
    const Complex* av = avm.data();

    SolverDiagnostics diag;
    diag.depth = hc.depth;

    auto rhs = [&](const std::vector<Complex>& y, std::vector<Complex>& dy) {
        ladder_rhs<Action>(d, hc, a0, av, y.data(), dy.data(), scratch.data());
    };

    auto step = [&](double h) {
        rhs(state, k1);
        for (std::size_t i = 0; i < size; ++i) tmp[i] = state[i] + 0.5 * h * k1[i];
        rhs(tmp, k2);
        for (std::size_t i = 0; i < size; ++i) tmp[i] = state[i] + 0.5 * h * k2[i];
        rhs(tmp, k3);
        for (std::size_t i = 0; i < size; ++i) tmp[i] = state[i] + h * k3[i];
        rhs(tmp, k4);
        const double w = h / 6.0;
        for (std::size_t i = 0; i < size; ++i)
            state[i] += w * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        ++diag.steps;
    };

    double t = 0.0;
    for (double tg : t_grid) {
        while (t < tg - 1e-12) {
            step(std::min(dt, tg - t));
            t = (tg - t <= dt + 1e-12) ? tg : t + dt;
            if ((diag.steps & 15) == 0 || t == tg) {
                double m = 0.0;
                for (const Complex& z : state) m = std::max(m, std::abs(z.real()) + std::abs(z.imag()));
                if (!(m < kDivergenceGuard))
                    fail("StabilityGuard",
                         "hierarchy state diverged; reduce dt or revisit truncation depth");
            }
        }
        emit(GridEmit{tg, state.data(), state.data()});
    }
    diag.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return diag;
}

void check_square_same(const Matrix& h0, const Matrix& v, const Matrix& rho0) {
    if (h0.rows() != h0.cols() || v.rows() != v.cols() || rho0.rows() != rho0.cols() ||
        h0.rows() != v.rows() || h0.rows() != rho0.rows())
        fail("DimensionMismatch", "H0, V and rho0 must be square matrices of equal size");
}

void validate_config(const SolverConfig& cfg, bool need_rho0) {
    if (cfg.h0.rows() != cfg.h0.cols() || cfg.v.rows() != cfg.v.cols() ||
        cfg.h0.rows() != cfg.v.rows())
        fail("DimensionMismatch", "H0 and V must be square matrices of equal size");
    if (hermiticity_defect(cfg.h0) > 1e-10 || hermiticity_defect(cfg.v) > 1e-10)
        fail("NotHermitian", "H0 and V must be Hermitian");
    if (need_rho0) {
        check_square_same(cfg.h0, cfg.v, cfg.rho0);
        DensityMatrix check(cfg.rho0); // throws if invalid
    }
    if (cfg.t_grid.empty() || cfg.t_grid.front() != 0.0)
        fail("InvalidParameter", "t_grid must start at 0");
    for (std::size_t i = 1; i < cfg.t_grid.size(); ++i)
        if (!(cfg.t_grid[i] > cfg.t_grid[i - 1]))
            fail("InvalidParameter", "t_grid must be strictly increasing");
    if (!(cfg.dt > 0.0)) fail("InvalidParameter", "dt must be positive");
    validate(cfg.process);
}

} // namespace

HierarchyCoefficients HierarchyCoefficients::build(const ProcessSpec& spec, int depth) {
    if (depth < 1) fail("InvalidParameter", "hierarchy depth must be >= 1");
    HierarchyCoefficients hc;
    hc.depth = depth;
    hc.b.resize(depth + 1);
    hc.lam.resize(depth + 1);
    hc.up.assign(depth + 1, 0.0);
    hc.down.assign(depth + 1, 0.0);
    std::vector<RecurrenceTriple> triples(depth + 2);
    for (int n = 0; n <= depth + 1; ++n) triples[n] = recurrence(spec, n);
    for (int n = 0; n <= depth; ++n) {
        hc.b[n] = triples[n].b;
        hc.lam[n] = eigenvalue(spec, n);
        if (n > 0) hc.down[n] = triples[n - 1].c;
        if (n < depth) hc.up[n] = triples[n + 1].a;
    }
    const double lam_next = eigenvalue(spec, depth + 1);
    hc.terminator = triples[depth + 1].a * triples[depth].c / lam_next;
    return hc;
}

void hierarchy_rhs(const SolverConfig& config, int depth, std::span<const Complex> state,
                   std::span<Complex> out) {
    const int d = static_cast<int>(config.h0.rows());
    const std::size_t size = static_cast<std::size_t>(depth + 1) * d * d;
    if (state.size() != size || out.size() != size)
        fail("DimensionMismatch", "hierarchy_rhs: state size does not match depth");
    HierarchyCoefficients hc = HierarchyCoefficients::build(config.process, depth);
    std::vector<Complex> scratch(d * d);
    ladder_rhs<CommutatorAction>(d, hc, config.h0.data(), config.v.data(), state.data(),
                                 out.data(), scratch.data());
}

int select_depth(const SolverConfig& config) {
    validate_config(config, true);
    const TruncationPolicy& p = config.truncation;
    if (p.mode == TruncationPolicy::Mode::Fixed) {
        if (p.depth < 1) fail("InvalidParameter", "Fixed truncation depth must be >= 1");
        return p.depth;
    }
    if (max_abs(config.v) == 0.0) return 1; // hierarchy decouples, any depth exact

    const double norm_h0 = spectral_norm_hermitian(config.h0);
    const double norm_v = spectral_norm_hermitian(config.v);
    int n = 0;
    for (n = 1; n <= p.max_depth; ++n) {
        const double bound =
            p.kappa * (2.0 * norm_h0 + 2.0 * std::abs(recurrence(config.process, n).b) * norm_v);
        if (eigenvalue(config.process, n) >= bound) break;
    }
    if (n > p.max_depth)
        fail("DepthCapExceeded",
             "no depth <= max_depth satisfies the eigenvalue separation bound; "
             "lower kappa or raise max_depth");

    // Convergence scan: accept N once rho_0 agrees with depth N+4 on the grid.
    SolverConfig scan = config;
    while (n <= p.max_depth) {
        scan.dt = std::min(config.dt, 0.9 * kStepGuard / eigenvalue(config.process, n + 4));
        SolveResult lo = integrate_at_depth(scan, n);
        SolveResult hi = integrate_at_depth(scan, n + 4);
        double diff = 0.0;
        for (std::size_t k = 0; k < lo.rho.size(); ++k)
            diff = std::max(diff, max_abs(lo.rho[k] - hi.rho[k]));
        if (diff <= p.convergence_tol) return n;
        n += 4;
    }
    fail("DepthCapExceeded", "depth convergence scan exceeded max_depth");
}

SolveResult integrate_at_depth(const SolverConfig& config, int depth) {
    validate_config(config, true);
    const int d = static_cast<int>(config.h0.rows());
    const int bs = d * d;
    HierarchyCoefficients hc = HierarchyCoefficients::build(config.process, depth);

    std::vector<Complex> state(static_cast<std::size_t>(depth + 1) * bs, Complex(0.0, 0.0));
    Eigen::Map<Matrix>(state.data(), d, d) = config.rho0;

    SolveResult result;
    const Complex trace0 = config.rho0.trace();
    double trace_drift = 0.0, aux_trace = 0.0, herm = 0.0;
    auto emit = [&](const GridEmit& e) {
        Eigen::Map<const Matrix> m0(e.block0, d, d);
        trace_drift = std::max(trace_drift, std::abs(m0.trace() - trace0));
        herm = std::max(herm, hermiticity_defect(m0));
        for (int n = 1; n <= depth; ++n) {
            Eigen::Map<const Matrix> mn(e.full + n * bs, d, d);
            aux_trace = std::max(aux_trace, std::abs(mn.trace()));
        }
        result.t.push_back(e.t);
        result.rho.push_back(hermitian_part(m0));
    };
    result.diagnostics = run_ladder<CommutatorAction>(d, hc, config.h0, config.v,
                                                      std::move(state), config.t_grid,
                                                      config.dt, emit);
    result.diagnostics.trace_drift = trace_drift;
    result.diagnostics.aux_trace = aux_trace;
    result.diagnostics.hermiticity_drift = herm;
    return result;
}

SolveResult integrate(const SolverConfig& config) {
    const int depth = select_depth(config);
    if (config.dt * eigenvalue(config.process, depth) > kStepGuard + 1e-12)
        fail("StepTooLarge", "dt * lambda_N exceeds the stability guard of " +
                                 std::to_string(kStepGuard) + "; reduce dt");
    return integrate_at_depth(config, depth);
}

PropagatorResult integrate_propagator_at_depth(const SolverConfig& config, int depth) {
    validate_config(config, false);
    const int d = static_cast<int>(config.h0.rows());
    const int dd = d * d;
    HierarchyCoefficients hc = HierarchyCoefficients::build(config.process, depth);
    Matrix l0 = liouvillian_matrix(config.h0);
    Matrix lv = liouvillian_matrix(config.v);

    std::vector<Complex> state(static_cast<std::size_t>(depth + 1) * dd * dd,
                               Complex(0.0, 0.0));
    Eigen::Map<Matrix>(state.data(), dd, dd) = Matrix::Identity(dd, dd);

    PropagatorResult result;
    auto emit = [&](const GridEmit& e) {
        result.t.push_back(e.t);
        result.maps.emplace_back(Eigen::Map<const Matrix>(e.block0, dd, dd));
    };
    result.diagnostics = run_ladder<LeftMultiplyAction>(dd, hc, l0, lv, std::move(state),
                                                        config.t_grid, config.dt, emit);
    return result;
}

PropagatorResult integrate_propagator(const SolverConfig& config) {
    int depth;
    if (config.truncation.mode == TruncationPolicy::Mode::Fixed) {
        depth = config.truncation.depth;
    } else {
        // Depth selection runs on the density hierarchy with a maximally mixed
        // reference state; the ladder coefficients are identical.
        SolverConfig probe = config;
        const int d = static_cast<int>(config.h0.rows());
        probe.rho0 = Matrix::Identity(d, d) / static_cast<double>(d);
        depth = select_depth(probe);
    }
    if (config.dt * eigenvalue(config.process, depth) > kStepGuard + 1e-12)
        fail("StepTooLarge", "dt * lambda_N exceeds the stability guard; reduce dt");
    return integrate_propagator_at_depth(config, depth);
}

Matrix apply_map(const Matrix& map, const Matrix& rho) {
    const int d = static_cast<int>(rho.rows());
    if (map.rows() != map.cols() || map.rows() != static_cast<Eigen::Index>(d) * d)
        fail("DimensionMismatch", "apply_map: map must be d^2 x d^2");
    return devectorize(map * vectorize(rho), d);
}

DensityMatrix apply_map(const Matrix& map, const DensityMatrix& rho) {
    return DensityMatrix(hermitian_part(apply_map(map, rho.matrix())));
}

} // namespace dheom
