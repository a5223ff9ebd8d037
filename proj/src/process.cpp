#include "dheom/process.hpp"

#include <cmath>
#include <vector>

namespace dheom {

namespace {

constexpr double kDegenerateTol = 1e-9;

double beta_function(double a, double b) {
    return std::exp(std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b));
}

void require(bool ok, const char* code, const std::string& msg) {
    if (!ok) fail(code, msg);
}

} // namespace

const char* kind_name(ProcessKind kind) {
    switch (kind) {
    case ProcessKind::OrnsteinUhlenbeck: return "ou";
    case ProcessKind::SquareRoot: return "sr";
    case ProcessKind::Jacobi: return "jacobi";
    }
    return "?";
}

ProcessSpec ProcessSpec::ornstein_uhlenbeck(double mu, double gamma, double sigma2) {
    ProcessSpec s;
    s.kind = ProcessKind::OrnsteinUhlenbeck;
    s.mu = mu;
    s.gamma = gamma;
    s.sigma2 = sigma2;
    return s;
}

ProcessSpec ProcessSpec::square_root(double mu, double gamma, double c0, double c1,
                                     bool allow_unsound) {
    ProcessSpec s;
    s.kind = ProcessKind::SquareRoot;
    s.mu = mu;
    s.gamma = gamma;
    s.c0 = c0;
    s.c1 = c1;
    s.allow_unsound_truncation = allow_unsound;
    return s;
}

ProcessSpec ProcessSpec::jacobi(double mu, double gamma, double omega1, double omega2,
                                double c) {
    ProcessSpec s;
    s.kind = ProcessKind::Jacobi;
    s.mu = mu;
    s.gamma = gamma;
    s.omega1 = omega1;
    s.omega2 = omega2;
    s.c = c;
    return s;
}

Interval domain(const ProcessSpec& spec) {
    switch (spec.kind) {
    case ProcessKind::OrnsteinUhlenbeck:
        return Interval{};
    case ProcessKind::SquareRoot:
        return Interval{-spec.c0 / spec.c1, std::numeric_limits<double>::infinity()};
    case ProcessKind::Jacobi:
        return Interval{spec.omega1, spec.omega2};
    }
    return Interval{};
}

double laguerre_alpha(const ProcessSpec& spec) {
    return 2.0 * spec.gamma / spec.c1 * (spec.mu + spec.c0 / spec.c1) - 1.0;
}

double jacobi_alpha(const ProcessSpec& spec) {
    return 2.0 * spec.gamma / spec.c * (spec.omega2 - spec.mu) /
               (spec.omega2 - spec.omega1) -
           1.0;
}

double jacobi_beta(const ProcessSpec& spec) {
    return 2.0 * spec.gamma / spec.c * (spec.mu - spec.omega1) /
               (spec.omega2 - spec.omega1) -
           1.0;
}

void validate(const ProcessSpec& spec) {
    require(std::isfinite(spec.mu) && std::isfinite(spec.gamma), "InvalidParameter",
            "mu and gamma must be finite");
    require(spec.gamma > 0.0, "InvalidParameter", "mean-reversion rate gamma must be > 0");
    switch (spec.kind) {
    case ProcessKind::OrnsteinUhlenbeck:
        require(spec.sigma2 > 0.0, "InvalidParameter", "OU requires sigma2 > 0");
        break;
    case ProcessKind::SquareRoot: {
        require(spec.c1 > 0.0, "InvalidParameter", "square-root requires c1 > 0");
        require(spec.mu > -spec.c0 / spec.c1, "MeanOutOfDomain",
                "square-root mean must lie in (-c0/c1, inf)");
        require(laguerre_alpha(spec) > -1.0, "InvalidParameter",
                "square-root stationary Gamma shape must be positive");
        if (spec.gamma <= 1.0 && !spec.allow_unsound_truncation)
            fail("TruncationUnsound",
                 "square-root hierarchy truncation is only guaranteed for gamma > 1 "
                 "(pass --allow-unsound-truncation to proceed anyway)");
        break;
    }
    case ProcessKind::Jacobi: {
        require(spec.c > 0.0, "InvalidParameter", "Jacobi requires c > 0");
        require(spec.omega1 < spec.omega2, "InvalidParameter",
                "Jacobi requires omega1 < omega2");
        require(spec.mu > spec.omega1 && spec.mu < spec.omega2, "MeanOutOfDomain",
                "Jacobi mean must lie in (omega1, omega2)");
        require(jacobi_alpha(spec) > -1.0 && jacobi_beta(spec) > -1.0, "InvalidParameter",
                "Jacobi stationary Beta exponents must exceed -1");
        require(2.0 * spec.gamma / spec.c > kDegenerateTol, "DegenerateRecurrence",
                "Jacobi recurrence degenerates for 2*gamma/c near 0");
        break;
    }
    }
}

double eigenvalue(const ProcessSpec& spec, int n) {
    require(n >= 0, "InvalidParameter", "eigenvalue level must be >= 0");
    double nn = static_cast<double>(n);
    if (spec.kind == ProcessKind::Jacobi)
        return nn * spec.gamma + 0.5 * spec.c * nn * (nn - 1.0);
    return nn * spec.gamma;
}

RecurrenceTriple recurrence(const ProcessSpec& spec, int n) {
    require(n >= 0, "InvalidParameter", "recurrence level must be >= 0");
    const double nn = static_cast<double>(n);
    RecurrenceTriple t;
    switch (spec.kind) {
    case ProcessKind::OrnsteinUhlenbeck: {
        const double s = std::sqrt(spec.sigma2 / (2.0 * spec.gamma));
        t.a = (n == 0) ? 0.0 : s;
        t.b = spec.mu;
        t.c = (nn + 1.0) * s;
        break;
    }
    case ProcessKind::SquareRoot: {
        const double k = spec.c1 / (2.0 * spec.gamma);
        const double alpha = laguerre_alpha(spec);
        t.a = (n == 0) ? 0.0 : -k * (alpha + nn) / nn;
        t.b = (n == 0) ? spec.mu : k * (alpha + 2.0 * nn + 1.0) - spec.c0 / spec.c1;
        t.c = -k * (nn + 1.0) * (nn + 1.0);
        break;
    }
    case ProcessKind::Jacobi: {
        const double alpha = jacobi_alpha(spec);
        const double beta = jacobi_beta(spec);
        const double dw = spec.omega2 - spec.omega1;
        const double eta = alpha + beta + 2.0 * nn;
        if (n == 0) {
            // eta_0 = alpha + beta; the apparent eta_0 and eta_0+1 divisors
            // cancel against factors of the numerators.
            const double e2 = eta + 2.0; // = 2 gamma / c
            if (std::abs(e2) < kDegenerateTol)
                fail("DegenerateRecurrence", "Jacobi recurrence divisor eta_0 + 2 ~ 0");
            t.a = 0.0;
            t.b = spec.mu;
            t.c = dw / e2;
        } else {
            for (double d : {eta, eta + 1.0, eta + 2.0})
                if (std::abs(d) < kDegenerateTol)
                    fail("DegenerateRecurrence",
                         "Jacobi recurrence divisor eta_n + k ~ 0 at level " +
                             std::to_string(n));
            t.a = dw * (alpha + nn) * (beta + nn) / (nn * eta * (eta + 1.0));
            t.b = spec.omega2 -
                  0.5 * dw * ((alpha * alpha - beta * beta) / (eta * (eta + 2.0)) + 1.0);
            t.c = dw * (nn + 1.0) * (nn + 1.0) * (eta - nn + 1.0) /
                  ((eta + 1.0) * (eta + 2.0));
        }
        break;
    }
    }
    return t;
}

double eigenfunction_backward(const ProcessSpec& spec, int n, double omega) {
    require(n >= 0, "InvalidParameter", "eigenfunction level must be >= 0");
    if (!domain(spec).contains(omega))
        fail("DomainError", "omega lies outside the process domain");
    double fm = 0.0; // f_{k-1}
    double f = 1.0;  // f_k
    for (int k = 0; k < n; ++k) {
        RecurrenceTriple t = recurrence(spec, k);
        double fp = (omega * f - t.b * f - t.a * fm) / t.c;
        fm = f;
        f = fp;
    }
    return f;
}

double stationary_pdf(const ProcessSpec& spec, double omega) {
    switch (spec.kind) {
    case ProcessKind::OrnsteinUhlenbeck: {
        const double z = omega - spec.mu;
        return std::sqrt(spec.gamma / (M_PI * spec.sigma2)) *
               std::exp(-spec.gamma * z * z / spec.sigma2);
    }
    case ProcessKind::SquareRoot: {
        const double x = omega + spec.c0 / spec.c1;
        if (x <= 0.0) return 0.0;
        const double rate = 2.0 * spec.gamma / spec.c1;
        const double alpha = laguerre_alpha(spec);
        return std::exp((alpha + 1.0) * std::log(rate) - std::lgamma(alpha + 1.0) -
                        rate * x + alpha * std::log(x));
    }
    case ProcessKind::Jacobi: {
        if (omega <= spec.omega1 || omega >= spec.omega2) return 0.0;
        const double alpha = jacobi_alpha(spec);
        const double beta = jacobi_beta(spec);
        const double dw = spec.omega2 - spec.omega1;
        return std::exp(beta * std::log(omega - spec.omega1) +
                        alpha * std::log(spec.omega2 - omega) -
                        (alpha + beta + 1.0) * std::log(dw)) /
               beta_function(beta + 1.0, alpha + 1.0);
    }
    }
    return 0.0;
}

SdeCoefficients sde_coefficients(const ProcessSpec& spec, double omega) {
    SdeCoefficients sc;
    sc.drift = -spec.gamma * (omega - spec.mu);
    switch (spec.kind) {
    case ProcessKind::OrnsteinUhlenbeck:
        sc.diffusion = spec.sigma2;
        break;
    case ProcessKind::SquareRoot:
        sc.diffusion = std::max(0.0, spec.c1 * omega + spec.c0);
        break;
    case ProcessKind::Jacobi:
        sc.diffusion = std::max(0.0, -spec.c * (omega - spec.omega1) * (omega - spec.omega2));
        break;
    }
    return sc;
}

double sample_stationary(const ProcessSpec& spec, std::mt19937_64& rng) {
    switch (spec.kind) {
    case ProcessKind::OrnsteinUhlenbeck: {
        std::normal_distribution<double> normal(
            spec.mu, std::sqrt(spec.sigma2 / (2.0 * spec.gamma)));
        return normal(rng);
    }
    case ProcessKind::SquareRoot: {
        std::gamma_distribution<double> gamma(laguerre_alpha(spec) + 1.0,
                                              spec.c1 / (2.0 * spec.gamma));
        return gamma(rng) - spec.c0 / spec.c1;
    }
    case ProcessKind::Jacobi: {
        // Beta(beta+1, alpha+1) on (omega1, omega2) via two Gamma draws.
        std::gamma_distribution<double> g1(jacobi_beta(spec) + 1.0, 1.0);
        std::gamma_distribution<double> g2(jacobi_alpha(spec) + 1.0, 1.0);
        const double x = g1(rng);
        const double y = g2(rng);
        return spec.omega1 + (spec.omega2 - spec.omega1) * x / (x + y);
    }
    }
    return spec.mu;
}

} // namespace dheom
