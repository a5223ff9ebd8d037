#pragma once

#include <limits>
#include <random>
#include <string>

#include "dheom/errors.hpp"

namespace dheom {

enum class ProcessKind { OrnsteinUhlenbeck, SquareRoot, Jacobi };

const char* kind_name(ProcessKind kind);

/// One of the three diffusion processes whose Fokker-Planck generator has
/// orthogonal polynomial eigenfunctions. All share the linear mean-reverting
/// drift A(w) = -gamma (w - mu); they differ in the diffusion coefficient
/// B(w) and hence in stationary law and eigenfunction family:
///
///   OrnsteinUhlenbeck:  B = sigma2,                  Gaussian / scaled Hermite
///   SquareRoot (CIR):   B = c1 w + c0,               Gamma    / scaled Laguerre
///   Jacobi:             B = -c (w - w1)(w - w2),     Beta     / scaled Jacobi
struct ProcessSpec {
    ProcessKind kind = ProcessKind::OrnsteinUhlenbeck;
    double mu = 0.0;
    double gamma = 0.0;

    double sigma2 = 0.0;            // OU
    double c0 = 0.0, c1 = 0.0;      // SquareRoot
    double omega1 = 0.0, omega2 = 0.0, c = 0.0; // Jacobi

    /// Downgrades the SquareRoot gamma<=1 rejection to acceptance; hierarchy
    /// truncation is then not guaranteed to converge.
    bool allow_unsound_truncation = false;

    static ProcessSpec ornstein_uhlenbeck(double mu, double gamma, double sigma2);
    static ProcessSpec square_root(double mu, double gamma, double c0, double c1,
                                   bool allow_unsound = false);
    static ProcessSpec jacobi(double mu, double gamma, double omega1, double omega2,
                              double c);
};

/// Coefficients of w f_n(w) = a f_{n-1}(w) + b f_n(w) + c f_{n+1}(w).
/// a is 0 at n = 0 by the f_{-1} = 0 convention.
struct RecurrenceTriple {
    double a = 0.0, b = 0.0, c = 0.0;
};

struct Interval {
    double lo = -std::numeric_limits<double>::infinity();
    double hi = std::numeric_limits<double>::infinity();
    bool contains(double x) const { return x > lo && x < hi; }
};

struct SdeCoefficients {
    double drift = 0.0;
    double diffusion = 0.0;
};

/// Throws a coded Error if the parameters violate any constraint.
void validate(const ProcessSpec& spec);

Interval domain(const ProcessSpec& spec);

/// Laguerre shape parameter alpha = (2 gamma / c1)(mu + c0/c1) - 1.
double laguerre_alpha(const ProcessSpec& spec);
/// Beta-law exponents of the Jacobi stationary density.
double jacobi_alpha(const ProcessSpec& spec);
double jacobi_beta(const ProcessSpec& spec);

/// Generator eigenvalue lambda_n: n gamma for OU/SquareRoot,
/// n gamma + c n (n-1)/2 for Jacobi.
double eigenvalue(const ProcessSpec& spec, int n);

RecurrenceTriple recurrence(const ProcessSpec& spec, int n);

/// Backward-generator eigenfunction, evaluated by upward application of the
/// three-term recurrence from f_0 = 1.
double eigenfunction_backward(const ProcessSpec& spec, int n, double omega);

/// Stationary density (0 outside the domain).
double stationary_pdf(const ProcessSpec& spec, double omega);

SdeCoefficients sde_coefficients(const ProcessSpec& spec, double omega);

/// Draw from the stationary law.
double sample_stationary(const ProcessSpec& spec, std::mt19937_64& rng);

} // namespace dheom
