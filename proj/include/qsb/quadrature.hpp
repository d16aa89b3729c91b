#pragma once

#include <complex>
#include <functional>
#include <vector>

namespace qsb {

struct QuadRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

// Gauss-Legendre rule on [-1, 1].
QuadRule gauss_legendre(int n);

// Gauss-Legendre rule mapped to [a, b].
QuadRule gauss_legendre(int n, double a, double b);

// Gauss-Hermite rule (weight exp(-x^2)) via Golub-Welsch.
QuadRule gauss_hermite(int n);

// Composite 16-point Gauss-Legendre over [a, b] with `panels` panels.
QuadRule composite_gl(double a, double b, int panels);

// Integrates a complex-valued integrand over [a, b], doubling the panel
// count from `panels0` until two successive levels agree to
// abs_tol + rel_tol*|I|. Throws QuadratureNoConvergence past `max_panels`.
std::complex<double> integrate_adaptive(
    const std::function<std::complex<double>(double)>& f, double a, double b,
    double abs_tol, double rel_tol, int panels0 = 1, int max_panels = 1 << 20);

// Panel count heuristic for integrands oscillating like exp(i*freq*t).
int panels_for_oscillation(double freq, double a, double b, int minimum = 1);

}  // namespace qsb
