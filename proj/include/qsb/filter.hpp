#pragma once

#include <complex>
#include <vector>

#include "qsb/quadrature.hpp"
#include "qsb/rng.hpp"

namespace qsb {

// Gaussian interaction filter f(t) = (2pi)^(-1/4) sigma^(-1/2) exp(-t^2/4sigma^2),
// normalized so that the integral of f^2 over the real line is one.
struct FilterSpec {
  double sigma = 1.0;

  double operator()(double t) const;
  double sup() const { return (*this)(0.0); }
};

// Evolution half-window; the channel integrates over [-T, T].
struct Window {
  double T = 0.0;
  bool infinite = false;

  static Window finite(double t) { return {t, false}; }
  static Window infinity() { return {0.0, true}; }
};

// K_T(k) = int_{-T}^{T} f(t) exp(ikt) dt. The infinite window uses the
// closed-form Gaussian transform; finite windows use node-doubling
// Gauss-Legendre quadrature to the central kernel tolerance.
std::complex<double> filter_kernel(const FilterSpec& f, Window w, double k);

// J(u, v) = int_{-T}^{T} ds1 int_{-T}^{s1} ds2 f(s2) f(s1) e^{i u s2} e^{i v s1},
// the ordered double integral behind every Lamb-shift entry. The infinite
// window separates in (s1+s2, s1-s2) coordinates into the closed-form
// Gaussian transform times a half-line integral over the Gaussian effective
// support; finite windows use nested adaptive quadrature.
std::complex<double> ordered_double_integral(const FilterSpec& f, Window w,
                                             double u, double v);

enum class FrequencyKind { uniform, gaussian_x };

// Distribution g(omega) of the random bath frequency, with its density,
// sampler and deterministic quadrature (probability-weighted nodes).
struct FrequencyDistribution {
  FrequencyKind kind = FrequencyKind::uniform;
  double omega_max = 1.0;
  double beta = 1.0;    // gaussian_x only
  double sigma = 1.0;   // gaussian_x only
  int quad_nodes = 64;

  static FrequencyDistribution uniform(double omega_max, int nodes = 64);
  // g(w) = exp(-(w + beta/(8 sigma^2) + omega_max)^2 / (4 omega_max / beta)) / Z
  static FrequencyDistribution gaussian_x(double beta, double sigma, double omega_max,
                                          int nodes = 64);

  double density(double omega) const;
  double sample(Rng& rng) const;
  QuadRule quadrature() const;  // weights are probabilities summing to one
};

}  // namespace qsb
