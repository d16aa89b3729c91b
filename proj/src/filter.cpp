#include "qsb/filter.hpp"

#include <cmath>

#include "qsb/errors.hpp"
#include "qsb/tolerances.hpp"

namespace qsb {

namespace {
constexpr double kPi = 3.14159265358979323846;
constexpr double kTwoPiQuarterInv = 0.63161877774606470073;  // (2*pi)^(-1/4)
}  // namespace

double FilterSpec::operator()(double t) const {
  return kTwoPiQuarterInv / std::sqrt(sigma) * std::exp(-t * t / (4.0 * sigma * sigma));
}

std::complex<double> filter_kernel(const FilterSpec& f, Window w, double k) {
  const double sigma = f.sigma;
  if (w.infinite) {
    // int f(t) e^{ikt} dt = 2^{3/4} pi^{1/4} sqrt(sigma) exp(-sigma^2 k^2)
    return std::pow(2.0, 0.75) * std::pow(kPi, 0.25) * std::sqrt(sigma) *
           std::exp(-sigma * sigma * k * k);
  }
  const double T = w.T;
  int panels = panels_for_oscillation(k, -T, T, static_cast<int>(T / sigma) + 1);
  auto integrand = [&](double t) {
    return f(t) * std::exp(std::complex<double>(0.0, k * t));
  };
  return integrate_adaptive(integrand, -T, T, Tolerances::kernel_quad,
                            Tolerances::kernel_quad, panels);
}

namespace {

// Half-line Gaussian transform int_0^inf exp(-y^2/8sigma^2) exp(iby) dy over
// the effective support [0, 12 sigma].
std::complex<double> half_gaussian_transform(double sigma, double b) {
  double hi = 12.0 * sigma;
  int panels = panels_for_oscillation(b, 0.0, hi, 4);
  auto integrand = [&](double y) {
    return std::exp(-y * y / (8.0 * sigma * sigma)) *
           std::exp(std::complex<double>(0.0, b * y));
  };
  return integrate_adaptive(integrand, 0.0, hi, 1e-12, Tolerances::lamb_quad_rel,
                            panels);
}

std::complex<double> ordered_integral_finite(const FilterSpec& f, double T, double u,
                                             double v) {
  const std::complex<double> iu(0.0, u), iv(0.0, v);
  double osc = std::max(std::abs(u), std::abs(v));
  int panels0 = std::max(panels_for_oscillation(osc, -T, T, 2),
                         static_cast<int>(T / f.sigma / 4.0) + 2);
  auto eval = [&](int panels) {
    QuadRule outer = composite_gl(-T, T, panels);
    const int n = static_cast<int>(outer.nodes.size());
    // Prefix integrals of f(s) e^{ius} at the (ascending) outer nodes,
    // accumulated with an 8-point rule on each gap.
    const QuadRule& gap_rule = gauss_legendre(8);
    std::vector<std::complex<double>> prefix(n);
    std::complex<double> acc = 0.0;
    double prev = -T;
    for (int i = 0; i < n; ++i) {
      double lo = prev, hi = outer.nodes[i];
      double mid = 0.5 * (lo + hi), half = 0.5 * (hi - lo);
      std::complex<double> piece = 0.0;
      for (int k = 0; k < 8; ++k) {
        double s = mid + half * gap_rule.nodes[k];
        piece += half * gap_rule.weights[k] * f(s) *
                 std::exp(std::complex<double>(0.0, u * s));
      }
      acc += piece;
      prefix[i] = acc;
      prev = hi;
    }
    std::complex<double> total = 0.0;
    for (int i = 0; i < n; ++i)
      total += outer.weights[i] * f(outer.nodes[i]) *
               std::exp(std::complex<double>(0.0, v * outer.nodes[i])) * prefix[i];
    return total;
  };
  int panels = panels0;
  std::complex<double> prev_val = eval(panels);
  for (int iter = 0; iter < 14; ++iter) {
    panels *= 2;
    std::complex<double> cur = eval(panels);
    double err = std::abs(cur - prev_val);
    if (err <= 1e-13 + Tolerances::lamb_quad_rel * std::abs(cur)) return cur;
    prev_val = cur;
  }
  fail(ErrorCode::QuadratureNoConvergence,
       "ordered_double_integral: nested quadrature did not converge");
}

}  // namespace

std::complex<double> ordered_double_integral(const FilterSpec& f, Window w, double u,
                                             double v) {
  if (!w.infinite) return ordered_integral_finite(f, w.T, u, v);
  // In x = (s1+s2)/2, y = s1-s2 >= 0 the integrand separates:
  //   f(s1) f(s2) = (2pi)^{-1/2} sigma^{-1} e^{-x^2/2sigma^2} e^{-y^2/8sigma^2}
  //   u s2 + v s1 = (u+v) x + (v-u) y / 2
  const double sigma = f.sigma;
  const double wsum = u + v;
  std::complex<double> gauss_x = std::sqrt(2.0 * kPi) * sigma *
                                 std::exp(-sigma * sigma * wsum * wsum / 2.0);
  std::complex<double> half_y = half_gaussian_transform(sigma, (v - u) / 2.0);
  return gauss_x * half_y / (std::sqrt(2.0 * kPi) * sigma);
}

FrequencyDistribution FrequencyDistribution::uniform(double omega_max, int nodes) {
  if (omega_max <= 0.0) fail(ErrorCode::ConfigError, "uniform g: omega_max <= 0");
  FrequencyDistribution g;
  g.kind = FrequencyKind::uniform;
  g.omega_max = omega_max;
  g.quad_nodes = nodes;
  return g;
}

FrequencyDistribution FrequencyDistribution::gaussian_x(double beta, double sigma,
                                                        double omega_max, int nodes) {
  if (omega_max <= 0.0 || beta <= 0.0 || sigma <= 0.0)
    fail(ErrorCode::ConfigError, "gaussian_x g: parameters must be positive");
  FrequencyDistribution g;
  g.kind = FrequencyKind::gaussian_x;
  g.omega_max = omega_max;
  g.beta = beta;
  g.sigma = sigma;
  g.quad_nodes = nodes;
  return g;
}

double FrequencyDistribution::density(double omega) const {
  if (kind == FrequencyKind::uniform)
    return (omega >= 0.0 && omega <= omega_max) ? 1.0 / omega_max : 0.0;
  double center = -(beta / (8.0 * sigma * sigma) + omega_max);
  double var2 = 4.0 * omega_max / beta;  // 2 * variance
  double z = std::sqrt(kPi * var2);
  double d = omega - center;
  return std::exp(-d * d / var2) / z;
}

double FrequencyDistribution::sample(Rng& rng) const {
  if (kind == FrequencyKind::uniform) return rng.uniform(0.0, omega_max);
  double center = -(beta / (8.0 * sigma * sigma) + omega_max);
  double stddev = std::sqrt(2.0 * omega_max / beta);
  return center + stddev * rng.normal();
}

QuadRule FrequencyDistribution::quadrature() const {
  QuadRule rule;
  if (kind == FrequencyKind::uniform) {
    rule = gauss_legendre(quad_nodes, 0.0, omega_max);
    for (double& w : rule.weights) w /= omega_max;
  } else {
    QuadRule gh = gauss_hermite(quad_nodes);
    double center = -(beta / (8.0 * sigma * sigma) + omega_max);
    double scale = std::sqrt(4.0 * omega_max / beta);  // sqrt(2) * stddev
    const double sqrt_pi = 1.7724538509055160273;
    rule.nodes.resize(gh.nodes.size());
    rule.weights.resize(gh.nodes.size());
    for (std::size_t i = 0; i < gh.nodes.size(); ++i) {
      rule.nodes[i] = center + scale * gh.nodes[i];
      rule.weights[i] = gh.weights[i] / sqrt_pi;
    }
  }
  double total = 0.0;
  for (double w : rule.weights) total += w;
  for (double& w : rule.weights) w /= total;
  return rule;
}

}  // namespace qsb
