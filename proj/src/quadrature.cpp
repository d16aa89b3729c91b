#include "qsb/quadrature.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <map>
#include <mutex>

#include "qsb/errors.hpp"

namespace qsb {

namespace {

QuadRule compute_gl(int n) {
  // Newton iteration on Legendre polynomials, symmetric nodes.
  QuadRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  const double pi = 3.14159265358979323846;
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(pi * (i + 0.75) / (n + 0.5));
    double pp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      pp = n * (x * p1 - p0) / (x * x - 1.0);
      double dx = p1 / pp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    rule.nodes[i] = -x;
    rule.nodes[n - 1 - i] = x;
    double w = 2.0 / ((1.0 - x * x) * pp * pp);
    rule.weights[i] = w;
    rule.weights[n - 1 - i] = w;
  }
  return rule;
}

const QuadRule& cached_gl(int n) {
  static std::map<int, QuadRule> cache;
  static std::mutex mutex;
  std::lock_guard<std::mutex> lock(mutex);
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, compute_gl(n)).first;
  return it->second;
}

}  // namespace

QuadRule gauss_legendre(int n) { return cached_gl(n); }

QuadRule gauss_legendre(int n, double a, double b) {
  const QuadRule& base = cached_gl(n);
  QuadRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  double mid = 0.5 * (a + b), half = 0.5 * (b - a);
  for (int i = 0; i < n; ++i) {
    rule.nodes[i] = mid + half * base.nodes[i];
    rule.weights[i] = half * base.weights[i];
  }
  return rule;
}

QuadRule gauss_hermite(int n) {
  // Golub-Welsch: Jacobi matrix of the Hermite recurrence.
  Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(n, n);
  for (int i = 1; i < n; ++i) {
    double b = std::sqrt(i / 2.0);
    jacobi(i, i - 1) = b;
    jacobi(i - 1, i) = b;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(jacobi);
  const double sqrt_pi = 1.7724538509055160273;
  QuadRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  for (int i = 0; i < n; ++i) {
    rule.nodes[i] = es.eigenvalues()(i);
    double v0 = es.eigenvectors()(0, i);
    rule.weights[i] = sqrt_pi * v0 * v0;
  }
  return rule;
}

QuadRule composite_gl(double a, double b, int panels) {
  const QuadRule& base = cached_gl(16);
  QuadRule rule;
  rule.nodes.reserve(16 * panels);
  rule.weights.reserve(16 * panels);
  double h = (b - a) / panels;
  for (int p = 0; p < panels; ++p) {
    double lo = a + p * h;
    double mid = lo + 0.5 * h, half = 0.5 * h;
    for (int i = 0; i < 16; ++i) {
      rule.nodes.push_back(mid + half * base.nodes[i]);
      rule.weights.push_back(half * base.weights[i]);
    }
  }
  return rule;
}

std::complex<double> integrate_adaptive(
    const std::function<std::complex<double>(double)>& f, double a, double b,
    double abs_tol, double rel_tol, int panels0, int max_panels) {
  auto eval = [&](int panels) {
    QuadRule rule = composite_gl(a, b, panels);
    std::complex<double> sum = 0.0;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i)
      sum += rule.weights[i] * f(rule.nodes[i]);
    return sum;
  };
  int panels = panels0 > 0 ? panels0 : 1;
  std::complex<double> prev = eval(panels);
  while (panels <= max_panels) {
    panels *= 2;
    std::complex<double> cur = eval(panels);
    double err = std::abs(cur - prev);
    if (err <= abs_tol + rel_tol * std::abs(cur)) return cur;
    prev = cur;
  }
  fail(ErrorCode::QuadratureNoConvergence,
       "adaptive quadrature did not converge within panel budget");
}

int panels_for_oscillation(double freq, double a, double b, int minimum) {
  // ~4 oscillation periods per 16-point panel keeps GL at machine accuracy.
  double periods = std::abs(freq) * (b - a) / 6.283185307179586;
  int panels = static_cast<int>(periods / 4.0) + 1;
  return panels < minimum ? minimum : panels;
}

}  // namespace qsb
