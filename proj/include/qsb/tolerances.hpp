#pragma once

namespace qsb {

// Single source of truth for the numerical tolerances used by validity
// checks across all modules.
struct Tolerances {
  static constexpr double herm_scale = 1e-10;  // Hermiticity: ||A-A^dag||_2 <= herm_scale*dim
  static constexpr double psd = 1e-9;          // min eigenvalue of a density matrix
  static constexpr double trace = 1e-10;       // |Tr(rho)-1|
  static constexpr double unitary = 1e-10;     // eigenvector matrix unitarity
  static constexpr double kernel_quad = 1e-10;      // 1D kernel K_T quadrature
  static constexpr double lamb_quad_rel = 1e-8;     // 2D Lamb-shift kernel, relative
  static constexpr double evolve_step = 1e-9;       // reference evolution step doubling
  static constexpr double fixed_point_clamp = 1e-8; // negative-part budget for fixed points

  static double herm(int dim) { return herm_scale * dim; }
  static double bohr_default(double ham_norm) {
    return 1e-8 * (ham_norm > 1.0 ? ham_norm : 1.0);
  }
};

}  // namespace qsb
