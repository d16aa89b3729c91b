#pragma once

#include <Eigen/Dense>
#include <complex>

#include "qsb/errors.hpp"
#include "qsb/tolerances.hpp"

namespace qsb {

using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using Complex = std::complex<double>;

// Positive-semidefinite unit-trace matrix. Construction validates
// Hermiticity, trace and numerical positivity against the central
// tolerances; use unchecked() only for values already proven valid.
class DensityMatrix {
 public:
  explicit DensityMatrix(ComplexMatrix m);
  static DensityMatrix unchecked(ComplexMatrix m);

  int dim() const { return static_cast<int>(mat_.rows()); }
  const ComplexMatrix& matrix() const { return mat_; }

 private:
  DensityMatrix() = default;
  ComplexMatrix mat_;
};

// Dense matrix acting on column-stacked vectorized operators. The
// vectorization convention is column-stacking project-wide:
// vec(X)(i + j*d) = X(i, j), so vec(L X R) = (R^T (x) L) vec(X).
class Superoperator {
 public:
  Superoperator(int dim, ComplexMatrix m);
  static Superoperator zero(int dim);
  static Superoperator identity(int dim);

  int dim() const { return dim_; }
  const ComplexMatrix& matrix() const { return mat_; }
  ComplexMatrix& matrix() { return mat_; }

  ComplexMatrix apply(const ComplexMatrix& x) const;

  Superoperator operator+(const Superoperator& o) const;
  Superoperator operator-(const Superoperator& o) const;
  Superoperator operator*(const Superoperator& o) const;  // composition
  Superoperator& operator+=(const Superoperator& o);
  Superoperator scaled(Complex s) const;

 private:
  int dim_ = 0;
  ComplexMatrix mat_;
};

ComplexVector vec(const ComplexMatrix& x);
ComplexMatrix unvec(const ComplexVector& v, int rows, int cols);

ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b);

bool is_hermitian(const ComplexMatrix& m, double tol);

// exp(scale*h) for Hermitian h via eigendecomposition.
ComplexMatrix herm_expm(const ComplexMatrix& h, Complex scale);

// Trace over the last tensor factor (one ancilla qubit): dim 2d -> d.
DensityMatrix partial_trace_last_qubit(const DensityMatrix& rho);
ComplexMatrix partial_trace_last_qubit(const ComplexMatrix& m);

// Trace over the second factor of a dA (x) dB bipartition.
ComplexMatrix partial_trace_second(const ComplexMatrix& m, int da, int db);

double schatten_norm(const ComplexMatrix& m, int p);  // p in {1, 2}; p<=0 => inf
inline double trace_norm(const ComplexMatrix& m) { return schatten_norm(m, 1); }
inline double operator_norm(const ComplexMatrix& m) { return schatten_norm(m, 0); }

// X |-> l X r.
Superoperator superop_from_left_right(const ComplexMatrix& l,
                                      const ComplexMatrix& r);
// X |-> u X u^dag.
Superoperator conjugation_superop(const ComplexMatrix& u);
// X |-> -i[h, X].
Superoperator commutator_superop(const ComplexMatrix& h);

// Real power of a PSD Hermitian matrix. Negative powers reject inputs whose
// smallest eigenvalue is at or below singular_floor * largest.
ComplexMatrix herm_power(const ComplexMatrix& h, double p,
                         double singular_floor = 1e-14);

// Columns form an orthonormal basis of the complement of span{v}.
ComplexMatrix orthonormal_complement(const ComplexVector& v);

ComplexMatrix choi_matrix(const Superoperator& s);

struct CptpCheck {
  double choi_min_eigenvalue;
  double trace_preservation_error;
};
CptpCheck cptp_check(const Superoperator& s);

// Upper... strictly: reproducible monotone lower estimate of the induced
// trace norm sup_{||A||_1=1} ||S(A)||_1, evaluated over computational-basis
// rank-1 matrices, a seeded set of random rank-1 pairs, and the top singular
// vector of the superoperator matrix.
double induced_trace_norm(const Superoperator& s);

}  // namespace qsb
