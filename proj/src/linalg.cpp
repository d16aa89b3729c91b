#include "qsb/linalg.hpp"

#include <Eigen/SVD>
#include <cmath>

#include "qsb/rng.hpp"

namespace qsb {

namespace {

void require_square(const ComplexMatrix& m, const char* who) {
  if (m.rows() != m.cols())
    fail(ErrorCode::DimensionMismatch, std::string(who) + ": matrix not square");
  if (m.rows() < 2)
    fail(ErrorCode::DegenerateInput,
         std::string(who) + ": dimensions below 2 are rejected");
}

void require_finite(const ComplexMatrix& m, const char* who) {
  if (!m.allFinite())
    fail(ErrorCode::DegenerateInput, std::string(who) + ": non-finite entries");
}

}  // namespace

DensityMatrix::DensityMatrix(ComplexMatrix m) {
  require_square(m, "DensityMatrix");
  require_finite(m, "DensityMatrix");
  const int d = static_cast<int>(m.rows());
  if ((m - m.adjoint()).norm() > Tolerances::herm(d))
    fail(ErrorCode::NonHermitianInput, "DensityMatrix: not Hermitian");
  if (std::abs(m.trace().real() - 1.0) > Tolerances::trace ||
      std::abs(m.trace().imag()) > Tolerances::trace)
    fail(ErrorCode::DegenerateInput, "DensityMatrix: trace != 1");
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(0.5 * (m + m.adjoint()),
                                                  Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() < -Tolerances::psd)
    fail(ErrorCode::DegenerateInput, "DensityMatrix: negative eigenvalue");
  mat_ = std::move(m);
}

DensityMatrix DensityMatrix::unchecked(ComplexMatrix m) {
  DensityMatrix rho;
  rho.mat_ = std::move(m);
  return rho;
}

Superoperator::Superoperator(int dim, ComplexMatrix m) : dim_(dim), mat_(std::move(m)) {
  if (dim < 2) fail(ErrorCode::DegenerateInput, "Superoperator: dim below 2");
  if (mat_.rows() != dim * dim || mat_.cols() != dim * dim)
    fail(ErrorCode::DimensionMismatch, "Superoperator: matrix is not d^2 x d^2");
}

Superoperator Superoperator::zero(int dim) {
  return Superoperator(dim, ComplexMatrix::Zero(dim * dim, dim * dim));
}

Superoperator Superoperator::identity(int dim) {
  return Superoperator(dim, ComplexMatrix::Identity(dim * dim, dim * dim));
}

ComplexMatrix Superoperator::apply(const ComplexMatrix& x) const {
  if (x.rows() != dim_ || x.cols() != dim_)
    fail(ErrorCode::DimensionMismatch, "Superoperator::apply: dim mismatch");
  return unvec(mat_ * vec(x), dim_, dim_);
}

Superoperator Superoperator::operator+(const Superoperator& o) const {
  if (dim_ != o.dim_) fail(ErrorCode::DimensionMismatch, "Superoperator +");
  return Superoperator(dim_, mat_ + o.mat_);
}

Superoperator Superoperator::operator-(const Superoperator& o) const {
  if (dim_ != o.dim_) fail(ErrorCode::DimensionMismatch, "Superoperator -");
  return Superoperator(dim_, mat_ - o.mat_);
}

Superoperator Superoperator::operator*(const Superoperator& o) const {
  if (dim_ != o.dim_) fail(ErrorCode::DimensionMismatch, "Superoperator *");
  return Superoperator(dim_, mat_ * o.mat_);
}

Superoperator& Superoperator::operator+=(const Superoperator& o) {
  if (dim_ != o.dim_) fail(ErrorCode::DimensionMismatch, "Superoperator +=");
  mat_ += o.mat_;
  return *this;
}

Superoperator Superoperator::scaled(Complex s) const {
  return Superoperator(dim_, s * mat_);
}

ComplexVector vec(const ComplexMatrix& x) {
  return Eigen::Map<const ComplexVector>(x.data(), x.size());
}

ComplexMatrix unvec(const ComplexVector& v, int rows, int cols) {
  return Eigen::Map<const ComplexMatrix>(v.data(), rows, cols);
}

ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b) {
  ComplexMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

bool is_hermitian(const ComplexMatrix& m, double tol) {
  return m.rows() == m.cols() && (m - m.adjoint()).norm() <= tol;
}

ComplexMatrix herm_expm(const ComplexMatrix& h, Complex scale) {
  require_square(h, "herm_expm");
  const int d = static_cast<int>(h.rows());
  if (!is_hermitian(h, Tolerances::herm(d)))
    fail(ErrorCode::NonHermitianInput, "herm_expm: input not Hermitian");
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(0.5 * (h + h.adjoint()));
  ComplexVector phases(d);
  for (int i = 0; i < d; ++i) phases(i) = std::exp(scale * es.eigenvalues()(i));
  return es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
}

ComplexMatrix partial_trace_second(const ComplexMatrix& m, int da, int db) {
  if (m.rows() != da * db || m.cols() != da * db)
    fail(ErrorCode::DimensionMismatch, "partial_trace_second: dim mismatch");
  ComplexMatrix out = ComplexMatrix::Zero(da, da);
  for (int i = 0; i < da; ++i)
    for (int j = 0; j < da; ++j)
      for (int b = 0; b < db; ++b) out(i, j) += m(i * db + b, j * db + b);
  return out;
}

ComplexMatrix partial_trace_last_qubit(const ComplexMatrix& m) {
  if (m.rows() % 2 != 0)
    fail(ErrorCode::OddDimension, "partial_trace_last_qubit: odd dimension");
  return partial_trace_second(m, static_cast<int>(m.rows()) / 2, 2);
}

DensityMatrix partial_trace_last_qubit(const DensityMatrix& rho) {
  return DensityMatrix(partial_trace_last_qubit(rho.matrix()));
}

double schatten_norm(const ComplexMatrix& m, int p) {
  if (p == 2) return m.norm();
  Eigen::JacobiSVD<ComplexMatrix> svd(m);
  const auto& sv = svd.singularValues();
  if (p == 1) return sv.sum();
  return sv.size() > 0 ? sv(0) : 0.0;
}

Superoperator superop_from_left_right(const ComplexMatrix& l,
                                      const ComplexMatrix& r) {
  require_square(l, "superop_from_left_right");
  require_square(r, "superop_from_left_right");
  if (l.rows() != r.rows())
    fail(ErrorCode::DimensionMismatch, "superop_from_left_right: dim mismatch");
  return Superoperator(static_cast<int>(l.rows()), kron(r.transpose(), l));
}

Superoperator conjugation_superop(const ComplexMatrix& u) {
  return superop_from_left_right(u, u.adjoint());
}

Superoperator commutator_superop(const ComplexMatrix& h) {
  Superoperator left = superop_from_left_right(h, ComplexMatrix::Identity(h.rows(), h.cols()));
  Superoperator right = superop_from_left_right(ComplexMatrix::Identity(h.rows(), h.cols()), h);
  return (left - right).scaled(Complex(0.0, -1.0));
}

ComplexMatrix herm_power(const ComplexMatrix& h, double p, double singular_floor) {
  require_square(h, "herm_power");
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(0.5 * (h + h.adjoint()));
  const int d = static_cast<int>(h.rows());
  double top = es.eigenvalues().cwiseAbs().maxCoeff();
  ComplexVector powered(d);
  for (int i = 0; i < d; ++i) {
    double lam = es.eigenvalues()(i);
    if (p < 0.0 && lam <= singular_floor * top)
      fail(ErrorCode::SingularGibbsState,
           "herm_power: negative power of a (near-)singular matrix");
    powered(i) = std::pow(std::max(lam, 0.0), p);
  }
  return es.eigenvectors() * powered.asDiagonal() * es.eigenvectors().adjoint();
}

ComplexMatrix orthonormal_complement(const ComplexVector& v) {
  const int n = static_cast<int>(v.size());
  ComplexVector u = v.normalized();
  // Householder reflector mapping e_0 to u; remaining columns span u^perp.
  ComplexMatrix house = ComplexMatrix::Identity(n, n);
  ComplexVector w = u;
  Complex phase = std::abs(w(0)) > 1e-14 ? w(0) / std::abs(w(0)) : Complex(1.0, 0.0);
  w(0) += phase;
  double wn = w.norm();
  if (wn > 1e-14) {
    w /= wn;
    house -= 2.0 * (w * w.adjoint());
    house *= -phase;
  }
  return house.rightCols(n - 1);
}

ComplexMatrix choi_matrix(const Superoperator& s) {
  const int d = s.dim();
  ComplexMatrix choi(d * d, d * d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) {
      // vec(|i><j|) is the (i + j*d)-th unit vector.
      ComplexMatrix image = unvec(s.matrix().col(i + j * d), d, d);
      choi.block(i * d, j * d, d, d) = image;
    }
  return choi;
}

CptpCheck cptp_check(const Superoperator& s) {
  const int d = s.dim();
  ComplexMatrix choi = choi_matrix(s);
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(0.5 * (choi + choi.adjoint()),
                                                  Eigen::EigenvaluesOnly);
  ComplexMatrix reduced = partial_trace_second(choi, d, d);
  // Choi block (i,j) holds S(|i><j|); tracing out the image factor must
  // leave the identity for a trace-preserving map.
  ComplexMatrix residual = ComplexMatrix::Zero(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j)
      residual(i, j) = choi.block(i * d, j * d, d, d).trace() - (i == j ? 1.0 : 0.0);
  (void)reduced;
  return {es.eigenvalues().minCoeff(), residual.cwiseAbs().maxCoeff()};
}

double induced_trace_norm(const Superoperator& s) {
  const int d = s.dim();
  double best = 0.0;
  auto consider = [&](const ComplexMatrix& x) {
    double nx = trace_norm(x);
    if (nx < 1e-14) return;
    best = std::max(best, trace_norm(s.apply(x)) / nx);
  };
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) {
      ComplexMatrix e = ComplexMatrix::Zero(d, d);
      e(i, j) = 1.0;
      consider(e);
    }
  Rng rng(Rng::stream_seed(0x51b0, "induced_trace_norm"));
  for (int k = 0; k < 200; ++k) {
    ComplexVector u(d), v(d);
    for (int i = 0; i < d; ++i) {
      u(i) = Complex(rng.normal(), rng.normal());
      v(i) = Complex(rng.normal(), rng.normal());
    }
    u.normalize();
    v.normalize();
    consider(u * v.adjoint());
    consider(u * u.adjoint() - v * v.adjoint());
  }
  Eigen::JacobiSVD<ComplexMatrix> svd(s.matrix(), Eigen::ComputeThinV);
  consider(unvec(svd.matrixV().col(0), d, d));
  return best;
}

}  // namespace qsb
