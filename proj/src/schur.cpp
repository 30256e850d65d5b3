#include "leakmap/schur.hpp"

#include <complex>
#include <sstream>
#include <vector>

#include "leakmap/error.hpp"

extern "C" void zgees_(const char* jobvs, const char* sort, void* select, const int* n,
                       std::complex<double>* a, const int* lda, int* sdim,
                       std::complex<double>* w, std::complex<double>* vs, const int* ldvs,
                       std::complex<double>* work, const int* lwork, double* rwork, int* bwork,
                       int* info);

namespace leakmap {

namespace {

using cd = std::complex<double>;

// c f + s g = r, -conj(s) f + c g = 0, c real.
void givens(cd f, cd g, double& c, cd& s) {
  const double af = std::abs(f);
  const double ag = std::abs(g);
  if (ag == 0.0) {
    c = 1.0;
    s = 0.0;
    return;
  }
  if (af == 0.0) {
    c = 0.0;
    s = std::conj(g) / ag;
    return;
  }
  const double norm = std::hypot(af, ag);
  c = af / norm;
  s = (f / af) * std::conj(g) / norm;
}

std::string diagnostics(const Eigen::MatrixXcd& a, int info) {
  std::ostringstream os;
  os << "complex Schur factorisation failed (info=" << info << ", n=" << a.rows()
     << ", frobenius=" << a.norm() << ", finite=" << (a.allFinite() ? "yes" : "no") << ")";
  return os.str();
}

}  // namespace

SchurFactorization complex_schur(const Eigen::MatrixXcd& a) {
  if (a.rows() != a.cols()) throw std::invalid_argument("complex_schur: matrix must be square");
  if (!a.allFinite()) throw NumericalError(diagnostics(a, -1));
  const int n = static_cast<int>(a.rows());
  SchurFactorization f{a, Eigen::MatrixXcd(n, n)};
  if (n == 0) return f;

  std::vector<cd> w(n);
  std::vector<double> rwork(n);
  int sdim = 0;
  int info = 0;
  int lwork = -1;
  cd query;
  const int lda = n;
  zgees_("V", "N", nullptr, &n, f.T.data(), &lda, &sdim, w.data(), f.V.data(), &lda, &query,
         &lwork, rwork.data(), nullptr, &info);
  lwork = std::max(1, static_cast<int>(query.real()));
  std::vector<cd> work(lwork);
  zgees_("V", "N", nullptr, &n, f.T.data(), &lda, &sdim, w.data(), f.V.data(), &lda, work.data(),
         &lwork, rwork.data(), nullptr, &info);
  if (info != 0) throw NumericalError(diagnostics(a, info));
  f.T.triangularView<Eigen::StrictlyLower>().setZero();
  return f;
}

void swap_adjacent(SchurFactorization& f, Eigen::Index k) {
  Eigen::MatrixXcd& T = f.T;
  const Eigen::Index n = T.rows();
  const cd t11 = T(k, k);
  const cd t22 = T(k + 1, k + 1);
  double c = 1.0;
  cd s = 0.0;
  givens(T(k, k + 1), t22 - t11, c, s);

  // Rows k, k+1 to the right of the 2x2 block.
  for (Eigen::Index j = k + 2; j < n; ++j) {
    const cd x = T(k, j);
    const cd y = T(k + 1, j);
    T(k, j) = c * x + s * y;
    T(k + 1, j) = c * y - std::conj(s) * x;
  }
  // Columns k, k+1 above the block.
  const cd sc = std::conj(s);
  for (Eigen::Index i = 0; i < k; ++i) {
    const cd x = T(i, k);
    const cd y = T(i, k + 1);
    T(i, k) = c * x + sc * y;
    T(i, k + 1) = c * y - s * x;
  }
  T(k, k) = t22;
  T(k + 1, k + 1) = t11;

  Eigen::MatrixXcd& V = f.V;
  for (Eigen::Index i = 0; i < V.rows(); ++i) {
    const cd x = V(i, k);
    const cd y = V(i, k + 1);
    V(i, k) = c * x + sc * y;
    V(i, k + 1) = c * y - s * x;
  }
}

void sort_by_modulus(SchurFactorization& f) {
  const Eigen::Index n = f.T.rows();
  // Insertion sort: move each entry left past every strictly smaller one.
  for (Eigen::Index j = 1; j < n; ++j) {
    for (Eigen::Index k = j; k > 0; --k) {
      if (std::abs(f.T(k - 1, k - 1)) >= std::abs(f.T(k, k))) break;
      swap_adjacent(f, k - 1);
    }
  }
}

double factorization_residual(const Eigen::MatrixXcd& a, const SchurFactorization& f) {
  return (a - f.V * f.T * f.V.adjoint()).cwiseAbs().maxCoeff();
}

double orthonormality_error(const Eigen::MatrixXcd& v) {
  const Eigen::MatrixXcd g = v.adjoint() * v;
  return (g - Eigen::MatrixXcd::Identity(g.rows(), g.cols())).cwiseAbs().maxCoeff();
}

}  // namespace leakmap
