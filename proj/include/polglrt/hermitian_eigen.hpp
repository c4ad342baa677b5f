#pragma once

/*
 * Dense eigensolvers for Hermitian (and real symmetric) matrices.
 *
 *   eigh(A, want_vectors)      Householder tridiagonalization followed by the
 *                              implicit QL iteration on the real tridiagonal.
 *                              This is the production path.
 *
 *   eigh_jacobi(A)             Cyclic Jacobi rotations, generic over the
 *                              scalar type (double or std::complex<double>).
 *                              Slower; used for 3x3 dyads and for cross-checks.
 *
 * Eigenvalues are returned in ascending order. Eigenvector columns are
 * normalized and phase-fixed so the entry of largest magnitude is real and
 * positive (the first such entry on ties).
 */

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numeric>
#include <type_traits>
#include <vector>

#include <Eigen/Dense>

#include "polglrt/errors.hpp"

namespace polglrt {

using cplx = std::complex<double>;

template <typename Scalar>
struct EigenDecomposition {
  Eigen::VectorXd values;                                        // ascending
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> vectors;  // columns
};

namespace detail {

inline double abs2(double x) { return x * x; }
inline double abs2(const cplx& z) { return std::norm(z); }
inline double conj_of(double x) { return x; }
inline cplx conj_of(const cplx& z) { return std::conj(z); }

// Largest-magnitude entry made real-positive.
template <typename Derived>
void fix_phase(Eigen::MatrixBase<Derived>&& v) {
  using Scalar = typename Derived::Scalar;
  Eigen::Index best = 0;
  double best_mag = -1.0;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    const double m = abs2(v(i));
    if (m > best_mag * (1.0 + 1e-12)) {
      best_mag = m;
      best = i;
    }
  }
  if (best_mag <= 0.0) return;
  if constexpr (std::is_same_v<Scalar, cplx>) {
    const cplx ph = v(best) / std::abs(v(best));
    v *= std::conj(ph);
    v(best) = cplx(std::abs(v(best)), 0.0);
  } else {
    if (v(best) < 0.0) v = -v;
  }
}

template <typename Scalar>
void sort_ascending(EigenDecomposition<Scalar>& r, bool with_vectors) {
  const auto n = r.values.size();
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(n));
  std::iota(idx.begin(), idx.end(), Eigen::Index{0});
  std::stable_sort(idx.begin(), idx.end(),
                   [&](Eigen::Index a, Eigen::Index b) { return r.values(a) < r.values(b); });
  Eigen::VectorXd vals(n);
  for (Eigen::Index i = 0; i < n; ++i) vals(i) = r.values(idx[static_cast<std::size_t>(i)]);
  r.values = vals;
  if (with_vectors) {
    auto vecs = r.vectors;
    for (Eigen::Index i = 0; i < n; ++i) vecs.col(i) = r.vectors.col(idx[static_cast<std::size_t>(i)]);
    r.vectors = vecs;
    for (Eigen::Index i = 0; i < n; ++i) fix_phase(r.vectors.col(i));
  }
}

// Implicit QL with Wilkinson-style shifts on a real symmetric tridiagonal.
// d: diagonal (n), e: e[i] couples i and i+1, e[n-1] unused. On exit d holds
// the eigenvalues; if z is non-null its columns are rotated accordingly.
template <typename ZMatrix>
void tridiagonal_ql(std::vector<double>& d, std::vector<double>& e, ZMatrix* z) {
  const int n = static_cast<int>(d.size());
  if (n == 0) return;
  e.resize(static_cast<std::size_t>(n));
  e[static_cast<std::size_t>(n - 1)] = 0.0;
  const double eps = std::numeric_limits<double>::epsilon();
  for (int l = 0; l < n; ++l) {
    int iter = 0;
    while (true) {
      int m = l;
      for (; m < n - 1; ++m) {
        const double dd = std::abs(d[m]) + std::abs(d[m + 1]);
        if (std::abs(e[m]) <= eps * dd) break;
      }
      if (m == l) break;
      if (++iter > 64) throw NumericalError("tridiagonal_ql: no convergence");

      double g = (d[l + 1] - d[l]) / (2.0 * e[l]);
      double r = std::hypot(g, 1.0);
      g = d[m] - d[l] + e[l] / (g + std::copysign(r, g));
      double s = 1.0, c = 1.0, p = 0.0;
      int i = m - 1;
      bool underflow = false;
      for (; i >= l; --i) {
        const double f = s * e[i];
        const double b = c * e[i];
        r = std::hypot(f, g);
        e[i + 1] = r;
        if (r == 0.0) {
          d[i + 1] -= p;
          e[m] = 0.0;
          underflow = true;
          break;
        }
        s = f / r;
        c = g / r;
        g = d[i + 1] - p;
        r = (d[i] - g) * s + 2.0 * c * b;
        p = s * r;
        d[i + 1] = g + p;
        g = c * r - b;
        if (z != nullptr) {
          for (Eigen::Index k = 0; k < z->rows(); ++k) {
            const auto zf = (*z)(k, i + 1);
            (*z)(k, i + 1) = s * (*z)(k, i) + c * zf;
            (*z)(k, i) = c * (*z)(k, i) - s * zf;
          }
        }
      }
      if (underflow) continue;
      d[l] -= p;
      e[l] = g;
      e[m] = 0.0;
    }
  }
}

}  // namespace detail

/**
 * @brief Eigen-decomposition of a complex Hermitian matrix.
 *
 * Only the lower triangle is referenced. Householder reflections reduce A to a
 * Hermitian tridiagonal, a diagonal phase scaling makes it real, then the QL
 * iteration finishes. O(n^3); eigenvalues alone are cheap enough for the
 * Monte-Carlo inner loop.
 */
inline EigenDecomposition<cplx> eigh(const Eigen::MatrixXcd& input, bool want_vectors = true) {
  const Eigen::Index n = input.rows();
  if (input.cols() != n) throw ModeError("eigh: matrix not square");
  EigenDecomposition<cplx> out;
  if (n == 0) {
    out.values.resize(0);
    out.vectors.resize(0, 0);
    return out;
  }

  Eigen::MatrixXcd a = input.triangularView<Eigen::Lower>();
  a.triangularView<Eigen::StrictlyUpper>() = a.adjoint();
  for (Eigen::Index i = 0; i < n; ++i) a(i, i) = cplx(a(i, i).real(), 0.0);

  Eigen::MatrixXcd q;
  if (want_vectors) q = Eigen::MatrixXcd::Identity(n, n);

  Eigen::VectorXcd v(n), p(n), w(n);
  for (Eigen::Index k = 0; k + 2 < n; ++k) {
    const Eigen::Index m = n - k - 1;
    auto x = a.col(k).tail(m);
    const double xnorm = x.norm();
    if (xnorm == 0.0) continue;
    const double tail_norm = x.tail(m - 1).norm();
    if (tail_norm == 0.0) continue;  // already tridiagonal in this column
    const cplx x0 = x(0);
    const cplx phase = (std::abs(x0) > 0.0) ? x0 / std::abs(x0) : cplx(1.0, 0.0);
    const cplx alpha = -phase * xnorm;

    auto vv = v.head(m);
    vv = x;
    vv(0) -= alpha;
    const double vnorm = vv.norm();
    if (vnorm == 0.0) continue;
    vv /= vnorm;

    // H = I - 2 v v^H on the trailing block; A <- H A H.
    auto block = a.bottomRightCorner(m, m);
    auto pp = p.head(m);
    pp.noalias() = block * vv;
    const double kappa = vv.dot(pp).real();  // v^H A v
    auto ww = w.head(m);
    ww = pp - kappa * vv;
    block.noalias() -= 2.0 * vv * ww.adjoint();
    block.noalias() -= 2.0 * ww * vv.adjoint();

    a(k + 1, k) = alpha;
    a(k, k + 1) = std::conj(alpha);
    a.col(k).tail(m - 1).setZero();
    a.row(k).tail(m - 1).setZero();

    if (want_vectors) {
      auto qc = q.rightCols(m);
      Eigen::VectorXcd qv = qc * vv;
      qc.noalias() -= 2.0 * qv * vv.adjoint();
    }
  }

  // Phase scaling: T = D Tr D^H with real non-negative off-diagonals.
  std::vector<double> d(static_cast<std::size_t>(n)), e(static_cast<std::size_t>(n), 0.0);
  Eigen::VectorXcd phases = Eigen::VectorXcd::Ones(n);
  for (Eigen::Index i = 0; i < n; ++i) d[static_cast<std::size_t>(i)] = a(i, i).real();
  for (Eigen::Index i = 0; i + 1 < n; ++i) {
    const cplx sub = a(i + 1, i);
    const double mag = std::abs(sub);
    e[static_cast<std::size_t>(i)] = mag;
    phases(i + 1) = (mag > 0.0) ? phases(i) * sub / mag : phases(i);
  }

  if (want_vectors) {
    Eigen::MatrixXd z = Eigen::MatrixXd::Identity(n, n);
    detail::tridiagonal_ql(d, e, &z);
    out.vectors = (q * phases.asDiagonal()) * z.cast<cplx>();
  } else {
    detail::tridiagonal_ql<Eigen::MatrixXd>(d, e, nullptr);
  }
  out.values = Eigen::Map<Eigen::VectorXd>(d.data(), n);
  detail::sort_ascending(out, want_vectors);
  return out;
}

/**
 * @brief Cyclic Jacobi eigensolver for real symmetric or complex Hermitian input.
 *
 * Sweeps until every off-diagonal entry is below @p tol times the Frobenius
 * norm of the matrix.
 */
template <typename Scalar>
EigenDecomposition<Scalar> eigh_jacobi(
    const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& input, double tol = 1e-14,
    int max_sweeps = 100) {
  using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  const Eigen::Index n = input.rows();
  if (input.cols() != n) throw ModeError("eigh_jacobi: matrix not square");
  Mat a = input;
  Mat v = Mat::Identity(n, n);
  const double fro = std::max(a.norm(), std::numeric_limits<double>::min());

  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    double off = 0.0;
    for (Eigen::Index p = 0; p < n; ++p)
      for (Eigen::Index q = p + 1; q < n; ++q) off = std::max(off, std::abs(a(p, q)));
    if (off <= tol * fro) break;

    for (Eigen::Index p = 0; p < n; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        const double mag = std::abs(a(p, q));
        if (mag <= 1e-300) continue;
        if constexpr (std::is_same_v<Scalar, cplx>) {
          // Rotate the phase of a(p,q) onto the real axis: A <- U^H A U, U = diag(..1.., e^{-i phi} at q).
          const cplx ph = a(p, q) / mag;
          a.col(q) *= std::conj(ph);
          a.row(q) *= ph;
          v.col(q) *= std::conj(ph);
          a(p, q) = cplx(mag, 0.0);
          a(q, p) = cplx(mag, 0.0);
        }
        const double apq = std::real(a(p, q));
        const double app = std::real(a(p, p));
        const double aqq = std::real(a(q, q));
        const double theta = (aqq - app) / (2.0 * apq);
        const double t = std::copysign(1.0, theta) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (Eigen::Index r = 0; r < n; ++r) {
          if (r == p || r == q) continue;
          const Scalar arp = a(r, p);
          const Scalar arq = a(r, q);
          a(r, p) = c * arp - s * arq;
          a(r, q) = s * arp + c * arq;
          a(p, r) = detail::conj_of(a(r, p));
          a(q, r) = detail::conj_of(a(r, q));
        }
        a(p, p) = app - t * apq;
        a(q, q) = aqq + t * apq;
        a(p, q) = Scalar(0.0);
        a(q, p) = Scalar(0.0);
        for (Eigen::Index r = 0; r < n; ++r) {
          const Scalar vrp = v(r, p);
          const Scalar vrq = v(r, q);
          v(r, p) = c * vrp - s * vrq;
          v(r, q) = s * vrp + c * vrq;
        }
      }
    }
  }

  EigenDecomposition<Scalar> out;
  out.values.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) out.values(i) = std::real(a(i, i));
  out.vectors = v;
  detail::sort_ascending(out, true);
  return out;
}

/// Largest eigenvalue of a Hermitian matrix.
inline double max_eigenvalue(const Eigen::MatrixXcd& a) {
  if (a.rows() == 0) return 0.0;
  const auto r = eigh(a, false);
  return r.values(r.values.size() - 1);
}

struct DominantEigenpair {
  double value = 0.0;
  Eigen::VectorXcd vector;
  double relative_gap = 0.0;  // (l1 - l2) / |l1|; +inf for 1x1
  bool degenerate = false;
};

/// Largest eigenvalue with its phase-normalized eigenvector.
inline DominantEigenpair dominant_eigenpair(const Eigen::MatrixXcd& a, double degeneracy_tol = 1e-9) {
  DominantEigenpair out;
  const auto n = a.rows();
  if (n == 0) return out;
  const auto r = eigh(a, true);
  out.value = r.values(n - 1);
  out.vector = r.vectors.col(n - 1);
  if (n > 1) {
    const double scale = std::max(std::abs(out.value), std::numeric_limits<double>::min());
    out.relative_gap = (r.values(n - 1) - r.values(n - 2)) / scale;
    out.degenerate = out.relative_gap < degeneracy_tol;
  } else {
    out.relative_gap = std::numeric_limits<double>::infinity();
  }
  return out;
}

}  // namespace polglrt
