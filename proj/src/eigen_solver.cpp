#include "lograb/eigen_solver.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace lograb {

namespace {

// cyclic Jacobi; a is destroyed, v accumulates eigenvectors as columns
void jacobi_eigen(Eigen::MatrixXd& a, Eigen::MatrixXd& v) {
  const int n = static_cast<int>(a.rows());
  v = Eigen::MatrixXd::Identity(n, n);
  const double scale = std::max(1.0, a.norm());
  for (int sweep = 0; sweep < 60; ++sweep) {
    double off = 0.0;
    for (int p = 0; p < n - 1; ++p)
      for (int q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
    if (std::sqrt(2.0 * off) <= 1e-14 * scale) break;
    for (int p = 0; p < n - 1; ++p) {
      for (int q = p + 1; q < n; ++q) {
        double apq = a(p, q);
        if (std::abs(apq) <= 1e-300) continue;
        double theta = 0.5 * (a(q, q) - a(p, p)) / apq;
        double t = (theta >= 0 ? 1.0 : -1.0) /
                   (std::abs(theta) + std::sqrt(1.0 + theta * theta));
        double c = 1.0 / std::sqrt(1.0 + t * t);
        double s = t * c;
        double tau = s / (1.0 + c);
        a(p, p) -= t * apq;
        a(q, q) += t * apq;
        a(p, q) = a(q, p) = 0.0;
        for (int i = 0; i < n; ++i) {
          if (i == p || i == q) continue;
          double aip = a(i, p), aiq = a(i, q);
          a(i, p) = a(p, i) = aip - s * (aiq + tau * aip);
          a(i, q) = a(q, i) = aiq + s * (aip - tau * aiq);
        }
        for (int i = 0; i < n; ++i) {
          double vip = v(i, p), viq = v(i, q);
          v(i, p) = vip - s * (viq + tau * vip);
          v(i, q) = viq + s * (vip - tau * viq);
        }
      }
    }
  }
}

// Householder similarity reduction to tridiagonal; z accumulates the transform
void householder_tridiag(Eigen::MatrixXd& a, Eigen::MatrixXd& z, Eigen::VectorXd& d,
                         Eigen::VectorXd& e) {
  const int n = static_cast<int>(a.rows());
  z = Eigen::MatrixXd::Identity(n, n);
  for (int k = 0; k < n - 2; ++k) {
    const int len = n - k - 1;
    Eigen::VectorXd x = a.col(k).segment(k + 1, len);
    double xnorm = x.norm();
    if (xnorm <= 1e-300) continue;
    double alpha = x(0) >= 0 ? -xnorm : xnorm;
    Eigen::VectorXd u = x;
    u(0) -= alpha;
    double unorm = u.norm();
    if (unorm <= 1e-300) continue;
    u /= unorm;
    // two-sided application of H = I - 2uu^T on rows/cols k+1..n-1
    Eigen::MatrixXd arows = a.block(k + 1, 0, len, n);
    a.block(k + 1, 0, len, n) = arows - 2.0 * u * (u.transpose() * arows);
    Eigen::MatrixXd acols = a.block(0, k + 1, n, len);
    a.block(0, k + 1, n, len) = acols - 2.0 * (acols * u) * u.transpose();
    Eigen::MatrixXd zcols = z.block(0, k + 1, n, len);
    z.block(0, k + 1, n, len) = zcols - 2.0 * (zcols * u) * u.transpose();
  }
  d.resize(n);
  e = Eigen::VectorXd::Zero(n);
  for (int i = 0; i < n; ++i) d(i) = a(i, i);
  for (int i = 0; i + 1 < n; ++i) e(i) = a(i + 1, i);  // e(i) couples i and i+1
}

// implicit-shift QL on a tridiagonal, rotations accumulated into z's columns
void tridiag_ql(Eigen::VectorXd& d, Eigen::VectorXd& e, Eigen::MatrixXd& z) {
  const int n = static_cast<int>(d.size());
  const double eps = std::numeric_limits<double>::epsilon();
  for (int l = 0; l < n; ++l) {
    int iter = 0;
    while (true) {
      int m = l;
      while (m < n - 1) {
        double dd = std::abs(d(m)) + std::abs(d(m + 1));
        if (std::abs(e(m)) <= eps * dd) break;
        ++m;
      }
      if (m == l) break;
      if (++iter > 60)
        throw std::runtime_error("symmetric_eigendecompose: QL iteration failed to converge");
      double g = (d(l + 1) - d(l)) / (2.0 * e(l));
      double r = std::hypot(g, 1.0);
      g = d(m) - d(l) + e(l) / (g + std::copysign(r, g));
      double s = 1.0, c = 1.0, p = 0.0;
      int i = m - 1;
      bool underflow = false;
      for (; i >= l; --i) {
        double f = s * e(i);
        double b = c * e(i);
        r = std::hypot(f, g);
        e(i + 1) = r;  // i + 1 <= m <= n - 1: e's last slot is the block boundary
        if (r == 0.0) {
          d(i + 1) -= p;
          underflow = true;
          break;
        }
        s = f / r;
        c = g / r;
        g = d(i + 1) - p;
        r = (d(i) - g) * s + 2.0 * c * b;
        p = s * r;
        d(i + 1) = g + p;
        g = c * r - b;
        for (int k = 0; k < n; ++k) {
          f = z(k, i + 1);
          z(k, i + 1) = s * z(k, i) + c * f;
          z(k, i) = c * z(k, i) - s * f;
        }
      }
      if (underflow) {
        e(m) = 0.0;
        continue;
      }
      d(l) -= p;
      e(l) = g;
      e(m) = 0.0;  // reset the boundary coupling, not a live in-block entry
    }
  }
}

}  // namespace

void canonicalize_signs(Eigen::MatrixXd& vectors) {
  for (int c = 0; c < vectors.cols(); ++c) {
    int arg = 0;
    double best = std::abs(vectors(0, c));
    for (int r = 1; r < vectors.rows(); ++r) {
      double v = std::abs(vectors(r, c));
      if (v > best) {
        best = v;
        arg = r;
      }
    }
    if (vectors(arg, c) < 0) vectors.col(c) = -vectors.col(c);
  }
}

EigenSystem symmetric_eigendecompose(const Eigen::MatrixXd& m, int q_max) {
  if (m.rows() != m.cols())
    throw std::invalid_argument("symmetric_eigendecompose: matrix not square");
  const int n = static_cast<int>(m.rows());
  if (n == 0) throw std::invalid_argument("symmetric_eigendecompose: empty matrix");
  if (n > q_max)
    throw std::invalid_argument("symmetric_eigendecompose: dimension " + std::to_string(n) +
                                " exceeds q_max=" + std::to_string(q_max) +
                                " (core patch size bound)");
  double asym = (m - m.transpose()).cwiseAbs().maxCoeff();
  if (asym > 1e-10)
    throw std::invalid_argument("symmetric_eigendecompose: asymmetry " + std::to_string(asym) +
                                " exceeds 1e-10");

  Eigen::VectorXd d;
  Eigen::MatrixXd z;
  if (n == 1) {
    d = Eigen::VectorXd::Constant(1, m(0, 0));
    z = Eigen::MatrixXd::Identity(1, 1);
  } else if (n <= 64) {
    Eigen::MatrixXd a = 0.5 * (m + m.transpose());
    jacobi_eigen(a, z);
    d = a.diagonal();
  } else {
    Eigen::MatrixXd a = 0.5 * (m + m.transpose());
    Eigen::VectorXd e;
    householder_tridiag(a, z, d, e);
    tridiag_ql(d, e, z);
  }

  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&d](int a, int b) { return d(a) < d(b); });
  EigenSystem es;
  es.values.resize(n);
  es.vectors.resize(n, n);
  for (int i = 0; i < n; ++i) {
    es.values(i) = d(order[i]);
    es.vectors.col(i) = z.col(order[i]);
  }
  canonicalize_signs(es.vectors);
  return es;
}

}  // namespace lograb
