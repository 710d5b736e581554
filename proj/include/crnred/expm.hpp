#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>
#include <string>

#include "crnred/laplacian.hpp"

namespace crnred {

namespace detail {

inline Eigen::MatrixXd pade_exp(const Eigen::MatrixXd& A,
                                const double* b, int m) {
  const auto n = A.rows();
  Eigen::MatrixXd A2 = A * A;
  Eigen::MatrixXd U = Eigen::MatrixXd::Zero(n, n);
  Eigen::MatrixXd V = Eigen::MatrixXd::Zero(n, n);
  Eigen::MatrixXd P = Eigen::MatrixXd::Identity(n, n);  // A^{2k}
  for (int k = 0; 2 * k + 1 <= m; ++k) {
    U += b[2 * k + 1] * P;
    V += b[2 * k] * P;
    if (2 * (k + 1) <= m) P = P * A2;
  }
  U = A * U;
  return (V - U).partialPivLu().solve(V + U);
}

}  // namespace detail

// Dense matrix exponential by scaling and squaring with Pade approximants of
// degree 3..13, degree chosen from the 1-norm.
inline Eigen::MatrixXd expm(const Eigen::MatrixXd& A) {
  static const double b3[] = {120, 60, 12, 1};
  static const double b5[] = {30240, 15120, 3360, 420, 30, 1};
  static const double b7[] = {17297280, 8648640, 1995840, 277200,
                              25200,    1512,    56,      1};
  static const double b9[] = {17643225600., 8821612800., 2075673600.,
                              302702400.,   30270240.,   2162160.,
                              110880.,      3960.,       90.,
                              1.};
  static const double b13[] = {64764752532480000., 32382376266240000.,
                               7771770303897600.,  1187353796428800.,
                               129060195264000.,   10559470521600.,
                               670442572800.,      33522128640.,
                               1323241920.,        40840800.,
                               960960.,            16380.,
                               182.,               1.};
  const double theta3 = 1.495585217958292e-2;
  const double theta5 = 2.539398330063230e-1;
  const double theta7 = 9.504178996162932e-1;
  const double theta9 = 2.097847961257068e0;
  const double theta13 = 5.371920351148152e0;

  double norm = A.cwiseAbs().colwise().sum().maxCoeff();
  if (!std::isfinite(norm))
    throw std::overflow_error("matrix exponential: non-finite input");
  if (norm <= theta3) return detail::pade_exp(A, b3, 3);
  if (norm <= theta5) return detail::pade_exp(A, b5, 5);
  if (norm <= theta7) return detail::pade_exp(A, b7, 7);
  if (norm <= theta9) return detail::pade_exp(A, b9, 9);
  int s = 0;
  if (norm > theta13)
    s = static_cast<int>(std::ceil(std::log2(norm / theta13)));
  if (s > 64)
    throw std::overflow_error(
        "matrix exponential overflow: 1-norm " + std::to_string(norm) +
        " needs " + std::to_string(s) + " squarings");
  Eigen::MatrixXd E =
      detail::pade_exp(A / std::pow(2.0, s), b13, 13);
  for (int k = 0; k < s; ++k) E = E * E;
  return E;
}

// Entries in [-tol, 0) are floating-point noise around zero; clamp them.
inline void clamp_small_negatives(Eigen::MatrixXd& M, double tol = 1e-12) {
  for (Eigen::Index i = 0; i < M.rows(); ++i)
    for (Eigen::Index j = 0; j < M.cols(); ++j)
      if (M(i, j) < 0 && M(i, j) >= -tol) M(i, j) = 0;
}

// exp(t L^N) with the probabilistic-noise clamp applied.
inline Eigen::MatrixXd expm(const LaplacianCore& core, double t) {
  if (t < 0) throw std::domain_error("matrix exponential: negative time");
  Eigen::MatrixXd E = expm(Eigen::MatrixXd(t * core.M));
  clamp_small_negatives(E);
  return E;
}

}  // namespace crnred
