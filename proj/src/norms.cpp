// Copyright 2026 The dpfilter Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "dpf/norms.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

#include "dpf/lyapunov.hpp"

namespace dpf {

namespace {

constexpr int kGridPoints = 4096;
constexpr int kRefinePeaks = 5;
constexpr double kGolden = 0.61803398874989484820;
constexpr double kUnitCircleTol = 1e-10;

using Cplx = std::complex<double>;

double sigma_max_at(const StateSpaceSystem& sys, double omega) {
  const Eigen::MatrixXcd G = sys.eval(omega);
  if (G.size() == 0) return 0.0;
  if (G.rows() == 1 && G.cols() == 1) return std::abs(G(0, 0));
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(G);
  return svd.singularValues()(0);
}

// Golden-section maximization of sigma_max over [lo, hi].
double refine_peak(const StateSpaceSystem& sys, double lo, double hi) {
  double a = lo, b = hi;
  double x1 = b - kGolden * (b - a);
  double x2 = a + kGolden * (b - a);
  double f1 = sigma_max_at(sys, x1);
  double f2 = sigma_max_at(sys, x2);
  for (int it = 0; it < 200 && (b - a) > 1e-12; ++it) {
    if (f1 < f2) {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + kGolden * (b - a);
      f2 = sigma_max_at(sys, x2);
    } else {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - kGolden * (b - a);
      f1 = sigma_max_at(sys, x1);
    }
  }
  return std::max(f1, f2);
}

// Swaps diagonal entries k and k+1 of a complex upper-triangular T via a
// unitary similarity, accumulating the transform into U.
void swap_schur_entries(Eigen::MatrixXcd& T, Eigen::MatrixXcd& U, Eigen::Index k) {
  const Cplx t11 = T(k, k), t12 = T(k, k + 1), t22 = T(k + 1, k + 1);
  const double r = std::sqrt(std::norm(t12) + std::norm(t22 - t11));
  if (r < 1e-300) return;  // equal eigenvalues, nothing to move
  const Cplx alpha = t12 / r;
  const Cplx beta = (t22 - t11) / r;
  Eigen::Matrix2cd Q;
  Q << alpha, -std::conj(beta), beta, std::conj(alpha);
  T.block(0, k, k + 2, 2) = T.block(0, k, k + 2, 2) * Q;
  T.block(k, k, 2, T.cols() - k) = Q.adjoint() * T.block(k, k, 2, T.cols() - k);
  U.middleCols(k, 2) = U.middleCols(k, 2) * Q;
  T(k + 1, k) = Cplx(0, 0);
}

// Stein equation T X T^* - X + Q = 0 for upper-triangular Schur-stable T.
Eigen::MatrixXcd solve_stein_triangular(const Eigen::MatrixXcd& T, const Eigen::MatrixXcd& Q) {
  const Eigen::Index n = T.rows();
  Eigen::MatrixXcd X = Eigen::MatrixXcd::Zero(n, n);
  for (Eigen::Index i = n - 1; i >= 0; --i) {
    for (Eigen::Index j = n - 1; j >= 0; --j) {
      Cplx s(0, 0);
      for (Eigen::Index k = i; k < n; ++k)
        for (Eigen::Index l = j; l < n; ++l) {
          if (k == i && l == j) continue;
          s += T(i, k) * X(k, l) * std::conj(T(j, l));
        }
      X(i, j) = (Q(i, j) + s) / (1.0 - T(i, i) * std::conj(T(j, j)));
    }
  }
  return X;
}

// H2 norm squared for systems whose modes on or outside the unit circle do
// not reach the output (e.g. estimation-error systems driven by a convergent
// observer of an unstable plant). The unstable invariant subspace is moved
// to the leading Schur block; the output must vanish on it.
double h2_sq_via_schur_split(const StateSpaceSystem& sys) {
  const Eigen::Index n = sys.state_dim();
  Eigen::ComplexSchur<Eigen::MatrixXcd> schur(sys.A.cast<Cplx>());
  if (schur.info() != Eigen::Success)
    throw std::runtime_error("h2_norm: Schur factorization failed");
  Eigen::MatrixXcd T = schur.matrixT();
  Eigen::MatrixXcd U = schur.matrixU();

  // Bubble every non-stable eigenvalue to the top-left corner.
  const auto unstable = [](const Cplx& lam) { return std::abs(lam) >= 1.0 - kUnitCircleTol; };
  Eigen::Index split = 0;
  for (Eigen::Index pass = 0; pass < n; ++pass) {
    bool moved = false;
    for (Eigen::Index k = split; k + 1 < n; ++k) {
      if (!unstable(T(k, k)) && unstable(T(k + 1, k + 1))) {
        swap_schur_entries(T, U, k);
        moved = true;
      }
    }
    while (split < n && unstable(T(split, split))) ++split;
    if (!moved) break;
  }
  if (split == 0) {
    // Nothing unstable after all; fall through to the plain Gramian.
    const Eigen::MatrixXd P = solve_discrete_lyapunov(sys.A, sys.B * sys.B.transpose());
    return (sys.C * P * sys.C.transpose()).trace() + (sys.D * sys.D.transpose()).trace();
  }

  const Eigen::MatrixXcd CU = sys.C.cast<Cplx>() * U;
  const double cnorm = std::max(1.0, sys.C.norm());
  if (CU.leftCols(split).norm() > 1e-7 * cnorm)
    throw std::domain_error("h2_norm requires a Schur-stable system");

  const Eigen::Index ns = n - split;
  const Eigen::MatrixXcd Tss = T.bottomRightCorner(ns, ns);
  const Eigen::MatrixXcd Bs = (U.adjoint() * sys.B.cast<Cplx>()).bottomRows(ns);
  const Eigen::MatrixXcd Cs = CU.rightCols(ns);
  const Eigen::MatrixXcd X = solve_stein_triangular(Tss, Bs * Bs.adjoint());
  return (Cs * X * Cs.adjoint()).real().trace() + (sys.D * sys.D.transpose()).trace();
}

}  // namespace

double h2_norm_sq(const StateSpaceSystem& sys) {
  if (sys.state_dim() == 0) return (sys.D * sys.D.transpose()).trace();
  if (is_schur_stable(sys.A)) {
    const Eigen::MatrixXd P = solve_discrete_lyapunov(sys.A, sys.B * sys.B.transpose());
    return (sys.C * P * sys.C.transpose()).trace() + (sys.D * sys.D.transpose()).trace();
  }
  return h2_sq_via_schur_split(sys);
}

double h2_norm(const StateSpaceSystem& sys) { return std::sqrt(std::max(0.0, h2_norm_sq(sys))); }

double hinf_norm(const StateSpaceSystem& sys) {
  if (sys.state_dim() > 0 && !is_schur_stable(sys.A))
    throw std::domain_error("hinf_norm requires a Schur-stable system");
  if (sys.state_dim() == 0 || sys.B.cols() == 0 || sys.C.rows() == 0) {
    // Constant transfer function.
    if (sys.D.size() == 0) return 0.0;
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(sys.D);
    return svd.singularValues()(0);
  }

  const double pi = std::acos(-1.0);
  std::vector<double> vals(kGridPoints);
  for (int k = 0; k < kGridPoints; ++k) {
    vals[k] = sigma_max_at(sys, pi * k / (kGridPoints - 1));
  }

  // Collect local maxima (endpoints included), keep the largest few.
  std::vector<int> peaks;
  for (int k = 0; k < kGridPoints; ++k) {
    const bool up = (k == 0) || vals[k] >= vals[k - 1];
    const bool down = (k == kGridPoints - 1) || vals[k] >= vals[k + 1];
    if (up && down) peaks.push_back(k);
  }
  std::sort(peaks.begin(), peaks.end(), [&](int a, int b) { return vals[a] > vals[b]; });
  if (static_cast<int>(peaks.size()) > kRefinePeaks) peaks.resize(kRefinePeaks);

  double best = 0.0;
  for (int k : peaks) {
    const double lo = pi * std::max(0, k - 1) / (kGridPoints - 1);
    const double hi = pi * std::min(kGridPoints - 1, k + 1) / (kGridPoints - 1);
    best = std::max(best, refine_peak(sys, lo, hi));
  }
  return best;
}

}  // namespace dpf
