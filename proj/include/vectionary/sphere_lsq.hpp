/**
 * vectionary
 *
 * This code is released under the
 * Apache License Version 2.0 http://www.apache.org/licenses/.
 */
#pragma once

#include <Eigen/Core>
#include <Eigen/Eigenvalues>

#include <cmath>
#include <limits>
#include <vector>

#include "vectionary/error.hpp"

/*
 * Least squares on the unit sphere:
 *
 *     minimize  f(x) = || W x - s ||^2    subject to  || x || = 1.
 *
 * Two independent solvers are provided.
 *
 *   minimize_on_sphere    Projected gradient with Armijo backtracking and
 *                         renormalization retraction. Deterministic: the
 *                         start set is { +-normalize(W^T s) } (falling back
 *                         to basis vectors when W^T s = 0), never random.
 *
 *   solve_on_sphere_exact Closed-form global optimum via the trust-region
 *                         subproblem machinery. With H = W^T W = Q L Q^T and
 *                         b = W^T s, every stationary point has the form
 *                         x(l) = (H + l I)^{-1} b. The global minimizer is
 *                         the one with l >= -lambda_min(H), found by solving
 *                         the secular equation ||x(l)|| = 1 on that ray. When
 *                         b has no component on the bottom eigenspace (the
 *                         hard case) and the interior norm falls short of 1,
 *                         the deficit is made up with a bottom eigenvector.
 *
 * The exact solver certifies the iterative one in tests; neither calls the
 * other.
 */

namespace vectionary {

template <typename Scalar>
using DenseMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using DenseVector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
struct SphereLsqOptions {
  int max_iterations = 10000;
  Scalar rel_objective_tol = Scalar(1e-10);  // stop on relative decrease below this
  Scalar gradient_tol = Scalar(1e-8);        // or on Riemannian gradient norm below this
  Scalar armijo_slope = Scalar(1e-4);
  Scalar backtrack = Scalar(0.5);
  int max_backtracks = 60;
  int extra_basis_starts = 0;  // deterministic e_k starts beyond the +-W^T s pair
};

template <typename Scalar>
struct SphereLsqResult {
  DenseVector<Scalar> x;
  Scalar objective = Scalar(0);
  int iterations = 0;
  bool converged = false;
  bool hard_case = false;     // exact solver: optimum was not unique
  Scalar multiplier = Scalar(0);  // exact solver: the optimal l
};

template <typename DerivedW, typename DerivedS, typename DerivedX>
typename DerivedX::Scalar sphere_lsq_objective(const Eigen::MatrixBase<DerivedW>& design,
                                               const Eigen::MatrixBase<DerivedS>& target,
                                               const Eigen::MatrixBase<DerivedX>& x) {
  return (design * x - target).squaredNorm();
}

/// Euclidean gradient of the unconstrained objective, 2 W^T (W x - s).
template <typename Scalar>
DenseVector<Scalar> sphere_lsq_gradient(const DenseMatrix<Scalar>& design,
                                        const DenseVector<Scalar>& target,
                                        const DenseVector<Scalar>& x) {
  return Scalar(2) * (design.transpose() * (design * x - target));
}

/// Tangential component of the gradient at a point on the sphere.
template <typename Scalar>
DenseVector<Scalar> riemannian_gradient(const DenseMatrix<Scalar>& design,
                                        const DenseVector<Scalar>& target,
                                        const DenseVector<Scalar>& x) {
  DenseVector<Scalar> g = sphere_lsq_gradient(design, target, x);
  return g - x.dot(g) * x;
}

namespace detail {

/// A fixed, seed-pinned direction (Box-Muller over splitmix64, constant
/// seed). Generically positioned with respect to any problem data, yet the
/// same vector on every call: fitting stays free of run-time randomness.
template <typename Scalar>
DenseVector<Scalar> pinned_generic_direction(Eigen::Index dim) {
  std::uint64_t state = 0x9f42d1c35b8a6e07ULL;
  auto next_unit = [&state]() {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    z ^= z >> 31;
    return static_cast<double>(z >> 11) * 0x1.0p-53;
  };
  DenseVector<Scalar> v(dim);
  for (Eigen::Index i = 0; i < dim; ++i) {
    double u1 = 0.0;
    do {
      u1 = next_unit();
    } while (u1 <= 0.0);
    double u2 = next_unit();
    v(i) = static_cast<Scalar>(std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2));
  }
  Scalar norm = v.norm();
  if (norm > Scalar(0)) return v / norm;
  return DenseVector<Scalar>::Unit(dim, 0);
}

template <typename Scalar>
SphereLsqResult<Scalar> descend_from(const DenseMatrix<Scalar>& design,
                                     const DenseVector<Scalar>& target,
                                     DenseVector<Scalar> x,
                                     const SphereLsqOptions<Scalar>& options) {
  SphereLsqResult<Scalar> result;
  Scalar f = sphere_lsq_objective(design, target, x);
  DenseVector<Scalar> trial(x.size());

  int iter = 0;
  bool converged = false;
  for (; iter < options.max_iterations; ++iter) {
    DenseVector<Scalar> residual = design * x - target;
    DenseVector<Scalar> g = Scalar(2) * (design.transpose() * residual);
    DenseVector<Scalar> rg = g - x.dot(g) * x;
    Scalar rg_norm = rg.norm();
    if (rg_norm <= options.gradient_tol) {
      converged = true;
      break;
    }

    // Exact minimizing step for the ambient quadratic along -rg; the
    // retraction then pulls the trial point back to the sphere.
    DenseVector<Scalar> w_dir = design * rg;
    Scalar curvature = Scalar(2) * w_dir.squaredNorm();
    Scalar step = curvature > Scalar(0) ? rg.squaredNorm() / curvature : Scalar(1);

    Scalar f_new = f;
    bool accepted = false;
    for (int bt = 0; bt < options.max_backtracks; ++bt) {
      trial = (x - step * rg).normalized();
      f_new = sphere_lsq_objective(design, target, trial);
      if (f_new <= f - options.armijo_slope * step * rg_norm * rg_norm) {
        accepted = true;
        break;
      }
      step *= options.backtrack;
    }
    if (!accepted) {
      // Line search exhausted: the iterate is numerically stationary.
      converged = true;
      break;
    }

    Scalar decrease = f - f_new;
    x = trial;
    f = f_new;
    if (decrease <= options.rel_objective_tol * std::max(Scalar(1), f)) {
      converged = true;
      ++iter;
      break;
    }
  }

  result.x = std::move(x);
  result.objective = f;
  result.iterations = iter;
  result.converged = converged;
  return result;
}

}  // namespace detail

/**
 * Projected gradient descent over the unit sphere, multistart.
 *
 * Three deterministic starts cover the known failure modes of plain descent
 * on this problem class:
 *   +-normalize(W^T s)  the two candidate basins around the least-squares
 *                       direction (the sphere-restricted quadratic can have
 *                       one non-global local minimizer);
 *   a pinned generic    escapes degenerate geometry: W^T s can itself be a
 *   direction           stationary point (an eigenvector of W^T W), and for
 *                       N < dim every iterate from a range(W^T) start stays
 *                       inside range(W^T), which cannot reach hard-case
 *                       optima that need a null-space component.
 * The best final objective wins.
 */
template <typename Scalar>
SphereLsqResult<Scalar> minimize_on_sphere(const DenseMatrix<Scalar>& design,
                                           const DenseVector<Scalar>& target,
                                           const SphereLsqOptions<Scalar>& options = {}) {
  if (design.rows() < 1 || design.cols() < 1) {
    throw domain_error("DegenerateProblem", "design matrix must be at least 1 x 1");
  }
  if (design.rows() != target.size()) {
    throw domain_error("DegenerateProblem", "design rows and target length differ");
  }
  if (!design.allFinite() || !target.allFinite()) {
    throw domain_error("DegenerateProblem", "nonfinite entries in problem data");
  }

  const Eigen::Index dim = design.cols();
  std::vector<DenseVector<Scalar>> starts;
  DenseVector<Scalar> lead = design.transpose() * target;
  Scalar lead_norm = lead.norm();
  if (lead_norm > Scalar(0)) {
    starts.push_back(lead / lead_norm);
    starts.push_back(-lead / lead_norm);
  }
  starts.push_back(detail::pinned_generic_direction<Scalar>(dim));
  for (int k = 0; k < options.extra_basis_starts && k < dim; ++k) {
    starts.push_back(DenseVector<Scalar>::Unit(dim, k));
  }

  SphereLsqResult<Scalar> best;
  bool have_best = false;
  for (const auto& x0 : starts) {
    SphereLsqResult<Scalar> run = detail::descend_from(design, target, x0, options);
    if (!have_best || run.objective < best.objective) {
      best = std::move(run);
      have_best = true;
    }
  }
  return best;
}

/**
 * Global optimum through the secular equation.
 *
 * phi(l) = sum_i beta_i^2 / (lambda_i + l)^2 with beta = Q^T b is strictly
 * decreasing on (-lambda_min, inf), so bisection on phi(l) = 1 is safe. The
 * guard keeps the dense eigendecomposition tractable.
 */
template <typename Scalar>
SphereLsqResult<Scalar> solve_on_sphere_exact(const DenseMatrix<Scalar>& design,
                                              const DenseVector<Scalar>& target,
                                              Eigen::Index max_dim = 2000) {
  if (design.rows() < 1 || design.cols() < 1) {
    throw domain_error("DegenerateProblem", "design matrix must be at least 1 x 1");
  }
  if (design.rows() != target.size()) {
    throw domain_error("DegenerateProblem", "design rows and target length differ");
  }
  if (design.cols() > max_dim) {
    throw numeric_error("DimGuardExceeded",
                        "exact solver limited to dim <= " + std::to_string(max_dim));
  }

  const Eigen::Index dim = design.cols();
  DenseMatrix<Scalar> hessian = design.transpose() * design;
  DenseVector<Scalar> b = design.transpose() * target;

  Eigen::SelfAdjointEigenSolver<DenseMatrix<Scalar>> eig(hessian);
  if (eig.info() != Eigen::Success) {
    throw numeric_error("EigenFailure", "eigendecomposition did not converge");
  }
  const DenseVector<Scalar>& lambda = eig.eigenvalues();  // ascending
  const DenseMatrix<Scalar>& q = eig.eigenvectors();
  DenseVector<Scalar> beta = q.transpose() * b;

  const Scalar lambda_min = lambda(0);
  const Scalar scale = std::max(Scalar(1), beta.norm());
  const Scalar cluster_tol =
      std::max(std::abs(lambda_min), Scalar(1)) * Scalar(1e3) * std::numeric_limits<Scalar>::epsilon();

  auto norm2_at = [&](Scalar l) {
    Scalar acc = Scalar(0);
    for (Eigen::Index i = 0; i < dim; ++i) {
      Scalar d = lambda(i) + l;
      Scalar term = beta(i) / d;
      acc += term * term;
    }
    return acc;
  };

  // Interior norm with the multiplier pinned at -lambda_min, bottom
  // eigenspace excluded. Finite by construction.
  Scalar perp_norm2 = Scalar(0);
  for (Eigen::Index i = 0; i < dim; ++i) {
    if (lambda(i) - lambda_min <= cluster_tol) continue;
    Scalar term = beta(i) / (lambda(i) - lambda_min);
    perp_norm2 += term * term;
  }
  bool bottom_coupled = false;
  for (Eigen::Index i = 0; i < dim; ++i) {
    if (lambda(i) - lambda_min <= cluster_tol && std::abs(beta(i)) > scale * Scalar(1e-14)) {
      bottom_coupled = true;
      break;
    }
  }

  SphereLsqResult<Scalar> result;
  DenseVector<Scalar> coeffs(dim);

  auto build_hard_case = [&]() {
    // Pad with a bottom eigenvector to reach the sphere.
    Scalar tau = std::sqrt(std::max(Scalar(0), Scalar(1) - perp_norm2));
    for (Eigen::Index i = 0; i < dim; ++i) {
      if (lambda(i) - lambda_min <= cluster_tol) {
        coeffs(i) = Scalar(0);
      } else {
        coeffs(i) = beta(i) / (lambda(i) - lambda_min);
      }
    }
    coeffs(0) += tau;  // eigenvalues ascend, so index 0 is a bottom eigenvector
    result.x = q * coeffs;
    result.multiplier = -lambda_min;
    result.hard_case = tau > Scalar(1e-9);
    result.iterations = 0;
  };

  if (!bottom_coupled && perp_norm2 <= Scalar(1)) {
    build_hard_case();
  } else {
    // Regular case: bracket the root of ||x(l)||^2 = 1 on (-lambda_min, inf).
    // norm2 blows up toward the pole whenever beta touches the bottom
    // eigenspace, so halving the offset finds a left bracket quickly.
    Scalar width = std::max(cluster_tol, Scalar(1e-30));
    bool bracketed = true;
    while (norm2_at(-lambda_min + width) < Scalar(1)) {
      width *= Scalar(0.5);
      if (width < std::numeric_limits<Scalar>::min()) {
        bracketed = false;  // the crossing sits numerically at the pole
        break;
      }
    }
    if (!bracketed) {
      build_hard_case();
    } else {
      Scalar lo = -lambda_min + width;
      Scalar hi = -lambda_min + scale + Scalar(1);
      while (norm2_at(hi) > Scalar(1)) hi = -lambda_min + (hi + lambda_min) * Scalar(2);

      int iterations = 0;
      for (; iterations < 200; ++iterations) {
        Scalar mid = (lo + hi) / Scalar(2);
        if (mid == lo || mid == hi) break;
        if (norm2_at(mid) > Scalar(1)) {
          lo = mid;
        } else {
          hi = mid;
        }
      }
      Scalar l_star = (lo + hi) / Scalar(2);
      for (Eigen::Index i = 0; i < dim; ++i) {
        coeffs(i) = beta(i) / (lambda(i) + l_star);
      }
      result.x = q * coeffs;
      result.multiplier = l_star;
      result.hard_case = false;
      result.iterations = iterations;
    }
  }

  // The coefficient solve is accurate to ~1e-14 in norm; renormalize so the
  // feasibility contract ||x|| = 1 +- 1e-9 holds exactly as stated.
  result.x.normalize();
  result.objective = sphere_lsq_objective(design, target, result.x);
  result.converged = true;
  return result;
}

}  // namespace vectionary
