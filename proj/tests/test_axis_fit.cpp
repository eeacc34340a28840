/**
 * vectionary
 *
 * This code is released under the
 * Apache License Version 2.0 http://www.apache.org/licenses/.
 */
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <Eigen/Eigenvalues>

#include "support/test_support.hpp"
#include "vectionary/axis_fit.hpp"
#include "vectionary/error.hpp"

using namespace vectionary;
using testsupport::Gaussian;

namespace {

DesignProblem problem_from(Eigen::MatrixXd design, Eigen::VectorXd target) {
  DesignProblem p;
  p.word_vectors = std::move(design);
  p.observed = std::move(target);
  p.foundation = FoundationId("care_harm");
  return p;
}

DesignProblem random_problem(Gaussian& g, Eigen::Index n, Eigen::Index dim) {
  DesignProblem p = problem_from(testsupport::random_unit_rows(g, n, dim), Eigen::VectorXd(n));
  for (Eigen::Index i = 0; i < n; ++i) p.observed(i) = g.uniform() * 2.0 - 1.0;
  return p;
}

}  // namespace

TEST_CASE("analytical relevance is the dot product of unit vectors") {
  Eigen::VectorXd e1 = Eigen::Vector2d(1, 0);
  Eigen::VectorXd e2 = Eigen::Vector2d(0, 1);
  Eigen::VectorXd diag = Eigen::Vector2d(1, 1).normalized();
  CHECK(analytical_relevance(e1, e1) == doctest::Approx(1.0));
  CHECK(analytical_relevance(e1, e2) == doctest::Approx(0.0));
  CHECK(analytical_relevance(e1, diag) == doctest::Approx(0.70710678).epsilon(1e-8));
}

TEST_CASE("objective values match hand evaluation") {
  auto p1 = problem_from(Eigen::MatrixXd::Identity(1, 2).topRows(1), Eigen::VectorXd::Ones(1));
  CHECK(axis_objective(p1, Eigen::Vector2d(1, 0)) == doctest::Approx(0.0));
  CHECK(axis_objective(p1, Eigen::Vector2d(0, 1)) == doctest::Approx(1.0));

  auto p2 = problem_from(Eigen::MatrixXd::Identity(2, 2), Eigen::Vector2d(1, -1));
  Eigen::Vector2d m(1.0 / std::sqrt(2.0), -1.0 / std::sqrt(2.0));
  CHECK(axis_objective(p2, m) == doctest::Approx(0.17157287525381).epsilon(1e-10));
}

TEST_CASE("single consistent observation fits exactly") {
  Eigen::MatrixXd design(1, 2);
  design << 1, 0;
  auto problem = problem_from(design, Eigen::VectorXd::Ones(1));

  MoralAxis pg = fit_axis(problem);
  CHECK(pg.direction(0) == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(pg.objective == doctest::Approx(0.0));
  CHECK(pg.converged);

  MoralAxis oracle = trs_oracle(problem);
  CHECK(oracle.direction(0) == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(oracle.objective == doctest::Approx(0.0));
}

TEST_CASE("identity design with antisymmetric target: the closed form") {
  // Nearest unit vector to (1,-1) is its normalization; multiplier sqrt(2)-1.
  auto problem = problem_from(Eigen::MatrixXd::Identity(2, 2), Eigen::Vector2d(1, -1));
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);

  MoralAxis pg = fit_axis(problem);
  CHECK(pg.direction(0) == doctest::Approx(inv_sqrt2).epsilon(1e-8));
  CHECK(pg.direction(1) == doctest::Approx(-inv_sqrt2).epsilon(1e-8));

  MoralAxis oracle = trs_oracle(problem);
  CHECK(oracle.direction(0) == doctest::Approx(inv_sqrt2).epsilon(1e-10));
  CHECK(oracle.direction(1) == doctest::Approx(-inv_sqrt2).epsilon(1e-10));

  SphereLsqResult<double> raw = solve_on_sphere_exact<double>(problem.word_vectors, problem.observed);
  CHECK(raw.multiplier == doctest::Approx(std::sqrt(2.0) - 1.0).epsilon(1e-10));
}

TEST_CASE("zero target minimizes the Rayleigh quotient") {
  Gaussian g(31);
  Eigen::MatrixXd design = testsupport::random_unit_rows(g, 12, 2);
  auto problem = problem_from(design, Eigen::VectorXd::Zero(12));

  MoralAxis oracle = trs_oracle(problem);

  // Independent route 1: dense grid search over the unit circle.
  Eigen::Vector2d grid = testsupport::circle_grid_search(design, Eigen::VectorXd::Zero(12));
  double f_grid = (design * grid).squaredNorm();
  CHECK(oracle.objective <= f_grid + 1e-9);

  // Independent route 2: the bottom eigenvector of W^T W.
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(design.transpose() * design);
  CHECK(oracle.objective == doctest::Approx(eig.eigenvalues()(0)).epsilon(1e-10));
  double align = std::abs(oracle.direction.dot(eig.eigenvectors().col(0)));
  CHECK(align == doctest::Approx(1.0).epsilon(1e-8));

  // Sign convention: the reported axis has its largest coordinate positive.
  Eigen::Index imax;
  oracle.direction.cwiseAbs().maxCoeff(&imax);
  CHECK(oracle.direction(imax) > 0.0);

  MoralAxis pg = fit_axis(problem);
  CHECK(pg.objective <= oracle.objective + 1e-6 * (1.0 + oracle.objective));
}

TEST_CASE("projected gradient matches the oracle on 200 random instances") {
  Gaussian g(32);
  for (int trial = 0; trial < 200; ++trial) {
    Eigen::Index dim = 2 + static_cast<Eigen::Index>(g.below(9));   // <= 10
    Eigen::Index n = 1 + static_cast<Eigen::Index>(g.below(50));    // <= 50
    DesignProblem problem = random_problem(g, n, dim);

    MoralAxis pg = fit_axis(problem);
    MoralAxis oracle = trs_oracle(problem);

    CHECK(std::abs(pg.direction.norm() - 1.0) < 1e-9);
    CHECK(std::abs(oracle.direction.norm() - 1.0) < 1e-9);
    CHECK(pg.objective <= oracle.objective + 1e-6 * (1.0 + oracle.objective));
    // The oracle is globally optimal, so it can never lose either.
    CHECK(oracle.objective <= pg.objective + 1e-9 * (1.0 + pg.objective));
  }
}

TEST_CASE("returned axes are first-order stationary") {
  // The solver stops on gradient norm <= tol_grad or on relative objective
  // decrease < tol_obj. Under the decrease rule with exact Cauchy steps the
  // residual gradient satisfies ||rg||^2 <= 4 L tol_obj max(1, f) with
  // L = 2 ||W||_F^2 bounding the Hessian norm; assert that implied level.
  Gaussian g(33);
  AxisFitOptions options;
  for (int trial = 0; trial < 50; ++trial) {
    DesignProblem problem = random_problem(g, 30, 6);
    MoralAxis axis = fit_axis(problem, options);
    Eigen::VectorXd rg =
        riemannian_gradient<double>(problem.word_vectors, problem.observed, axis.direction);
    double hessian_bound = 2.0 * problem.word_vectors.squaredNorm();
    double decrease_stop_level = std::sqrt(4.0 * hessian_bound * options.rel_objective_tol *
                                           std::max(1.0, axis.objective));
    CHECK(rg.norm() <= std::max(options.gradient_tol, decrease_stop_level) * 2.0);
  }
}

TEST_CASE("analytic gradient agrees with central differences") {
  Gaussian g(34);
  const double h = 1e-5;
  for (int trial = 0; trial < 10; ++trial) {
    DesignProblem problem = random_problem(g, 25, 5);
    Eigen::VectorXd x = testsupport::random_unit_vector(g, 5);
    Eigen::VectorXd analytic =
        sphere_lsq_gradient<double>(problem.word_vectors, problem.observed, x);
    for (Eigen::Index i = 0; i < 5; ++i) {
      Eigen::VectorXd xp = x, xm = x;
      xp(i) += h;
      xm(i) -= h;
      double fd = (axis_objective(problem, xp) - axis_objective(problem, xm)) / (2.0 * h);
      CHECK(analytic(i) == doctest::Approx(fd).epsilon(1e-4));
    }
  }
}

TEST_CASE("rotation equivariance") {
  Gaussian g(35);
  for (int trial = 0; trial < 10; ++trial) {
    DesignProblem problem = random_problem(g, 40, 5);
    Eigen::MatrixXd rotation = testsupport::random_orthogonal(g, 5);

    DesignProblem rotated = problem;
    rotated.word_vectors = problem.word_vectors * rotation.transpose();

    MoralAxis base = trs_oracle(problem);
    MoralAxis rot = trs_oracle(rotated);
    double err = std::min((rot.direction - rotation * base.direction).norm(),
                          (rot.direction + rotation * base.direction).norm());
    CHECK(err < 1e-6);

    MoralAxis base_pg = fit_axis(problem);
    MoralAxis rot_pg = fit_axis(rotated);
    double err_pg = std::min((rot_pg.direction - rotation * base_pg.direction).norm(),
                             (rot_pg.direction + rotation * base_pg.direction).norm());
    CHECK(err_pg < 1e-5);
  }
}

TEST_CASE("degenerate problems are rejected") {
  DesignProblem empty;
  empty.word_vectors.resize(0, 3);
  empty.observed.resize(0);
  CHECK_THROWS_AS(fit_axis(empty), Error);

  Eigen::MatrixXd design(1, 2);
  design << 1, 0;
  auto nonfinite = problem_from(design, Eigen::VectorXd::Constant(1, std::nan("")));
  try {
    fit_axis(nonfinite);
    FAIL("expected DegenerateProblem");
  } catch (const Error& e) {
    CHECK(e.code() == "DegenerateProblem");
  }
}

TEST_CASE("oracle dimension guard") {
  Eigen::MatrixXd design = Eigen::MatrixXd::Identity(2, 2);
  auto problem = problem_from(design, Eigen::Vector2d(1, 0));
  CHECK_NOTHROW(trs_oracle(problem));
  try {
    solve_on_sphere_exact<double>(Eigen::MatrixXd::Identity(3, 3), Eigen::Vector3d(1, 0, 0), 2);
    FAIL("expected DimGuardExceeded");
  } catch (const Error& e) {
    CHECK(e.code() == "DimGuardExceeded");
  }
}

TEST_CASE("hard case is flagged as non-unique") {
  // W = diag(2, 1) rows, s chosen so W^T s has no bottom-eigenvector
  // component and the interior solution falls inside the ball.
  Eigen::MatrixXd design(2, 2);
  design << 2, 0, 0, 1;
  Eigen::VectorXd target(2);
  target << 1.0, 0.0;  // b = (2, 0): bottom eigenvector is e2, beta_2 = 0
  // x(l) = (2/(4+l), 0); at l = -1 (the pole) norm = 2/3 < 1 -> hard case
  SphereLsqResult<double> run = solve_on_sphere_exact<double>(design, target);
  CHECK(run.hard_case);
  CHECK(run.multiplier == doctest::Approx(-1.0));
  CHECK(std::abs(run.x.norm() - 1.0) < 1e-12);
  CHECK(run.x(0) == doctest::Approx(2.0 / 3.0));
  CHECK(std::abs(run.x(1)) == doctest::Approx(std::sqrt(1.0 - 4.0 / 9.0)));

  // Certify against the dense circle search.
  Eigen::Vector2d grid = testsupport::circle_grid_search(design, target);
  double f_grid = (design * grid - target).squaredNorm();
  CHECK(run.objective <= f_grid + 1e-9);
}

TEST_CASE("axis files reload bit-exactly") {
  Gaussian g(36);
  DesignProblem problem = random_problem(g, 20, 7);
  MoralAxis axis = fit_axis(problem);
  axis.lexicon_matched = 20;
  axis.lexicon_dropped = 3;

  auto dir = testsupport::make_temp_dir("axis");
  save_axis(axis, (dir / "axis.json").string());
  MoralAxis loaded = load_axis((dir / "axis.json").string());

  CHECK(loaded.foundation == axis.foundation);
  CHECK(loaded.objective == axis.objective);  // bit-exact
  CHECK(loaded.iterations == axis.iterations);
  CHECK(loaded.lexicon_matched == 20);
  REQUIRE(loaded.direction.size() == axis.direction.size());
  for (Eigen::Index i = 0; i < axis.direction.size(); ++i) {
    CHECK(loaded.direction(i) == axis.direction(i));  // bit-exact
  }

  // Round-trip through JSON twice is a fixed point.
  CHECK(axis_to_json(loaded) == axis_to_json(axis));
}

TEST_CASE("a planted axis is recovered at moderate scale") {
  Gaussian g(37);
  const Eigen::Index n = 400, dim = 30;
  Eigen::MatrixXd design = testsupport::random_unit_rows(g, n, dim);
  Eigen::VectorXd truth = testsupport::random_unit_vector(g, dim);
  Eigen::VectorXd target = design * truth;
  for (Eigen::Index i = 0; i < n; ++i) target(i) += 0.05 * g();

  auto problem = problem_from(design, target);
  MoralAxis pg = fit_axis(problem);
  CHECK(std::abs(pg.direction.dot(truth)) > 0.99);

  MoralAxis oracle = trs_oracle(problem);
  CHECK(pg.objective <= oracle.objective + 1e-6 * (1.0 + oracle.objective));
}
