/**
 * vectionary
 *
 * This code is released under the
 * Apache License Version 2.0 http://www.apache.org/licenses/.
 */
#pragma once

#include <Eigen/Core>

#include <string>

#include "vectionary/lexicon.hpp"
#include "vectionary/sphere_lsq.hpp"

namespace vectionary {

/// Pairing of unit word vectors (rows) with observed relevances.
struct DesignProblem {
  Eigen::MatrixXd word_vectors;      // N x dim, rows unit-norm
  Eigen::VectorXd observed;          // length N, entries in [-1, 1]
  FoundationId foundation;

  Eigen::Index size() const { return word_vectors.rows(); }
  Eigen::Index dim() const { return word_vectors.cols(); }
};

/// Gather embedding rows for a relevance table into a fit-ready problem.
DesignProblem make_design_problem(const RelevanceTable& table, const EmbeddingStore& store);

enum class SolverKind { projected_gradient, trs_oracle };

std::string to_string(SolverKind kind);
SolverKind solver_kind_from_string(std::string_view name);

/// A fitted foundation axis plus solver metadata.
struct MoralAxis {
  FoundationId foundation;
  Eigen::VectorXd direction;   // unit norm
  double objective = 0.0;      // sum of squared residuals at direction
  SolverKind solver = SolverKind::projected_gradient;
  int iterations = 0;
  double tolerance = 0.0;
  bool converged = true;
  bool sign_flipped = false;   // symmetric problem, reported sign canonicalized
  bool hard_case = false;      // oracle found a non-unique optimum
  std::size_t lexicon_matched = 0;
  std::size_t lexicon_dropped = 0;
};

using AxisFitOptions = SphereLsqOptions<double>;

/// cos w . m for unit vectors; Eq-level primitive used by fitting and scoring.
inline double analytical_relevance(const Eigen::Ref<const Eigen::VectorXd>& word,
                                   const Eigen::Ref<const Eigen::VectorXd>& axis) {
  return word.dot(axis);
}

double axis_objective(const DesignProblem& problem, const Eigen::Ref<const Eigen::VectorXd>& axis);

/// Iterative fit (projected gradient). NotConverged is reported through the
/// converged flag, not an exception: the best iterate is still returned.
MoralAxis fit_axis(const DesignProblem& problem, const AxisFitOptions& options = {});

/// Certifying global solver (secular equation). dim is guarded at 2000.
MoralAxis trs_oracle(const DesignProblem& problem);

/// JSON axis file: {foundation, dim, vector, objective, solver, iterations,
/// tolerance, converged, sign_flipped, hard_case, lexicon_coverage}.
/// Doubles are written in shortest round-trip form, so reload is bit-exact.
std::string axis_to_json(const MoralAxis& axis);
MoralAxis axis_from_json(const std::string& json_text);

void save_axis(const MoralAxis& axis, const std::string& path);
MoralAxis load_axis(const std::string& path);

}  // namespace vectionary
