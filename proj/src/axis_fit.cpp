/**
 * vectionary
 *
 * This code is released under the
 * Apache License Version 2.0 http://www.apache.org/licenses/.
 */
#include "vectionary/axis_fit.hpp"

#include "json.hpp"

#include "vectionary/error.hpp"
#include "vectionary/io_util.hpp"

namespace vectionary {

using nlohmann::json;

DesignProblem make_design_problem(const RelevanceTable& table, const EmbeddingStore& store) {
  if (table.entries.empty()) {
    throw domain_error("EmptyIntersection", "relevance table has no rows");
  }
  DesignProblem problem;
  problem.foundation = table.foundation;
  problem.word_vectors.resize(static_cast<Eigen::Index>(table.entries.size()), store.dim());
  problem.observed.resize(static_cast<Eigen::Index>(table.entries.size()));
  for (std::size_t i = 0; i < table.entries.size(); ++i) {
    const auto& [word, s] = table.entries[i];
    auto idx = store.find(word);
    if (!idx) {
      throw domain_error("EmptyIntersection",
                         "relevance table word '" + word + "' not in embedding store");
    }
    problem.word_vectors.row(static_cast<Eigen::Index>(i)) = store.matrix().row(*idx);
    problem.observed(static_cast<Eigen::Index>(i)) = s;
  }
  return problem;
}

std::string to_string(SolverKind kind) {
  return kind == SolverKind::projected_gradient ? "projected_gradient" : "trs_oracle";
}

SolverKind solver_kind_from_string(std::string_view name) {
  if (name == "projected_gradient") return SolverKind::projected_gradient;
  if (name == "trs_oracle") return SolverKind::trs_oracle;
  throw config_error("UnknownSolver", "unknown solver: " + std::string(name));
}

double axis_objective(const DesignProblem& problem, const Eigen::Ref<const Eigen::VectorXd>& axis) {
  return (problem.word_vectors * axis - problem.observed).squaredNorm();
}

namespace {

// With s = 0 the objective is even in m, so the reported sign is arbitrary.
// Canonicalize: largest-magnitude coordinate positive.
bool apply_sign_convention(const DesignProblem& problem, Eigen::VectorXd& direction) {
  if (problem.observed.lpNorm<Eigen::Infinity>() != 0.0) return false;
  Eigen::Index imax = 0;
  direction.cwiseAbs().maxCoeff(&imax);
  if (direction(imax) < 0.0) {
    direction = -direction;
    return true;
  }
  return false;
}

MoralAxis finish_axis(const DesignProblem& problem, SphereLsqResult<double> run,
                      SolverKind solver, double tolerance) {
  MoralAxis axis;
  axis.foundation = problem.foundation;
  axis.direction = std::move(run.x);
  axis.sign_flipped = apply_sign_convention(problem, axis.direction);
  axis.objective = axis_objective(problem, axis.direction);
  axis.solver = solver;
  axis.iterations = run.iterations;
  axis.tolerance = tolerance;
  axis.converged = run.converged;
  axis.hard_case = run.hard_case;
  return axis;
}

}  // namespace

MoralAxis fit_axis(const DesignProblem& problem, const AxisFitOptions& options) {
  SphereLsqResult<double> run = minimize_on_sphere(problem.word_vectors, problem.observed, options);
  return finish_axis(problem, std::move(run), SolverKind::projected_gradient,
                     options.gradient_tol);
}

MoralAxis trs_oracle(const DesignProblem& problem) {
  SphereLsqResult<double> run = solve_on_sphere_exact(problem.word_vectors, problem.observed);
  return finish_axis(problem, std::move(run), SolverKind::trs_oracle, 0.0);
}

std::string axis_to_json(const MoralAxis& axis) {
  json j;
  j["foundation"] = axis.foundation.name;
  j["dim"] = axis.direction.size();
  json vec = json::array();
  for (Eigen::Index i = 0; i < axis.direction.size(); ++i) vec.push_back(axis.direction(i));
  j["vector"] = std::move(vec);
  j["objective"] = axis.objective;
  j["solver"] = to_string(axis.solver);
  j["iterations"] = axis.iterations;
  j["tolerance"] = axis.tolerance;
  j["converged"] = axis.converged;
  j["sign_flipped"] = axis.sign_flipped;
  j["hard_case"] = axis.hard_case;
  j["lexicon_coverage"] = {{"matched", axis.lexicon_matched}, {"dropped", axis.lexicon_dropped}};
  return j.dump(2) + "\n";
}

MoralAxis axis_from_json(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw format_error("MalformedAxisFile", std::string("axis JSON parse error: ") + e.what());
  }
  try {
    MoralAxis axis;
    axis.foundation = FoundationId(j.at("foundation").get<std::string>());
    auto dim = j.at("dim").get<Eigen::Index>();
    const auto& vec = j.at("vector");
    if (static_cast<Eigen::Index>(vec.size()) != dim) {
      throw format_error("MalformedAxisFile", "axis vector length disagrees with dim");
    }
    axis.direction.resize(dim);
    for (Eigen::Index i = 0; i < dim; ++i) axis.direction(i) = vec[static_cast<std::size_t>(i)].get<double>();
    axis.objective = j.at("objective").get<double>();
    axis.solver = solver_kind_from_string(j.at("solver").get<std::string>());
    axis.iterations = j.at("iterations").get<int>();
    axis.tolerance = j.at("tolerance").get<double>();
    axis.converged = j.value("converged", true);
    axis.sign_flipped = j.value("sign_flipped", false);
    axis.hard_case = j.value("hard_case", false);
    if (j.contains("lexicon_coverage")) {
      axis.lexicon_matched = j["lexicon_coverage"].value("matched", std::size_t{0});
      axis.lexicon_dropped = j["lexicon_coverage"].value("dropped", std::size_t{0});
    }
    double norm = axis.direction.norm();
    if (std::abs(norm - 1.0) > 1e-9) {
      throw domain_error("AxisNotUnit",
                         "axis vector norm " + format_double(norm) + " violates unit contract");
    }
    return axis;
  } catch (const json::exception& e) {
    throw format_error("MalformedAxisFile", std::string("axis JSON field error: ") + e.what());
  }
}

void save_axis(const MoralAxis& axis, const std::string& path) {
  write_file(path, axis_to_json(axis));
}

MoralAxis load_axis(const std::string& path) {
  return axis_from_json(read_file(path));
}

}  // namespace vectionary
