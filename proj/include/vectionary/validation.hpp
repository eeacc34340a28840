/**
 * vectionary
 *
 * This code is released under the
 * Apache License Version 2.0 http://www.apache.org/licenses/.
 */
#pragma once

#include <cstdint>
#include <istream>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace vectionary {

enum class TieRule { by_id, stable };

std::string to_string(TieRule rule);
TieRule tie_rule_from_string(std::string_view name);

/// Ranked document ids, best first, ties already broken.
struct RankedList {
  std::vector<std::string> items;
  std::string source;
  TieRule tie_rule = TieRule::by_id;
};

/// Sort descending by score. by_id breaks ties lexicographically; stable
/// keeps input order. Throws DuplicateId on repeated ids.
RankedList rank_by_score(std::vector<std::pair<std::string, double>> scores, TieRule tie_rule,
                         std::string source = {});

/// Benchmark aggregation: virtue^2 + vice^2, both on the 0-100 scale.
double cs_combine(double virtue, double vice);

/// Rank-biased overlap parameterization. p is the persistence parameter;
/// construction from (weight, depth) solves the prefix-weight equation.
struct RboParams {
  double p = 0.9;
  int depth = 1;
  std::optional<double> weight_target;

  static RboParams from_p(double p, int depth);
  static RboParams from_weight(double weight, int depth);
};

/*
 * Extrapolated rank-biased overlap truncated at depth d:
 *
 *   RBO_ext = (X_d / d) p^d + ((1-p)/p) * sum_{k=1..d} (X_k / k) p^k
 *
 * where X_k is the size of the intersection of the two depth-k prefixes.
 * The first term carries the unseen tail at the prefix agreement level
 * instead of assuming total disagreement.
 */
double rbo(const RankedList& a, const RankedList& b, const RboParams& params,
           bool extrapolated = true);

/// Weight of the top-d prefix under persistence p (decreasing in p):
///   W(p,d) = 1 - p^{d-1} + ((1-p)/p) d (ln 1/(1-p) - sum_{i=1..d-1} p^i/i)
double rbo_prefix_weight(double p, int depth);

/// Invert W(p, d) = weight by bisection. Throws NoRoot when the weight is
/// unattainable within p in (1e-6, 1-1e-6).
double weight_depth_to_p(double weight, int depth);

/// Percentage performance increase, Eq.-style relative improvement.
double ppi(double r_method, double r_baseline);

struct BootstrapOptions {
  int resamples = 5000;
  std::uint64_t seed = 0;
  int workers = 1;
  bool extrapolated = true;
  TieRule tie_rule = TieRule::by_id;
};

struct RboComparison {
  double r_a_ref = 0.0;
  double r_b_ref = 0.0;
  double r_a_b = 0.0;
  double diff = 0.0;  // r_a_ref - r_b_ref
  double ci_low = 0.0;
  double ci_high = 0.0;
  std::optional<double> ppi;  // absent when r_b_ref == 0
  int resamples = 0;
  std::uint64_t seed = 0;
  int depth_clamped_resamples = 0;  // resamples where unique items < depth
};

/**
 * Bootstrap the difference in RBO-vs-benchmark between two methods.
 *
 * The resampling unit is the item: each resample draws n items with
 * replacement, deduplicates (rankings need unique items), re-ranks all
 * three lists on the surviving set, and recomputes the two similarities.
 * The 95% CI is the 2.5th/97.5th percentile of resampled differences
 * (linear interpolation between order statistics).
 *
 * Resample r uses an RNG keyed by (seed, r), so results are bitwise
 * identical for any worker count.
 */
RboComparison bootstrap_diff(const std::vector<std::pair<std::string, double>>& benchmark_scores,
                             const std::vector<std::pair<std::string, double>>& method_a_scores,
                             const std::vector<std::pair<std::string, double>>& method_b_scores,
                             const RboParams& params, const BootstrapOptions& options);

/// Linear-interpolation sample quantile (q in [0,1]) of a sorted vector.
double sorted_quantile(const std::vector<double>& sorted_values, double q);

struct MethodScores {
  std::vector<std::pair<std::string, double>> scores;
  std::size_t nulls_dropped = 0;  // rows with an empty metric field
};

/**
 * Load per-item scores for one method. Two layouts are accepted, told apart
 * by the header row:
 *   - the scorer's own output (id,foundation,n,coverage,strength,...);
 *     `foundation` selects rows, `metric` selects the column, and rows with
 *     an empty metric (n = 0) are dropped and counted;
 *   - a plain two-column "id,score" file (external methods, baselines).
 */
MethodScores load_method_scores(std::istream& in, const std::string& metric,
                                const std::optional<std::string>& foundation);

/// Benchmark file "id,virtue,vice" (0-100 scale), aggregated via cs_combine.
std::vector<std::pair<std::string, double>> load_benchmark(std::istream& in);

struct ComparisonRow {
  int depth = 0;
  double weight = 0.0;
  RboComparison comparison;
};

extern const char* const kComparisonHeader;
// depth,weight,p,r_a_ref,r_b_ref,r_a_b,ppi,ci_low,ci_high

std::string format_comparison_row(const ComparisonRow& row, double p);

}  // namespace vectionary
