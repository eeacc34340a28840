/**
 * vectionary
 *
 * This code is released under the
 * Apache License Version 2.0 http://www.apache.org/licenses/.
 */
#include "vectionary/validation.hpp"

#include <algorithm>
#include <cmath>
#include <thread>
#include <unordered_map>
#include <unordered_set>

#include "vectionary/error.hpp"
#include "vectionary/io_util.hpp"
#include "vectionary/rng.hpp"

namespace vectionary {

std::string to_string(TieRule rule) { return rule == TieRule::by_id ? "by_id" : "stable"; }

TieRule tie_rule_from_string(std::string_view name) {
  if (name == "by_id") return TieRule::by_id;
  if (name == "stable") return TieRule::stable;
  throw config_error("UnknownTieRule", "unknown tie rule: " + std::string(name));
}

RankedList rank_by_score(std::vector<std::pair<std::string, double>> scores, TieRule tie_rule,
                         std::string source) {
  {
    std::unordered_set<std::string_view> ids;
    for (const auto& [id, score] : scores) {
      (void)score;
      if (!ids.insert(id).second) {
        throw domain_error("DuplicateId", "duplicate id in score list: " + id);
      }
    }
  }
  if (tie_rule == TieRule::by_id) {
    std::sort(scores.begin(), scores.end(), [](const auto& x, const auto& y) {
      if (x.second != y.second) return x.second > y.second;
      return x.first < y.first;
    });
  } else {
    std::stable_sort(scores.begin(), scores.end(),
                     [](const auto& x, const auto& y) { return x.second > y.second; });
  }
  RankedList list;
  list.tie_rule = tie_rule;
  list.source = std::move(source);
  list.items.reserve(scores.size());
  for (auto& [id, score] : scores) {
    (void)score;
    list.items.push_back(std::move(id));
  }
  return list;
}

double cs_combine(double virtue, double vice) {
  if (std::isnan(virtue) || std::isnan(vice)) {
    throw domain_error("MissingScore", "virtue and vice scores must both be present");
  }
  if (virtue < 0.0 || virtue > 100.0 || vice < 0.0 || vice > 100.0) {
    throw domain_error("ValueOutOfRange", "virtue/vice scores must lie in [0, 100]");
  }
  return virtue * virtue + vice * vice;
}

RboParams RboParams::from_p(double p, int depth) {
  if (!(p > 0.0 && p < 1.0)) {
    throw domain_error("ValueOutOfRange", "rbo persistence p must lie in (0, 1)");
  }
  if (depth < 1) throw domain_error("ValueOutOfRange", "rbo depth must be >= 1");
  return RboParams{p, depth, std::nullopt};
}

RboParams RboParams::from_weight(double weight, int depth) {
  double p = weight_depth_to_p(weight, depth);
  return RboParams{p, depth, weight};
}

namespace detail {

/*
 * Integer-id RBO core. The overlap X_k is maintained incrementally with one
 * shared mark array: an element inserted by one list and later met by the
 * other is a match. Epoch stamping (two fresh values per call) makes the
 * scratch array reusable without clearing.
 */
class RboScratch {
 public:
  explicit RboScratch(std::size_t universe) : marks_(universe, 0), epoch_(0) {}

  double run(std::span<const std::int32_t> a, std::span<const std::int32_t> b, double p,
             int depth, bool extrapolated) {
    const std::uint64_t in_set = ++epoch_;
    const std::uint64_t erased = ++epoch_;
    double overlap = 0.0;
    double sum = 0.0;
    double pk = 1.0;
    for (int k = 0; k < depth; ++k) {
      std::int32_t ea = a[static_cast<std::size_t>(k)];
      std::int32_t eb = b[static_cast<std::size_t>(k)];
      if (ea == eb) {
        overlap += 1.0;
      } else {
        for (std::int32_t e : {ea, eb}) {
          auto& m = marks_[static_cast<std::size_t>(e)];
          if (m == in_set) {
            m = erased;
            overlap += 1.0;
          } else {
            m = in_set;
          }
        }
      }
      pk *= p;
      sum += overlap / static_cast<double>(k + 1) * pk;
    }
    double tail = extrapolated ? overlap / static_cast<double>(depth) * pk : 0.0;
    return tail + (1.0 - p) / p * sum;
  }

 private:
  std::vector<std::uint64_t> marks_;
  std::uint64_t epoch_;
};

}  // namespace detail

double rbo(const RankedList& a, const RankedList& b, const RboParams& params, bool extrapolated) {
  if (!(params.p > 0.0 && params.p < 1.0)) {
    throw domain_error("ValueOutOfRange", "rbo persistence p must lie in (0, 1)");
  }
  if (params.depth < 1) {
    throw domain_error("ValueOutOfRange", "rbo depth must be >= 1");
  }
  if (static_cast<std::size_t>(params.depth) > a.items.size() ||
      static_cast<std::size_t>(params.depth) > b.items.size()) {
    throw domain_error("DepthExceedsList",
                       "depth " + std::to_string(params.depth) + " exceeds list length " +
                           std::to_string(std::min(a.items.size(), b.items.size())));
  }

  std::unordered_map<std::string_view, std::int32_t> ids;
  auto intern = [&](const std::string& item) {
    auto [it, inserted] = ids.emplace(item, static_cast<std::int32_t>(ids.size()));
    return std::pair(it->second, inserted);
  };
  std::vector<std::int32_t> ia, ib;
  ia.reserve(static_cast<std::size_t>(params.depth));
  ib.reserve(static_cast<std::size_t>(params.depth));
  std::unordered_set<std::int32_t> seen_a, seen_b;
  for (int k = 0; k < params.depth; ++k) {
    auto [va, ignored_a] = intern(a.items[static_cast<std::size_t>(k)]);
    auto [vb, ignored_b] = intern(b.items[static_cast<std::size_t>(k)]);
    if (!seen_a.insert(va).second) {
      throw domain_error("DuplicateId", "duplicate item in ranked list: " + a.items[static_cast<std::size_t>(k)]);
    }
    if (!seen_b.insert(vb).second) {
      throw domain_error("DuplicateId", "duplicate item in ranked list: " + b.items[static_cast<std::size_t>(k)]);
    }
    ia.push_back(va);
    ib.push_back(vb);
  }

  detail::RboScratch scratch(ids.size());
  return scratch.run(ia, ib, params.p, params.depth, extrapolated);
}

double rbo_prefix_weight(double p, int depth) {
  if (!(p > 0.0 && p < 1.0)) {
    throw domain_error("ValueOutOfRange", "prefix weight requires p in (0, 1)");
  }
  if (depth < 1) throw domain_error("ValueOutOfRange", "prefix weight requires depth >= 1");
  double tail_sum = 0.0;
  double pi = 1.0;
  for (int i = 1; i <= depth - 1; ++i) {
    pi *= p;
    tail_sum += pi / static_cast<double>(i);
  }
  return 1.0 - std::pow(p, depth - 1) +
         ((1.0 - p) / p) * static_cast<double>(depth) * (std::log(1.0 / (1.0 - p)) - tail_sum);
}

double weight_depth_to_p(double weight, int depth) {
  if (!(weight > 0.0 && weight < 1.0)) {
    throw domain_error("ValueOutOfRange", "target weight must lie in (0, 1)");
  }
  if (depth < 2) {
    throw domain_error("ValueOutOfRange", "weight inversion requires depth >= 2");
  }
  const double lo_p = 1e-6;
  const double hi_p = 1.0 - 1e-6;

  // The bracket is only valid if W decreases across it; spot-check before
  // trusting bisection.
  double prev = rbo_prefix_weight(lo_p, depth);
  for (int i = 1; i <= 8; ++i) {
    double p = lo_p + (hi_p - lo_p) * static_cast<double>(i) / 8.0;
    double w = rbo_prefix_weight(p, depth);
    if (w > prev + 1e-9) {
      throw numeric_error("NoRoot", "prefix weight is not monotone over the bracket");
    }
    prev = w;
  }

  double w_lo = rbo_prefix_weight(lo_p, depth);  // max attainable
  double w_hi = rbo_prefix_weight(hi_p, depth);  // min attainable
  if (weight > w_lo || weight < w_hi) {
    throw numeric_error("NoRoot",
                        "weight " + format_double(weight) + " unattainable at depth " +
                            std::to_string(depth) + " (range [" + format_double(w_hi) + ", " +
                            format_double(w_lo) + "])");
  }

  double lo = lo_p, hi = hi_p;
  for (int i = 0; i < 200; ++i) {
    double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    if (rbo_prefix_weight(mid, depth) > weight) {
      lo = mid;
    } else {
      hi = mid;
    }
    if (hi - lo < 1e-15) break;
  }
  double p = 0.5 * (lo + hi);
  if (std::abs(rbo_prefix_weight(p, depth) - weight) > 1e-9) {
    throw numeric_error("NoRoot", "bisection failed to reach the target weight");
  }
  return p;
}

double ppi(double r_method, double r_baseline) {
  if (!(r_baseline > 0.0)) {
    throw domain_error("ZeroBaseline", "ppi requires a strictly positive baseline similarity");
  }
  return (r_method - r_baseline) / r_baseline;
}

double sorted_quantile(const std::vector<double>& sorted_values, double q) {
  if (sorted_values.empty()) {
    throw domain_error("EmptySample", "quantile of an empty sample");
  }
  if (sorted_values.size() == 1) return sorted_values[0];
  double h = q * static_cast<double>(sorted_values.size() - 1);
  std::size_t lo = static_cast<std::size_t>(h);
  if (lo >= sorted_values.size() - 1) return sorted_values.back();
  double frac = h - static_cast<double>(lo);
  return sorted_values[lo] + frac * (sorted_values[lo + 1] - sorted_values[lo]);
}

namespace {

// Rank position of every item under (score desc, tie rule). Re-ranking a
// subset then reduces to ordering by precomputed position.
std::vector<std::int32_t> rank_positions(const std::vector<std::pair<std::string, double>>& scores,
                                         const std::unordered_map<std::string, std::int32_t>& index,
                                         TieRule tie_rule) {
  RankedList ranked = rank_by_score(scores, tie_rule);
  std::vector<std::int32_t> pos(scores.size());
  for (std::size_t r = 0; r < ranked.items.size(); ++r) {
    pos[static_cast<std::size_t>(index.at(ranked.items[r]))] = static_cast<std::int32_t>(r);
  }
  return pos;
}

}  // namespace

RboComparison bootstrap_diff(const std::vector<std::pair<std::string, double>>& benchmark_scores,
                             const std::vector<std::pair<std::string, double>>& method_a_scores,
                             const std::vector<std::pair<std::string, double>>& method_b_scores,
                             const RboParams& params, const BootstrapOptions& options) {
  if (options.resamples < 1) {
    throw domain_error("ValueOutOfRange", "bootstrap requires resamples >= 1");
  }

  // Alignment: the three score sets must cover exactly the same ids.
  std::unordered_map<std::string, std::int32_t> index;
  index.reserve(benchmark_scores.size());
  std::vector<std::string> ids;
  ids.reserve(benchmark_scores.size());
  for (const auto& [id, score] : benchmark_scores) {
    (void)score;
    if (!index.emplace(id, static_cast<std::int32_t>(ids.size())).second) {
      throw domain_error("DuplicateId", "duplicate id in benchmark scores: " + id);
    }
    ids.push_back(id);
  }
  auto check_aligned = [&](const std::vector<std::pair<std::string, double>>& scores,
                           const char* label) {
    if (scores.size() != ids.size()) {
      throw domain_error("MisalignedItems",
                         std::string(label) + " has " + std::to_string(scores.size()) +
                             " items, benchmark has " + std::to_string(ids.size()));
    }
    std::unordered_set<std::string_view> seen;
    for (const auto& [id, score] : scores) {
      (void)score;
      if (!index.count(id)) {
        throw domain_error("MisalignedItems",
                           std::string(label) + " contains id absent from benchmark: " + id);
      }
      if (!seen.insert(id).second) {
        throw domain_error("DuplicateId", std::string(label) + " has duplicate id: " + id);
      }
    }
  };
  check_aligned(method_a_scores, "method_a");
  check_aligned(method_b_scores, "method_b");

  const std::int32_t n = static_cast<std::int32_t>(ids.size());
  if (params.depth > n) {
    throw domain_error("DepthExceedsList",
                       "depth " + std::to_string(params.depth) + " exceeds item count " +
                           std::to_string(n));
  }

  std::vector<std::int32_t> pos_bench = rank_positions(benchmark_scores, index, options.tie_rule);
  std::vector<std::int32_t> pos_a = rank_positions(method_a_scores, index, options.tie_rule);
  std::vector<std::int32_t> pos_b = rank_positions(method_b_scores, index, options.tie_rule);

  // Full rankings (item index sorted by position) for the point estimates.
  auto ranking_from_positions = [&](const std::vector<std::int32_t>& pos) {
    std::vector<std::int32_t> ranking(static_cast<std::size_t>(n));
    for (std::int32_t item = 0; item < n; ++item) {
      ranking[static_cast<std::size_t>(pos[static_cast<std::size_t>(item)])] = item;
    }
    return ranking;
  };
  std::vector<std::int32_t> full_bench = ranking_from_positions(pos_bench);
  std::vector<std::int32_t> full_a = ranking_from_positions(pos_a);
  std::vector<std::int32_t> full_b = ranking_from_positions(pos_b);

  RboComparison result;
  result.resamples = options.resamples;
  result.seed = options.seed;
  {
    detail::RboScratch scratch(static_cast<std::size_t>(n));
    result.r_a_ref = scratch.run(full_a, full_bench, params.p, params.depth, options.extrapolated);
    result.r_b_ref = scratch.run(full_b, full_bench, params.p, params.depth, options.extrapolated);
    result.r_a_b = scratch.run(full_a, full_b, params.p, params.depth, options.extrapolated);
  }
  result.diff = result.r_a_ref - result.r_b_ref;
  if (result.r_b_ref > 0.0) result.ppi = ppi(result.r_a_ref, result.r_b_ref);

  std::vector<double> diffs(static_cast<std::size_t>(options.resamples));
  std::vector<int> clamped_flags(static_cast<std::size_t>(options.resamples), 0);

  auto run_chunk = [&](int begin, int end) {
    detail::RboScratch scratch(static_cast<std::size_t>(n));
    std::vector<std::uint8_t> drawn(static_cast<std::size_t>(n));
    std::vector<std::int32_t> slot_bench(static_cast<std::size_t>(n));
    std::vector<std::int32_t> slot_a(static_cast<std::size_t>(n));
    std::vector<std::int32_t> slot_b(static_cast<std::size_t>(n));
    std::vector<std::int32_t> rank_bench, rank_a, rank_b;
    rank_bench.reserve(static_cast<std::size_t>(n));
    rank_a.reserve(static_cast<std::size_t>(n));
    rank_b.reserve(static_cast<std::size_t>(n));

    for (int r = begin; r < end; ++r) {
      SplitMix64 rng = keyed_stream(options.seed, static_cast<std::uint64_t>(r));
      std::fill(drawn.begin(), drawn.end(), 0);
      std::fill(slot_bench.begin(), slot_bench.end(), -1);
      std::fill(slot_a.begin(), slot_a.end(), -1);
      std::fill(slot_b.begin(), slot_b.end(), -1);

      // n draws with replacement, deduplicated by first occurrence.
      std::int32_t unique = 0;
      for (std::int32_t k = 0; k < n; ++k) {
        auto item = static_cast<std::int32_t>(rng.next_below(static_cast<std::uint64_t>(n)));
        if (drawn[static_cast<std::size_t>(item)]) continue;
        drawn[static_cast<std::size_t>(item)] = 1;
        ++unique;
        slot_bench[static_cast<std::size_t>(pos_bench[static_cast<std::size_t>(item)])] = item;
        slot_a[static_cast<std::size_t>(pos_a[static_cast<std::size_t>(item)])] = item;
        slot_b[static_cast<std::size_t>(pos_b[static_cast<std::size_t>(item)])] = item;
      }

      auto compact = [n](const std::vector<std::int32_t>& slots, std::vector<std::int32_t>& out) {
        out.clear();
        for (std::int32_t i = 0; i < n; ++i) {
          std::int32_t item = slots[static_cast<std::size_t>(i)];
          if (item >= 0) out.push_back(item);
        }
      };
      compact(slot_bench, rank_bench);
      compact(slot_a, rank_a);
      compact(slot_b, rank_b);

      int depth_r = std::min(params.depth, static_cast<int>(unique));
      if (depth_r < params.depth) clamped_flags[static_cast<std::size_t>(r)] = 1;

      double ra = scratch.run(rank_a, rank_bench, params.p, depth_r, options.extrapolated);
      double rb = scratch.run(rank_b, rank_bench, params.p, depth_r, options.extrapolated);
      diffs[static_cast<std::size_t>(r)] = ra - rb;
    }
  };

  int workers = std::max(1, options.workers);
  if (workers == 1) {
    run_chunk(0, options.resamples);
  } else {
    std::vector<std::thread> pool;
    int chunk = (options.resamples + workers - 1) / workers;
    for (int w = 0; w < workers; ++w) {
      int begin = w * chunk;
      int end = std::min(options.resamples, begin + chunk);
      if (begin >= end) break;
      pool.emplace_back(run_chunk, begin, end);
    }
    for (auto& t : pool) t.join();
  }

  for (int flag : clamped_flags) result.depth_clamped_resamples += flag;
  std::sort(diffs.begin(), diffs.end());
  result.ci_low = sorted_quantile(diffs, 0.025);
  result.ci_high = sorted_quantile(diffs, 0.975);
  return result;
}

namespace {

std::vector<std::string> read_csv_header(std::istream& in, char& delimiter) {
  std::string line;
  if (!std::getline(in, line)) {
    throw format_error("MalformedHeader", "score file has no header row");
  }
  while (!line.empty() && (line.back() == '\r' || line.back() == '\n')) line.pop_back();
  delimiter = sniff_delimiter(line);
  auto header = split_delimited(line, delimiter);
  for (auto& h : header) h = std::string(trim(h));
  return header;
}

std::optional<std::size_t> find_column(const std::vector<std::string>& header,
                                       std::string_view name) {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return i;
  }
  return std::nullopt;
}

}  // namespace

MethodScores load_method_scores(std::istream& in, const std::string& metric,
                                const std::optional<std::string>& foundation) {
  char delimiter = ',';
  auto header = read_csv_header(in, delimiter);

  MethodScores out;
  std::string line;
  std::size_t line_no = 1;

  auto id_col = find_column(header, "id");
  if (!id_col) throw format_error("MalformedHeader", "score file header must contain 'id'");

  auto foundation_col = find_column(header, "foundation");
  std::size_t value_col;
  if (foundation_col) {
    auto metric_col = find_column(header, metric);
    if (!metric_col) {
      throw domain_error("MissingColumn", "score file has no metric column '" + metric + "'");
    }
    if (!foundation) {
      throw config_error("MissingFoundation",
                         "score file carries multiple foundations; one must be selected");
    }
    value_col = *metric_col;
  } else {
    auto score_col = find_column(header, "score");
    if (!score_col) {
      throw format_error("MalformedHeader",
                         "score file must be scorer output or a plain 'id,score' table");
    }
    value_col = *score_col;
  }

  while (std::getline(in, line)) {
    ++line_no;
    while (!line.empty() && (line.back() == '\r' || line.back() == '\n')) line.pop_back();
    if (trim(line).empty()) continue;
    auto fields = split_delimited(line, delimiter);
    if (fields.size() != header.size()) {
      throw format_error("RowShapeMismatch",
                         "score file line " + std::to_string(line_no) + ": expected " +
                             std::to_string(header.size()) + " fields, got " +
                             std::to_string(fields.size()));
    }
    if (foundation_col && fields[*foundation_col] != *foundation) continue;
    std::string_view raw = trim(fields[value_col]);
    if (raw.empty()) {
      ++out.nulls_dropped;  // unmeasurable document (n = 0)
      continue;
    }
    auto value = parse_double(raw);
    if (!value) {
      throw format_error("ValueUnparsable",
                         "score file line " + std::to_string(line_no) + ": bad value '" +
                             std::string(raw) + "'");
    }
    out.scores.emplace_back(fields[*id_col], *value);
  }
  return out;
}

std::vector<std::pair<std::string, double>> load_benchmark(std::istream& in) {
  char delimiter = ',';
  auto header = read_csv_header(in, delimiter);
  auto id_col = find_column(header, "id");
  auto virtue_col = find_column(header, "virtue");
  auto vice_col = find_column(header, "vice");
  if (!id_col || !virtue_col || !vice_col) {
    throw format_error("MalformedHeader", "benchmark header must contain id, virtue, vice");
  }

  std::vector<std::pair<std::string, double>> out;
  std::string line;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    while (!line.empty() && (line.back() == '\r' || line.back() == '\n')) line.pop_back();
    if (trim(line).empty()) continue;
    auto fields = split_delimited(line, delimiter);
    if (fields.size() != header.size()) {
      throw format_error("RowShapeMismatch",
                         "benchmark line " + std::to_string(line_no) + ": expected " +
                             std::to_string(header.size()) + " fields, got " +
                             std::to_string(fields.size()));
    }
    auto virtue = parse_double(fields[*virtue_col]);
    auto vice = parse_double(fields[*vice_col]);
    if (!virtue || !vice) {
      throw domain_error("MissingScore",
                         "benchmark line " + std::to_string(line_no) +
                             ": virtue and vice must both be present");
    }
    out.emplace_back(fields[*id_col], cs_combine(*virtue, *vice));
  }
  return out;
}

const char* const kComparisonHeader = "depth,weight,p,r_a_ref,r_b_ref,r_a_b,ppi,ci_low,ci_high";

std::string format_comparison_row(const ComparisonRow& row, double p) {
  const RboComparison& c = row.comparison;
  return join_delimited({std::to_string(row.depth), format_double(row.weight), format_double(p),
                         format_double(c.r_a_ref), format_double(c.r_b_ref),
                         format_double(c.r_a_b), c.ppi ? format_double(*c.ppi) : std::string(),
                         format_double(c.ci_low), format_double(c.ci_high)},
                        ',');
}

}  // namespace vectionary
