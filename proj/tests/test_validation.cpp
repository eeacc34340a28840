/**
 * vectionary
 *
 * This code is released under the
 * Apache License Version 2.0 http://www.apache.org/licenses/.
 */
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <sstream>

#include "support/test_support.hpp"
#include "vectionary/error.hpp"
#include "vectionary/validation.hpp"

using namespace vectionary;
using testsupport::Gaussian;
using testsupport::rbo_oracle;

namespace {

RankedList make_list(std::vector<std::string> items) {
  RankedList list;
  list.items = std::move(items);
  return list;
}

std::vector<std::string> random_list(Gaussian& g, int universe, int length) {
  std::vector<int> pool(universe);
  for (int i = 0; i < universe; ++i) pool[i] = i;
  // Fisher-Yates prefix shuffle.
  for (int i = 0; i < length; ++i) {
    int j = i + static_cast<int>(g.below(static_cast<std::uint64_t>(universe - i)));
    std::swap(pool[i], pool[j]);
  }
  std::vector<std::string> out;
  out.reserve(length);
  for (int i = 0; i < length; ++i) out.push_back("item" + std::to_string(pool[i]));
  return out;
}

}  // namespace

TEST_CASE("rank_by_score sorts descending with deterministic ties") {
  RankedList r1 = rank_by_score({{"a", 0.9}, {"b", 0.5}}, TieRule::by_id);
  CHECK(r1.items == std::vector<std::string>{"a", "b"});

  RankedList r2 = rank_by_score({{"b", 0.5}, {"a", 0.5}}, TieRule::by_id);
  CHECK(r2.items == std::vector<std::string>{"a", "b"});

  RankedList r3 = rank_by_score({{"b", 0.5}, {"a", 0.5}}, TieRule::stable);
  CHECK(r3.items == std::vector<std::string>{"b", "a"});

  try {
    rank_by_score({{"a", 1.0}, {"a", 0.5}}, TieRule::by_id);
    FAIL("expected DuplicateId");
  } catch (const Error& e) {
    CHECK(e.code() == "DuplicateId");
  }
}

TEST_CASE("rank_by_score handles benchmark-sized input") {
  Gaussian g(51);
  std::vector<std::pair<std::string, double>> scores;
  for (int i = 0; i < 2000; ++i) {
    scores.emplace_back("tweet" + std::to_string(i), g.uniform());
  }
  RankedList ranked = rank_by_score(scores, TieRule::by_id);
  CHECK(ranked.items.size() == 2000);
}

TEST_CASE("cs_combine squares and sums the virtue and vice scores") {
  CHECK(cs_combine(96, 0) == doctest::Approx(9216.0));
  CHECK(cs_combine(0, 0) == doctest::Approx(0.0));
  CHECK(cs_combine(50, 50) == doctest::Approx(5000.0));
  CHECK_THROWS_AS(cs_combine(std::nan(""), 3), Error);
  CHECK_THROWS_AS(cs_combine(101, 3), Error);
}

TEST_CASE("rbo endpoints") {
  RboParams params = RboParams::from_p(0.9, 3);
  RankedList a = make_list({"x", "y", "z"});
  CHECK(rbo(a, a, params) == doctest::Approx(1.0).epsilon(1e-15));

  RankedList b = make_list({"p", "q", "r"});
  CHECK(rbo(a, b, params) == doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("rbo on the swapped pair is one half") {
  RboParams params = RboParams::from_p(0.5, 2);
  RankedList a = make_list({"1", "2"});
  RankedList b = make_list({"2", "1"});
  double value = rbo(a, b, params);
  CHECK(std::abs(value - 0.5) < 1e-12);
  CHECK(std::abs(value - rbo_oracle(a.items, b.items, 0.5, 2)) < 1e-15);
}

TEST_CASE("rbo agrees with the direct-summation oracle") {
  Gaussian g(52);
  for (int trial = 0; trial < 500; ++trial) {
    int len = 1 + static_cast<int>(g.below(100));
    int universe = len + static_cast<int>(g.below(60));
    auto a = random_list(g, universe, len);
    auto b = random_list(g, universe, len);
    double p = 0.05 + 0.9 * g.uniform();
    int depth = 1 + static_cast<int>(g.below(static_cast<std::uint64_t>(len)));
    RboParams params = RboParams::from_p(p, depth);

    double fast = rbo(make_list(a), make_list(b), params);
    double slow = rbo_oracle(a, b, p, depth);
    CHECK(std::abs(fast - slow) < 1e-12);
    CHECK(fast >= -1e-15);
    CHECK(fast <= 1.0 + 1e-12);

    // Symmetry.
    CHECK(rbo(make_list(b), make_list(a), params) == doctest::Approx(fast).epsilon(1e-14));

    // Truncated variant also matches its oracle.
    double fast_trunc = rbo(make_list(a), make_list(b), params, false);
    double slow_trunc = rbo_oracle(a, b, p, depth, false);
    CHECK(std::abs(fast_trunc - slow_trunc) < 1e-12);
  }
}

TEST_CASE("promoting a shared item to the top never decreases rbo") {
  Gaussian g(53);
  for (int trial = 0; trial < 100; ++trial) {
    int len = 5 + static_cast<int>(g.below(20));
    auto a = random_list(g, len + 30, len);
    auto b = random_list(g, len + 30, len);
    // Plant a shared item at the bottom of both lists.
    a[static_cast<std::size_t>(len - 1)] = "shared";
    b[static_cast<std::size_t>(len - 1)] = "shared";
    double p = 0.3 + 0.6 * g.uniform();
    RboParams params = RboParams::from_p(p, len);
    double before = rbo(make_list(a), make_list(b), params);

    // Move it to rank 1 in both.
    std::rotate(a.begin(), a.end() - 1, a.end());
    std::rotate(b.begin(), b.end() - 1, b.end());
    double after = rbo(make_list(a), make_list(b), params);
    CHECK(after >= before - 1e-12);
  }
}

TEST_CASE("rbo input validation") {
  RankedList a = make_list({"x", "y"});
  RankedList b = make_list({"x", "y", "z"});
  CHECK_THROWS_AS(rbo(a, b, RboParams::from_p(0.9, 3)), Error);  // DepthExceedsList
  try {
    rbo(a, b, RboParams::from_p(0.9, 3));
  } catch (const Error& e) {
    CHECK(e.code() == "DepthExceedsList");
  }
  RankedList dup = make_list({"x", "x"});
  CHECK_THROWS_AS(rbo(dup, a, RboParams::from_p(0.9, 2)), Error);
  CHECK_THROWS_AS(RboParams::from_p(1.0, 2), Error);
  CHECK_THROWS_AS(RboParams::from_p(0.0, 2), Error);
}

TEST_CASE("prefix weight forward value and inversion") {
  // Forward value computed independently (see spec example): W(0.9, 10)
  CHECK(rbo_prefix_weight(0.9, 10) == doctest::Approx(0.8555854467473518).epsilon(1e-12));
  double p = weight_depth_to_p(0.8555854467473518, 10);
  CHECK(p == doctest::Approx(0.9).epsilon(1e-7));
}

TEST_CASE("weight inversion round-trips") {
  Gaussian g(54);
  const int depths[] = {2, 3, 5, 10, 20, 50, 100, 200, 500, 1000, 1600, 2000};
  for (int trial = 0; trial < 20; ++trial) {
    int depth = depths[g.below(12)];
    // Keep p^depth bounded away from 0 and 1 so the weight is informative.
    double mass = 0.01 + 0.89 * g.uniform();
    double p_true = std::pow(mass, 1.0 / depth);
    double weight = rbo_prefix_weight(p_true, depth);
    double p_back = weight_depth_to_p(weight, depth);
    CHECK(std::abs(p_back - p_true) < 1e-6);
  }
}

TEST_CASE("weight inversion limits and failures") {
  // weight -> 1 pushes p toward 0: all mass on the very top.
  double p_hi = weight_depth_to_p(0.999, 5);
  double p_lo = weight_depth_to_p(0.5, 5);
  CHECK(p_hi < p_lo);

  CHECK_THROWS_AS(weight_depth_to_p(1.0, 10), Error);
  CHECK_THROWS_AS(weight_depth_to_p(0.0, 10), Error);
  CHECK_THROWS_AS(weight_depth_to_p(0.5, 1), Error);
  // Unattainable target within the p bracket at this depth.
  try {
    weight_depth_to_p(1e-12, 2);
    FAIL("expected NoRoot");
  } catch (const Error& e) {
    CHECK(e.code() == "NoRoot");
  }
}

TEST_CASE("paper-style grid weights invert to large p") {
  for (int depth : {200, 400, 1600}) {
    for (double weight : {0.80, 0.85, 0.90}) {
      double p = weight_depth_to_p(weight, depth);
      CHECK(p > 0.99);
      CHECK(rbo_prefix_weight(p, depth) == doctest::Approx(weight).epsilon(1e-9));
    }
  }
}

TEST_CASE("ppi is the relative improvement") {
  CHECK(ppi(0.16, 0.12) == doctest::Approx(0.3333).epsilon(1e-3));
  CHECK(ppi(0.5, 0.5) == doctest::Approx(0.0));
  CHECK(ppi(0.11, 0.07) == doctest::Approx(0.5714).epsilon(1e-3));
  CHECK(ppi(0.07, 0.11) < 0.0);
  try {
    ppi(0.5, 0.0);
    FAIL("expected ZeroBaseline");
  } catch (const Error& e) {
    CHECK(e.code() == "ZeroBaseline");
  }
  // Sign equivalence: ppi > 0 iff method beats baseline.
  Gaussian g(55);
  for (int i = 0; i < 100; ++i) {
    double a = g.uniform(), b = 0.01 + 0.98 * g.uniform();
    CHECK((ppi(a, b) > 0) == (a > b));
  }
}

TEST_CASE("bootstrap is bitwise reproducible and worker-invariant") {
  Gaussian g(56);
  std::vector<std::pair<std::string, double>> bench, ma, mb;
  for (int i = 0; i < 200; ++i) {
    std::string id = "t" + std::to_string(i);
    bench.emplace_back(id, g.uniform());
    ma.emplace_back(id, g.uniform());
    mb.emplace_back(id, g.uniform());
  }
  RboParams params = RboParams::from_p(0.98, 50);
  BootstrapOptions options;
  options.resamples = 400;
  options.seed = 77;

  RboComparison one = bootstrap_diff(bench, ma, mb, params, options);
  RboComparison two = bootstrap_diff(bench, ma, mb, params, options);
  CHECK(one.ci_low == two.ci_low);    // bitwise
  CHECK(one.ci_high == two.ci_high);  // bitwise

  options.workers = 4;
  RboComparison parallel = bootstrap_diff(bench, ma, mb, params, options);
  CHECK(parallel.ci_low == one.ci_low);
  CHECK(parallel.ci_high == one.ci_high);

  options.workers = 1;
  options.seed = 78;
  RboComparison reseeded = bootstrap_diff(bench, ma, mb, params, options);
  CHECK(reseeded.r_a_ref == one.r_a_ref);  // point estimates ignore the seed
  CHECK(reseeded.r_b_ref == one.r_b_ref);
  CHECK(reseeded.ci_low != one.ci_low);    // the interval does not
}

TEST_CASE("identical methods bootstrap to a degenerate interval") {
  Gaussian g(57);
  std::vector<std::pair<std::string, double>> bench, m;
  for (int i = 0; i < 100; ++i) {
    std::string id = "t" + std::to_string(i);
    bench.emplace_back(id, g.uniform());
    m.emplace_back(id, g.uniform());
  }
  RboParams params = RboParams::from_p(0.95, 30);
  BootstrapOptions options;
  options.resamples = 200;
  options.seed = 5;
  RboComparison c = bootstrap_diff(bench, m, m, params, options);
  CHECK(c.diff == 0.0);
  CHECK(c.ci_low == 0.0);
  CHECK(c.ci_high == 0.0);
  REQUIRE(c.ppi);
  CHECK(*c.ppi == 0.0);
}

TEST_CASE("a method matching the benchmark beats a noise method") {
  Gaussian g(58);
  std::vector<std::pair<std::string, double>> bench, ma, mb;
  for (int i = 0; i < 300; ++i) {
    std::string id = "t" + std::to_string(i);
    double truth = g.uniform();
    bench.emplace_back(id, truth);
    ma.emplace_back(id, truth);       // method_a reproduces the benchmark
    mb.emplace_back(id, g.uniform()); // method_b is noise
  }
  RboParams params = RboParams::from_p(0.98, 100);
  BootstrapOptions options;
  options.resamples = 500;
  options.seed = 9;
  RboComparison c = bootstrap_diff(bench, ma, mb, params, options);
  CHECK(c.r_a_ref == doctest::Approx(1.0));
  CHECK(c.diff > 0.0);
  CHECK(c.ci_low > 0.0);  // interval excludes zero

  // Strictly positive difference in at least 95% of resamples: with the
  // matching method, every resample has r_a = 1 >= r_b.
  CHECK(c.ci_low > 0.0);
}

TEST_CASE("bootstrap validates alignment") {
  std::vector<std::pair<std::string, double>> bench = {{"a", 1.0}, {"b", 0.5}};
  std::vector<std::pair<std::string, double>> short_m = {{"a", 1.0}};
  std::vector<std::pair<std::string, double>> wrong_m = {{"a", 1.0}, {"c", 0.5}};
  RboParams params = RboParams::from_p(0.9, 2);
  BootstrapOptions options;
  options.resamples = 10;
  try {
    bootstrap_diff(bench, short_m, bench, params, options);
    FAIL("expected MisalignedItems");
  } catch (const Error& e) {
    CHECK(e.code() == "MisalignedItems");
  }
  CHECK_THROWS_AS(bootstrap_diff(bench, wrong_m, bench, params, options), Error);
  CHECK_THROWS_AS(bootstrap_diff(bench, bench, bench, RboParams::from_p(0.9, 5), options), Error);
}

TEST_CASE("depth clamping under resampling is flagged") {
  Gaussian g(59);
  std::vector<std::pair<std::string, double>> bench, m;
  for (int i = 0; i < 50; ++i) {
    std::string id = "t" + std::to_string(i);
    bench.emplace_back(id, g.uniform());
    m.emplace_back(id, g.uniform());
  }
  // Depth equals the full item count, so every resample (which loses ~1/e of
  // the items to deduplication) must clamp.
  RboParams params = RboParams::from_p(0.9, 50);
  BootstrapOptions options;
  options.resamples = 50;
  options.seed = 3;
  RboComparison c = bootstrap_diff(bench, m, bench, params, options);
  CHECK(c.depth_clamped_resamples == 50);
}

TEST_CASE("quantiles interpolate between order statistics") {
  std::vector<double> v = {1.0, 2.0, 3.0, 4.0};
  CHECK(sorted_quantile(v, 0.0) == doctest::Approx(1.0));
  CHECK(sorted_quantile(v, 1.0) == doctest::Approx(4.0));
  CHECK(sorted_quantile(v, 0.5) == doctest::Approx(2.5));
  CHECK(sorted_quantile({7.0}, 0.3) == doctest::Approx(7.0));
}

TEST_CASE("method score files load by layout") {
  std::istringstream ours(
      "id,foundation,n,coverage,strength,valence,ambivalence\n"
      "d1,care_harm,3,1,0.5,0.1,0.2\n"
      "d1,fairness_cheating,3,1,0.9,0.0,0.1\n"
      "d2,care_harm,0,0,,,\n");
  MethodScores m = load_method_scores(ours, "strength", std::string("care_harm"));
  REQUIRE(m.scores.size() == 1);
  CHECK(m.scores[0].first == "d1");
  CHECK(m.scores[0].second == doctest::Approx(0.5));
  CHECK(m.nulls_dropped == 1);

  std::istringstream plain("id,score\nd1,4.5\nd2,1.25\n");
  MethodScores p = load_method_scores(plain, "strength", std::nullopt);
  CHECK(p.scores.size() == 2);
  CHECK(p.scores[1].second == doctest::Approx(1.25));

  std::istringstream ours2("id,foundation,n,coverage,strength,valence,ambivalence\n");
  CHECK_THROWS_AS(load_method_scores(ours2, "strength", std::nullopt), Error);
}

TEST_CASE("benchmark files aggregate with cs_combine") {
  std::istringstream in("id,virtue,vice\nt1,96,0\nt2,50,50\n");
  auto bench = load_benchmark(in);
  REQUIRE(bench.size() == 2);
  CHECK(bench[0].second == doctest::Approx(9216.0));
  CHECK(bench[1].second == doctest::Approx(5000.0));

  std::istringstream missing("id,virtue,vice\nt1,,3\n");
  try {
    load_benchmark(missing);
    FAIL("expected MissingScore");
  } catch (const Error& e) {
    CHECK(e.code() == "MissingScore");
  }
}
