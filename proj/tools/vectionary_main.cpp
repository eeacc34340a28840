/**
 * vectionary
 *
 * This code is released under the
 * Apache License Version 2.0 http://www.apache.org/licenses/.
 */
#include "CLI11.hpp"
#include "json.hpp"

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "vectionary/axis_fit.hpp"
#include "vectionary/config.hpp"
#include "vectionary/embedding_store.hpp"
#include "vectionary/error.hpp"
#include "vectionary/io_util.hpp"
#include "vectionary/lexicon.hpp"
#include "vectionary/manifest.hpp"
#include "vectionary/scorer.hpp"
#include "vectionary/validation.hpp"

namespace fs = std::filesystem;
using namespace vectionary;

namespace {

struct CommonFlags {
  std::string config_path;
  std::string output_dir;
  std::string seed;
  int workers = 0;
};

void add_common(CLI::App* cmd, CommonFlags& flags) {
  cmd->add_option("--config", flags.config_path, "run configuration file")
      ->required()
      ->check(CLI::ExistingFile);
  cmd->add_option("--output-dir", flags.output_dir, "override io.output_dir");
  cmd->add_option("--seed", flags.seed, "override bootstrap.seed");
  cmd->add_option("--workers", flags.workers, "override io.workers");
}

// Flags win over the config file; overrides land in the ConfigFile so the
// manifest records the settings that actually ran.
ConfigFile resolve_config(const CommonFlags& flags,
                          const std::vector<std::pair<std::string, std::string>>& extra) {
  ConfigFile file = ConfigFile::parse_file(flags.config_path);
  if (!flags.output_dir.empty()) file.set("io.output_dir", flags.output_dir);
  if (!flags.seed.empty()) file.set("bootstrap.seed", flags.seed);
  if (flags.workers > 0) file.set("io.workers", std::to_string(flags.workers));
  for (const auto& [key, value] : extra) {
    if (!value.empty()) file.set(key, value);
  }
  return file;
}

Manifest start_manifest(const std::string& command, const ConfigFile& file) {
  Manifest manifest;
  manifest.command = command;
  manifest.config_canonical = file.canonical();
  manifest.config_digest = hex64(fnv1a64(manifest.config_canonical));
  return manifest;
}

void ensure_output_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw io_error("FileUnwritable", "cannot create output dir: " + dir);
}

std::string out_path(const RunConfig& cfg, const std::string& name) {
  return (fs::path(cfg.output_dir) / name).string();
}

EmbeddingStore load_store(const RunConfig& cfg) {
  if (cfg.embeddings_path.empty()) {
    throw config_error("MissingSetting", "embeddings.path is required");
  }
  EmbeddingStore store = EmbeddingStore::load(cfg.embeddings_path, cfg.embeddings_format,
                                              cfg.vocab_limit);
  std::cerr << "loaded " << store.size() << " vectors (dim " << store.dim() << ") from "
            << cfg.embeddings_path;
  if (store.meta().zero_vectors_skipped) {
    std::cerr << ", skipped " << store.meta().zero_vectors_skipped << " zero vectors";
  }
  if (store.meta().duplicates_skipped) {
    std::cerr << ", skipped " << store.meta().duplicates_skipped << " duplicate tokens";
  }
  std::cerr << "\n";
  return store;
}

// ---------------------------------------------------------------- fit ----

int cmd_fit(const ConfigFile& file, const std::string& solver_name) {
  RunConfig cfg = RunConfig::from_config(file);
  ensure_output_dir(cfg.output_dir);
  if (cfg.lexicon_path.empty()) {
    throw config_error("MissingSetting", "lexicon.path is required");
  }

  Manifest manifest = start_manifest("fit", file);
  manifest.add_input(cfg.embeddings_path);
  manifest.add_input(cfg.lexicon_path);

  EmbeddingStore store = load_store(cfg);
  LexiconLoadReport lex_report;
  std::vector<LexiconEntry> lexicon = load_lexicon(cfg.lexicon_path, cfg.lexicon_schema, &lex_report);
  std::cerr << "loaded " << lexicon.size() << " lexicon entries";
  if (lex_report.duplicates_skipped) {
    std::cerr << " (" << lex_report.duplicates_skipped << " duplicates skipped)";
  }
  std::cerr << "\n";

  SolverKind solver = solver_kind_from_string(solver_name);

  std::ostringstream report;
  report << "foundation,n,dim,objective,iterations,converged,solver,coverage\n";
  for (const auto& foundation : cfg.foundations) {
    auto [table, coverage] = build_relevance_table(lexicon, foundation, store, cfg.match,
                                                   cfg.relevance);
    DesignProblem problem = make_design_problem(table, store);
    MoralAxis axis = solver == SolverKind::projected_gradient ? fit_axis(problem, cfg.solver)
                                                              : trs_oracle(problem);
    axis.lexicon_matched = coverage.matched;
    axis.lexicon_dropped = coverage.dropped.size();

    std::string axis_path = out_path(cfg, "axis_" + foundation.name + ".json");
    save_axis(axis, axis_path);
    manifest.add_output(axis_path);

    std::string coverage_path = out_path(cfg, "coverage_" + foundation.name + ".csv");
    {
      std::ofstream cov(coverage_path, std::ios::binary);
      write_coverage_report(coverage, cov);
    }
    manifest.add_output(coverage_path);

    report << foundation.name << ',' << problem.size() << ',' << problem.dim() << ','
           << format_double(axis.objective) << ',' << axis.iterations << ','
           << (axis.converged ? "true" : "false") << ',' << to_string(axis.solver) << ','
           << format_double(coverage.coverage()) << '\n';
    std::cerr << "fitted " << foundation.name << ": n=" << problem.size()
              << " objective=" << format_double(axis.objective)
              << " iterations=" << axis.iterations
              << (axis.converged ? "" : " [not converged]") << "\n";
    if (!axis.converged) {
      std::cerr << "warning: NotConverged for " << foundation.name
                << "; best iterate written\n";
    }
  }

  std::string report_path = out_path(cfg, "fit_report.csv");
  write_file(report_path, report.str());
  manifest.add_output(report_path);
  manifest.save(out_path(cfg, "manifest_fit.json"));
  std::cout << report.str();
  return 0;
}

// -------------------------------------------------------------- score ----

int cmd_score(const ConfigFile& file, const std::string& axes_dir_flag) {
  RunConfig cfg = RunConfig::from_config(file);
  ensure_output_dir(cfg.output_dir);
  if (cfg.corpus_path.empty()) {
    throw config_error("MissingSetting", "score.corpus is required");
  }
  std::string axes_dir = axes_dir_flag.empty() ? cfg.output_dir : axes_dir_flag;

  Manifest manifest = start_manifest("score", file);
  manifest.add_input(cfg.embeddings_path);
  manifest.add_input(cfg.corpus_path);

  EmbeddingStore store = load_store(cfg);

  std::vector<MoralAxis> axes;
  for (const auto& foundation : cfg.foundations) {
    std::string axis_path = (fs::path(axes_dir) / ("axis_" + foundation.name + ".json")).string();
    axes.push_back(load_axis(axis_path));
    manifest.add_input(axis_path);
  }

  CorpusOptions options;
  options.format = cfg.corpus_format;
  options.preprocess = cfg.preprocess;
  options.dedupe_exact_text = cfg.dedupe_exact_text;
  if (!cfg.keywords_path.empty()) {
    std::istringstream ss(read_file(cfg.keywords_path));
    std::string word;
    while (std::getline(ss, word)) {
      auto t = std::string(trim(word));
      if (!t.empty()) options.keywords.push_back(t);
    }
    manifest.add_input(cfg.keywords_path);
  }

  std::ifstream corpus(cfg.corpus_path, std::ios::binary);
  if (!corpus) throw io_error("FileUnreadable", "cannot open corpus: " + cfg.corpus_path);

  std::string scores_path = out_path(cfg, "scores.csv");
  std::string rejects_path = out_path(cfg, "rejects.jsonl");
  std::ofstream scores_out(scores_path, std::ios::binary);
  std::ofstream rejects_out(rejects_path, std::ios::binary);
  if (!scores_out || !rejects_out) {
    throw io_error("FileUnwritable", "cannot open outputs under " + cfg.output_dir);
  }

  CorpusStats stats = score_corpus(corpus, store, axes, options, scores_out, rejects_out);
  scores_out.close();
  rejects_out.close();

  std::cerr << "scored " << stats.documents_scored << "/" << stats.documents_read
            << " documents (" << stats.rejected << " rejected, " << stats.duplicate_texts
            << " duplicate texts, " << stats.filtered_out << " filtered, "
            << stats.empty_projection_docs << " with no in-vocabulary tokens)\n";

  manifest.add_output(scores_path);
  manifest.add_output(rejects_path);
  manifest.save(out_path(cfg, "manifest_score.json"));
  std::cout << scores_path << "\n";
  return 0;
}

// --------------------------------------------------------------- rank ----

int cmd_rank(const ConfigFile& file, const std::string& foundation_flag) {
  RunConfig cfg = RunConfig::from_config(file);
  ensure_output_dir(cfg.output_dir);
  std::string scores_path = cfg.rank_scores_path.empty() ? out_path(cfg, "scores.csv")
                                                         : cfg.rank_scores_path;

  Manifest manifest = start_manifest("rank", file);
  manifest.add_input(scores_path);

  std::vector<FoundationId> foundations = cfg.foundations;
  if (!foundation_flag.empty()) foundations = {FoundationId(foundation_flag)};

  for (const auto& foundation : foundations) {
    std::ifstream in(scores_path, std::ios::binary);
    if (!in) throw io_error("FileUnreadable", "cannot open scores: " + scores_path);
    MethodScores method = load_method_scores(in, cfg.rank_metric, foundation.name);
    if (method.scores.empty()) {
      throw domain_error("EmptyRanking",
                         "no scored documents for foundation '" + foundation.name + "'");
    }
    if (method.nulls_dropped) {
      std::cerr << foundation.name << ": dropped " << method.nulls_dropped
                << " unmeasurable documents (n=0)\n";
    }
    RankedList ranked = rank_by_score(method.scores, cfg.tie_rule, foundation.name);

    std::unordered_map<std::string, double> by_id(method.scores.begin(), method.scores.end());
    std::ostringstream out;
    out << "rank,id,score\n";
    for (std::size_t r = 0; r < ranked.items.size(); ++r) {
      out << (r + 1) << ',' << join_delimited({ranked.items[r]}, ',') << ','
          << format_double(by_id[ranked.items[r]]) << '\n';
    }
    std::string ranking_path = out_path(cfg, "ranking_" + foundation.name + ".csv");
    write_file(ranking_path, out.str());
    manifest.add_output(ranking_path);
    std::cout << ranking_path << "\n";
  }
  manifest.save(out_path(cfg, "manifest_rank.json"));
  return 0;
}

// ------------------------------------------------------------ compare ----

// Strict id alignment across the three inputs; report every offender class.
void check_alignment(const std::vector<std::pair<std::string, double>>& bench,
                     const std::vector<std::pair<std::string, double>>& a,
                     const std::vector<std::pair<std::string, double>>& b) {
  auto ids_of = [](const std::vector<std::pair<std::string, double>>& scores) {
    std::unordered_set<std::string> ids;
    for (const auto& [id, s] : scores) {
      (void)s;
      ids.insert(id);
    }
    return ids;
  };
  auto bench_ids = ids_of(bench);
  auto a_ids = ids_of(a);
  auto b_ids = ids_of(b);
  std::vector<std::string> offenders;
  auto collect = [&](const std::unordered_set<std::string>& have,
                     const std::unordered_set<std::string>& want, const char* what) {
    for (const auto& id : want) {
      if (!have.count(id)) offenders.push_back(std::string(what) + ":" + id);
    }
  };
  collect(a_ids, bench_ids, "missing_in_method_a");
  collect(b_ids, bench_ids, "missing_in_method_b");
  collect(bench_ids, a_ids, "missing_in_benchmark");
  collect(bench_ids, b_ids, "missing_in_benchmark");
  if (!offenders.empty()) {
    std::sort(offenders.begin(), offenders.end());
    offenders.erase(std::unique(offenders.begin(), offenders.end()), offenders.end());
    std::string sample;
    for (std::size_t i = 0; i < offenders.size() && i < 20; ++i) {
      sample += (i ? ", " : "") + offenders[i];
    }
    throw domain_error("MisalignedItems",
                       std::to_string(offenders.size()) + " misaligned ids: " + sample +
                           (offenders.size() > 20 ? ", ..." : ""));
  }
}

void drop_ids(std::vector<std::pair<std::string, double>>& scores,
              const std::unordered_set<std::string>& ids) {
  std::erase_if(scores, [&](const auto& kv) { return ids.count(kv.first) != 0; });
}

int cmd_compare(const ConfigFile& file, const std::string& foundation_flag, int resamples_flag) {
  RunConfig cfg = RunConfig::from_config(file);
  ensure_output_dir(cfg.output_dir);
  if (cfg.benchmark_path.empty() || cfg.method_a_path.empty() || cfg.method_b_path.empty()) {
    throw config_error("MissingSetting",
                       "compare requires compare.benchmark, compare.method_a, compare.method_b");
  }
  if (cfg.rbo_depths.empty() || cfg.rbo_weights.empty()) {
    throw config_error("MissingSetting", "compare requires compare.depths and compare.weights");
  }
  if (!cfg.seed) {
    throw config_error("MissingSetting", "bootstrap.seed is required for compare");
  }
  if (resamples_flag > 0) cfg.resamples = resamples_flag;

  Manifest manifest = start_manifest("compare", file);
  manifest.add_input(cfg.benchmark_path);
  manifest.add_input(cfg.method_a_path);
  manifest.add_input(cfg.method_b_path);
  manifest.seed = std::to_string(*cfg.seed);

  std::ifstream bench_in(cfg.benchmark_path, std::ios::binary);
  if (!bench_in) throw io_error("FileUnreadable", "cannot open benchmark: " + cfg.benchmark_path);
  auto benchmark = load_benchmark(bench_in);

  // Foundations to process: flag > config list when method files are scorer
  // output; plain id,score files carry no foundation dimension.
  std::vector<std::optional<std::string>> foundation_selectors;
  {
    std::ifstream probe(cfg.method_a_path, std::ios::binary);
    if (!probe) throw io_error("FileUnreadable", "cannot open scores: " + cfg.method_a_path);
    std::string header_line;
    std::getline(probe, header_line);
    bool has_foundation = header_line.find("foundation") != std::string::npos;
    if (!has_foundation) {
      foundation_selectors.push_back(std::nullopt);
    } else if (!foundation_flag.empty()) {
      foundation_selectors.push_back(foundation_flag);
    } else {
      for (const auto& f : cfg.foundations) foundation_selectors.push_back(f.name);
    }
  }

  for (const auto& selector : foundation_selectors) {
    auto load_scores = [&](const std::string& path) {
      std::ifstream in(path, std::ios::binary);
      if (!in) throw io_error("FileUnreadable", "cannot open scores: " + path);
      // Plain id,score files ignore the selector internally.
      return load_method_scores(in, cfg.compare_metric, selector);
    };
    MethodScores method_a = load_scores(cfg.method_a_path);
    MethodScores method_b = load_scores(cfg.method_b_path);

    // Documents unmeasurable under either method leave all three lists, so
    // rankings stay over a common item set.
    std::unordered_set<std::string> null_ids;
    auto harvest_nulls = [&](const MethodScores& m,
                             const std::vector<std::pair<std::string, double>>& other) {
      std::unordered_set<std::string> present;
      for (const auto& [id, s] : m.scores) {
        (void)s;
        present.insert(id);
      }
      for (const auto& [id, s] : other) {
        (void)s;
        if (!present.count(id)) null_ids.insert(id);
      }
    };
    if (method_a.nulls_dropped) harvest_nulls(method_a, benchmark);
    if (method_b.nulls_dropped) harvest_nulls(method_b, benchmark);
    auto bench = benchmark;
    if (!null_ids.empty()) {
      std::cerr << "dropping " << null_ids.size()
                << " documents with null scores from all rankings\n";
      drop_ids(bench, null_ids);
      drop_ids(method_a.scores, null_ids);
      drop_ids(method_b.scores, null_ids);
    }
    check_alignment(bench, method_a.scores, method_b.scores);

    std::string label = selector ? *selector : "scores";
    std::ostringstream out;
    out << kComparisonHeader << '\n';
    for (int depth : cfg.rbo_depths) {
      for (double weight : cfg.rbo_weights) {
        RboParams params = RboParams::from_weight(weight, depth);
        BootstrapOptions options;
        options.resamples = cfg.resamples;
        options.seed = *cfg.seed;
        options.workers = cfg.workers;
        options.extrapolated = cfg.rbo_extrapolated;
        options.tie_rule = cfg.tie_rule;
        RboComparison comparison =
            bootstrap_diff(bench, method_a.scores, method_b.scores, params, options);
        ComparisonRow row{depth, weight, comparison};
        out << format_comparison_row(row, params.p) << '\n';
        if (comparison.depth_clamped_resamples > 0) {
          std::cerr << label << " depth=" << depth << " weight=" << format_double(weight)
                    << ": depth clamped in " << comparison.depth_clamped_resamples
                    << " resamples\n";
        }
        std::printf("%s d=%-5d w=%.2f  r_a=%.2f r_b=%.2f r_ab=%.2f  diff=%+.4f ci=[%+.4f,%+.4f]",
                    label.c_str(), depth, weight, comparison.r_a_ref, comparison.r_b_ref,
                    comparison.r_a_b, comparison.diff, comparison.ci_low, comparison.ci_high);
        if (comparison.ppi) {
          std::printf("  ppi=%.2f%%", *comparison.ppi * 100.0);
        }
        std::printf("\n");
      }
    }
    std::string report_path = out_path(cfg, "comparison_" + label + ".csv");
    write_file(report_path, out.str());
    manifest.add_output(report_path);
  }

  manifest.save(out_path(cfg, "manifest_compare.json"));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"vectionary: fit semantic axes from a weighted dictionary, score documents, "
               "and validate rankings"};
  app.require_subcommand(1);

  CommonFlags fit_flags, score_flags, rank_flags, compare_flags;
  std::string solver_name = "projected_gradient";
  std::string corpus_path, axes_dir;
  std::string rank_scores, rank_foundation, compare_foundation;
  int resamples_flag = 0;

  CLI::App* fit = app.add_subcommand("fit", "fit one axis per foundation from the lexicon");
  add_common(fit, fit_flags);
  fit->add_option("--solver", solver_name, "projected_gradient (default) or trs_oracle");

  CLI::App* score = app.add_subcommand("score", "score a corpus against fitted axes");
  add_common(score, score_flags);
  score->add_option("--corpus", corpus_path, "override score.corpus");
  score->add_option("--axes-dir", axes_dir, "directory holding axis_<foundation>.json files");

  CLI::App* rank = app.add_subcommand("rank", "build rankings from a scores file");
  add_common(rank, rank_flags);
  rank->add_option("--scores", rank_scores, "override rank.scores");
  rank->add_option("--foundation", rank_foundation, "restrict to one foundation");

  CLI::App* compare = app.add_subcommand("compare", "RBO comparison of two methods vs benchmark");
  add_common(compare, compare_flags);
  compare->add_option("--foundation", compare_foundation, "restrict to one foundation");
  compare->add_option("--resamples", resamples_flag, "override bootstrap.resamples");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (fit->parsed()) {
      return cmd_fit(resolve_config(fit_flags, {}), solver_name);
    }
    if (score->parsed()) {
      return cmd_score(resolve_config(score_flags, {{"score.corpus", corpus_path}}), axes_dir);
    }
    if (rank->parsed()) {
      return cmd_rank(resolve_config(rank_flags, {{"rank.scores", rank_scores}}), rank_foundation);
    }
    if (compare->parsed()) {
      return cmd_compare(resolve_config(compare_flags, {}), compare_foundation, resamples_flag);
    }
  } catch (const Error& e) {
    nlohmann::json record;
    record["error"] = e.code();
    record["class"] = e.exit_code();
    record["message"] = e.what();
    std::cerr << record.dump() << "\n";
    return e.exit_code();
  } catch (const std::exception& e) {
    nlohmann::json record;
    record["error"] = "Internal";
    record["class"] = 1;
    record["message"] = e.what();
    std::cerr << record.dump() << "\n";
    return 1;
  }
  return 0;
}
