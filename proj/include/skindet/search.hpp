#pragma once

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <utility>
#include <vector>

#include <json.hpp>

#include "skindet/mlp.hpp"

namespace skindet {

// Coarse (binary) candidate grid. 128 is the hard upper bound on HN.
inline constexpr std::array<int, 8> kCoarseCandidates = {1, 2, 4, 8, 16, 32, 64, 128};

struct FilePair {
  Dataset train;
  Dataset val;
  std::string id;  // data-file id, recorded in provenance
};
using FileSet = std::vector<FilePair>;

struct CandidateStats {
  int hn = 0;
  std::vector<double> run_mses;  // one per run, in run order
  double avg_mse = 0.0;
};

struct SearchReport {
  std::vector<CandidateStats> coarse;  // in candidate order
  int hn_coarse = 0;                   // coarse winner
  int fine_low = 0, fine_high = 0;     // inclusive sequential-search range
  std::vector<CandidateStats> fine;    // one per HN in [fine_low, fine_high]
  int hn_star = 0;                     // final selection
  int runs_per_candidate = 0;
};

struct SearchConfig {
  int runs_per_candidate = 30;
  std::uint64_t base_seed = 0;
  TrainConfig train;
};

// Sequential-search range around the coarse winner: from
// lower_neighbor + (hn_b - lower_neighbor)/2 to hn_b + (upper_neighbor - hn_b)/2,
// except hn_b = 2 starts at the lower neighbor itself, hn_b = 128 ends at 128
// (the fixed maximum), and hn_b = 1 degenerates to (1,1).
inline std::pair<int, int> fine_range(int hn_b) {
  int pos = -1;
  for (std::size_t i = 0; i < kCoarseCandidates.size(); ++i)
    if (kCoarseCandidates[i] == hn_b) pos = static_cast<int>(i);
  if (pos < 0) throw std::invalid_argument("fine_range: not a coarse candidate");
  if (hn_b == 1) return {1, 1};
  const int lower = kCoarseCandidates[static_cast<std::size_t>(pos - 1)];
  if (hn_b == 128) return {lower + (hn_b - lower) / 2, 128};
  const int upper = kCoarseCandidates[static_cast<std::size_t>(pos + 1)];
  const int low = (hn_b == 2) ? lower : lower + (hn_b - lower) / 2;
  return {low, hn_b + (upper - hn_b) / 2};
}

// One training run for a candidate HN; returns the run's selection MSE.
// Run i uses data file (i mod n_files) and a seed derived from the base
// seed, the candidate and the run index, so coarse and fine evaluations of
// the same HN reuse identical runs.
using CandidateEvaluator = std::function<double(int hn, int run)>;

// `files` is captured by reference and must outlive the evaluator.
inline CandidateEvaluator lm_candidate_evaluator(const std::vector<FeatureKind>& kinds,
                                                 const FileSet& files,
                                                 const SearchConfig& cfg) {
  if (files.empty()) throw std::invalid_argument("search: no data files");
  const int inputs = static_cast<int>(files.front().train.inputs.cols());
  return [kinds, &files, cfg, inputs](int hn, int run) {
    const FilePair& f = files[static_cast<std::size_t>(run) % files.size()];
    const std::uint64_t seed =
        mix_seed(cfg.base_seed, static_cast<std::uint64_t>(hn), static_cast<std::uint64_t>(run));
    Network n = init_network({inputs, hn, 1}, kinds, seed);
    const TrainResult r = train_lm(std::move(n), f.train, f.val, cfg.train);
    return r.net.prov.val_mse;  // selection statistic: best validation MSE of the run
  };
}

namespace detail {
inline CandidateStats evaluate_candidate(int hn, int runs, const CandidateEvaluator& eval,
                                         std::map<int, CandidateStats>& cache) {
  const auto it = cache.find(hn);
  if (it != cache.end()) return it->second;
  CandidateStats s;
  s.hn = hn;
  s.run_mses.reserve(static_cast<std::size_t>(runs));
  double sum = 0.0;
  for (int i = 0; i < runs; ++i) {
    const double m = eval(hn, i);
    s.run_mses.push_back(m);
    sum += m;
  }
  s.avg_mse = sum / runs;
  cache.emplace(hn, s);
  return s;
}

// Smallest HN attaining the minimum average (exact float comparison; runs
// are deterministic, so ties reproduce).
inline int select_best(const std::vector<CandidateStats>& stats) {
  int best = stats.front().hn;
  double best_avg = stats.front().avg_mse;
  for (const CandidateStats& s : stats)
    if (s.avg_mse < best_avg || (s.avg_mse == best_avg && s.hn < best)) {
      best = s.hn;
      best_avg = s.avg_mse;
    }
  return best;
}
}  // namespace detail

inline std::pair<int, std::vector<CandidateStats>> coarse_search(
    const CandidateEvaluator& eval, int runs, std::map<int, CandidateStats>& cache) {
  if (runs < 1) throw std::invalid_argument("search: runs_per_candidate must be >= 1");
  std::vector<CandidateStats> stats;
  for (int hn : kCoarseCandidates)
    stats.push_back(detail::evaluate_candidate(hn, runs, eval, cache));
  return {detail::select_best(stats), stats};
}

inline std::pair<int, std::vector<CandidateStats>> fine_search(
    std::pair<int, int> range, const CandidateEvaluator& eval, int runs,
    std::map<int, CandidateStats>& cache) {
  if (range.first < 1 || range.second < range.first)
    throw std::invalid_argument("fine_search: bad range");
  std::vector<CandidateStats> stats;
  for (int hn = range.first; hn <= range.second; ++hn)
    stats.push_back(detail::evaluate_candidate(hn, runs, eval, cache));
  return {detail::select_best(stats), stats};
}

inline SearchReport coarse_to_fine(const CandidateEvaluator& eval, int runs) {
  SearchReport rep;
  rep.runs_per_candidate = runs;
  std::map<int, CandidateStats> cache;
  auto [hn_b, coarse] = coarse_search(eval, runs, cache);
  rep.hn_coarse = hn_b;
  rep.coarse = std::move(coarse);
  const auto range = fine_range(hn_b);
  rep.fine_low = range.first;
  rep.fine_high = range.second;
  auto [hn_star, fine] = fine_search(range, eval, runs, cache);
  rep.hn_star = hn_star;
  rep.fine = std::move(fine);
  return rep;
}

// Convenience wrapper: full procedure with the LM evaluator.
inline SearchReport coarse_to_fine(const std::vector<FeatureKind>& kinds, const FileSet& files,
                                   const SearchConfig& cfg) {
  return coarse_to_fine(lm_candidate_evaluator(kinds, files, cfg), cfg.runs_per_candidate);
}

inline nlohmann::json search_report_to_json(const SearchReport& r) {
  const auto stats_json = [](const std::vector<CandidateStats>& v) {
    nlohmann::json a = nlohmann::json::array();
    for (const CandidateStats& s : v)
      a.push_back({{"hn", s.hn}, {"avg_mse", s.avg_mse}, {"run_mses", s.run_mses}});
    return a;
  };
  return nlohmann::json{{"format_version", 1},
                        {"kind", "search_report"},
                        {"runs_per_candidate", r.runs_per_candidate},
                        {"coarse", stats_json(r.coarse)},
                        {"hn_coarse", r.hn_coarse},
                        {"fine_low", r.fine_low},
                        {"fine_high", r.fine_high},
                        {"fine", stats_json(r.fine)},
                        {"hn_star", r.hn_star}};
}

inline void save_search_report(const SearchReport& r, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write search report: " + path.string());
  out << search_report_to_json(r).dump(2) << "\n";
}

inline SearchReport search_report_from_json(const nlohmann::json& j) {
  if (j.value("format_version", -1) != 1 || j.value("kind", "") != "search_report")
    throw std::invalid_argument("not a search report document");
  SearchReport r;
  const auto stats_from = [](const nlohmann::json& a) {
    std::vector<CandidateStats> v;
    for (const auto& e : a) {
      CandidateStats s;
      s.hn = e.at("hn").get<int>();
      s.avg_mse = e.at("avg_mse").get<double>();
      s.run_mses = e.at("run_mses").get<std::vector<double>>();
      v.push_back(std::move(s));
    }
    return v;
  };
  r.coarse = stats_from(j.at("coarse"));
  r.fine = stats_from(j.at("fine"));
  r.hn_coarse = j.at("hn_coarse").get<int>();
  r.fine_low = j.at("fine_low").get<int>();
  r.fine_high = j.at("fine_high").get<int>();
  r.hn_star = j.at("hn_star").get<int>();
  r.runs_per_candidate = j.at("runs_per_candidate").get<int>();
  return r;
}

// MSE-vs-HN curves for both phases, one row per candidate.
inline void write_search_csv(const SearchReport& r, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write search csv: " + path.string());
  out << "phase,hn,avg_mse\n";
  char buf[64];
  const auto emit = [&](const char* phase, const std::vector<CandidateStats>& v) {
    for (const CandidateStats& s : v) {
      std::snprintf(buf, sizeof(buf), "%.17g", s.avg_mse);
      out << phase << "," << s.hn << "," << buf << "\n";
    }
  };
  emit("coarse", r.coarse);
  emit("fine", r.fine);
}

}  // namespace skindet
