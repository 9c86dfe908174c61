#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "sfirg/alignment.hpp"
#include "sfirg/config.hpp"
#include "sfirg/estimators.hpp"
#include "sfirg/graphs.hpp"
#include "sfirg/io.hpp"
#include "sfirg/random.hpp"
#include "sfirg/stats.hpp"
#include "sfirg/weights.hpp"

namespace sfirg {

inline constexpr const char* kToolVersion = "sfirg 1.0.0";

// Seed of replicate `replicate` at size n:
//   splitmix64(splitmix64(splitmix64(master) ^ n) ^ replicate)
// splitmix64 is a bijection, so distinct replicate indices under the same
// (master, n) never collide.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t n, std::uint64_t replicate) noexcept {
  return splitmix64(splitmix64(splitmix64(master) ^ n) ^ replicate);
}

// Runs fn(i) for i in [0, count) on up to `workers` threads. Results must go
// to caller-owned slots indexed by i. The first exception is rethrown.
inline void parallel_for(std::size_t count, std::size_t workers, const std::function<void(std::size_t)>& fn) {
  workers = std::max<std::size_t>(1, std::min(workers, count));
  if (workers == 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w)
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < count; i = next++) {
          try {
            fn(i);
          } catch (...) {
            std::lock_guard lock(error_mutex);
            if (!error) error = std::current_exception();
            next = count;
          }
        }
      });
  }
  if (error) std::rethrow_exception(error);
}

inline std::size_t default_workers() { return std::max(1u, std::thread::hardware_concurrency()); }

// One simulated network: its ordered weights and degrees.
struct ReplicateDraw {
  WeightVector weights;
  std::vector<std::uint64_t> degrees;
};

// All randomness of a replicate comes from one engine seeded by derive_seed;
// weights are drawn first, then the graph.
inline ReplicateDraw simulate_replicate(const ExperimentConfig& cfg, std::size_t n, std::size_t replicate) {
  Rng rng(derive_seed(cfg.master_seed, n, replicate));
  ReplicateDraw out;
  out.weights = cfg.sampler == Sampler::Sort ? sample_weights(cfg.dist, n, rng)
                                              : sample_order_statistics_renyi(cfg.dist, n, rng);
  out.degrees = generate(cfg.model, cfg.generator, out.weights, rng, EdgeMode::DegreesOnly).degrees;
  return out;
}

using ReplicateSource = std::function<ReplicateDraw(const ExperimentConfig&, std::size_t n, std::size_t replicate)>;

// --- power-law fit --------------------------------------------------------

struct PowerLawFit {
  double coefficient = 0.0;  // 2^intercept
  double exponent = 0.0;     // slope of log2 K on log2 n
  double r2 = 0.0;
  std::size_t points = 0;
  std::size_t filtered = 0;  // K < 1 or K == n + 1 (full-alignment sentinel)
};

// OLS of log2(K) on log2(n).
inline PowerLawFit fit_power_law(std::span<const std::pair<std::size_t, std::size_t>> pairs) {
  std::vector<double> x, y;
  std::set<std::size_t> distinct;
  std::size_t filtered = 0;
  for (auto [n, K] : pairs) {
    if (K < 1 || K == n + 1) {
      ++filtered;
      continue;
    }
    x.push_back(std::log2(static_cast<double>(n)));
    y.push_back(std::log2(static_cast<double>(K)));
    distinct.insert(n);
  }
  if (x.empty()) throw NumericError("power-law fit: every point was filtered");
  if (distinct.size() < 2) throw DomainError("power-law fit needs at least two distinct n values");
  const LinearFit f = ordinary_least_squares(x, y);
  return {std::exp2(f.intercept), f.slope, f.r2, x.size(), filtered};
}

// --- alignment experiment -------------------------------------------------

struct AlignmentRow {
  std::size_t n = 0;
  std::size_t replicate = 0;
  std::uint64_t seed = 0;
  std::size_t raw_K = 0;  // n + 1 when fully aligned
  AlignmentRecord record;
};

struct AlignmentResult {
  std::vector<AlignmentRow> rows;  // ordered by (n position in config, replicate)
  std::optional<PowerLawFit> fit;
  std::string fit_status = "ok";
};

inline std::size_t event_k_for(const ExperimentConfig& cfg, std::size_t n) {
  return cfg.event_k ? *cfg.event_k : std::min(admissible_k(n, cfg.dist.alpha(), cfg.event_c), n - 1);
}

inline AlignmentResult run_alignment_experiment(const ExperimentConfig& cfg, std::size_t workers = default_workers(),
                                                const ReplicateSource& source = simulate_replicate) {
  validate(cfg);
  AlignmentResult res;
  const std::size_t R = cfg.replicates;
  res.rows.resize(cfg.n_list.size() * R);
  parallel_for(res.rows.size(), workers, [&](std::size_t slot) {
    const std::size_t n = cfg.n_list[slot / R];
    const std::size_t r = slot % R;
    const ReplicateDraw draw = source(cfg, n, r);
    AlignmentRow& row = res.rows[slot];
    row.n = n;
    row.replicate = r;
    row.seed = derive_seed(cfg.master_seed, n, r);
    row.raw_K = alignment_index(std::span<const std::uint64_t>(draw.degrees));
    row.record = measure_alignment(draw.weights, std::span<const std::uint64_t>(draw.degrees), event_k_for(cfg, n));
  });

  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (const auto& row : res.rows) pairs.emplace_back(row.n, row.raw_K);
  try {
    res.fit = fit_power_law(pairs);
  } catch (const std::exception& e) {
    res.fit_status = std::string("refused: ") + e.what();
  }
  return res;
}

// --- normality experiment -------------------------------------------------

struct NormalityRow {
  std::size_t n = 0;
  std::size_t replicate = 0;
  std::uint64_t seed = 0;
  std::size_t K = 0;
  Estimator estimator = Estimator::Hill;
  std::size_t k = 0;
  std::string status = "ok";  // or the degeneracy / domain failure
  std::optional<double> gamma_hat;
  std::optional<double> tau;
  std::optional<double> z;
};

struct NormalitySummary {
  std::size_t n = 0;
  Estimator estimator = Estimator::Hill;
  std::size_t k = 0;
  std::size_t replicates = 0;
  std::size_t successes = 0;
  std::size_t failures = 0;
  std::optional<double> mean_z;
  std::optional<double> var_z;
  std::optional<double> ks_normal;  // sup distance of the z-values to N(0, 1)
  std::string flag = "ok";
  std::vector<double> z_values;
};

struct NormalityResult {
  std::vector<NormalityRow> rows;  // ordered by (n, replicate, estimator, k)
  std::vector<NormalitySummary> summaries;
};

// Every selected (estimator, k) on one descending degree sequence. RNG-free.
inline std::vector<NormalityRow> evaluate_estimators(const ExperimentConfig& cfg, std::span<const double> sorted) {
  std::vector<NormalityRow> rows;
  for (Estimator e : cfg.estimators) {
    for (std::size_t k : cfg.k_lists.at(e)) {
      NormalityRow row;
      row.estimator = e;
      row.k = k;
      try {
        const EstimatorOutput out = center_and_scale(estimate(e, sorted, k), *cfg.gamma_true);
        row.gamma_hat = out.gamma_hat;
        row.tau = out.tau;
        row.z = out.centered_scaled;
      } catch (const DegenerateSample& ex) {
        row.status = to_string(ex.reason());
      } catch (const DomainError&) {
        row.status = "domain";
      }
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

inline NormalityResult run_normality_experiment(const ExperimentConfig& cfg, std::size_t workers = default_workers(),
                                                const ReplicateSource& source = simulate_replicate) {
  validate(cfg);
  const std::size_t R = cfg.replicates;
  std::vector<std::vector<NormalityRow>> slots(cfg.n_list.size() * R);
  parallel_for(slots.size(), workers, [&](std::size_t slot) {
    const std::size_t n = cfg.n_list[slot / R];
    const std::size_t r = slot % R;
    const ReplicateDraw draw = source(cfg, n, r);
    std::vector<double> sorted(draw.degrees.begin(), draw.degrees.end());
    std::sort(sorted.begin(), sorted.end(), std::greater<>());
    const std::size_t K = std::min(alignment_index(std::span<const std::uint64_t>(draw.degrees)), n);
    auto rows = evaluate_estimators(cfg, sorted);
    for (auto& row : rows) {
      row.n = n;
      row.replicate = r;
      row.seed = derive_seed(cfg.master_seed, n, r);
      row.K = K;
    }
    slots[slot] = std::move(rows);
  });

  NormalityResult res;
  for (auto& s : slots)
    for (auto& row : s) res.rows.push_back(std::move(row));

  // Single-threaded fold in a fixed cell order.
  for (std::size_t n : cfg.n_list) {
    for (Estimator e : cfg.estimators) {
      for (std::size_t k : cfg.k_lists.at(e)) {
        NormalitySummary s;
        s.n = n;
        s.estimator = e;
        s.k = k;
        for (const auto& row : res.rows) {
          if (row.n != n || row.estimator != e || row.k != k) continue;
          ++s.replicates;
          if (row.z) s.z_values.push_back(*row.z);
          else ++s.failures;
        }
        s.successes = s.z_values.size();
        if (s.successes == 0) {
          s.flag = "all-degenerate";
        } else {
          s.mean_z = mean(s.z_values);
          s.ks_normal = ks_statistic(s.z_values, normal_cdf);
          if (s.successes >= 2) s.var_z = variance(s.z_values);
          if (s.failures > 0) s.flag = "has-failures";
        }
        res.summaries.push_back(std::move(s));
      }
    }
  }
  return res;
}

// --- outputs --------------------------------------------------------------

inline std::string manifest(const ExperimentConfig& cfg, std::size_t workers) {
  return std::string("tool = ") + kToolVersion + "\nworkers = " + std::to_string(workers) + "\n" + describe(cfg);
}

inline std::string histogram_csv(const Histogram& h) {
  std::string s = "bin_lo,bin_hi,count\n";
  s += "-inf," + io::fmt(h.edges.front()) + "," + std::to_string(h.underflow) + "\n";
  for (std::size_t i = 0; i < h.counts.size(); ++i)
    s += io::fmt(h.edges[i]) + "," + io::fmt(h.edges[i + 1]) + "," + std::to_string(h.counts[i]) + "\n";
  s += io::fmt(h.edges.back()) + ",inf," + std::to_string(h.overflow) + "\n";
  return s;
}

inline std::string alignment_replicates_csv(const AlignmentResult& res) {
  std::string s = "n,replicate,seed,K,fully_aligned,k_used,aligned_k,eventS,eventC,eventM\n";
  for (const auto& r : res.rows) {
    const auto& a = r.record;
    s += std::to_string(r.n) + "," + std::to_string(r.replicate) + "," + std::to_string(r.seed) + "," +
         std::to_string(a.K) + "," + io::fmt(a.fully_aligned) + "," + std::to_string(a.k_used) + "," +
         io::fmt(a.aligned_k) + "," + io::fmt(a.event_s) + "," + io::fmt(a.event_c) + "," + io::fmt(a.event_m) + "\n";
  }
  return s;
}

inline std::string fit_csv(const ExperimentConfig& cfg, const AlignmentResult& res) {
  std::string s = "model,dist,coefficient,exponent,r2,points,filtered,status\n";
  s += std::string(to_string(cfg.model)) + ",\"" + cfg.dist.spec() + "\",";
  if (res.fit)
    s += io::fmt(res.fit->coefficient) + "," + io::fmt(res.fit->exponent) + "," + io::fmt(res.fit->r2) + "," +
         std::to_string(res.fit->points) + "," + std::to_string(res.fit->filtered) + ",ok\n";
  else
    s += ",,,,," + res.fit_status + "\n";
  return s;
}

inline void write_alignment_outputs(const std::filesystem::path& dir, const ExperimentConfig& cfg,
                                    const AlignmentResult& res, std::size_t workers) {
  io::ensure_directory(dir);
  io::write_file(dir / "replicates.csv", alignment_replicates_csv(res));
  io::write_file(dir / "fit.csv", fit_csv(cfg, res));

  std::string summary =
      "n,replicates,mean_K,median_K,min_K,max_K,p_aligned_k,p_all_events,implication_violations\n";
  for (std::size_t n : cfg.n_list) {
    std::vector<double> ks;
    std::size_t aligned = 0, all_events = 0, violations = 0;
    for (const auto& r : res.rows) {
      if (r.n != n) continue;
      ks.push_back(static_cast<double>(r.record.K));
      aligned += r.record.aligned_k;
      const bool events = r.record.event_s && r.record.event_c && r.record.event_m;
      all_events += events;
      violations += events && !r.record.aligned_k;
    }
    const double R = static_cast<double>(ks.size());
    summary += std::to_string(n) + "," + std::to_string(ks.size()) + "," + io::fmt(mean(ks)) + "," +
               io::fmt(median(ks)) + "," + io::fmt(*std::min_element(ks.begin(), ks.end())) + "," +
               io::fmt(*std::max_element(ks.begin(), ks.end())) + "," + io::fmt(aligned / R) + "," +
               io::fmt(all_events / R) + "," + std::to_string(violations) + "\n";
    const double kmax = *std::max_element(ks.begin(), ks.end());
    io::write_file(dir / ("histogram_n" + std::to_string(n) + ".csv"),
                   histogram_csv(histogram(ks, static_cast<std::size_t>(kmax), 0.5, kmax + 0.5)));
  }
  io::write_file(dir / "summary.csv", summary);
  io::write_file(dir / "manifest.txt", manifest(cfg, workers));
}

inline std::string normality_replicates_csv(const NormalityResult& res) {
  std::string s = "n,replicate,seed,K,estimator,k,status,gamma_hat,tau,z\n";
  for (const auto& r : res.rows)
    s += std::to_string(r.n) + "," + std::to_string(r.replicate) + "," + std::to_string(r.seed) + "," +
         std::to_string(r.K) + "," + to_string(r.estimator) + "," + std::to_string(r.k) + "," + r.status + "," +
         io::fmt(r.gamma_hat) + "," + io::fmt(r.tau) + "," + io::fmt(r.z) + "\n";
  return s;
}

inline void write_normality_outputs(const std::filesystem::path& dir, const ExperimentConfig& cfg,
                                    const NormalityResult& res, std::size_t workers) {
  io::ensure_directory(dir);
  io::write_file(dir / "replicates.csv", normality_replicates_csv(res));
  std::string summary = "n,estimator,k,replicates,successes,failures,mean_z,var_z,ks_normal,flag\n";
  for (const auto& s : res.summaries) {
    summary += std::to_string(s.n) + "," + to_string(s.estimator) + "," + std::to_string(s.k) + "," +
               std::to_string(s.replicates) + "," + std::to_string(s.successes) + "," + std::to_string(s.failures) +
               "," + io::fmt(s.mean_z) + "," + io::fmt(s.var_z) + "," + io::fmt(s.ks_normal) + "," + s.flag + "\n";
    const std::string cell =
        std::string(to_string(s.estimator)) + "_k" + std::to_string(s.k) + "_n" + std::to_string(s.n);
    io::write_file(dir / ("histogram_" + cell + ".csv"),
                   histogram_csv(histogram(s.z_values, cfg.hist_bins, cfg.hist_lo, cfg.hist_hi)));
  }
  io::write_file(dir / "summary.csv", summary);
  io::write_file(dir / "manifest.txt", manifest(cfg, workers));
}

}  // namespace sfirg
