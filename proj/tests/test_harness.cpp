#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <unordered_set>
#include <vector>

#include "sfirg/harness.hpp"

using namespace sfirg;
using Pairs = std::vector<std::pair<std::size_t, std::size_t>>;

namespace {

ExperimentConfig small_alignment() {
  ExperimentConfig cfg;
  cfg.name = "small";
  cfg.kind = ExperimentKind::Alignment;
  cfg.dist = WeightDistribution::pareto(2.0, 1.0);
  cfg.n_list = {256, 512, 1024};
  cfg.replicates = 24;
  cfg.master_seed = 99;
  return cfg;
}

ExperimentConfig small_normality() {
  ExperimentConfig cfg;
  cfg.name = "norm";
  cfg.kind = ExperimentKind::Normality;
  cfg.dist = WeightDistribution::burr(2.5);
  cfg.n_list = {4096};
  cfg.replicates = 30;
  cfg.gamma_true = 0.4;
  cfg.estimators = {Estimator::Hill, Estimator::Pickands, Estimator::PWM};
  cfg.k_lists[Estimator::Hill] = {16, 64};
  cfg.k_lists[Estimator::Pickands] = {4, 16};
  cfg.k_lists[Estimator::PWM] = {32, 128};
  cfg.master_seed = 5;
  return cfg;
}

}  // namespace

TEST(DeriveSeed, DeterministicAndSpread) {
  EXPECT_EQ(derive_seed(1, 2, 3), derive_seed(1, 2, 3));
  static_assert(derive_seed(1, 2, 3) == derive_seed(1, 2, 3));
  std::unordered_set<std::uint64_t> seen;
  for (std::uint64_t i = 0; i < 1000000; ++i) {
    ASSERT_NE(derive_seed(42, 1024, i), derive_seed(42, 1024, i + 1));
    seen.insert(derive_seed(42, 1024, i));
  }
  EXPECT_EQ(seen.size(), 1000000u);
  for (std::uint64_t n : {16u, 1024u, 1u << 20})
    for (std::uint64_t i = 0; i < 100; ++i) {
      const auto a = derive_seed(1, n, i), b = derive_seed(2, n, i);
      EXPECT_NE(a, b);
      EXPECT_GT(std::popcount(a ^ b), 10);
    }
  EXPECT_NE(derive_seed(7, 1024, 0), derive_seed(7, 2048, 0));
}

TEST(FitPowerLaw, ExactData) {
  const Pairs p{{4, 8}, {16, 16}, {64, 32}};
  const auto f = fit_power_law(p);
  EXPECT_NEAR(f.coefficient, 4.0, 1e-12);
  EXPECT_NEAR(f.exponent, 0.5, 1e-14);
  EXPECT_EQ(f.points, 3u);
  const auto c = fit_power_law(Pairs{{4, 8}, {16, 8}, {64, 8}});
  EXPECT_NEAR(c.exponent, 0.0, 1e-14);
  EXPECT_NEAR(c.coefficient, 8.0, 1e-12);
}

TEST(FitPowerLaw, FiltersAndRefusals) {
  const auto f = fit_power_law(Pairs{{4, 8}, {16, 16}, {64, 32}, {64, 65}, {16, 0}});
  EXPECT_EQ(f.filtered, 2u);
  EXPECT_NEAR(f.exponent, 0.5, 1e-14);
  EXPECT_THROW(fit_power_law(Pairs{{16, 2}, {16, 3}}), DomainError);
  EXPECT_THROW(fit_power_law(Pairs{{16, 17}, {32, 0}}), NumericError);
}

TEST(FitPowerLaw, NoisySyntheticRecoversExponent) {
  Rng rng(2004);
  std::normal_distribution<double> eps(0.0, 0.3);
  Pairs p;
  for (int i = 0; i < 10000; ++i) {
    const std::size_t n = std::size_t{1} << (10 + i % 7);
    const double k = std::round(0.74 * std::pow(double(n), 0.2) * std::exp(eps(rng)));
    p.emplace_back(n, static_cast<std::size_t>(k));
  }
  EXPECT_NEAR(fit_power_law(p).exponent, 0.2, 0.03);
}

TEST(ParallelFor, CoversEverySlotOnceAndRethrows) {
  std::vector<int> hits(1000, 0);
  parallel_for(hits.size(), 4, [&](std::size_t i) { ++hits[i]; });
  for (int h : hits) EXPECT_EQ(h, 1);
  EXPECT_THROW(parallel_for(100, 3, [](std::size_t i) { if (i == 57) throw DomainError("x"); }), DomainError);
  parallel_for(0, 4, [](std::size_t) { FAIL(); });
}

TEST(AlignmentExperiment, IdenticalAcrossWorkerCounts) {
  const auto cfg = small_alignment();
  const auto a = run_alignment_experiment(cfg, 1);
  const auto b = run_alignment_experiment(cfg, 4);
  EXPECT_EQ(alignment_replicates_csv(a), alignment_replicates_csv(b));
  EXPECT_EQ(fit_csv(cfg, a), fit_csv(cfg, b));
  ASSERT_EQ(a.rows.size(), 3u * 24);
  EXPECT_EQ(a.rows[24].n, 512u);
  EXPECT_EQ(a.rows[25].replicate, 1u);
  EXPECT_EQ(a.rows[25].seed, derive_seed(99, 512, 1));
  EXPECT_TRUE(a.fit.has_value());
}

TEST(AlignmentExperiment, SingleNRefusesFitButKeepsRows) {
  auto cfg = small_alignment();
  cfg.n_list = {512};
  const auto r = run_alignment_experiment(cfg, 1);
  EXPECT_EQ(r.rows.size(), 24u);
  EXPECT_FALSE(r.fit.has_value());
  EXPECT_NE(r.fit_status.find("refused"), std::string::npos);
  EXPECT_NE(fit_csv(cfg, r).find("refused"), std::string::npos);
}

TEST(AlignmentExperiment, EventsImplyAlignment) {
  auto cfg = small_alignment();
  cfg.replicates = 200;
  for (const auto& row : run_alignment_experiment(cfg, 1).rows) {
    const auto& a = row.record;
    if (a.event_s && a.event_c && a.event_m) {
      EXPECT_TRUE(a.aligned_k);
      EXPECT_GT(row.raw_K, a.k_used);
    }
  }
}

TEST(NormalityExperiment, IdenticalAcrossWorkerCountsAndConserved) {
  const auto cfg = small_normality();
  const auto a = run_normality_experiment(cfg, 1);
  const auto b = run_normality_experiment(cfg, 3);
  EXPECT_EQ(normality_replicates_csv(a), normality_replicates_csv(b));
  EXPECT_EQ(a.rows.size(), 30u * 6);
  EXPECT_EQ(a.summaries.size(), 6u);
  for (const auto& s : a.summaries) {
    EXPECT_EQ(s.replicates, 30u);
    EXPECT_EQ(s.successes + s.failures, s.replicates);
    EXPECT_EQ(s.z_values.size(), s.successes);
  }
}

TEST(NormalityExperiment, HillRowsIndependentOfOtherEstimators) {
  auto all = small_normality();
  auto only = all;
  only.estimators = {Estimator::Hill};
  const auto a = run_normality_experiment(all, 1);
  const auto b = run_normality_experiment(only, 1);
  std::vector<NormalityRow> hill_a;
  for (const auto& r : a.rows)
    if (r.estimator == Estimator::Hill) hill_a.push_back(r);
  ASSERT_EQ(hill_a.size(), b.rows.size());
  for (std::size_t i = 0; i < b.rows.size(); ++i) {
    EXPECT_EQ(hill_a[i].gamma_hat, b.rows[i].gamma_hat);
    EXPECT_EQ(hill_a[i].seed, b.rows[i].seed);
  }
}

TEST(NormalityExperiment, DegenerateSamplesCountedAsFailures) {
  auto cfg = small_normality();
  cfg.n_list = {256};
  cfg.k_lists[Estimator::Pickands] = {4, 16};
  const ReplicateSource constant = [](const ExperimentConfig&, std::size_t n, std::size_t) {
    ReplicateDraw d;
    d.weights = WeightVector::from_values(std::vector<double>(n, 3.0));
    d.degrees.assign(n, 3);
    return d;
  };
  const auto r = run_normality_experiment(cfg, 2, constant);
  for (const auto& s : r.summaries) {
    if (s.estimator == Estimator::Hill) {
      EXPECT_EQ(s.failures, 0u);
    } else {
      EXPECT_EQ(s.failures, cfg.replicates);
      EXPECT_EQ(s.flag, "all-degenerate");
      EXPECT_FALSE(s.mean_z.has_value());
    }
  }
  for (const auto& row : r.rows) {
    if (row.estimator == Estimator::Pickands) {
      EXPECT_EQ(row.status, "zero-denominator");
    }
  }
}

TEST(Config, ParsesSectionsAndGlobals) {
  const auto cfgs = parse_config(R"(
# shared
seed = 7
replicates = 3
[a]
kind = alignment
dist = pareto:scale=2,alpha=1
n = 2^4..2^6, 100
[b]
kind = normality
model = cl
dist = burr:alpha=2.5
n = 2^12
gamma_true = 0.4
estimators = hill, pwm
k = 32
k.pwm = 64,128   # trailing comment
)");
  ASSERT_EQ(cfgs.size(), 2u);
  EXPECT_EQ(cfgs[0].name, "a");
  EXPECT_EQ(cfgs[0].n_list, (std::vector<std::size_t>{16, 32, 64, 100}));
  EXPECT_EQ(cfgs[0].master_seed, 7u);
  EXPECT_EQ(cfgs[1].replicates, 3u);
  EXPECT_EQ(cfgs[1].model, Model::ChungLu);
  EXPECT_EQ(cfgs[1].k_lists.at(Estimator::PWM), (std::vector<std::size_t>{64, 128}));
  EXPECT_EQ(cfgs[1].k_lists.at(Estimator::Hill), (std::vector<std::size_t>{32}));
  EXPECT_TRUE(validate(cfgs[1]).empty());
}

TEST(Config, RejectsBadInput) {
  EXPECT_THROW(parse_config("n = 4\n"), ParseError);
  EXPECT_THROW(parse_config("[a]\nbogus = 1\n"), ParseError);
  EXPECT_THROW(parse_config("[a]\nn = 2^5..2^3\n"), ParseError);
  EXPECT_THROW(parse_config("[a]\nreplicates = -1\n"), ParseError);
  EXPECT_THROW(parse_config("[a\n"), ParseError);
  EXPECT_THROW(parse_config("[a]\njust words\n"), ParseError);
  ExperimentConfig cfg = small_alignment();
  EXPECT_THROW(apply_override(cfg, "replicates"), ParseError);
  apply_override(cfg, "replicates = 5");
  EXPECT_EQ(cfg.replicates, 5u);
}

TEST(Config, ValidationErrorsAndWarnings) {
  auto cfg = small_normality();
  cfg.gamma_true.reset();
  EXPECT_THROW(validate(cfg), ParseError);

  cfg = small_normality();
  cfg.k_lists[Estimator::Pickands] = {2000};
  EXPECT_THROW(validate(cfg), ParseError);

  cfg = small_normality();
  cfg.n_list.clear();
  EXPECT_THROW(validate(cfg), ParseError);

  cfg = small_normality();
  cfg.dist = WeightDistribution::burr(1.5);
  cfg.gamma_true = 0.45;
  EXPECT_EQ(validate(cfg).size(), 1u);  // PWM with alpha <= 2

  cfg = small_alignment();
  cfg.model = Model::ChungLu;
  EXPECT_EQ(validate(cfg).size(), 1u);
  cfg.generator = Generator::Naive;
  cfg.n_list = {8192};
  EXPECT_THROW(validate(cfg), ParseError);
}

TEST(Outputs, WritesExpectedFiles) {
  const auto dir = std::filesystem::temp_directory_path() / "sfirg_harness_outputs";
  std::filesystem::remove_all(dir);
  const auto cfg = small_alignment();
  write_alignment_outputs(dir / "a", cfg, run_alignment_experiment(cfg, 1), 1);
  for (const char* f : {"replicates.csv", "fit.csv", "summary.csv", "manifest.txt", "histogram_n256.csv"})
    EXPECT_TRUE(std::filesystem::exists(dir / "a" / f)) << f;
  const auto ncfg = small_normality();
  write_normality_outputs(dir / "b", ncfg, run_normality_experiment(ncfg, 1), 1);
  EXPECT_TRUE(std::filesystem::exists(dir / "b" / "histogram_pwm_k128_n4096.csv"));
  const std::string head = io::read_file(dir / "b" / "replicates.csv").substr(0, 80);
  EXPECT_EQ(head.substr(0, head.find('\n')), "n,replicate,seed,K,estimator,k,status,gamma_hat,tau,z");
  std::filesystem::remove_all(dir);
}

TEST(Config, ShippedPresetsValidate) {
  std::size_t files = 0;
  for (const auto& entry : std::filesystem::directory_iterator(SFIRG_CONFIG_DIR)) {
    if (entry.path().extension() != ".ini") continue;
    ++files;
    for (const auto& cfg : parse_config(io::read_file(entry.path()))) {
      const auto warnings = validate(cfg);
      EXPECT_TRUE(warnings.empty()) << entry.path() << " [" << cfg.name << "] " << warnings.front();
    }
  }
  EXPECT_GE(files, 4u);
}
