#include <cmath>
#include <set>

#include <gtest/gtest.h>

#include "cumulants/simulation.hpp"

namespace cumulants {
namespace {

NumericCumulants single_variable(const std::vector<double>& by_order) {
  NumericCumulants out;
  for (std::size_t n = 0; n < by_order.size(); ++n) out[std::vector<std::string>(n + 1, "x")] = by_order[n];
  return out;
}

// Checks the k-statistics k1..k4 of Poisson(lambda) draws against lambda,
// with bands of 5 standard errors taken from the registry variance formulas.
void expect_poisson_cumulants(double lambda, long n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> h(static_cast<std::size_t>(n));
  for (auto& v : h) v = static_cast<double>(rng.poisson(lambda));
  const SampleBatch batch({"x"}, {h});
  const NumericCumulants all_lambda = single_variable(std::vector<double>(8, lambda));

  double mean = 0;
  for (double v : h) mean += v;
  mean /= static_cast<double>(n);
  EXPECT_NEAR(mean, lambda, 5 * std::sqrt(lambda / static_cast<double>(n))) << "lambda " << lambda;
  for (const char* name : {"c2b", "c3b", "c4b"}) {
    const double k = evaluate(registry_entry(name).spec(), batch).real();
    const double se = std::sqrt(plug_in_variance(name, all_lambda, n).variance);
    EXPECT_NEAR(k, lambda, 5 * se) << name << " lambda " << lambda;
  }
}

TEST(Rng, DeterministicPerSeedAndStream) {
  Rng a(42), b(42), c(42, 1), d(43);
  std::set<std::uint64_t> firsts;
  for (int i = 0; i < 100; ++i) {
    const auto va = a.next();
    EXPECT_EQ(va, b.next());
    if (i == 0) {
      firsts.insert(va);
      firsts.insert(c.next());
      firsts.insert(d.next());
    }
  }
  EXPECT_EQ(firsts.size(), 3u);
}

TEST(Rng, UniformAndNormalMoments) {
  Rng rng(1);
  const int n = 200000;
  double su = 0, sn = 0, sn2 = 0;
  for (int i = 0; i < n; ++i) {
    const double u = rng.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    su += u;
    const double z = rng.normal();
    sn += z;
    sn2 += z * z;
  }
  EXPECT_NEAR(su / n, 0.5, 5 * std::sqrt(1.0 / 12 / n));
  EXPECT_NEAR(sn / n, 0.0, 5 / std::sqrt(n));
  EXPECT_NEAR(sn2 / n, 1.0, 5 * std::sqrt(2.0 / n));
}

TEST(Rng, PoissonByInversion) {
  expect_poisson_cumulants(3, 200000, 11);
  expect_poisson_cumulants(25, 200000, 12);
}

TEST(Rng, PoissonByRejection) {
  expect_poisson_cumulants(100, 200000, 13);
  expect_poisson_cumulants(400, 200000, 14);
}

TEST(Process, Validation) {
  ProcessSpec p = ProcessSpec::quasi_poisson_process(0);
  EXPECT_THROW(p.validate(), std::invalid_argument);
  p = ProcessSpec::unit_gaussian();
  p.variance = 0;
  EXPECT_THROW(sample(p, 10), std::invalid_argument);
  ProcessSpec f;
  f.kind = ProcessKind::finite;
  f.points = {{0}, {1}};
  f.probabilities = {0.5, 0.6};
  EXPECT_THROW(f.validate(), std::invalid_argument);
  EXPECT_EQ(parse_process_kind("poisson"), ProcessKind::quasi_poisson);
  EXPECT_THROW(parse_process_kind("cauchy"), std::invalid_argument);
}

TEST(Process, SameSeedSameBatch) {
  const ProcessSpec p = ProcessSpec::quasi_poisson_process(25, 99);
  const SampleBatch a = sample(p, 1000), b = sample(p, 1000), c = sample(p, 1000, 1);
  EXPECT_EQ(a.column("x").re, b.column("x").re);
  EXPECT_NE(a.column("x").re, c.column("x").re);
}

TEST(Process, QuasiPoissonCumulants) {
  const ProcessSpec p = ProcessSpec::quasi_poisson_process(25, 5);
  EXPECT_EQ(*population_cumulant(p, {"x"}), 0.0);
  EXPECT_EQ(*population_cumulant(p, {"x", "x"}), 1.0);
  EXPECT_DOUBLE_EQ(population_cumulant(p, {"x", "x", "x"})->real(), 0.2);
  EXPECT_DOUBLE_EQ(population_cumulant(p, {"x", "x", "x", "x"})->real(), 0.04);

  // Long right tail: the sample third moment is positive far beyond its
  // standard error sqrt(15 / m).
  const long m = 100000;
  const SampleBatch batch = sample(p, m);
  const double c3 = evaluate(registry_entry("c3c").spec(), batch).real();
  EXPECT_GT(c3, 5 * std::sqrt(15.0 / m));
  EXPECT_NEAR(c3, 0.2, 5 * std::sqrt(15.9616 / m));
}

TEST(Process, IndependentProductAndFinite) {
  ProcessSpec f;
  f.kind = ProcessKind::finite;
  f.points = {{0, 1}, {1, 1}, {2, -1}};
  f.probabilities = {0.25, 0.25, 0.5};
  ProcessSpec g = ProcessSpec::unit_gaussian();
  g.mean = 2;
  ProcessSpec p;
  p.kind = ProcessKind::independent_product;
  p.components = {f, g};
  p.seed = 3;
  EXPECT_EQ(p.width(), 3);
  EXPECT_EQ(p.column_names(), (std::vector<std::string>{"x", "y", "z"}));
  EXPECT_DOUBLE_EQ(population_cumulant(p, {"x"})->real(), 1.25);
  EXPECT_DOUBLE_EQ(population_cumulant(p, {"x", "y"})->real(), -0.75);
  EXPECT_EQ(*population_cumulant(p, {"x", "z"}), 0.0);
  EXPECT_EQ(*population_cumulant(p, {"z"}), 2.0);

  const SampleBatch batch = sample(p, 40000);
  const auto& x = batch.column("x").re;
  const auto& y = batch.column("y").re;
  long twos = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    ASSERT_TRUE(x[i] == 0 || x[i] == 1 || x[i] == 2);
    ASSERT_EQ(y[i], x[i] == 2 ? -1.0 : 1.0);
    twos += x[i] == 2;
  }
  EXPECT_NEAR(static_cast<double>(twos) / 40000, 0.5, 5 * std::sqrt(0.25 / 40000));
}

TEST(Process, ComplexGaussian) {
  ProcessSpec p;
  p.kind = ProcessKind::complex_gaussian;
  p.variance = 2;
  EXPECT_EQ(p.column_names().front(), "a");
  EXPECT_EQ(*population_cumulant(p, {"a", "a*"}), 2.0);
  EXPECT_EQ(*population_cumulant(p, {"a", "a"}), 0.0);
  const SampleBatch batch = sample(p, 20000);
  ASSERT_TRUE(batch.column("a").is_complex());
  const auto v = evaluate(derive_estimator({"a", "a*"}), batch);
  EXPECT_NEAR(v.real(), 2.0, 5 * 2.0 / std::sqrt(20000.0));
}

TEST(EstimatorRef, Parsing) {
  const EstimatorRef plain = parse_estimator_ref("c3c");
  EXPECT_EQ(plain.entry->name, "c3c");
  EXPECT_TRUE(plain.binding.empty());
  const EstimatorRef merged = parse_estimator_ref("c3a(x, x, z)");
  EXPECT_EQ(merged.binding, (Binding{{"x", "x"}, {"y", "x"}, {"z", "z"}}));
  const EstimatorRef complex = parse_estimator_ref("c4cb(a,a*,a,a*)");
  EXPECT_EQ(complex.binding, (Binding{{"a", "a"}, {"b", "a"}}));
  EXPECT_THROW(parse_estimator_ref("c3z"), UnsupportedEstimatorError);
  EXPECT_THROW(parse_estimator_ref("c3a(x,y)"), std::invalid_argument);
  EXPECT_THROW(parse_estimator_ref("c3b(x,y,x)"), std::invalid_argument);
  EXPECT_THROW(parse_estimator_ref("c4cb(a,a,b,b*)"), std::invalid_argument);
}

TEST(Experiment, IndependentOfThreadCount) {
  const ProcessSpec p = ProcessSpec::quasi_poisson_process(25, 7);
  const std::vector<EstimatorRef> refs = {parse_estimator_ref("c3c"), parse_estimator_ref("c3cgo")};
  ExperimentOptions one, three;
  one.threads = 1;
  three.threads = 3;
  const ExperimentReport a = run_experiment(p, refs, 500, 20, one);
  const ExperimentReport b = run_experiment(p, refs, 500, 20, three);
  for (std::size_t e = 0; e < refs.size(); ++e) {
    EXPECT_EQ(a.estimators[e].estimates, b.estimators[e].estimates);
    EXPECT_EQ(a.estimators[e].variance, b.estimators[e].variance);
  }
  EXPECT_EQ(a.estimators[0].estimates.size(), 20u);
  EXPECT_EQ(a.at("c3c").estimates.front(), evaluate(registry_entry("c3c").spec(), sample(p, 500)));
}

TEST(Experiment, RejectsTooFewSamples) {
  EXPECT_THROW(run_experiment(ProcessSpec::unit_gaussian(), {parse_estimator_ref("c4b")}, 3, 5), DataError);
}

TEST(Experiment, TheoryOverlay) {
  const ProcessSpec p = ProcessSpec::quasi_poisson_process(25, 1);
  ExperimentOptions o;
  const ExperimentReport r = run_experiment(p, {parse_estimator_ref("c3c"), parse_estimator_ref("c3cgo")}, 100, 2, o);
  EXPECT_NEAR(*r.at("c3c").theory_scaled_variance, 15.9616, 1e-12);
  EXPECT_NEAR(r.at("c3c").target->real(), 0.2, 1e-15);
}

TEST(Experiment, GaussianThirdMomentScatter) {
  const ProcessSpec p = ProcessSpec::unit_gaussian(1, 21);
  const long M = 3000;
  const ExperimentReport r = run_experiment(p, {parse_estimator_ref("c3c")}, 100, M);
  const auto& s = r.at("c3c");
  EXPECT_DOUBLE_EQ(*s.theory_scaled_variance, 15.0);
  EXPECT_NEAR(s.scaled_variance, 15.0, 4 * 15.0 * std::sqrt(2.0 / M));
  EXPECT_NEAR(s.mean.real(), 0.0, 5 * s.mean_standard_error);
}

TEST(Experiment, TwoVariableGaussOptimalOrdering) {
  const ProcessSpec p = ProcessSpec::unit_gaussian(3, 22);
  const long M = 4000;
  const ExperimentReport r = run_experiment(
      p, {parse_estimator_ref("c3h"), parse_estimator_ref("c3hgo"), parse_estimator_ref("c3a(x,x,z)")}, 10, M);
  const double expected[] = {3.0, 24.0 / 11.0, 200.0 / 72.0};
  for (std::size_t e = 0; e < 3; ++e) {
    const auto& s = r.estimators[e];
    EXPECT_NEAR(*s.theory_scaled_variance, expected[e], 1e-12) << s.estimator;
    EXPECT_NEAR(s.scaled_variance, expected[e], 4 * expected[e] * std::sqrt(2.0 / M)) << s.estimator;
  }
  EXPECT_LT(r.at("c3hgo").scaled_variance, r.at("c3h").scaled_variance);
  EXPECT_LT(r.at("c3hgo").scaled_variance, r.at("c3a(x,x,z)").scaled_variance);
}

TEST(Experiment, ConditionsViolatedMeansNoTheory) {
  ProcessSpec p;
  p.kind = ProcessKind::complex_gaussian;
  p.seed = 4;
  const ExperimentReport r =
      run_experiment(p, {parse_estimator_ref("c4ca(a,a*,a,a*)"), parse_estimator_ref("c4cb(a,a*,a,a*)")}, 50, 4);
  EXPECT_FALSE(r.at("c4ca(a,a*,a,a*)").theory_scaled_variance.has_value());
  EXPECT_TRUE(r.at("c4cb(a,a*,a,a*)").theory_scaled_variance.has_value());
  EXPECT_EQ(*r.at("c4cb(a,a*,a,a*)").target, 0.0);
}

TEST(ConsistencyScan, VarianceDecaysAsOneOverM) {
  const ProcessSpec p = ProcessSpec::unit_gaussian(1, 31);
  const long M = 4000;
  const auto scan = consistency_scan(p, parse_estimator_ref("c2b"), {10, 40}, M);
  ASSERT_EQ(scan.size(), 2u);
  const double ratio = scan[0].variance / scan[1].variance;
  // Theory: (2*10/9 / 10) / (2*40/39 / 40) = 4 * 39/36.
  EXPECT_NEAR(ratio, 4 * 39.0 / 36.0, 4 * ratio * std::sqrt(4.0 / M));
  EXPECT_DOUBLE_EQ(*scan[0].theory_scaled_variance, 20.0 / 9.0);
  EXPECT_THROW(consistency_scan(p, parse_estimator_ref("c2b"), {40, 10}, 10), std::invalid_argument);
}

}  // namespace
}  // namespace cumulants
