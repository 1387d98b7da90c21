#include <cmath>
#include <sstream>

#include <gtest/gtest.h>

#include "decaykit/odesolve.hpp"
#include "oracles.hpp"

using namespace decaykit;

namespace {

SolverConfig cfg_for(double t_end, double dt) {
  SolverConfig c;
  c.t_end = t_end;
  c.dt = dt;
  return c;
}

const auto kIdentity = [](double g) { return g; };
const auto kOne = [](double) { return 1.0; };
const auto kZero = [](double) { return 0.0; };

}  // namespace

TEST(Surrogate, LinearDecay) {
  const auto tr = solve_surrogate(kOne, kIdentity, kZero, 1.0, cfg_for(1.0, 1e-2));
  EXPECT_NEAR(tr.value(tr.size() - 1), std::exp(-1.0), 1e-9);
  EXPECT_EQ(tr.end_time(), 1.0);
  EXPECT_TRUE(tr.complete);
}

TEST(Surrogate, ZeroStaysZero) {
  const auto tr = solve_surrogate(kOne, kIdentity, kZero, 0.0, cfg_for(5.0, 1e-2));
  for (std::size_t i = 0; i < tr.size(); ++i) EXPECT_EQ(tr.value(i), 0.0);
}

TEST(Surrogate, ConstantForcingRelaxes) {
  const auto tr = solve_surrogate(kOne, kIdentity, [](double) { return 0.5; }, 0.0, cfg_for(10.0, 1e-2));
  EXPECT_NEAR(tr.value(tr.size() - 1), 0.5 * (1 - std::exp(-10.0)), 1e-9);
  for (double t : {0.5, 2.0, 7.25}) EXPECT_NEAR(tr.at(t), oracle::linear_relaxation(0.0, 0.5, t), 1e-8);
}

TEST(Surrogate, ClipsAtZeroAndCounts) {
  // f(g) = 1 drives g through zero in finite time
  const auto tr = solve_surrogate(kOne, [](double) { return 1.0; }, kZero, 0.5, cfg_for(2.0, 1e-2));
  EXPECT_EQ(tr.value(tr.size() - 1), 0.0);
  EXPECT_NE(tr.metadata.at("clip_events"), "0");
  EXPECT_NEAR(std::stod(tr.metadata.at("first_clip_time")), 0.5, 0.011);
}

TEST(Surrogate, RejectsBadConfig) {
  EXPECT_THROW(solve_surrogate(kOne, kIdentity, kZero, -1.0, cfg_for(1, 0.1)), ConfigError);
  EXPECT_THROW(solve_surrogate(kOne, kIdentity, kZero, 1.0, cfg_for(1, 0.0)), ConfigError);
  EXPECT_THROW(solve_surrogate(kOne, kIdentity, kZero, 1.0, cfg_for(-1, 0.1)), ConfigError);
}

TEST(Surrogate, StepBudgetGivesPartialTrajectory) {
  auto c = cfg_for(1.0, 1e-2);
  c.max_steps = 10;
  const auto tr = solve_surrogate(kOne, kIdentity, kZero, 1.0, c);
  EXPECT_FALSE(tr.complete);
  EXPECT_NEAR(tr.end_time(), 0.1, 1e-12);
}

TEST(Surrogate, RecordThinningKeepsEndpoint) {
  auto c = cfg_for(100.0, 1e-3);
  c.max_records = 101;
  const auto tr = solve_surrogate(kOne, kIdentity, kZero, 1.0, c);
  EXPECT_LE(tr.size(), 101u);
  EXPECT_EQ(tr.end_time(), 100.0);
}

TEST(Surrogate, FourthOrderUnderStepHalving) {
  auto a = [](double t) { return std::pow(1 + t, -0.5); };
  auto b = [](double t) { return std::pow(1 + t, -2.0); };
  auto f = [](double g) { return g * g + g; };
  // exact value unknown: use successive differences
  double prev = 0, prev_diff = 0;
  std::vector<double> orders;
  for (double dt : {0.4, 0.2, 0.1, 0.05}) {
    const auto tr = solve_surrogate(a, f, b, 1.0, cfg_for(4.0, dt));
    const double v = tr.value(tr.size() - 1);
    if (prev != 0) {
      const double d = std::abs(v - prev);
      if (prev_diff != 0) orders.push_back(std::log2(prev_diff / d));
      prev_diff = d;
    }
    prev = v;
  }
  ASSERT_EQ(orders.size(), 2u);
  for (double p : orders) EXPECT_GE(p, 3.5);
}

TEST(Surrogate, HalvingOnToleranceMatchesFineSolve) {
  auto c = cfg_for(5.0, 0.5);
  c.halve_on_tolerance = true;
  c.atol = 1e-12;
  c.rtol = 1e-12;
  const auto tr = solve_surrogate(kOne, [](double g) { return g * g; }, kZero, 1.0, c);
  EXPECT_NEAR(tr.value(tr.size() - 1), 1.0 / 6.0, 1e-10);  // g = 1/(1+t)
}

TEST(SurrogateProperty, ComparisonInForcingAndInitialValue) {
  oracle::Gen gen(2024);
  for (int i = 0; i < 20; ++i) {
    const double g0 = gen.uniform(0, 2), dg = gen.uniform(0, 1);
    const double c1 = gen.uniform(0, 1), dc = gen.uniform(0, 1);
    const double al = gen.uniform(0.1, 1.0);
    auto a = [al](double t) { return std::pow(1 + t, -al); };
    auto b1 = [c1](double t) { return c1 * std::pow(1 + t, -2.0); };
    auto b2 = [c1, dc](double t) { return (c1 + dc) * std::pow(1 + t, -2.0); };
    auto f = [](double g) { return g * std::sqrt(g); };
    const auto lo = solve_surrogate(a, f, b1, g0, cfg_for(20, 0.01));
    const auto hi = solve_surrogate(a, f, b2, g0 + dg, cfg_for(20, 0.01));
    for (std::size_t k = 0; k < lo.size(); ++k) ASSERT_LE(lo.value(k), hi.value(k) + 1e-12) << "sample " << i;
  }
}

TEST(Reparameterize, MatchesLogClock) {
  auto a = [](double t) { return 1.0 / (1.0 + t); };
  const auto m = reparameterize(a, 100.0, 1e-12);
  for (double t : {0.0, 0.3, 1.0, 17.5, 100.0}) EXPECT_NEAR(m.forward(t), std::log1p(t), 1e-11);
  for (double s : {0.0, 0.5, 2.0, std::log(101.0)}) EXPECT_NEAR(m.inverse(s), std::expm1(s), 1e-9 * (1 + std::expm1(s)));
  EXPECT_NEAR(m.s_end(), std::log(101.0), 1e-11);
}

TEST(Reparameterize, RejectsNonPositiveRate) {
  EXPECT_THROW(reparameterize([](double t) { return 1.0 - t; }, 2.0, 1e-10), ValidationError);
  EXPECT_THROW(reparameterize(kZero, 2.0, 1e-10), ValidationError);
  EXPECT_THROW(reparameterize(kOne, 0.0, 1e-10), ConfigError);
}

TEST(Reparameterize, OutOfRangeQueries) {
  const auto m = reparameterize(kOne, 1.0, 1e-10);
  EXPECT_THROW(m.forward(2.0), DomainError);
  EXPECT_THROW(m.inverse(-0.1), DomainError);
}

TEST(ReparameterizeProperty, RoundTrip) {
  oracle::Gen gen(99);
  auto a = [](double t) { return std::pow(1 + t, -0.5) * (1.2 + std::sin(t)); };
  const auto m = reparameterize(a, 1000.0, 1e-12);
  for (int i = 0; i < 200; ++i) {
    const double t = gen.uniform(0, 1000);
    EXPECT_NEAR(m.inverse(m.forward(t)), t, 1e-9) << t;
  }
}

TEST(TransformTrajectory, IdentityClock) {
  const auto tr = solve_surrogate(kOne, kIdentity, kZero, 1.0, cfg_for(4.0, 0.01));
  const auto w = transform_trajectory(tr, reparameterize(kOne, 4.0, 1e-12));
  ASSERT_EQ(w.size(), tr.size());
  for (std::size_t i = 0; i < w.size(); i += 37) EXPECT_NEAR(w.value(i), tr.at(w.time(i)), 1e-9);
  EXPECT_EQ(w.metadata.at("clock"), "s");
}

TEST(TransformTrajectory, HarmonicRateGivesExponentialInS) {
  // g' = -g/(1+t) has g = 1/(1+t); with s = ln(1+t) that is w = e^-s
  auto a = [](double t) { return 1.0 / (1.0 + t); };
  const auto tr = solve_surrogate(a, kIdentity, kZero, 1.0, cfg_for(50.0, 0.01));
  const auto w = transform_trajectory(tr, reparameterize(a, 50.0, 1e-12), 501);
  // linear interpolation of g: error <= dt^2/8 max g'' = 1e-4 / 8 * 2
  for (std::size_t i = 0; i < w.size(); i += 25) EXPECT_NEAR(w.value(i), std::exp(-w.time(i)), 2.5e-5);
}

TEST(TransformTrajectory, ConstantStaysConstant) {
  Trajectory tr;
  for (int i = 0; i <= 10; ++i) tr.push(i, 3.0);
  const auto w = transform_trajectory(tr, reparameterize([](double t) { return 2.0 + t; }, 10.0, 1e-12), 50);
  for (std::size_t i = 0; i < w.size(); ++i) EXPECT_EQ(w.value(i), 3.0);
  EXPECT_NEAR(w.end_time(), 20.0 + 50.0, 1e-9);
}

TEST(Peano, FirstIterateOnUnitInterval) {
  auto A = [](double, const State& u) { return State{-u[0]}; };
  auto f = [](double) { return State{0.0}; };
  const auto its = peano_iterates(A, f, {1.0}, {1}, 1.0, 1e-3);
  const auto& u1 = its[0];
  for (double t : {0.0, 0.25, 0.5, 1.0}) EXPECT_NEAR(u1.at(t), 1.0 - t, 1e-12);
}

TEST(Peano, ErrorsHalveWithDelay) {
  auto A = [](double, const State& u) { return State{-u[0]}; };
  auto f = [](double) { return State{0.0}; };
  const auto its = peano_iterates(A, f, {1.0}, {8, 16, 32, 64}, 2.0, 1e-3);
  Trajectory ref;
  for (int i = 0; i <= 2000; ++i) ref.push(i * 1e-3, std::exp(-i * 1e-3));
  std::vector<double> e;
  for (const auto& it : its) e.push_back(sup_distance(it, ref));
  for (std::size_t i = 0; i + 1 < e.size(); ++i) EXPECT_LE(e[i + 1], 0.75 * e[i]) << i;
}

TEST(Peano, ForcedSystem) {
  // u' = -u + 1 from u0 = 0 approaches 1 - e^-t
  auto A = [](double, const State& u) { return State{-u[0], -2 * u[1]}; };
  auto f = [](double) { return State{1.0, 0.0}; };
  const auto its = peano_iterates(A, f, {0.0, 1.0}, {200}, 3.0, 1e-3);
  EXPECT_NEAR(its[0].at(3.0, 0), 1 - std::exp(-3.0), 5e-3);
  EXPECT_NEAR(its[0].at(3.0, 1), std::exp(-6.0), 5e-3);
}

TEST(Peano, CoarseStepRejected) {
  auto A = [](double, const State& u) { return u; };
  auto f = [](double) { return State{0.0}; };
  EXPECT_THROW(peano_iterates(A, f, {1.0}, {64}, 1.0, 0.01), ConfigError);
  EXPECT_THROW(peano_iterates(A, f, {1.0}, {0}, 1.0, 1e-3), ConfigError);
  EXPECT_THROW(peano_iterates(A, f, {}, {1}, 1.0, 1e-3), ConfigError);
}

TEST(System, ScalarDecayBothSchemes) {
  auto field = [](double, const State& u) { return State{-u[0]}; };
  auto c = cfg_for(1.0, 1e-3);
  EXPECT_NEAR(solve_system(field, {1.0}, c).at(1.0), std::exp(-1.0), 1e-10);
  c.scheme = Scheme::semi_implicit;
  EXPECT_NEAR(solve_system(field, {1.0}, c).at(1.0), std::exp(-1.0), 1e-3);
}

TEST(System, ZeroFieldKeepsState) {
  auto field = [](double, const State& u) { return State(u.size(), 0.0); };
  const auto tr = solve_system(field, {1.0, -2.0, 3.0}, cfg_for(2.0, 0.1));
  EXPECT_EQ(tr.value(tr.size() - 1, 1), -2.0);
  EXPECT_EQ(tr.dim(), 3u);
}

TEST(System, RotationPreservesNorm) {
  auto field = [](double, const State& u) { return State{-u[1], u[0]}; };
  const auto tr = solve_system(field, {1.0, 0.0}, cfg_for(10.0, 1e-2));
  const double x = tr.value(tr.size() - 1, 0), y = tr.value(tr.size() - 1, 1);
  EXPECT_NEAR(std::hypot(x, y), 1.0, 1e-6);
  EXPECT_NEAR(x, std::cos(10.0), 1e-6);
}

TEST(System, BlowUpAbortsWithPartialTrajectory) {
  auto field = [](double, const State& u) { return State{u[0] * u[0]}; };
  const auto tr = solve_system(field, {1.0}, cfg_for(2.0, 1e-3));
  EXPECT_FALSE(tr.complete);
  EXPECT_LT(tr.end_time(), 1.01);
}

TEST(TrajectoryCsv, RoundTrip) {
  const auto tr = solve_surrogate(kOne, kIdentity, kZero, 1.0, cfg_for(1.0, 0.1));
  std::stringstream ss(to_csv(tr));
  const auto back = read_csv(ss);
  ASSERT_EQ(back.size(), tr.size());
  for (std::size_t i = 0; i < tr.size(); ++i) {
    EXPECT_EQ(back.time(i), tr.time(i));
    EXPECT_EQ(back.value(i), tr.value(i));
  }
  EXPECT_EQ(back.metadata.at("scheme"), "rk4");
  EXPECT_EQ(back.columns, std::vector<std::string>{"g"});
  const std::string plain = to_csv(tr, false);
  EXPECT_EQ(plain.rfind("t,g\n0,1\n", 0), 0u);
}

TEST(TrajectoryCsv, RejectsRaggedRows) {
  std::stringstream ss("t,g\n0,1\n1\n");
  EXPECT_THROW(read_csv(ss), ConfigError);
}
