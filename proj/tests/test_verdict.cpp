#include <cmath>

#include <gtest/gtest.h>

#include "decaykit/verdict.hpp"
#include "oracles.hpp"

using namespace decaykit;

namespace {

template <class F>
Trajectory sampled(const F& fn, double T, std::size_t n = 4001) {
  Trajectory tr;
  for (double t : linspace(0.0, T, n)) tr.push(t, fn(t));
  return tr;
}

}  // namespace

TEST(DecayVerdict, ExponentialDecays) {
  const auto v = decay_verdict(sampled([](double t) { return std::exp(-t); }, 64), 1e-3);
  EXPECT_EQ(v.status, DecayStatus::decays);
  EXPECT_NEAR(v.last_window_sup, std::exp(-32.0), 1e-15);
  EXPECT_EQ(v.horizon, 64.0);
}

TEST(DecayVerdict, ConstantHasFloor) {
  const auto v = decay_verdict(sampled([](double) { return 1.0; }, 64), 1e-3);
  EXPECT_EQ(v.status, DecayStatus::no_decay);
  ASSERT_TRUE(v.limit.has_value());
  EXPECT_NEAR(*v.limit, 1.0, 1e-12);
  EXPECT_EQ(v.window_infima.size(), 3u);
}

TEST(DecayVerdict, ShiftedExponentialFloor) {
  const auto v = decay_verdict(sampled([](double t) { return std::exp(-t) + 0.1; }, 64), 1e-3);
  EXPECT_EQ(v.status, DecayStatus::no_decay);
  EXPECT_NEAR(*v.limit, 0.1, 1e-3);
}

TEST(DecayVerdict, SlowDecayIsInconclusive) {
  const auto v = decay_verdict(sampled([](double t) { return 1.0 / std::log(t + 2.0); }, 1e4), 1e-3);
  EXPECT_EQ(v.status, DecayStatus::inconclusive);
  EXPECT_FALSE(v.limit.has_value());
}

TEST(DecayVerdict, PowerLawRateFit) {
  const auto v = decay_verdict(sampled([](double t) { return std::pow(1 + t, -1.5); }, 1e4), 1e-3);
  EXPECT_EQ(v.status, DecayStatus::decays);
  ASSERT_TRUE(v.rate.has_value());
  EXPECT_NEAR(*v.rate, 1.5, 0.02);
}

TEST(DecayVerdict, RejectsShortOrBadInput) {
  Trajectory one;
  one.push(0.0, 1.0);
  EXPECT_THROW(decay_verdict(one, 1e-3), ConfigError);
  Trajectory late;
  late.push(10.0, 1.0);
  late.push(11.0, 1.0);
  EXPECT_THROW(decay_verdict(late, 1e-3), ConfigError);
  EXPECT_THROW(decay_verdict(sampled([](double) { return 1.0; }, 8), 0.0), ConfigError);
  EXPECT_THROW(decay_verdict(sampled([](double) { return -1.0; }, 8), 1e-3), ConfigError);
  EXPECT_THROW(decay_verdict(Trajectory(2), 1e-3), ConfigError);
}

TEST(DecayVerdict, StatusParse) {
  for (auto s : {DecayStatus::decays, DecayStatus::no_decay, DecayStatus::inconclusive})
    EXPECT_EQ(parse_decay_status(to_string(s)), s);
  EXPECT_THROW(parse_decay_status("maybe"), ConfigError);
}

TEST(DecayVerdictProperty, ScaleEquivariance) {
  oracle::Gen gen(8);
  for (int i = 0; i < 30; ++i) {
    const double c = gen.log_uniform(1e-2, 1e2), eps = gen.log_uniform(1e-4, 1e-1);
    const double floor = gen.integer(0, 1) ? gen.uniform(0.0, 1.0) : 0.0, rate = gen.uniform(0.05, 2);
    auto fn = [&](double t) { return std::exp(-rate * t) + floor; };
    const auto tr = sampled(fn, 100), scaled = sampled([&](double t) { return c * fn(t); }, 100);
    const auto a = decay_verdict(tr, eps), b = decay_verdict(scaled, c * eps);
    EXPECT_EQ(a.status, b.status) << "c=" << c << " eps=" << eps << " floor=" << floor;
    EXPECT_NEAR(b.last_window_sup, c * a.last_window_sup, 1e-12 * c * (1 + a.last_window_sup));
  }
}

TEST(IntegralCertificate, ConvergentAndDivergent) {
  const auto y = sampled([](double t) { return std::exp(-t); }, 200);
  auto omega = [](double r) { return r; };
  const auto conv = integral_certificate(y, omega, [](double) { return 1.0; }, 1e-6);
  EXPECT_TRUE(conv.converged());
  EXPECT_NEAR(conv.estimate, 1.0, 1e-3);

  const auto flat = sampled([](double) { return 1.0; }, 200);
  const auto div = integral_certificate(flat, omega, [](double) { return 1.0; }, 1e-6);
  EXPECT_FALSE(div.converged());
}

TEST(IncrementCheck, DecreasingTrajectoryHasNoViolations) {
  const auto w = sampled([](double s) { return std::exp(-s); }, 20, 2001);
  const auto chk = increment_bound_check(w, [](double) { return 0.0; }, 500, 1);
  EXPECT_TRUE(chk.passed());
  EXPECT_GT(chk.pairs, 400u);
  EXPECT_LE(chk.worst_margin, 0.0);
}

TEST(IncrementCheck, GrowthBeyondBetaIsFlagged) {
  const auto w = sampled([](double s) { return s; }, 10, 101);
  const auto ok = increment_bound_check(w, [](double) { return 1.0; }, 200, 3);
  EXPECT_TRUE(ok.passed());
  EXPECT_NEAR(ok.worst_margin, 0.0, 1e-9);
  const auto bad = increment_bound_check(w, [](double) { return 0.5; }, 200, 3);
  EXPECT_FALSE(bad.passed());
  EXPECT_EQ(bad.violations, bad.pairs);
}

TEST(IncrementCheck, SeedDeterminism) {
  const auto w = sampled([](double s) { return std::sin(s) + 2; }, 10, 101);
  auto beta = [](double) { return 1.0; };
  const auto a = increment_bound_check(w, beta, 100, 5), b = increment_bound_check(w, beta, 100, 5);
  EXPECT_EQ(a.pairs, b.pairs);
  EXPECT_EQ(a.worst_margin, b.worst_margin);
}
