#include <cmath>

#include <gtest/gtest.h>

#include "decaykit/hypothesis.hpp"
#include "oracles.hpp"

using namespace decaykit;

namespace {

CheckConfig short_cfg(double T = 1e4) {
  CheckConfig c;
  c.horizon = T;
  return c;
}

UnivariateFn tab(const std::vector<double>& t, double (*fn)(double)) {
  std::vector<double> v;
  for (double x : t) v.push_back(fn(x));
  return UnivariateFn::tabulated(t, v);
}

}  // namespace

TEST(Report, OverallCombinesConditions) {
  HypothesisReport r;
  EXPECT_EQ(r.overall(), Status::inconclusive);
  ConditionRecord a{"a", Status::pass, {}, 1.0};
  a.witness.values["x"] = 1;
  r.add(a);
  EXPECT_EQ(r.overall(), Status::pass);
  ConditionRecord b = a;
  b.name = "b", b.status = Status::inconclusive, b.horizon = 5.0;
  r.add(b);
  EXPECT_EQ(r.overall(), Status::inconclusive);
  ConditionRecord c = a;
  c.name = "c", c.status = Status::fail;
  r.add(c);
  EXPECT_EQ(r.overall(), Status::fail);
  EXPECT_EQ(r.horizon(), 5.0);
  EXPECT_NE(r.find("b"), nullptr);
  EXPECT_EQ(r.find("zz"), nullptr);
}

TEST(Report, RecordWithoutWitnessRejected) {
  HypothesisReport r;
  EXPECT_THROW(r.add(ConditionRecord{"bare", Status::pass, {}, 0.0}), ValidationError);
}

TEST(Status, ParseRoundTrip) {
  for (Status s : {Status::pass, Status::fail, Status::inconclusive}) EXPECT_EQ(parse_status(to_string(s)), s);
  EXPECT_THROW(parse_status("ok"), ConfigError);
}

TEST(BuildF, MatchesClosedFormMajorant) {
  const auto f = BivariateFn::analytic("piecewise_y(1, 1, 1 + (y-1)*x)");
  const auto grid = uniform_grid(20, 0.1);
  const auto F1 = build_F(f, 1.0, grid), F2 = build_F(f, 2.0, grid);
  for (double t : {0.0, 1.0, 2.0, 5.0, 20.0}) {
    EXPECT_NEAR(F1(t), oracle::piecewise_F(t, 1.0), 1e-8) << t;
    EXPECT_NEAR(F2(t), oracle::piecewise_F(t, 2.0), 1e-8 * (1 + t * t)) << t;
  }
  EXPECT_THROW(build_F(f, 1.0, {1.0, 2.0}), ConfigError);
  EXPECT_THROW(build_F(f, -1.0, grid), ConfigError);
}

TEST(BuildFProperty, MonotoneInTimeAndLevel) {
  oracle::Gen gen(7);
  const auto f = BivariateFn::analytic("y * exp(-y) * (1 + x) + 0.01");
  const auto grid = uniform_grid(10, 0.25);
  for (int i = 0; i < 10; ++i) {
    const double v1 = gen.uniform(0, 4), v2 = v1 + gen.uniform(0, 4);
    const auto Fa = build_F(f, v1, grid), Fb = build_F(f, v2, grid);
    double prev = -1;
    for (double t : grid) {
      EXPECT_GE(Fa(t), prev);
      EXPECT_LE(Fa(t), Fb(t) * (1 + 1e-10) + 1e-12);
      prev = Fa(t);
    }
  }
}

TEST(UcCertificate, LinearPassesWithModulusDelta) {
  auto cfg = short_cfg(200);
  const auto rec = uc_certificate(UnivariateFn::monomial(1, 1), cfg);
  EXPECT_EQ(rec.status, Status::pass);
  EXPECT_NEAR(rec.witness.values.at("modulus[delta=0.1]"), 0.1, 1e-12);
  EXPECT_NEAR(rec.witness.values.at("modulus[delta=1]"), 1.0, 1e-12);
}

TEST(UcCertificate, QuadraticFails) {
  const auto grid = uniform_grid(200, 0.5);
  const auto rec = uc_certificate(tab(grid, [](double t) { return t + t * t / 2; }), short_cfg(200));
  EXPECT_EQ(rec.status, Status::fail);
}

TEST(UcCertificate, ZeroFunctionPasses) {
  EXPECT_EQ(uc_certificate(UnivariateFn::constant(0), short_cfg(200)).status, Status::pass);
}

TEST(UcCertificate, DeltaMustFitSmallestSubhorizon) {
  auto cfg = short_cfg(200);
  cfg.deltas = {20.0};  // smallest sub-horizon is 200/16
  EXPECT_THROW(uc_certificate(UnivariateFn::monomial(1, 1), cfg), ConfigError);
}

TEST(UcCertificate, LevelSweep) {
  const auto f = BivariateFn::analytic("piecewise_y(1, 1, 1 + (y-1)*x)");
  const auto cfg = short_cfg(200);
  for (double v : {0.25, 0.5, 1.0}) EXPECT_EQ(check_thm_2_1(f, v, 0.1, cfg).overall(), Status::pass) << v;
  for (double v : {1.5, 2.0}) EXPECT_EQ(check_thm_2_1(f, v, 0.1, cfg).overall(), Status::fail) << v;
}

TEST(Regularity, HarmonicProfileHasRatioTwo) {
  auto phi = [](double t) { return 1.0 / (1.0 + t); };
  const auto recs = regularity_profile(phi, 0.5, short_cfg(1e6));
  ASSERT_EQ(recs.size(), 2u);
  EXPECT_EQ(recs[0].status, Status::pass);
  EXPECT_EQ(recs[1].status, Status::pass);
  EXPECT_NEAR(recs[1].witness.values.at("M_hat"), 2.0, 1e-9);
}

TEST(Regularity, ConstantProfile) {
  const auto recs = regularity_profile(UnivariateFn::constant(1), 0.5, short_cfg(1e4));
  EXPECT_EQ(recs[0].status, Status::pass);
  EXPECT_EQ(recs[1].witness.values.at("M_hat"), 1.0);
  EXPECT_NEAR(recs[0].witness.values.at("rho_at_horizon"), 1e4 - 0.5, 1e-9);
}

TEST(Regularity, PowerSweepAgainstClosedForm) {
  const double T = 1e6;
  for (double alpha : {0.1, 0.25, 0.5, 0.75, 0.9}) {
    auto phi = [alpha](double t) { return std::pow(1.0 + t, -alpha); };
    const auto recs = regularity_profile(phi, 0.5, short_cfg(T));
    EXPECT_EQ(recs[0].status, Status::pass) << alpha;
    EXPECT_EQ(recs[1].status, Status::pass) << alpha;
    // the ratio ((1+t) / (1 + t - (1+t)^alpha / 2))^alpha is largest at the start of the last window,
    // which is the largest s_min 2^k below T
    double t = 10.0;
    while (2 * t < T) t *= 2;
    const double l = t - 0.5 * std::pow(1 + t, alpha);
    const double expect = std::pow((1 + t) / (1 + l), alpha);
    EXPECT_NEAR(recs[1].witness.values.at("M_hat"), expect, 1e-6 * expect) << alpha;
  }
  for (double alpha : {1.25, 1.5, 2.0}) {
    auto phi = [alpha](double t) { return std::pow(1.0 + t, -alpha); };
    EXPECT_EQ(regularity_profile(phi, 0.5, short_cfg(T))[0].status, Status::fail) << alpha;
  }
}

TEST(Regularity, RejectsBadInputs) {
  EXPECT_THROW(regularity_profile(UnivariateFn::constant(1), 0.0, short_cfg()), ConfigError);
  EXPECT_THROW(regularity_profile(UnivariateFn::constant(0), 0.5, short_cfg()), ConfigError);
}

TEST(GrowthBound, MatchingProfilePasses) {
  const auto f = BivariateFn::analytic("y * (1 + x)^(-0.5)");
  auto phi = [](double t) { return std::pow(1.0 + t, -0.5); };
  const auto cfg = short_cfg(1e4);
  const auto integral = growth_bound_check(f, 1.0, phi, GrowthMode::integral_theta(), cfg);
  EXPECT_EQ(integral.status, Status::pass);
  EXPECT_LE(integral.witness.values.at("theta_hat"), 1.0 + 1e-9);
  const auto point = growth_bound_check(f, 1.0, phi, GrowthMode::pointwise(), cfg);
  EXPECT_EQ(point.status, Status::pass);
  EXPECT_NEAR(point.witness.values.at("C_tilde_hat"), 1.0, 1e-12);
  const auto power = growth_bound_check(f, 1.0, phi, GrowthMode::power_law(0.5), cfg);
  EXPECT_EQ(power.status, Status::pass);
  EXPECT_LE(power.witness.values.at("kappa_hat"), 1.0 + 1e-9);
}

TEST(GrowthBound, GrowingSliceFails) {
  const auto f = BivariateFn::analytic("y * (1 + x)^0.5");
  auto phi = [](double t) { return std::pow(1.0 + t, -0.5); };
  EXPECT_EQ(growth_bound_check(f, 1.0, phi, GrowthMode::pointwise(), short_cfg(1e4)).status, Status::fail);
  EXPECT_THROW(growth_bound_check(f, 0.0, phi, GrowthMode::pointwise(), short_cfg(1e4)), ConfigError);
}

TEST(RatioLimsup, Examples) {
  auto phi = [](double t) { return 1.0 / (1.0 + t); };
  const auto ok = ratio_limsup([](double t) { return 2.0 / (1.0 + t); }, phi, short_cfg(1e6));
  EXPECT_EQ(ok.status, Status::pass);
  EXPECT_NEAR(ok.witness.values.at("A_hat"), 2.0, 1e-12);
  EXPECT_EQ(ratio_limsup([](double) { return 1.0; }, phi, short_cfg(1e6)).status, Status::fail);
}

TEST(RatioLimsupProperty, ScalesLinearly) {
  oracle::Gen gen(11);
  auto phi = [](double t) { return std::pow(1.0 + t, -0.5); };
  auto h = [](double t) { return std::pow(1.0 + t, -0.75) + std::pow(1.0 + t, -0.5); };
  const double base = ratio_limsup(h, phi, short_cfg()).witness.values.at("A_hat");
  for (int i = 0; i < 20; ++i) {
    const double c = gen.log_uniform(1e-3, 1e3);
    const auto scaled = ratio_limsup([&](double t) { return c * h(t); }, phi, short_cfg());
    EXPECT_NEAR(scaled.witness.values.at("A_hat"), c * base, 1e-12 * c * base);
  }
}

TEST(RatioToZero, Examples) {
  auto a = [](double t) { return std::pow(1.0 + t, -0.5); };
  EXPECT_EQ(ratio_to_zero("r", [](double t) { return std::pow(1.0 + t, -2.0); }, a, short_cfg(1e6)).status, Status::pass);
  EXPECT_EQ(ratio_to_zero("r", [](double t) { return 0.5 * std::pow(1.0 + t, -0.5); }, a, short_cfg(1e6)).status,
            Status::fail);
  // denominator underflow with a vanishing numerator reads as 0/0 = 0
  EXPECT_EQ(ratio_to_zero("r", [](double) { return 0.0; }, [](double t) { return std::exp(-t); }, short_cfg(1e4)).status,
            Status::pass);
}

TEST(Assumptions, PowerLawPair) {
  auto gamma = UnivariateFn::power_law(1, 0.5, 1), beta = UnivariateFn::power_law(1, 2, 1);
  const auto cfg = short_cfg(1e6);
  EXPECT_EQ(assumption_check(gamma, beta, Assumption::A, 1.0, cfg).overall(), Status::pass);
  EXPECT_EQ(assumption_check(gamma, beta, Assumption::B, 1.0, cfg).overall(), Status::pass);
  EXPECT_EQ(assumption_check(gamma, beta, Assumption::C, 0.5, cfg).overall(), Status::pass);
  EXPECT_THROW(assumption_check(gamma, beta, Assumption::C, 1.5, cfg), ConfigError);
}

TEST(Assumptions, ExponentialDissipationFailsA) {
  const auto rep =
      assumption_check(UnivariateFn::exponential(1, 1), UnivariateFn::power_law(1, 2, 1), Assumption::A, 1.0, short_cfg(1e6));
  EXPECT_EQ(rep.overall(), Status::fail);
  const auto* c = rep.find("integral_gamma_diverges");
  ASSERT_NE(c, nullptr);
  EXPECT_EQ(c->status, Status::fail);
  EXPECT_NEAR(c->witness.values.at("estimate"), 1.0, 1e-6);
}

TEST(AssumptionsProperty, InvariantUnderCommonScaling) {
  oracle::Gen gen(5);
  const auto cfg = short_cfg(1e6);
  for (int i = 0; i < 8; ++i) {
    const double c = gen.uniform(0.5, 2.0), ag = gen.uniform(0.2, 0.9), ab = gen.uniform(1.5, 3.0);
    auto g = [&](double t) { return c * std::pow(1 + t, -ag); };
    auto b = [&](double t) { return c * std::pow(1 + t, -ab); };
    auto g1 = [&](double t) { return std::pow(1 + t, -ag); };
    auto b1 = [&](double t) { return std::pow(1 + t, -ab); };
    for (auto which : {Assumption::A, Assumption::B})
      EXPECT_EQ(assumption_check(g, b, which, 1.0, cfg).overall(), assumption_check(g1, b1, which, 1.0, cfg).overall())
          << "c=" << c << " ag=" << ag << " ab=" << ab;
  }
}

TEST(AssumptionsProperty, PassSurvivesLongerHorizon) {
  auto gamma = UnivariateFn::power_law(1, 0.5, 1), beta = UnivariateFn::power_law(1, 2, 1);
  for (double T : {1e4, 1e5, 1e6, 1e7})
    EXPECT_EQ(assumption_check(gamma, beta, Assumption::A, 1.0, short_cfg(T)).overall(), Status::pass) << T;
}

TEST(Applicable, SurrogateTheorems) {
  TheoremInputs in;
  in.a = UnivariateFn::power_law(1, 0.5, 1);
  in.b = UnivariateFn::power_law(1, 2, 1);
  in.f_state = UnivariateFn::monomial(1, 1);
  const auto reps = applicable_theorems(in, CheckConfig{});
  ASSERT_EQ(reps.size(), 3u);
  EXPECT_EQ(reps[0].theorem, "thm-2-11");
  EXPECT_EQ(reps[1].theorem, "thm-2-13");
  EXPECT_EQ(reps[2].theorem, "thm-2-14");
  for (const auto& r : reps) EXPECT_EQ(r.overall(), Status::pass) << r.theorem;
}

TEST(Applicable, ExponentialRateFailsAndSortsLast) {
  TheoremInputs in;
  in.a = UnivariateFn::exponential(1, 1);
  in.b = UnivariateFn::constant(0);
  in.f_state = UnivariateFn::monomial(1, 1);
  const auto reps = applicable_theorems(in, CheckConfig{}, {"thm-2-11"});
  ASSERT_EQ(reps.size(), 1u);
  EXPECT_EQ(reps[0].overall(), Status::fail);
  EXPECT_EQ(reps[0].find("integral_a_diverges")->status, Status::fail);
}

TEST(Applicable, TargetErrors) {
  TheoremInputs in;
  in.phi = UnivariateFn::power_law(1, 0.5, 1);
  in.C = 0.5;
  EXPECT_THROW(applicable_theorems(in, CheckConfig{}, {"thm-9-9"}), ConfigError);
  EXPECT_THROW(applicable_theorems(in, CheckConfig{}, {"thm-2-11"}), ConfigError);
  EXPECT_EQ(applicable_theorems(in, CheckConfig{}).size(), 1u);
}

TEST(StateFunction, ConditionsOnF) {
  HypothesisReport rep;
  detail::add_state_fn_conditions(rep, [](double g) { return g * g; }, CheckConfig{}, true, true);
  EXPECT_EQ(rep.overall(), Status::pass);
  HypothesisReport bad;
  detail::add_state_fn_conditions(bad, [](double g) { return 1.0 + g; }, CheckConfig{}, false, false);
  EXPECT_EQ(bad.find("f_vanishes_at_zero")->status, Status::fail);
  HypothesisReport dip;
  detail::add_state_fn_conditions(dip, [](double g) { return g * std::exp(-g); }, CheckConfig{}, true, true);
  EXPECT_EQ(dip.find("f_nondecreasing")->status, Status::fail);
}
