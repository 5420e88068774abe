#include "fixtures.hpp"

#include "mfopt/model.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace mfopt;
using mfopt::testing::benyahia;
using mfopt::testing::cogan;

TEST(Model, BenyahiaClosedForms) {
  const auto m = build_model("benyahia", {{"a", 2}, {"b", 3}, {"e", 0.5}});
  EXPECT_DOUBLE_EQ(m.f1(1.5), 3.0 / 2.0);
  EXPECT_DOUBLE_EQ(m.f2(1.5), 3.0);
  EXPECT_DOUBLE_EQ(m.g(1.5), 0.5);
  EXPECT_DOUBLE_EQ(m.df1(1.5), -3.0 / 4.0);
  EXPECT_DOUBLE_EQ(m.df2(1.5), 2.0);
  EXPECT_DOUBLE_EQ(m.dg(1.5), -0.25);
  EXPECT_TRUE(m.has_exact_derivatives());
}

TEST(Model, CoganClosedForms) {
  const auto m = cogan();
  EXPECT_DOUBLE_EQ(m.f1(3.0), 0.25);
  EXPECT_DOUBLE_EQ(m.f2(3.0), 0.75);
  EXPECT_DOUBLE_EQ(m.g(3.0), 0.25);
  EXPECT_DOUBLE_EQ(m.df2(3.0), 1.0 / 16.0);
}

TEST(Model, RejectsNonPositiveParameter) {
  try {
    build_model("benyahia", {{"a", 1}, {"b", 0}, {"e", 1}});
    FAIL() << "expected ParameterError";
  } catch (const ParameterError& e) {
    EXPECT_NE(std::string(e.what()).find("parameter b must be positive"), std::string::npos);
  }
  EXPECT_THROW(build_model("cogan", {{"a", -1}, {"b", 1}, {"e", 1}}), ParameterError);
}

TEST(Model, RejectsUnknownNameOrParameter) {
  EXPECT_THROW(build_model("darcy", {{"a", 1}, {"b", 1}, {"e", 1}}), ParameterError);
  EXPECT_THROW(build_model("cogan", {{"a", 1}, {"b", 1}, {"e", 1}, {"k", 1}}), ParameterError);
  EXPECT_THROW(build_model("cogan", {{"a", 1}, {"b", 1}}), ParameterError);
}

TEST(Model, BuiltinsSatisfyHypotheses) {
  for (const auto& m : {benyahia(), cogan()}) {
    const auto r = check_hypotheses(m, 50.0, 2000);
    EXPECT_TRUE(r.h1()) << m.name() << '\n' << r.describe();
    EXPECT_TRUE(r.h2()) << m.name() << '\n' << r.describe();
    EXPECT_NE(r.describe().find("verified on grid"), std::string::npos);
  }
}

TEST(Model, CoganBracketContainsThree) {
  const auto r = check_hypotheses(cogan(), 50.0, 2000);
  ASSERT_TRUE(r.psi_bracket.has_value());
  EXPECT_LE(r.psi_bracket->first, 3.0);
  EXPECT_GE(r.psi_bracket->second, 3.0);
  EXPECT_EQ(r.psi_sign_changes, 1);
}

TEST(Model, ConstantBackwashFailsH1) {
  FoulingModel::Callables fns;
  fns.f1 = [](double m) { return 1.0 / (1.0 + m); };
  fns.f2 = [](double) { return 1.0; };
  fns.g = [](double m) { return 1.0 / (1.0 + m); };
  const auto r = check_hypotheses(make_custom_model("flat", std::move(fns)), 50.0, 500);
  EXPECT_FALSE(r.f2_zero_at_origin);
  EXPECT_FALSE(r.h1());
}

TEST(Model, PsiMatchesClosedForm) {
  for (const auto& m : {benyahia(), cogan()}) {
    for (int i = 0; i <= 1000; ++i) {
      const double x = 0.1 * i;
      const double scale = std::max(1.0, std::abs(psi_closed_form(m, x)));
      EXPECT_LT(psi_closed_form_check(m, x) / scale, 1e-12) << m.name() << " m=" << x;
    }
  }
}

TEST(Model, FiniteDifferenceFallbackAccuracy) {
  const auto exact = cogan();
  FoulingModel::Callables fns;
  fns.f1 = [](double m) { return 1.0 / (1.0 + m); };
  fns.f2 = [](double m) { return m / (1.0 + m); };
  fns.g = [](double m) { return 1.0 / (1.0 + m); };
  const auto fd = make_custom_model("cogan-fd", std::move(fns));
  EXPECT_FALSE(fd.has_exact_derivatives());
  for (int i = 0; i <= 500; ++i) {
    const double x = 0.1 * i;
    EXPECT_NEAR(fd.df1(x), exact.df1(x), 1e-6 * std::abs(exact.df1(x)) + 1e-12);
    EXPECT_NEAR(fd.df2(x), exact.df2(x), 1e-6 * std::abs(exact.df2(x)) + 1e-12);
    EXPECT_NEAR(fd.dg(x), exact.dg(x), 1e-6 * std::abs(exact.dg(x)) + 1e-12);
  }
}

TEST(Model, SplitIdentities) {
  for (const auto& m : {benyahia(), cogan()}) {
    for (double x : {0.0, 0.5, 2.0, 10.0}) {
      EXPECT_NEAR(f_minus(m, x) + f_plus(m, x), m.f1(x), 1e-15);
      EXPECT_NEAR(f_plus(m, x) - f_minus(m, x), m.f2(x), 1e-15);
      EXPECT_NEAR(mass_rate(m, x, 1.0), m.f1(x), 1e-15);
      EXPECT_NEAR(mass_rate(m, x, -1.0), -m.f2(x), 1e-15);
    }
  }
}

TEST(Model, GammaSlopeOpposesPsi) {
  for (const auto& m : {benyahia(), cogan()}) {
    for (int i = 1; i <= 200; ++i) {
      const double x = 0.1 * i;
      EXPECT_LE(gamma_prime(m, x) * psi(m, x), 1e-15) << m.name() << " m=" << x;
      EXPECT_NEAR(gamma_prime(m, x), -psi(m, x) / std::pow(f_plus(m, x), 2), 1e-12);
    }
  }
}

TEST(Model, GInverse) {
  const auto m = cogan();
  EXPECT_NEAR(g_inverse(m, 0.125), 7.0, 1e-14);
  EXPECT_EQ(g_inverse(m, m.g(0.0)), 0.0);
  EXPECT_THROW(g_inverse(m, 0.0), DomainError);
  EXPECT_THROW(g_inverse(m, 2.0), DomainError);

  FoulingModel::Callables fns;
  fns.f1 = [](double x) { return 1.0 / (1.0 + x); };
  fns.f2 = [](double x) { return x; };
  fns.g = [](double x) { return std::exp(-x); };
  const auto c = make_custom_model("exp", std::move(fns));
  EXPECT_NEAR(g_inverse(c, std::exp(-3.5)), 3.5, 1e-10);
}
