#include <gtest/gtest.h>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/sinh_sinh.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <cmath>
#include <random>

#include "random_network.hpp"
#include "wsbm/error.hpp"
#include "wsbm/expfam.hpp"

using namespace wsbm;
using wsbm::testing::random_tau;

namespace {

constexpr FamilyKind kAll[] = {FamilyKind::BernoulliExistence, FamilyKind::DCExistence, FamilyKind::NormalWeight,
                               FamilyKind::PoissonWeight, FamilyKind::ExponentialWeight};

// log of the integral of exp(tau . eta(theta)) by quadrature, shifted by `shift`
// to keep the integrand in range.
double quad_log_partition(const HyperParams& hp, double shift) {
  const auto& t = hp.tau;
  switch (hp.family) {
    case FamilyKind::BernoulliExistence: {
      boost::math::quadrature::tanh_sinh<double> q;
      auto f = [&](double p) { return std::exp(t[0] * std::log(p) + (t[1] - t[0]) * std::log1p(-p) - shift); };
      return std::log(q.integrate(f, 0.0, 1.0)) + shift;
    }
    case FamilyKind::DCExistence:
    case FamilyKind::PoissonWeight: {
      boost::math::quadrature::exp_sinh<double> q;
      auto f = [&](double l) { return std::exp(t[0] * std::log(l) - t[1] * l - shift); };
      return std::log(q.integrate(f, 0.0, std::numeric_limits<double>::infinity())) + shift;
    }
    case FamilyKind::ExponentialWeight: {
      boost::math::quadrature::exp_sinh<double> q;
      auto f = [&](double l) { return std::exp(-t[0] * l + t[1] * std::log(l) - shift); };
      return std::log(q.integrate(f, 0.0, std::numeric_limits<double>::infinity())) + shift;
    }
    case FamilyKind::NormalWeight: {
      // Nested: outer over precision v, inner over mean m.
      boost::math::quadrature::exp_sinh<double> outer;
      auto g = [&](double v) {
        boost::math::quadrature::sinh_sinh<double> inner;
        auto f = [&](double m) {
          return std::exp(t[0] * m * v - t[1] * v / 2 + t[2] * (-m * m * v / 2 + 0.5 * std::log(v)) - shift);
        };
        return inner.integrate(f);
      };
      return std::log(outer.integrate(g, 0.0, std::numeric_limits<double>::infinity())) + shift;
    }
  }
  return NAN;
}

}  // namespace

TEST(Expfam, DimensionsAndRoles) {
  EXPECT_EQ(dimension(FamilyKind::BernoulliExistence), 2u);
  EXPECT_EQ(dimension(FamilyKind::DCExistence), 2u);
  EXPECT_EQ(dimension(FamilyKind::NormalWeight), 3u);
  EXPECT_EQ(dimension(FamilyKind::PoissonWeight), 2u);
  EXPECT_EQ(dimension(FamilyKind::ExponentialWeight), 2u);
  EXPECT_TRUE(is_existence_family(FamilyKind::DCExistence));
  EXPECT_FALSE(is_weight_family(FamilyKind::BernoulliExistence));
  EXPECT_TRUE(is_weight_family(FamilyKind::PoissonWeight));
}

TEST(Expfam, ParseFamilyNames) {
  EXPECT_EQ(parse_family("normal"), FamilyKind::NormalWeight);
  EXPECT_EQ(parse_family("dc"), FamilyKind::DCExistence);
  for (auto f : kAll) EXPECT_EQ(parse_family(to_string(f)), f);
  EXPECT_FALSE(parse_family("gamma").has_value());
}

TEST(Expfam, SufficientStatistics) {
  EXPECT_EQ(suff_stats(FamilyKind::BernoulliExistence, 1.0), (StatVector{1.0, 1.0}));
  EXPECT_EQ(suff_stats(FamilyKind::BernoulliExistence, 0.0), (StatVector{0.0, 1.0}));
  EXPECT_EQ(suff_stats(FamilyKind::NormalWeight, -2.0), (StatVector{-2.0, 4.0, 1.0}));
  EXPECT_EQ(suff_stats(FamilyKind::PoissonWeight, 3.0), (StatVector{3.0, 1.0}));
  EXPECT_EQ(suff_stats(FamilyKind::ExponentialWeight, 0.5), (StatVector{0.5, 1.0}));
  EXPECT_EQ(suff_stats(FamilyKind::DCExistence, 1.0, 6.0), (StatVector{1.0, 6.0}));
}

TEST(Expfam, SufficientStatisticsRejectOutOfSupport) {
  EXPECT_THROW(suff_stats(FamilyKind::PoissonWeight, -1.0), InputError);
  EXPECT_THROW(suff_stats(FamilyKind::PoissonWeight, 1.5), InputError);
  EXPECT_THROW(suff_stats(FamilyKind::ExponentialWeight, -0.1), InputError);
  EXPECT_THROW(suff_stats(FamilyKind::BernoulliExistence, 0.5), InputError);
  EXPECT_THROW(suff_stats(FamilyKind::NormalWeight, NAN), InputError);
  EXPECT_THROW(suff_stats(FamilyKind::DCExistence, 1.0), ContractError);
}

TEST(Expfam, AdmissibilityNamesTheConstraint) {
  EXPECT_TRUE(is_admissible({FamilyKind::BernoulliExistence, {0.0, 0.0}}));
  EXPECT_FALSE(is_admissible({FamilyKind::BernoulliExistence, {-1.0, 3.0}}));
  EXPECT_FALSE(is_admissible({FamilyKind::NormalWeight, {1.0, 1.0, 0.0}}));
  EXPECT_FALSE(is_admissible({FamilyKind::NormalWeight, {2.0, 1.0, 4.0}}));  // zero slack
  EXPECT_FALSE(is_admissible({FamilyKind::PoissonWeight, {1.0, 0.0}}));
  EXPECT_FALSE(is_admissible({FamilyKind::ExponentialWeight, {0.0, 1.0}}));
  EXPECT_FALSE(admissibility_violation({FamilyKind::NormalWeight, {1.0, 1.0, -1.0}}).empty());
  EXPECT_THROW(log_partition({FamilyKind::PoissonWeight, {1.0, -2.0}}), AdmissibilityError);
  try {
    log_partition({FamilyKind::NormalWeight, {2.0, 1.0, 4.0}});
    FAIL();
  } catch (const AdmissibilityError& e) {
    EXPECT_NE(std::string(e.what()).find("sum"), std::string::npos) << e.what();
  }
}

TEST(Expfam, LogPartitionMatchesQuadrature) {
  const HyperParams cases[] = {
      {FamilyKind::BernoulliExistence, {0.0, 0.0}},  {FamilyKind::BernoulliExistence, {3.0, 10.0}},
      {FamilyKind::BernoulliExistence, {-0.5, 0.2}}, {FamilyKind::DCExistence, {4.0, 2.5}},
      {FamilyKind::PoissonWeight, {0.0, 1.0}},       {FamilyKind::PoissonWeight, {17.0, 6.0}},
      {FamilyKind::ExponentialWeight, {1.0, 0.0}},   {FamilyKind::ExponentialWeight, {5.5, 9.0}},
      {FamilyKind::NormalWeight, {0.0, 1.0, 1.0}},   {FamilyKind::NormalWeight, {3.0, 7.0, 2.0}},
      {FamilyKind::NormalWeight, {0.1, 0.5, 0.1}},   {FamilyKind::NormalWeight, {-4.0, 20.0, 5.0}},
  };
  for (const auto& hp : cases) {
    const double exact = log_partition(hp);
    EXPECT_NEAR(quad_log_partition(hp, exact), exact, 1e-7 * std::max(1.0, std::abs(exact)))
        << to_string(hp.family) << " tau0=" << hp.tau[0];
  }
}

TEST(Expfam, ExpectedNaturalParametersMatchQuadratureMeans) {
  // <eta> as the prior expectation of eta(theta), by direct quadrature.
  boost::math::quadrature::tanh_sinh<double> q01;
  boost::math::quadrature::exp_sinh<double> q0inf;
  const double inf = std::numeric_limits<double>::infinity();
  {
    const HyperParams hp{FamilyKind::BernoulliExistence, {2.0, 7.0}};
    const double lz = log_partition(hp);
    auto dens = [&](double p) { return std::exp(2.0 * std::log(p) + 5.0 * std::log1p(-p) - lz); };
    const double e0 = q01.integrate([&](double p) { return dens(p) * std::log(p / (1 - p)); }, 0.0, 1.0);
    const double e1 = q01.integrate([&](double p) { return dens(p) * std::log1p(-p); }, 0.0, 1.0);
    const auto eta = expected_nat_params(hp);
    EXPECT_NEAR(eta[0], e0, 1e-9);
    EXPECT_NEAR(eta[1], e1, 1e-9);
  }
  {
    const HyperParams hp{FamilyKind::PoissonWeight, {3.0, 2.0}};
    const double lz = log_partition(hp);
    auto dens = [&](double l) { return std::exp(3.0 * std::log(l) - 2.0 * l - lz); };
    const auto eta = expected_nat_params(hp);
    EXPECT_NEAR(eta[0], q0inf.integrate([&](double l) { return dens(l) * std::log(l); }, 0.0, inf), 1e-9);
    EXPECT_NEAR(eta[1], q0inf.integrate([&](double l) { return -dens(l) * l; }, 0.0, inf), 1e-9);
  }
  {
    const HyperParams hp{FamilyKind::ExponentialWeight, {4.0, 2.5}};
    const double lz = log_partition(hp);
    auto dens = [&](double l) { return std::exp(-4.0 * l + 2.5 * std::log(l) - lz); };
    const auto eta = expected_nat_params(hp);
    EXPECT_NEAR(eta[0], q0inf.integrate([&](double l) { return -dens(l) * l; }, 0.0, inf), 1e-9);
    EXPECT_NEAR(eta[1], q0inf.integrate([&](double l) { return dens(l) * std::log(l); }, 0.0, inf), 1e-9);
  }
}

TEST(Expfam, ExpectedNaturalParametersMatchFiniteDifferences) {
  std::mt19937_64 rng(42);
  const double h = 1e-5;
  for (auto f : kAll) {
    for (int draw = 0; draw < 100; ++draw) {
      const HyperParams hp = random_tau(f, rng);
      ASSERT_TRUE(is_admissible(hp)) << admissibility_violation(hp);
      const auto eta = expected_nat_params(hp);
      for (std::size_t k = 0; k < hp.tau.size(); ++k) {
        HyperParams up = hp, down = hp;
        up.tau[k] += h;
        down.tau[k] -= h;
        const double fd = (log_partition(up) - log_partition(down)) / (2 * h);
        EXPECT_NEAR(eta[k], fd, 1e-5 * std::max(1.0, std::abs(fd)))
            << to_string(f) << " draw " << draw << " component " << k;
      }
    }
  }
}

TEST(Expfam, PosteriorUpdateAddsStatistics) {
  const HyperParams prior{FamilyKind::NormalWeight, {0.1, 0.2, 0.1}};
  const auto post = posterior_update(prior, StatVector{3.0, 5.0, 2.0});
  EXPECT_EQ(post.tau, (StatVector{3.1, 5.2, 2.1}));
  EXPECT_THROW(posterior_update(prior, StatVector{1.0, 2.0}), ContractError);
}

TEST(Expfam, ZeroVarianceBundleStaysFinite) {
  const HyperParams prior = default_prior(FamilyKind::NormalWeight, 2.0, 0.5);
  StatVector stats{0.0, 0.0, 0.0};
  for (int i = 0; i < 200; ++i) stats += suff_stats(FamilyKind::NormalWeight, 2.5);
  const auto post = posterior_update(prior, stats);
  ASSERT_TRUE(is_admissible(post));
  EXPECT_TRUE(std::isfinite(log_partition(post)));
  for (double x : expected_nat_params(post)) EXPECT_TRUE(std::isfinite(x));
  EXPECT_TRUE(std::isfinite(posterior_mean(post)));
}

TEST(Expfam, DefaultPriorsAreAdmissible) {
  for (auto f : kAll) {
    EXPECT_TRUE(is_admissible(default_prior(f))) << to_string(f);
    EXPECT_TRUE(is_admissible(default_prior(f, 120.0, 1e-8))) << to_string(f);
  }
  const auto n = default_prior(FamilyKind::NormalWeight, 3.0, 2.0);
  EXPECT_DOUBLE_EQ(posterior_mean(n), 3.0);
}

TEST(Expfam, PosteriorMeans) {
  EXPECT_DOUBLE_EQ(posterior_mean({FamilyKind::BernoulliExistence, {3.0, 8.0}}), 4.0 / 10.0);
  EXPECT_DOUBLE_EQ(posterior_mean({FamilyKind::PoissonWeight, {9.0, 4.0}}), 10.0 / 4.0);
  EXPECT_DOUBLE_EQ(posterior_mean({FamilyKind::NormalWeight, {6.0, 20.0, 3.0}}), 2.0);
}
