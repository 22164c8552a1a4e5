#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "chainsurv/core/errors.hpp"
#include "chainsurv/core/rng.hpp"
#include "chainsurv/metrics/concordance.hpp"
#include "chainsurv/metrics/kaplan_meier.hpp"
#include "chainsurv/metrics/log_rank.hpp"

using namespace chainsurv;
using namespace chainsurv::metrics;

namespace {

// O(n^2) pair counter in half units.
std::pair<std::uint64_t, std::uint64_t> brute_concordance(const std::vector<double>& s, const std::vector<double>& t,
                                                          const std::vector<int>& c) {
  std::uint64_t comparable = 0, half = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    for (std::size_t j = 0; j < s.size(); ++j) {
      if (c[i] != 0 || !(t[i] < t[j])) continue;
      ++comparable;
      if (s[i] > s[j]) half += 2;
      else if (s[i] == s[j]) half += 1;
    }
  }
  return {comparable, half};
}

// Upper tail by Simpson's rule on t = u^2 (removes the dof=1 singularity).
double chi2_sf_numeric(double x, int k) {
  const double norm = std::pow(2.0, 0.5 * k) * std::tgamma(0.5 * k);
  auto g = [&](double u) {
    const double t = u * u;
    return 2.0 * u * std::pow(t, 0.5 * k - 1.0) * std::exp(-0.5 * t) / norm;
  };
  const double a = std::sqrt(x), b = a + 14.0;
  const int n = 200000;
  const double h = (b - a) / n;
  double s = g(a) + g(b);
  for (int i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * g(a + i * h);
  return s * h / 3.0;
}

// Direct log-rank evaluation: scan every distinct event time and recount
// risk sets from scratch.
double brute_log_rank(const std::vector<double>& ta, const std::vector<int>& ca, const std::vector<double>& tb,
                      const std::vector<int>& cb) {
  std::vector<double> event_times;
  for (std::size_t i = 0; i < ta.size(); ++i)
    if (!ca[i]) event_times.push_back(ta[i]);
  for (std::size_t i = 0; i < tb.size(); ++i)
    if (!cb[i]) event_times.push_back(tb[i]);
  std::sort(event_times.begin(), event_times.end());
  event_times.erase(std::unique(event_times.begin(), event_times.end()), event_times.end());
  double o_e = 0, v = 0;
  for (double t : event_times) {
    double na = 0, nb = 0, da = 0, db = 0;
    for (std::size_t i = 0; i < ta.size(); ++i) {
      na += ta[i] >= t;
      da += ta[i] == t && !ca[i];
    }
    for (std::size_t i = 0; i < tb.size(); ++i) {
      nb += tb[i] >= t;
      db += tb[i] == t && !cb[i];
    }
    const double n = na + nb, d = da + db;
    o_e += da - d * na / n;
    if (n > 1) v += d * na * nb * (n - d) / (n * n * (n - 1));
  }
  return o_e * o_e / v;
}

}  // namespace

TEST(CIndex, SpecExamples) {
  const std::vector<double> s{0.9, 0.8, 0.2, 0.1}, t{1, 2, 3, 4};
  const std::vector<int> c{0, 0, 0, 0};
  EXPECT_EQ(c_index(s, t, c), 1.0);
  EXPECT_EQ(c_index(std::vector<double>{3, 3, 3, 3}, t, c), 0.5);
  EXPECT_EQ(c_index(std::vector<double>{-0.9, -0.8, -0.2, -0.1}, t, c), 0.0);
  EXPECT_EQ(brute_concordance(s, t, c).first, 6u);
}

TEST(CIndex, CensoredAndTiedTimesAreNotComparable) {
  // Only the pair (0 -> 2) is comparable: 1 is censored, 0 and 1 tie in time.
  const std::vector<double> s{0.5, 0.9, 0.1}, t{1, 1, 2};
  const std::vector<int> c{0, 1, 1};
  const auto counts = concordance_counts(s, t, c);
  EXPECT_EQ(counts.comparable, 1u);
  EXPECT_EQ(counts.value(), 1.0);
}

TEST(CIndex, MatchesBruteForceExactly) {
  core::Rng rng(1);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 2 + rng.below(49);
    std::vector<double> s(n), t(n);
    std::vector<int> c(n);
    for (std::size_t i = 0; i < n; ++i) {
      s[i] = static_cast<double>(rng.below(6));  // heavy score ties
      t[i] = static_cast<double>(1 + rng.below(10));  // time ties
      c[i] = rng.uniform() < 0.3;
    }
    const auto [comparable, half] = brute_concordance(s, t, c);
    if (comparable == 0) {
      EXPECT_THROW(c_index(s, t, c), ValidationError);
      continue;
    }
    const auto counts = concordance_counts(s, t, c);
    EXPECT_EQ(counts.comparable, comparable);
    EXPECT_EQ(counts.half_units, half);
    EXPECT_EQ(c_index(s, t, c), static_cast<double>(half) / (2.0 * static_cast<double>(comparable)));
  }
}

TEST(CIndex, NegationComplementsWithoutTies) {
  core::Rng rng(2);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 10 + rng.below(40);
    std::vector<double> s(n), neg(n), t(n);
    std::vector<int> c(n);
    for (std::size_t i = 0; i < n; ++i) {
      s[i] = rng.normal();
      neg[i] = -s[i];
      t[i] = rng.exponential(1.0);
      c[i] = rng.uniform() < 0.3;
    }
    c[0] = 0;
    EXPECT_NEAR(c_index(s, t, c) + c_index(neg, t, c), 1.0, 1e-12);
  }
}

TEST(CIndex, Errors) {
  EXPECT_THROW(c_index(std::vector<double>{1}, std::vector<double>{1}, std::vector<int>{0}), ValidationError);
  EXPECT_THROW(c_index(std::vector<double>{1, 2}, std::vector<double>{1, 2}, std::vector<int>{1, 1}), ValidationError);
  EXPECT_THROW(c_index(std::vector<double>{1, 2}, std::vector<double>{1}, std::vector<int>{0, 0}), ContractViolation);
}

TEST(KaplanMeier, NoCensoringSteps) {
  const auto km = km_estimate(std::vector<double>{1, 2, 3, 4}, std::vector<int>{0, 0, 0, 0});
  const std::vector<double> expected{0.75, 0.5, 0.25, 0.0};
  ASSERT_EQ(km.size(), 4u);
  for (std::size_t i = 0; i < 4; ++i) EXPECT_NEAR(km.survival[i], expected[i], 1e-15);
  EXPECT_EQ(km.n_at_risk, (std::vector<std::size_t>{4, 3, 2, 1}));
}

TEST(KaplanMeier, AllCensoredStaysAtOne) {
  const auto km = km_estimate(std::vector<double>{3, 1, 2}, std::vector<int>{1, 1, 1});
  for (double s : km.survival) EXPECT_EQ(s, 1.0);
  EXPECT_EQ(km.times, (std::vector<double>{1, 2, 3}));
}

TEST(KaplanMeier, CensoredSubjectLeavesRiskSet) {
  const auto km = km_estimate(std::vector<double>{1, 2, 3}, std::vector<int>{0, 1, 0});
  EXPECT_NEAR(km.survival[0], 2.0 / 3.0, 1e-15);
  EXPECT_NEAR(km.survival[1], 2.0 / 3.0, 1e-15);
  EXPECT_EQ(km.survival[2], 0.0);
  EXPECT_EQ(km.n_at_risk, (std::vector<std::size_t>{3, 2, 1}));
  EXPECT_EQ(km.at(0.5), 1.0);
  EXPECT_NEAR(km.at(2.5), 2.0 / 3.0, 1e-15);
}

TEST(KaplanMeier, GreenwoodBandHandValue) {
  const auto km = km_estimate(std::vector<double>{1, 2, 3, 4}, std::vector<int>{0, 0, 0, 0});
  // S = 0.75, Greenwood sum = 1 / (4 * 3)
  const double se = std::sqrt(1.0 / 12.0) / std::abs(std::log(0.75));
  EXPECT_NEAR(km.ci_low[0], std::pow(0.75, std::exp(1.959963984540054 * se)), 1e-12);
  EXPECT_NEAR(km.ci_high[0], std::pow(0.75, std::exp(-1.959963984540054 * se)), 1e-12);
}

TEST(KaplanMeier, PropertiesOnRandomCohorts) {
  core::Rng rng(3);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 1 + rng.below(80);
    std::vector<double> t(n);
    std::vector<int> c(n);
    const bool uncensored = trial % 4 == 0;
    for (std::size_t i = 0; i < n; ++i) {
      t[i] = static_cast<double>(1 + rng.below(30));
      c[i] = uncensored ? 0 : rng.uniform() < 0.4;
    }
    const auto km = km_estimate(t, c);
    for (std::size_t i = 0; i < km.size(); ++i) {
      EXPECT_LE(km.ci_low[i], km.survival[i]);
      EXPECT_GE(km.ci_high[i], km.survival[i]);
      EXPECT_LE(km.survival[i], 1.0);
      if (i > 0) {
        EXPECT_LE(km.survival[i], km.survival[i - 1]);
        EXPECT_LE(km.n_at_risk[i], km.n_at_risk[i - 1]);
      }
      if (uncensored) {
        // 1 - ECDF
        const double below = static_cast<double>(std::count_if(t.begin(), t.end(), [&](double x) {
          return x <= km.times[i];
        }));
        EXPECT_NEAR(km.survival[i], 1.0 - below / static_cast<double>(n), 1e-12);
      }
    }
  }
}

TEST(KaplanMeier, CsvHeader) {
  const auto km = km_estimate(std::vector<double>{1, 2}, std::vector<int>{0, 1});
  const std::string csv = km_csv(km);
  EXPECT_TRUE(csv.starts_with("time,survival,ci_low,ci_high,n_at_risk\n1,0.5,"));
}

TEST(Chi2Sf, KnownValues) {
  EXPECT_EQ(chi2_sf(0.0), 1.0);
  EXPECT_NEAR(chi2_sf(3.841), 0.05, 1e-4);
  EXPECT_NEAR(chi2_sf(3.841458820694124), 0.05, 1e-12);
  EXPECT_EQ(chi2_sf(std::numeric_limits<double>::infinity()), 0.0);
  EXPECT_LT(chi2_sf(2000.0), 1e-300);
  EXPECT_THROW(chi2_sf(-1.0), ContractViolation);
  EXPECT_THROW(chi2_sf(1.0, 0), ContractViolation);
}

TEST(Chi2Sf, MatchesNumericIntegration) {
  for (int k : {1, 2, 3, 5}) {
    for (double x : {0.05, 0.5, 1.0, 3.841, 7.0, 15.0, 30.0}) {
      EXPECT_NEAR(chi2_sf(x, k), chi2_sf_numeric(x, k), 1e-10) << "k=" << k << " x=" << x;
    }
  }
}

TEST(LogRank, IdenticalGroupsGiveZero) {
  const std::vector<double> t{1, 3, 4, 7, 9};
  const std::vector<int> c{0, 1, 0, 0, 1};
  const auto r = log_rank(t, c, t, c);
  EXPECT_NEAR(r.statistic, 0.0, 1e-15);
  EXPECT_NEAR(r.p_value, 1.0, 1e-7);
  EXPECT_EQ(r.dof, 1);
}

TEST(LogRank, MatchesDirectEvaluationAndIsSymmetric) {
  core::Rng rng(4);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> ta(5 + rng.below(30)), tb(5 + rng.below(30));
    std::vector<int> ca(ta.size()), cb(tb.size());
    for (std::size_t i = 0; i < ta.size(); ++i) {
      ta[i] = static_cast<double>(1 + rng.below(15));
      ca[i] = rng.uniform() < 0.3;
    }
    for (std::size_t i = 0; i < tb.size(); ++i) {
      tb[i] = static_cast<double>(1 + rng.below(20));
      cb[i] = rng.uniform() < 0.3;
    }
    ca[0] = 0;
    const auto ab = log_rank(ta, ca, tb, cb);
    const auto ba = log_rank(tb, cb, ta, ca);
    EXPECT_NEAR(ab.statistic, brute_log_rank(ta, ca, tb, cb), 1e-9 * (1 + ab.statistic));
    EXPECT_NEAR(ab.statistic, ba.statistic, 1e-12 * (1 + ab.statistic));
    EXPECT_GE(ab.p_value, 0.0);
    EXPECT_LE(ab.p_value, 1.0);
  }
}

TEST(LogRank, HazardRatioThreeIsSignificant) {
  core::Rng rng(5);
  std::vector<double> ta(100), tb(100);
  std::vector<int> ca(100), cb(100);
  for (std::size_t i = 0; i < 100; ++i) {
    ta[i] = rng.exponential(3.0 / 30.0);
    tb[i] = rng.exponential(1.0 / 30.0);
    const double cens_a = rng.exponential(1.0 / 60.0), cens_b = rng.exponential(1.0 / 60.0);
    ca[i] = cens_a < ta[i];
    cb[i] = cens_b < tb[i];
    ta[i] = std::min(ta[i], cens_a);
    tb[i] = std::min(tb[i], cens_b);
  }
  EXPECT_LT(log_rank(ta, ca, tb, cb).p_value, 0.01);
}

TEST(LogRank, PValueDecreasesWithStatistic) {
  double previous = 1.0;
  for (double x = 0.1; x < 40.0; x += 0.1) {
    const double p = chi2_sf(x);
    EXPECT_LT(p, previous);
    previous = p;
  }
}

TEST(LogRank, Errors) {
  const std::vector<double> t{1, 2};
  EXPECT_THROW(log_rank(t, std::vector<int>{1, 1}, t, std::vector<int>{1, 1}), ValidationError);
  EXPECT_THROW(log_rank(std::vector<double>{}, std::vector<int>{}, t, std::vector<int>{0, 0}), ValidationError);
}

TEST(MedianSplit, TiesGoLow) {
  EXPECT_EQ(median_split(std::vector<double>{1, 2, 3, 4}), (std::vector<bool>{false, false, true, true}));
  EXPECT_EQ(median_split(std::vector<double>{1, 2, 2, 2, 5}), (std::vector<bool>{false, false, false, false, true}));
  EXPECT_EQ(median_split(std::vector<double>{7, 7}), (std::vector<bool>{false, false}));
}
