#include <gtest/gtest.h>

#include <cmath>
#include <map>

#include "nfrlab/error.hpp"
#include "nfrlab/model.hpp"
#include "nfrlab/verify.hpp"

using namespace nfrlab;

TEST(EstimateParams, Validation) {
  EstimateParams p;
  p.s1 = 0.1;
  p.s = 0.5;
  p.s2 = 1.0;
  p.delta = 0.5;
  EXPECT_NO_THROW(p.validate());
  p.delta = 0.6;
  EXPECT_THROW(p.validate(), ConfigError);
  p.delta = 0.25;
  p.s2 = 0.4;
  EXPECT_THROW(p.validate(), ConfigError);
}

TEST(Circle, Examples) {
  EXPECT_EQ(circle_count(Freq{0, 0}, 25, 10.0), 12);
  EXPECT_EQ(circle_count(Freq{0, 0}, 3, 10.0), 0);
  EXPECT_EQ(circle_count(Freq{0, 0}, 0, 10.0), 1);
  EXPECT_EQ(circle_count_scan(Freq{0, 0}, 25, 10.0, Freq{0, 0}), 12);
}

TEST(Circle, TwoPathsAgree) {
  for (long long mu = 0; mu <= 130; ++mu)
    for (Freq c : {Freq{0, 0}, Freq{2, -1}})
      for (Freq ball : {Freq{0, 0}, Freq{3, 4}})
        for (double R : {3.5, 8.0, 12.0})
          ASSERT_EQ(circle_count(c, mu, R, ball), circle_count_scan(c, mu, R, ball))
              << mu << " " << R;
}

TEST(Circle, LatticeSymmetries) {
  for (long long mu : {1, 2, 5, 25, 50, 65, 85})
    for (int x = -3; x <= 3; ++x)
      for (int y = -3; y <= 3; ++y) {
        long long base = circle_count(Freq{x, y}, mu, 9.0, Freq{1, 2});
        // Translation of both centers.
        EXPECT_EQ(base, circle_count(Freq{x + 5, y - 7}, mu, 9.0, Freq{6, -5}));
        // Reflection x -> -x.
        EXPECT_EQ(base, circle_count(Freq{-x, y}, mu, 9.0, Freq{-1, 2}));
        // Rotation by 90 degrees.
        EXPECT_EQ(base, circle_count(Freq{-y, x}, mu, 9.0, Freq{-2, 1}));
      }
}

TEST(Circle, MaxCount) {
  auto m = max_circle_count(10.0);
  EXPECT_EQ(m.count, circle_count(Freq{0, 0}, m.mu, 10.0));
  for (long long mu = 0; mu <= 100; ++mu) EXPECT_LE(circle_count(Freq{0, 0}, mu, 10.0), m.count);
  EXPECT_EQ(m.count, 16);
}

TEST(Fnls, SmallCases) {
  EXPECT_LE(fnls_count(1, 0.0, 0, 0.75, +1), 3);
  EXPECT_GE(fnls_count(1, 0.0, 0, 0.75, +1), 1);
  EXPECT_EQ(fnls_count(50, -10.0, 0, 0.75, +1), 0);
}

TEST(Fnls, TwoPathsAgreeAndSymmetry) {
  for (int sign : {+1, -1})
    for (int K : {5, 12})
      for (long long ks = -2 * K - 2; ks <= 2 * K + 2; ++ks)
        for (double mu = -20.0; mu <= 60.0; mu += 1.0) {
          long long a = fnls_count(K, mu, ks, 0.75, sign);
          ASSERT_EQ(a, fnls_count_by_l(K, mu, ks, 0.75, sign)) << K << " " << ks << " " << mu;
          if (sign > 0) ASSERT_EQ(a, fnls_count(K, mu, -ks, 0.75, sign));
        }
}

TEST(Fnls, MaxMatchesPointwise) {
  auto m = fnls_max_count(12, 0.75, +1);
  EXPECT_EQ(m.count, fnls_count(12, static_cast<double>(m.muStar), m.kStar, 0.75, +1));
  for (long long ks = -26; ks <= 26; ++ks)
    for (long long mu = 0; mu <= 60; ++mu)
      EXPECT_LE(fnls_count(12, static_cast<double>(mu), ks, 0.75, +1), m.count);
}

TEST(Dnls, CaseSumBasics) {
  EXPECT_EQ(dnls_case_sums(0.6, DnlsSum::A, 40, 13), 0.0);
  EXPECT_EQ(dnls_case_sums(0.6, DnlsSum::C, -40, 13), 0.0);
  for (int n = -20; n <= 20; ++n) {
    EXPECT_EQ(dnls_case_sums(0.6, DnlsSum::A, n, 16), dnls_case_sums(0.6, DnlsSum::A, -n, 16));
    EXPECT_EQ(dnls_case_sums(0.6, DnlsSum::C, n, 16), dnls_case_sums(0.6, DnlsSum::C, -n, 16));
  }
}

TEST(Dnls, CaseSumOracle) {
  // Direct triple loop in a different nesting order.
  const double s = 0.7;
  const int N = 6;
  auto br = [](double x) { return std::sqrt(1.0 + x * x); };
  for (int n : {0, 3, -5}) {
    double acc = 0.0;
    for (int n2 = -N; n2 <= N; ++n2)
      for (int n3 = -N; n3 <= N; ++n3) {
        int n1 = n + n2 - n3;
        if (std::abs(n1) > N || n2 == n1 || n2 == n3) continue;
        acc += double(n2) * n2 * std::pow(br(n), 2 * s) /
               (std::abs(n2 - n1) * std::abs(n2 - n3) * std::pow(br(n1), 2 * s) *
                std::pow(br(n2), 2 * s) * std::pow(br(n3), 2 * s));
      }
    EXPECT_NEAR(dnls_case_sums(s, DnlsSum::A, n, N), acc, 1e-12 * acc) << n;
  }
}

TEST(Dnls, CaseSumIncrementsShrink) {
  // A_0 increases with N by shrinking steps.
  std::vector<double> v;
  for (int N : {8, 16, 32, 64}) v.push_back(dnls_case_sums(0.6, DnlsSum::A, 0, N));
  for (std::size_t i = 1; i < v.size(); ++i) EXPECT_GT(v[i], v[i - 1]);
  for (std::size_t i = 2; i < v.size(); ++i)
    EXPECT_LT(v[i] - v[i - 1], v[i - 1] - v[i - 2]);
}

TEST(Zakharov, WeightBasics) {
  auto w = zakharov_weights(0.5, 0.0, 0.5, 0, 0, 0, 1);
  EXPECT_EQ(w[1], 0.0);
  for (double x : w) EXPECT_GE(x, 0.0);
}

TEST(Zakharov, ReportOnModerateBox) {
  auto r = zakharov_weight_check(0.5, 0.0, 0.5, 50);
  EXPECT_EQ(r.N, 50);
  EXPECT_GT(r.triples, 0);
  EXPECT_GE(r.lineMin, 1.0 / 16.0);
  EXPECT_LE(r.lineMax, 16.0);
  for (double m : r.maxOnZero) EXPECT_LE(m, r.maxOnLines + 10.0);
  EXPECT_GT(r.c1, 0.0);
  EXPECT_GT(r.c2, 0.0);
  EXPECT_GT(r.factorMin, 0.0);
}

TEST(Blocks, EmptyCircle) {
  auto c = cnls_block_counts(1000, {1, 1, 1, 1}, false, 2);
  EXPECT_EQ(c.aMax, 0);
  EXPECT_EQ(c.bMax, 0);
}

TEST(Blocks, TinyDyadsExhaustive) {
  // All points with <n> < 2 in the |n| <= 1 box: nine of them.
  std::vector<Freq> pts;
  for (int x = -1; x <= 1; ++x)
    for (int y = -1; y <= 1; ++y) pts.push_back(Freq{x, y});
  auto phi = [](Freq n, Freq n1, Freq n2, Freq n3) {
    return n.norm2() - n1.norm2() + n2.norm2() - n3.norm2();
  };
  for (long long mu = -8; mu <= 8; ++mu) {
    std::map<std::pair<int, int>, long long> a, b;
    for (std::size_t i1 = 0; i1 < pts.size(); ++i1)
      for (std::size_t i2 = 0; i2 < pts.size(); ++i2)
        for (std::size_t i3 = 0; i3 < pts.size(); ++i3) {
          Freq n = pts[i1] - pts[i2] + pts[i3];
          if (n.sup() > 1 || phi(n, pts[i1], pts[i2], pts[i3]) != mu) continue;
          int in = static_cast<int>((n[0] + 1) * 3 + n[1] + 1);
          a[{in, static_cast<int>(i2)}]++;
          b[{static_cast<int>(i1), static_cast<int>(i3)}]++;
        }
    long long am = 0, bm = 0;
    for (auto& [k, v] : a) am = std::max(am, v);
    for (auto& [k, v] : b) bm = std::max(bm, v);
    auto c = cnls_block_counts(mu, {1, 1, 1, 1}, false, 1);
    EXPECT_EQ(c.aMax, am) << mu;
    EXPECT_EQ(c.bMax, bm) << mu;
    EXPECT_LE(c.aMax, 9);
    EXPECT_LE(c.bMax, 9);
  }
}

TEST(Blocks, CapAndSweep) {
  EXPECT_THROW(cnls_block_counts(0, {1, 1, 1, 1}, false, 65), CapError);
  auto s8 = cnls_block_sweep(8, 0.25, true);
  EXPECT_EQ(s8.N, 8);
  EXPECT_GT(s8.worst, 0.0);
  EXPECT_GE(s8.worstA * s8.worstB, 1);
}

TEST(SupWeight, ZeroMultiplier) {
  auto eq = registry("kdv");
  eq.terms[0][0].multiplier = [](const Freq&, const Freq*) { return cd(0.0, 0.0); };
  EXPECT_EQ(sup_weight_A1(eq, 0, 0, 1.0, 8).supValue, 0.0);
}

TEST(SupWeight, KdvLoopOrdersAgree) {
  auto eq = registry("kdv");
  auto a = sup_weight_A1(eq, 0, 0, 1.0, 32, LoopOrder::OutputFirst);
  auto b = sup_weight_A1(eq, 0, 0, 1.0, 32, LoopOrder::InputsFirst);
  EXPECT_NEAR(a.supValue, b.supValue, 1e-12 * a.supValue);
  // Closed form of the same sum.
  auto br = [](double x) { return std::sqrt(1.0 + x * x); };
  double best = 0.0;
  for (int n = -32; n <= 32; ++n) {
    double acc = 0.0;
    for (int n1 = -32; n1 <= 32; ++n1) {
      int n2 = n - n1;
      if (std::abs(n2) > 32) continue;
      acc += double(n) * n * br(n) * br(n) /
             (br(3.0 * n * n1 * n2) * br(n1) * br(n1) * br(n2) * br(n2));
    }
    best = std::max(best, acc);
  }
  EXPECT_NEAR(a.supValue, best, 1e-12 * best);
}

TEST(SupWeight, MonotoneInN) {
  auto eq = registry("dnls");
  double prev = 0.0;
  for (int N : {4, 8, 16, 24}) {
    double v = sup_weight_A1(eq, 0, 0, 0.6, N).supValue;
    EXPECT_GE(v, prev);
    prev = v;
  }
}

TEST(SupWeight, CapExceeded) {
  auto eq = registry("dnls");
  EXPECT_THROW(sup_weight_A1(eq, 0, 0, 0.6, 64, LoopOrder::OutputFirst, 1000), CapError);
}

TEST(Fit, PowerExponentAndGrowth) {
  std::vector<double> x = {1, 2, 4, 8}, y;
  for (double v : x) y.push_back(3.0 * std::pow(v, 0.7));
  EXPECT_NEAR(fit_power_exponent(x, y), 0.7, 1e-12);
  EXPECT_NEAR(last_growth({1.0, 2.0, 2.5}), 0.25, 1e-15);
}

TEST(BinProbe, EstimatesAreBracketed) {
  for (const char* name : {"cnls1d", "kdv", "dnls"}) {
    auto eq = registry(name);
    const double s = eq.defaultS;
    for (long long mu : realized_bins(eq, 0, 0, 5)) {
      auto b = bin_operator_probe(eq, 0, 0, s, 5, mu);
      EXPECT_GT(b.tuples, 0) << name << " " << mu;
      EXPECT_GE(b.estimate, b.lower * (1.0 - 1e-12)) << name << " " << mu;
      EXPECT_LE(b.estimate, b.upper * (1.0 + 1e-12)) << name << " " << mu;
    }
  }
}

TEST(BinProbe, EmptyBinAndErrors) {
  auto eq = registry("cnls1d");
  auto b = bin_operator_probe(eq, 0, 0, 0.0, 3, 100000);
  EXPECT_EQ(b.tuples, 0);
  EXPECT_EQ(b.estimate, 0.0);
  EXPECT_EQ(b.upper, 0.0);
  ProbeOptions bad;
  bad.sweeps = 0;
  EXPECT_THROW(bin_operator_probe(eq, 0, 0, 0.0, 3, 0, bad), ConfigError);
  EXPECT_THROW(bin_operator_probe(eq, 0, 5, 0.0, 3, 0), ConfigError);
  ProbeOptions tiny;
  tiny.cap = 3;
  EXPECT_THROW(bin_operator_probe(eq, 0, 0, 0.0, 6, 0, tiny), CapError);
}

TEST(BinProbe, MoreSweepsNeverHurtAndRunsRepeat) {
  auto eq = registry("cnls1d");
  ProbeOptions few, many;
  few.sweeps = 2;
  many.sweeps = 20;
  for (long long mu : {0LL, 2LL, -4LL, 8LL}) {
    auto a = bin_operator_probe(eq, 0, 0, 0.0, 6, mu, few);
    auto b = bin_operator_probe(eq, 0, 0, 0.0, 6, mu, many);
    EXPECT_GE(b.estimate, a.estimate * (1.0 - 1e-12)) << mu;
    EXPECT_EQ(b.estimate, bin_operator_probe(eq, 0, 0, 0.0, 6, mu, many).estimate);
  }
}

TEST(BinProbe, RealizedBinsMatchPhases) {
  auto eq = registry("dnls");
  auto bins = realized_bins(eq, 0, 0, 3);
  ASSERT_FALSE(bins.empty());
  EXPECT_TRUE(std::is_sorted(bins.begin(), bins.end()));
  // dnls phases are even integers 2 (n2 - n1)(n2 - n3) with both factors nonzero.
  for (long long mu : bins) {
    EXPECT_EQ(mu % 2, 0);
    EXPECT_NE(mu, 0);
  }
}
