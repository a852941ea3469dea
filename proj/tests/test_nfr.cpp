#include <gtest/gtest.h>

#include <cmath>

#include <nlohmann/json.hpp>

#include "nfrlab/dynamics.hpp"
#include "nfrlab/error.hpp"
#include "nfrlab/model.hpp"
#include "nfrlab/nfr.hpp"
#include "nfrlab/rng.hpp"

using namespace nfrlab;

namespace {

Trajectory run(const EquationSpec& eq, const SeqState& w0, double dt, double T,
               double eps = 0.0) {
  IntegratorCfg cfg;
  cfg.dt = dt;
  cfg.T = T;
  if (eps > 0.0) return solve_regularized(eq, w0, RegularizationCfg{eps, 1.0}, cfg);
  return solve(eq, w0, cfg);
}

double residual_at(const EquationSpec& eq, const ResonanceRule& rule, int J,
                   const Trajectory& tr, NodePolicy policy = NodePolicy::AllElements,
                   double eps = 0.0) {
  GenerationOptions opt;
  opt.policy = policy;
  opt.epsilon = eps;
  return generation_equation(eq, rule, J, tr, tr.size() - 1, opt).residual_norm(0.0);
}

double max_abs(const SeqState& a) {
  double m = 0.0;
  for (const cd& v : a.raw()) m = std::max(m, std::abs(v));
  return m;
}

}  // namespace

TEST(Classify, Examples) {
  ResonanceRule a{ResonanceCase::A, 1.0};
  EXPECT_EQ(classify(a, PhaseChain{{10.0}}), Resonance::Resonant);
  EXPECT_EQ(classify(a, PhaseChain{{16.0}}), Resonance::Resonant);
  EXPECT_EQ(classify(a, PhaseChain{{16.5}}), Resonance::NonResonant);
  EXPECT_EQ(classify(a, PhaseChain{{20.0, 400.0}}), Resonance::NonResonant);
  EXPECT_EQ(classify(a, PhaseChain{{20.0, 1.0}}), Resonance::Resonant);
  EXPECT_EQ(classify(a, PhaseChain{{1.0, 1000.0}}), Resonance::Neither);
  ResonanceRule b{ResonanceCase::B, 1.0};
  EXPECT_EQ(classify(b, PhaseChain{{3.0, -2.0}}), Resonance::Resonant);
  EXPECT_EQ(classify(b, PhaseChain{{3.0, 2.0}}), Resonance::NonResonant);
}

TEST(Classify, CumulativeIsPrefixSum) {
  PhaseChain c{{1.5, -2.0, 4.25}};
  auto cum = c.cumulative();
  ASSERT_EQ(cum.size(), 3u);
  EXPECT_EQ(cum[0], 1.5);
  EXPECT_EQ(cum[1], -0.5);
  EXPECT_EQ(cum[2], 3.75);
}

TEST(Classify, FirstStepIsAPartition) {
  PhiloxStream rng(5);
  for (auto variant : {ResonanceCase::A, ResonanceCase::B})
    for (int i = 0; i < 10000; ++i) {
      double phi = 100.0 * rng.normal();
      EXPECT_NE(classify(ResonanceRule{variant, 2.0}, PhaseChain{{phi}}), Resonance::Neither);
    }
}

TEST(EvalTerm, KdvBoundaryExample) {
  auto eq = registry("kdv");
  TruncatedLattice lat(1, 3);
  SeqState w(lat, 1);
  w.at(0, Freq{1}) = 1.0;
  w.at(0, Freq{2}) = 1.0;
  ResonanceRule rule{ResonanceCase::A, 1.0};
  cd v = eval_term(TermKind::N0, eq, rule, 1, w, nullptr, 0.0, 0, Freq{3});
  EXPECT_NEAR(std::abs(v - cd(1.0 / 3.0, 0.0)), 0.0, 1e-15);
}

TEST(EvalTerm, ZeroStateGivesZero) {
  auto eq = registry("cnls1d");
  TruncatedLattice lat(1, 2);
  SeqState z(lat, eq.components);
  ResonanceRule rule{ResonanceCase::B, 1.0};
  for (TermKind k : {TermKind::NR, TermKind::N0, TermKind::R, TermKind::NJ, TermKind::P})
    for (int J : {1, 2})
      EXPECT_EQ(eval_term(k, eq, rule, J, z, &z, 0.3, 0, Freq{1}), cd(0.0, 0.0));
}

TEST(EvalTerm, FirstGenerationTopIsFullNonlinearity) {
  auto eq = registry("cnls1d");
  TruncatedLattice lat(1, 8);
  auto w = random_state(eq, lat, 1.0, 3.0, 21);
  const double t = 0.27;
  auto full = rhs(eq, w, t) - remainder_eval(eq, w, t);
  ResonanceRule rule{ResonanceCase::A, 1.0};
  ResonanceRule allResonant{ResonanceCase::A, 1e12};
  double scale = max_abs(full);
  for (std::size_t i = 0; i < lat.size(); ++i) {
    cd nj = eval_term(TermKind::NJ, eq, rule, 1, w, nullptr, t, 0, lat.freq(i));
    EXPECT_LE(std::abs(nj - full.at(0, i)), 1e-9 * scale);
    cd nr = eval_term(TermKind::NR, eq, allResonant, 1, w, nullptr, t, 0, lat.freq(i));
    EXPECT_LE(std::abs(nr - full.at(0, i)), 1e-12 * scale);
  }
}

TEST(EvalTerm, TopTermArisesFromLeafSubstitution) {
  auto eq = registry("cnls1d");
  TruncatedLattice lat(1, 2);
  auto w = random_state(eq, lat, 1.0, 2.0, 22);
  const double t = 0.41;
  auto n1 = nonlinear_direct(eq, w, t);
  for (auto variant : {ResonanceCase::A, ResonanceCase::B}) {
    ResonanceRule rule{variant, 1.0};
    for (int J : {1, 2})
      for (std::size_t i = 0; i < lat.size(); ++i) {
        cd top = eval_term(TermKind::NJ, eq, rule, J + 1, w, nullptr, t, 0, lat.freq(i));
        cd sub = eval_term(TermKind::R, eq, rule, J, w, &n1, t, 0, lat.freq(i));
        EXPECT_LE(std::abs(top - sub), 1e-10 * std::max(1.0, std::abs(top)));
      }
  }
}

TEST(EvalTerm, KdvChildSwapSymmetry) {
  auto eq = registry("kdv");
  TruncatedLattice lat(1, 3);
  auto w = random_state(eq, lat, 1.0, 2.0, 23);
  SampleGrid grid(eq, w, 0.2, false);
  ResonanceRule rule{ResonanceCase::B, 1.0};
  auto left = extend_at_leaf(Tree::root(2), 1);
  auto right = extend_at_leaf(Tree::root(2), 2);
  EvalOptions opt;
  opt.mask = KindMask::all();
  opt.mask.r = opt.mask.p = false;
  for (std::size_t i = 0; i < lat.size(); ++i) {
    auto a = evaluate_generation(eq, rule, 2, {left}, grid, lat.freq(i), opt);
    auto b = evaluate_generation(eq, rule, 2, {right}, grid, lat.freq(i), opt);
    EXPECT_NEAR(std::abs(a.n0[0] - b.n0[0]), 0.0, 1e-13);
    EXPECT_NEAR(std::abs(a.nr[0] - b.nr[0]), 0.0, 1e-13);
    EXPECT_NEAR(std::abs(a.nj[0] - b.nj[0]), 0.0, 1e-13);
  }
}

TEST(EvalTerm, ReferenceAndFastEvaluatorsAgree) {
  for (const char* name : {"cnls1d", "kdv"}) {
    auto eq = registry(name);
    TruncatedLattice lat(1, 3);
    auto w = random_state(eq, lat, 1.0, 2.0, 24);
    SampleGrid grid(eq, w, 0.15, true);
    ResonanceRule rule{ResonanceCase::A, 1.0};
    auto trees = generation_trees(eq, 0, 2);
    EvalOptions fast, ref;
    fast.mask = ref.mask = KindMask::all();
    ref.reference = true;
    for (std::size_t i = 0; i < lat.size(); ++i) {
      auto a = evaluate_generation(eq, rule, 2, trees, grid, lat.freq(i), fast);
      auto b = evaluate_generation(eq, rule, 2, trees, grid, lat.freq(i), ref);
      double scale = 1.0 + std::abs(b.nj[0]) + std::abs(b.n0[0]);
      EXPECT_LE(std::abs(a.nr[0] - b.nr[0]), 1e-12 * scale) << name;
      EXPECT_LE(std::abs(a.n0[0] - b.n0[0]), 1e-12 * scale) << name;
      EXPECT_LE(std::abs(a.r[0] - b.r[0]), 1e-12 * scale) << name;
      EXPECT_LE(std::abs(a.nj[0] - b.nj[0]), 1e-12 * scale) << name;
      EXPECT_LE(std::abs(a.p[0] - b.p[0]), 1e-12 * scale) << name;
    }
  }
}

TEST(Generation, ZeroTrajectory) {
  auto eq = registry("cnls1d");
  TruncatedLattice lat(1, 3);
  SeqState z(lat, eq.components);
  auto tr = run(eq, z, 0.01, 0.04);
  auto g = generation_equation(eq, ResonanceRule{}, 2, tr, tr.size() - 1);
  EXPECT_EQ(g.residual_norm(0.0), 0.0);
  EXPECT_EQ(g.boundary_norm(0.0), 0.0);
  EXPECT_EQ(g.integral_norm(0.0), 0.0);
  auto tail = limit_equation_tail(eq, ResonanceRule{}, 2, tr, tr.size() - 1);
  for (const auto& e : tail) {
    EXPECT_EQ(e.boundary, 0.0);
    EXPECT_EQ(e.resonant, 0.0);
    EXPECT_EQ(e.remainder, 0.0);
    EXPECT_EQ(e.top, 0.0);
  }
}

TEST(Generation, FirstGenerationHasNoBoundary) {
  auto eq = registry("cnls1d");
  TruncatedLattice lat(1, 4);
  auto w0 = random_state(eq, lat, 0.5, 3.0, 31);
  auto tr = run(eq, w0, 1e-3, 0.05);
  auto g = generation_equation(eq, ResonanceRule{ResonanceCase::A, 10.0}, 1, tr,
                               tr.size() - 1);
  EXPECT_EQ(g.boundary_norm(0.0), 0.0);
  EXPECT_LE(g.residual_norm(0.0), 1e-10);
  EXPECT_GT(g.integral_norm(0.0), 1e-4);
  EXPECT_THROW(generation_equation(eq, ResonanceRule{}, 1, tr, 1), ConfigError);
}

TEST(Generation, SecondGenerationMatchesFirst) {
  auto eq = registry("cnls1d");
  TruncatedLattice lat(1, 4);
  auto w0 = random_state(eq, lat, 0.1, 3.0, 32);
  auto tr = run(eq, w0, 1e-3, 0.1);
  ResonanceRule rule{ResonanceCase::A, 10.0};
  auto g1 = generation_equation(eq, rule, 1, tr, tr.size() - 1);
  double r2 = residual_at(eq, rule, 2, tr);
  EXPECT_LE(r2, 10.0 * (g1.residual_norm(0.0) + g1.quadrature_error(0.0)));
}

TEST(Generation, TelescopingCaseB) {
  struct Setup {
    const char* name;
    int N;
    int Jmax;
  };
  for (Setup su : {Setup{"cnls1d", 2, 3}, Setup{"kdv", 4, 3}}) {
    auto eq = registry(su.name);
    TruncatedLattice lat(1, su.N);
    auto w0 = random_state(eq, lat, 1.0, 2.0, 33);
    auto tr = run(eq, w0, 1e-3, 0.05);
    ResonanceRule rule{ResonanceCase::B, 1.0};
    GenerationOptions opt;
    auto g1 = generation_equation(eq, rule, 1, tr, tr.size() - 1, opt);
    double base = g1.residual_norm(0.0) + g1.quadrature_error(0.0);
    for (int J = 2; J <= su.Jmax; ++J) {
      auto g = generation_equation(eq, rule, J, tr, tr.size() - 1, opt);
      EXPECT_GT(g.boundary_norm(0.0), 1e-6) << su.name << " J=" << J;
      EXPECT_LE(g.residual_norm(0.0), 10.0 * base) << su.name << " J=" << J;
      EXPECT_LE(g.residual_norm(0.0), 1e-6 * g.boundary_norm(0.0)) << su.name << " J=" << J;
    }
  }
}

TEST(Generation, LeavesOnlyBreaksTelescoping) {
  auto eq = registry("cnls1d");
  TruncatedLattice lat(1, 2);
  auto w0 = random_state(eq, lat, 1.0, 2.0, 33);
  auto tr = run(eq, w0, 1e-3, 0.05);
  ResonanceRule rule{ResonanceCase::B, 1.0};
  double all = residual_at(eq, rule, 2, tr, NodePolicy::AllElements);
  double leaves = residual_at(eq, rule, 2, tr, NodePolicy::LeavesOnly);
  EXPECT_GT(leaves, 1e4 * std::max(all, 1e-16));
}

TEST(Generation, RegularizedIdentity) {
  auto eq = registry("cnls1d");
  TruncatedLattice lat(1, 2);
  auto w0 = random_state(eq, lat, 1.0, 2.0, 34);
  const double eps = 0.05;
  auto tr = run(eq, w0, 1e-3, 0.05, eps);
  ResonanceRule rule{ResonanceCase::B, 1.0};
  for (int J : {1, 2, 3}) {
    auto g = generation_equation(eq, rule, J, tr, tr.size() - 1,
                                 GenerationOptions{NodePolicy::AllElements, eps, 1.0, 1, {}});
    EXPECT_LE(g.residual_norm(0.0), 1e-10) << J;
  }
  // Omitting the regularization terms leaves a visible defect.
  EXPECT_GT(residual_at(eq, rule, 2, tr), 1e-6);
}

TEST(Generation, ThreadCountInvariance) {
  auto eq = registry("cnls1d");
  TruncatedLattice lat(1, 3);
  auto w0 = random_state(eq, lat, 1.0, 2.0, 35);
  auto tr = run(eq, w0, 1e-3, 0.02);
  ResonanceRule rule{ResonanceCase::A, 1.0};
  GenerationOptions one, three;
  three.threads = 3;
  auto a = generation_equation(eq, rule, 2, tr, tr.size() - 1, one);
  auto b = generation_equation(eq, rule, 2, tr, tr.size() - 1, three);
  EXPECT_EQ(a.boundary.raw(), b.boundary.raw());
  EXPECT_EQ(a.integral.raw(), b.integral.raw());
}

TEST(Quadrature, SimpsonWithEstimate) {
  std::vector<cd> f;
  const double h = 0.01;
  for (int i = 0; i <= 100; ++i) f.push_back(std::polar(1.0, 3.0 * i * h));
  auto q = integrate_series(f, h);
  cd exact = (std::polar(1.0, 3.0) - 1.0) / cd(0.0, 3.0);
  EXPECT_LE(std::abs(q.value - exact), 1e-8);
  EXPECT_GE(q.error, 0.5 * std::abs(q.value - exact));
  EXPECT_LE(q.error, 1e-7);
}

TEST(Expand, JsonStructure) {
  auto eq = registry("kdv");
  auto j = nlohmann::json::parse(expand_json(eq, 0, 3));
  EXPECT_EQ(j["treeCount"], 6u);
  EXPECT_EQ(j["trees"].size(), 6u);
  for (const auto& t : j["trees"]) EXPECT_EQ(t["elements"].size(), 7u);
  std::map<std::string, std::pair<int, int>> expected = {
      {"NR", {1, 2}}, {"N0", {1, 3}}, {"R", {-1, 3}}, {"NJ", {1, 2}}, {"P", {-1, 3}}};
  ASSERT_EQ(j["kinds"].size(), 5u);
  for (const auto& k : j["kinds"]) {
    auto e = expected.at(k["kind"].get<std::string>());
    EXPECT_EQ(k["sign"], e.first);
    EXPECT_EQ(k["denominatorArity"], e.second);
  }
  EXPECT_EQ(GenTerm({TermKind::N0, 2, 0, 0}).sign(), -1);
  EXPECT_EQ(GenTerm({TermKind::R, 2, 0, 0}).sign(), 1);
}
