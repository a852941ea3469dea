#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "nfrlab/lattice.hpp"
#include "nfrlab/model.hpp"

namespace nfrlab {

// Runs fn(i) for i in [0, n) on up to `threads` workers.  Each index is
// handled by exactly one call, so results written per index do not depend
// on the thread count.  threads <= 0 uses the hardware concurrency.
void parallel_for(std::size_t n, int threads,
                  const std::function<void(std::size_t)>& fn);

// Interaction-picture evaluation of the nonlinearity on a fixed lattice.
// Every term is formed as a pointwise product on a zero-padded grid large
// enough for exact Galerkin truncation; restricted terms are completed by
// the equation's correction functional.
class RhsEvaluator {
 public:
  RhsEvaluator(const EquationSpec& eq, const TruncatedLattice& lat);

  const EquationSpec& equation() const { return *eq_; }
  const TruncatedLattice& lattice() const { return lat_; }
  int grid_size() const { return M_; }

  // out = N[w](t) (restricted sums, no remainder).
  void nonlinear(const SeqState& w, double t, SeqState& out) const;
  // out = N[w](t) + R[w](t).
  void full(const SeqState& w, double t, SeqState& out) const;

 private:
  struct Slot {
    int comp;
    std::vector<cd> factor;  // inFactor over the box, empty if none
  };
  struct Term {
    int outComp;
    std::vector<Slot> slots;
    std::vector<cd> outFactor;  // coeff * outFactor over the box
  };

  const EquationSpec* eq_;
  TruncatedLattice lat_;
  int M_;
  std::vector<std::vector<double>> psi_;  // per component over the box
  std::vector<Term> terms_;
};

// N[w](t) + R[w](t) through the FFT path.
SeqState rhs(const EquationSpec& eq, const SeqState& state, double t);

struct IntegratorCfg {
  double dt = 1e-3;
  double T = 1.0;
  int storeEvery = 1;
};

struct RegularizationCfg {
  double epsilon = 0.0;
  double alpha = 1.0;
};

struct Trajectory {
  std::string equation;
  double dt = 0.0;  // spacing of the stored samples
  std::vector<double> times;
  std::vector<SeqState> states;

  std::size_t size() const { return times.size(); }
  const TruncatedLattice& lattice() const { return states.front().lattice(); }
};

// Number of steps T/dt; ConfigError unless T/dt is an integer (to 1e-9) and
// the stride divides it.
long long step_count(const IntegratorCfg& cfg);

// Classical RK4 for d/dt w = N[w] + R[w].
Trajectory solve(const EquationSpec& eq, const SeqState& initial,
                 const IntegratorCfg& cfg);

// Lawson RK4 for d/dt w = -eps <n>^{2 alpha} w + N[w] + R[w], with the
// linear part integrated exactly by e^{-eps <n>^{2 alpha} h} at every stage.
// eps = 0 follows the same arithmetic as solve.
Trajectory solve_regularized(const EquationSpec& eq, const SeqState& initial,
                             const RegularizationCfg& reg,
                             const IntegratorCfg& cfg);

struct GapSample {
  double t;
  double gap;
  double ratio;
};

struct UniquenessReport {
  double initialGap = 0.0;
  double supGap = 0.0;
  double supRatio = 0.0;  // NaN when the initial gap is zero
  std::vector<GapSample> perTime;
};

// sup_t ||w(t) - v(t)||_{l^2_s} / ||w(0) - v(0)||_{l^2_s} over all components.
UniquenessReport uniqueness_gap(const EquationSpec& eq, const SeqState& w0,
                                const SeqState& v0, double s,
                                const IntegratorCfg& cfg);

struct WeakLimitRun {
  double epsilon;
  double cutoff;         // N_eps
  double initialNorm;    // ||w^eps(0)||_{l^2_s}
  double supNorm;        // sup_t ||w^eps(t)||_{l^2_s}
  double supNormHigh;    // sup_t ||w^eps(t)||_{l^2_{s + 2 alpha}}
  bool aprioriOk;        // supNorm <= 6 initialNorm
};

struct WeakLimitPair {
  std::size_t i, j;
  double distance;  // sup_t ||w^{eps_i} - w^{eps_j}||_{l^2_s}
  double bound;     // 6 ||initial gap|| + eps_i ||.||_{s+2a} + eps_j ||.||_{s+2a}
  bool ok;
};

struct WeakLimitReport {
  std::vector<WeakLimitRun> runs;
  std::vector<WeakLimitPair> pairs;
  bool aprioriOk = true;
  bool cauchyOk = true;
  bool distancesDecreasing = true;  // consecutive-pair distances
};

WeakLimitReport weak_limit_experiment(const EquationSpec& eq,
                                      const SeqState& initial, double s,
                                      double alpha,
                                      const std::vector<double>& epsList,
                                      const IntegratorCfg& cfg);

// |int_0^T <N[m_k w] - N[w], phi> dt| for every cutoff m_k (Simpson in time),
// with <a, b> = sum_n a_n conj(b_n) over all components.
std::vector<double> cutoff_convergence(const EquationSpec& eq,
                                       const Trajectory& traj,
                                       const std::vector<Symbol>& cutoffs,
                                       const SeqState& testFunction);

// Composite Simpson over uniformly spaced samples f[0..n] with spacing h;
// an odd number of intervals closes with the 3/8 rule.  Needs n >= 2.
cd simpson(const cd* f, std::size_t count, double h);
double simpson(const double* f, std::size_t count, double h);

}  // namespace nfrlab
