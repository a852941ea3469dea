#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "nfrlab/dynamics.hpp"
#include "nfrlab/lattice.hpp"
#include "nfrlab/model.hpp"
#include "nfrlab/trees.hpp"

namespace nfrlab {

enum class ResonanceCase { A, B };

// Case A: |phi~^1| > 16 M, then |phi~^k| > 16 |phi~^{k-1}|.
// Case B: |phi~^k| > 2^k M.
struct ResonanceRule {
  ResonanceCase variant = ResonanceCase::A;
  double M = 1.0;

  // Whether step k (1-based) of a chain is non-resonant, given the
  // cumulative phases at k and k - 1 (the latter unused for k = 1).
  bool non_resonant(int k, double cum, double prevCum) const;
};

enum class Resonance { Resonant, NonResonant, Neither };
const char* resonance_name(Resonance r);

struct PhaseChain {
  std::vector<double> phis;
  std::vector<double> cumulative() const;
};

// Resonant iff every step before the last is non-resonant and the last is
// resonant (ties count as resonant); NonResonant iff all steps are
// non-resonant; Neither otherwise.
Resonance classify(const ResonanceRule& rule, const PhaseChain& chain);

enum class TermKind { NR, N0, R, NJ, P };
const char* term_kind_name(TermKind k);

// One entry of the symbolic hierarchy at generation J.
struct GenTerm {
  TermKind kind;
  int J;
  int rootComponent;
  int tree;  // index into the generation's tree list
  int sign() const;
  // Number of phase denominators i phi~^k.
  int denominator_arity() const;
};

// Trees of generation J for one root component (ordered trees when the
// equation has a single component and term, system trees otherwise).
std::vector<Tree> generation_trees(const EquationSpec& eq, int rootComponent,
                                   int J, std::uint64_t cap = kDefaultTreeCap);

// Every (tree, kind) pair of generation J.
std::vector<GenTerm> expand_generation(const EquationSpec& eq, int rootComponent,
                                       int J, std::uint64_t cap = kDefaultTreeCap);

// JSON listing of expand_generation with the tree structures.
std::string expand_json(const EquationSpec& eq, int rootComponent, int J,
                        std::uint64_t cap = kDefaultTreeCap);

// Solution samples laid out per lattice point as time series, the layout
// used by the term evaluator.  `rem` holds R[w] at the same samples when
// requested.
class SampleGrid {
 public:
  SampleGrid() = default;
  // Samples k = first .. last (inclusive) of the trajectory.
  SampleGrid(const EquationSpec& eq, const Trajectory& traj, std::size_t first,
             std::size_t last, bool withRemainder);
  // A single state at time t.
  SampleGrid(const EquationSpec& eq, const SeqState& state, double t,
             bool withRemainder);

  const TruncatedLattice& lattice() const { return lat_; }
  int components() const { return comps_; }
  std::size_t samples() const { return S_; }
  const std::vector<double>& times() const { return times_; }
  bool uniform() const { return uniform_; }
  bool has_remainder() const { return !rem_.empty(); }

  const cd* series(int c, std::size_t i) const {
    return w_.data() + (static_cast<std::size_t>(c) * lat_.size() + i) * S_;
  }
  const cd* rem_series(int c, std::size_t i) const {
    return rem_.data() + (static_cast<std::size_t>(c) * lat_.size() + i) * S_;
  }
  // Replaces the remainder series by arbitrary states (one per sample).
  void set_remainder(const std::vector<SeqState>& r);

 private:
  void fill(const std::vector<const SeqState*>& states,
            const std::vector<SeqState>* rem);

  TruncatedLattice lat_;
  int comps_ = 0;
  std::size_t S_ = 0;
  std::vector<double> times_;
  bool uniform_ = false;
  std::vector<cd> w_, rem_;
};

struct KindMask {
  bool nr = false, n0 = false, r = false, p = false, nj = false;
  static KindMask all() { return {true, true, true, true, true}; }
};

// Time series (one value per sample) of every requested kind, summed over
// all trees of the generation and all admissible index assignments.
struct TermSeries {
  std::vector<cd> nr, n0, r, p, nj;
};

struct EvalOptions {
  KindMask mask;
  NodePolicy policy = NodePolicy::AllElements;
  double alpha = 1.0;  // exponent of the regularization weight in P terms
  bool reference = false;  // use the plain assignment iterator
};

TermSeries evaluate_generation(const EquationSpec& eq, const ResonanceRule& rule,
                               int J, const std::vector<Tree>& trees,
                               const SampleGrid& grid, const Freq& root,
                               const EvalOptions& opt);

// Single term value at one time.  `remainder` replaces R[w] in kind R
// (pass remainder_eval(eq, state, t) for the literal term).
cd eval_term(TermKind kind, const EquationSpec& eq, const ResonanceRule& rule,
             int J, const SeqState& state, const SeqState* remainder, double t,
             int rootComponent, const Freq& root,
             NodePolicy policy = NodePolicy::AllElements, double alpha = 1.0);

// Composite Simpson over the grid with the error estimate |S_h - S_2h| / 15
// taken on the longest even prefix that supports both rules.
struct Quadrature {
  cd value;
  double error;
};
Quadrature integrate_series(const std::vector<cd>& f, double h);

struct GenerationOptions {
  NodePolicy policy = NodePolicy::AllElements;
  double epsilon = 0.0;  // regularized equation when > 0
  double alpha = 1.0;
  int threads = 1;
  std::vector<int> components;  // empty: all components
};

// Per lattice point and component of the generation-J identity at t:
// lhs = w|_0^t, boundary = sum_{j<J} N0^(j)|_0^t, integral = int_0^t of
// sum_{j<J} NR^(j) + sum_{j<J} R^(j) + NJ^(J) (+ regularization terms).
struct GenerationResult {
  int J;
  double t;
  SeqState lhs, boundary, integral, quadError;
  SeqState residual() const;  // lhs - boundary - integral
  double residual_norm(double s) const;
  double boundary_norm(double s) const;
  double integral_norm(double s) const;
  double quadrature_error(double s) const;
};

// Uses trajectory samples 0 .. sample (inclusive); sample >= 2.
GenerationResult generation_equation(const EquationSpec& eq,
                                     const ResonanceRule& rule, int J,
                                     const Trajectory& traj, std::size_t sample,
                                     const GenerationOptions& opt = {});

enum class XNorm { L2s, WeightedSup };

struct TailEntry {
  int j;
  double boundary;        // ||N0^(j)|_0^t||_{l^2_s}
  double resonant;        // ||int NR^(j)||_{l^2_s}
  double remainder;       // ||int R^(j-1)||_{l^2_s}
  double top;             // ||int N^(j)||_X
};

struct TailOptions {
  double s = 0.0;
  XNorm xnorm = XNorm::L2s;
  double xs = 0.0;
  int threads = 1;
  std::vector<int> components;  // empty: all components
};

std::vector<TailEntry> limit_equation_tail(const EquationSpec& eq,
                                           const ResonanceRule& rule, int Jmax,
                                           const Trajectory& traj,
                                           std::size_t sample,
                                           const TailOptions& opt = {});

}  // namespace nfrlab
