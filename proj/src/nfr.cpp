#include "nfrlab/nfr.hpp"

#include <algorithm>
#include <cmath>

#include <nlohmann/json.hpp>

#include "nfrlab/error.hpp"
#include "nfrlab/kernels.hpp"

namespace nfrlab {

bool ResonanceRule::non_resonant(int k, double cum, double prevCum) const {
  if (variant == ResonanceCase::A) {
    if (k == 1) return std::abs(cum) > 16.0 * M;
    return std::abs(cum) > 16.0 * std::abs(prevCum);
  }
  return std::abs(cum) > std::ldexp(M, k);
}

const char* resonance_name(Resonance r) {
  switch (r) {
    case Resonance::Resonant: return "resonant";
    case Resonance::NonResonant: return "non-resonant";
    case Resonance::Neither: return "neither";
  }
  return "?";
}

std::vector<double> PhaseChain::cumulative() const {
  std::vector<double> c(phis.size());
  double acc = 0.0;
  for (std::size_t k = 0; k < phis.size(); ++k) c[k] = acc += phis[k];
  return c;
}

Resonance classify(const ResonanceRule& rule, const PhaseChain& chain) {
  if (chain.phis.empty()) throw ContractError("classify: empty phase chain");
  auto cum = chain.cumulative();
  const int J = static_cast<int>(cum.size());
  for (int k = 1; k < J; ++k)
    if (!rule.non_resonant(k, cum[k - 1], k >= 2 ? cum[k - 2] : 0.0))
      return Resonance::Neither;
  return rule.non_resonant(J, cum[J - 1], J >= 2 ? cum[J - 2] : 0.0)
             ? Resonance::NonResonant
             : Resonance::Resonant;
}

const char* term_kind_name(TermKind k) {
  switch (k) {
    case TermKind::NR: return "NR";
    case TermKind::N0: return "N0";
    case TermKind::R: return "R";
    case TermKind::NJ: return "NJ";
    case TermKind::P: return "P";
  }
  return "?";
}

int GenTerm::sign() const {
  bool odd = (kind == TermKind::R || kind == TermKind::P) ? (J % 2 == 1)
                                                          : ((J - 1) % 2 == 1);
  return odd ? -1 : 1;
}

int GenTerm::denominator_arity() const {
  return (kind == TermKind::NR || kind == TermKind::NJ) ? J - 1 : J;
}

std::vector<Tree> generation_trees(const EquationSpec& eq, int rootComponent,
                                   int J, std::uint64_t cap) {
  if (rootComponent < 0 || rootComponent >= eq.components)
    throw ConfigError("root component out of range for " + eq.name);
  if (eq.components == 1 && eq.terms[0].size() == 1)
    return enumerate_trees(eq.terms[0][0].degree(), J, cap);
  return enumerate_system_trees(eq.shape(), rootComponent, J, cap);
}

std::vector<GenTerm> expand_generation(const EquationSpec& eq, int rootComponent,
                                       int J, std::uint64_t cap) {
  auto trees = generation_trees(eq, rootComponent, J, cap);
  std::vector<GenTerm> out;
  for (int t = 0; t < static_cast<int>(trees.size()); ++t)
    for (TermKind k : {TermKind::NR, TermKind::N0, TermKind::R, TermKind::NJ,
                       TermKind::P})
      out.push_back({k, J, rootComponent, t});
  return out;
}

std::string expand_json(const EquationSpec& eq, int rootComponent, int J,
                        std::uint64_t cap) {
  auto trees = generation_trees(eq, rootComponent, J, cap);
  nlohmann::json j;
  j["equation"] = eq.name;
  j["J"] = J;
  j["rootComponent"] = rootComponent;
  j["treeCount"] = trees.size();
  nlohmann::json tl = nlohmann::json::array();
  for (const auto& t : trees) {
    nlohmann::json nodes = nlohmann::json::array();
    for (int e : t.preorder()) {
      nlohmann::json n;
      n["element"] = e;
      n["label"] = t.label(e);
      n["parent"] = t.parent(e);
      n["slot"] = t.slot(e);
      n["component"] = t.component(e);
      if (!t.is_leaf(e)) n["term"] = t.term(e);
      nodes.push_back(n);
    }
    tl.push_back({{"canonical", t.canonical()}, {"elements", nodes}});
  }
  j["trees"] = tl;
  nlohmann::json kinds = nlohmann::json::array();
  for (TermKind k : {TermKind::NR, TermKind::N0, TermKind::R, TermKind::NJ,
                     TermKind::P}) {
    GenTerm g{k, J, rootComponent, 0};
    kinds.push_back({{"kind", term_kind_name(k)},
                     {"sign", g.sign()},
                     {"denominatorArity", g.denominator_arity()},
                     {"set", k == TermKind::NR   ? "resonant"
                             : k == TermKind::NJ ? "non-resonant prefix"
                                                 : "non-resonant"}});
  }
  j["kinds"] = kinds;
  return j.dump(2);
}

SampleGrid::SampleGrid(const EquationSpec& eq, const Trajectory& traj,
                       std::size_t first, std::size_t last, bool withRemainder) {
  if (traj.size() == 0 || last >= traj.size() || first > last)
    throw ContractError("SampleGrid: sample range outside the trajectory");
  std::vector<const SeqState*> states;
  std::vector<SeqState> rem;
  for (std::size_t k = first; k <= last; ++k) {
    states.push_back(&traj.states[k]);
    times_.push_back(traj.times[k]);
    if (withRemainder) rem.push_back(remainder_eval(eq, traj.states[k], traj.times[k]));
  }
  fill(states, withRemainder ? &rem : nullptr);
}

SampleGrid::SampleGrid(const EquationSpec& eq, const SeqState& state, double t,
                       bool withRemainder) {
  times_ = {t};
  std::vector<SeqState> rem;
  if (withRemainder) rem.push_back(remainder_eval(eq, state, t));
  fill({&state}, withRemainder ? &rem : nullptr);
}

void SampleGrid::fill(const std::vector<const SeqState*>& states,
                      const std::vector<SeqState>* rem) {
  lat_ = states.front()->lattice();
  comps_ = states.front()->components();
  S_ = states.size();
  const std::size_t L = lat_.size();
  w_.assign(static_cast<std::size_t>(comps_) * L * S_, cd(0.0, 0.0));
  for (std::size_t s = 0; s < S_; ++s)
    for (int c = 0; c < comps_; ++c)
      for (std::size_t i = 0; i < L; ++i)
        w_[(c * L + i) * S_ + s] = states[s]->at(c, i);
  if (rem) set_remainder(*rem);
  uniform_ = true;
  if (S_ >= 2) {
    const double h = times_[1] - times_[0];
    for (std::size_t s = 1; s < S_; ++s)
      if (std::abs(times_[s] - times_[0] - static_cast<double>(s) * h) >
          1e-9 * std::max(1.0, std::abs(times_[s])))
        uniform_ = false;
  }
}

void SampleGrid::set_remainder(const std::vector<SeqState>& r) {
  if (r.size() != S_) throw ContractError("SampleGrid: remainder sample count");
  const std::size_t L = lat_.size();
  rem_.assign(w_.size(), cd(0.0, 0.0));
  for (std::size_t s = 0; s < S_; ++s)
    for (int c = 0; c < comps_; ++c)
      for (std::size_t i = 0; i < L; ++i) rem_[(c * L + i) * S_ + s] = r[s].at(c, i);
}

namespace {

constexpr cd kI(0.0, 1.0);

// Depth-first evaluation of one tree: nodes are visited in label order and
// the children of node k are enumerated once its own frequency is known.
class TreeEvaluator {
 public:
  TreeEvaluator(const EquationSpec& eq, const ResonanceRule& rule, int J,
                const Tree& tree, const SampleGrid& g, const EvalOptions& opt,
                const std::vector<Freq>& freqs, const std::vector<double>& lam,
                TermSeries& out)
      : eq_(eq), rule_(rule), J_(J), tree_(tree), g_(g), opt_(opt),
        freqs_(freqs), lam_(lam), out_(out), lat_(g.lattice()) {
    const int E = tree.element_count();
    f_.assign(E, Freq(lat_.d()));
    idx_.assign(E, 0);
    cum_.assign(J + 1, 0.0);
    leaves_ = tree.leaves();
    const std::size_t S = g.samples();
    ph_.resize(S);
    prod_.resize(S);
    base_.resize(S);
    if (opt.mask.r) {
      pre_.assign(leaves_.size() + 1, std::vector<cd>(S));
      rsum_.resize(S);
      tmp_.resize(S);
    }
  }

  void run(const Freq& root) {
    f_[0] = root;
    idx_[0] = lat_.contains(root) ? lat_.index(root) : 0;
    if (opt_.reference || opt_.policy == NodePolicy::LeavesOnly)
      run_reference(root);
    else
      node(1, cd(1.0, 0.0));
  }

 private:
  const TermSpec& term_at(int e) const {
    return eq_.terms[tree_.component(e)][tree_.term(e)];
  }

  void node(int k, cd mprod) {
    if (k > J_) {
      leaf_complete(mprod);
      return;
    }
    const int e = tree_.node(k);
    const TermSpec& term = term_at(e);
    const auto& ch = tree_.children(e);
    const int P = static_cast<int>(ch.size());
    const std::size_t L = lat_.size();
    std::vector<std::size_t> odo(P - 1, 0);
    std::vector<Freq> in(P, Freq(lat_.d()));
    while (true) {
      Freq rest = f_[e];
      for (int j = 0; j < P - 1; ++j) {
        in[j] = freqs_[odo[j]];
        rest -= in[j];
      }
      if (lat_.contains(rest)) {
        in[P - 1] = rest;
        cd m = term.multiplier(f_[e], in.data());
        if (m != cd(0.0, 0.0)) {
          double c = cum_[k - 1] + term.phase(f_[e], in.data());
          if (k == J_ || rule_.non_resonant(k, c, cum_[k - 1])) {
            cum_[k] = c;
            for (int j = 0; j < P; ++j) {
              f_[ch[j]] = in[j];
              idx_[ch[j]] = j < P - 1 ? odo[j] : lat_.index(rest);
            }
            node(k + 1, mprod * m);
          }
        }
      }
      int j = P - 2;
      while (j >= 0) {
        if (++odo[j] < L) break;
        odo[j] = 0;
        --j;
      }
      if (j < 0) break;
    }
  }

  void run_reference(const Freq& root) {
    AssignmentIterator it(tree_, lat_, root, opt_.policy);
    while (it.next()) {
      const auto& a = it.current().freqs;
      cd mprod(1.0, 0.0);
      bool ok = true;
      for (int k = 1; k <= J_ && ok; ++k) {
        const int e = tree_.node(k);
        const auto& ch = tree_.children(e);
        std::vector<Freq> in;
        for (int c : ch) in.push_back(a[c]);
        cd m = term_at(e).multiplier(a[e], in.data());
        if (m == cd(0.0, 0.0)) ok = false;
        double c = cum_[k - 1] + term_at(e).phase(a[e], in.data());
        if (k < J_ && !rule_.non_resonant(k, c, cum_[k - 1])) ok = false;
        cum_[k] = c;
        mprod *= m;
      }
      if (!ok) continue;
      for (int l : leaves_) {
        f_[l] = a[l];
        idx_[l] = lat_.index(a[l]);
      }
      leaf_complete(mprod);
    }
  }

  void phase_series(double phi) {
    const auto& t = g_.times();
    const std::size_t S = t.size();
    if (!g_.uniform() || S < 2) {
      for (std::size_t s = 0; s < S; ++s) ph_[s] = std::polar(1.0, t[s] * phi);
      return;
    }
    const cd step = std::polar(1.0, (t[1] - t[0]) * phi);
    for (std::size_t s = 0; s < S; ++s)
      ph_[s] = (s % 16 == 0) ? std::polar(1.0, t[s] * phi) : ph_[s - 1] * step;
  }

  void leaf_complete(cd mprod) {
    const bool lastNR = rule_.non_resonant(J_, cum_[J_], cum_[J_ - 1]);
    const KindMask& m = opt_.mask;
    const bool wantNR = m.nr && !lastNR;
    const bool wantFull = lastNR && (m.n0 || m.r || m.p);
    if (!m.nj && !wantNR && !wantFull) return;
    cd denomPrev(1.0, 0.0);
    for (int k = 1; k < J_; ++k) {
      if (cum_[k] == 0.0) throw ContractError("zero phase denominator on an admissible chain");
      denomPrev *= kI * cum_[k];
    }
    const double sgn = ((J_ - 1) % 2 == 0) ? 1.0 : -1.0;
    const std::size_t S = g_.samples();
    phase_series(cum_[J_]);
    const std::size_t nl = leaves_.size();
    std::copy_n(g_.series(tree_.component(leaves_[0]), idx_[leaves_[0]]), S,
                prod_.begin());
    for (std::size_t a = 1; a < nl; ++a)
      kernels::cmul(prod_.data(),
                    g_.series(tree_.component(leaves_[a]), idx_[leaves_[a]]),
                    prod_.data(), S);
    kernels::cmul(ph_.data(), prod_.data(), base_.data(), S);
    const cd cPrev = sgn * mprod / denomPrev;
    if (m.nj) kernels::axpy(out_.nj.data(), cPrev, base_.data(), S);
    if (wantNR) kernels::axpy(out_.nr.data(), cPrev, base_.data(), S);
    if (!wantFull) return;
    if (cum_[J_] == 0.0) throw ContractError("zero phase denominator on an admissible chain");
    const cd cFull = cPrev / (kI * cum_[J_]);
    if (m.n0) kernels::axpy(out_.n0.data(), cFull, base_.data(), S);
    if (m.p) {
      double lam = 0.0;
      for (int l : leaves_) lam += lam_[idx_[l]];
      kernels::axpy(out_.p.data(), -lam * cFull, base_.data(), S);
    }
    if (m.r) {
      if (!g_.has_remainder()) throw ContractError("remainder samples missing");
      // pre_[a] = prod of the first a leaf series; the suffix product is
      // accumulated backwards into tmp_.
      std::fill(pre_[0].begin(), pre_[0].end(), cd(1.0, 0.0));
      for (std::size_t a = 0; a < nl; ++a)
        kernels::cmul(pre_[a].data(),
                      g_.series(tree_.component(leaves_[a]), idx_[leaves_[a]]),
                      pre_[a + 1].data(), S);
      std::fill(tmp_.begin(), tmp_.end(), cd(1.0, 0.0));
      std::fill(rsum_.begin(), rsum_.end(), cd(0.0, 0.0));
      std::vector<cd> t2(S);
      for (std::size_t a = nl; a-- > 0;) {
        const int l = leaves_[a];
        kernels::cmul(pre_[a].data(), g_.rem_series(tree_.component(l), idx_[l]),
                      t2.data(), S);
        kernels::cmul_acc(rsum_.data(), t2.data(), tmp_.data(), S);
        kernels::cmul(tmp_.data(), g_.series(tree_.component(l), idx_[l]),
                      tmp_.data(), S);
      }
      kernels::cmul(ph_.data(), rsum_.data(), rsum_.data(), S);
      kernels::axpy(out_.r.data(), -cFull, rsum_.data(), S);
    }
  }

  const EquationSpec& eq_;
  const ResonanceRule& rule_;
  int J_;
  const Tree& tree_;
  const SampleGrid& g_;
  const EvalOptions& opt_;
  const std::vector<Freq>& freqs_;
  const std::vector<double>& lam_;
  TermSeries& out_;
  TruncatedLattice lat_;
  std::vector<Freq> f_;
  std::vector<std::size_t> idx_;
  std::vector<double> cum_;
  std::vector<int> leaves_;
  std::vector<cd> ph_, prod_, base_, rsum_, tmp_;
  std::vector<std::vector<cd>> pre_;
};

}  // namespace

TermSeries evaluate_generation(const EquationSpec& eq, const ResonanceRule& rule,
                               int J, const std::vector<Tree>& trees,
                               const SampleGrid& grid, const Freq& root,
                               const EvalOptions& opt) {
  if (J < 1) throw ConfigError("generation J must be >= 1");
  if (!(rule.M >= 1.0)) throw ConfigError("resonance rule requires M >= 1");
  const auto& lat = grid.lattice();
  if (!lat.contains(root))
    throw ContractError("root frequency " + root.str() + " outside the lattice");
  const std::size_t S = grid.samples();
  TermSeries out;
  const cd zero(0.0, 0.0);
  if (opt.mask.nr) out.nr.assign(S, zero);
  if (opt.mask.n0) out.n0.assign(S, zero);
  if (opt.mask.r) out.r.assign(S, zero);
  if (opt.mask.p) out.p.assign(S, zero);
  if (opt.mask.nj) out.nj.assign(S, zero);
  std::vector<Freq> freqs(lat.size());
  for (std::size_t i = 0; i < lat.size(); ++i) freqs[i] = lat.freq(i);
  std::vector<double> lam;
  if (opt.mask.p) lam = bracket_powers(lat, 2.0 * opt.alpha);
  for (const auto& tree : trees) {
    if (tree.J() != J) throw ContractError("tree generation does not match J");
    TreeEvaluator ev(eq, rule, J, tree, grid, opt, freqs, lam, out);
    ev.run(root);
  }
  return out;
}

cd eval_term(TermKind kind, const EquationSpec& eq, const ResonanceRule& rule,
             int J, const SeqState& state, const SeqState* remainder, double t,
             int rootComponent, const Freq& root, NodePolicy policy,
             double alpha) {
  auto trees = generation_trees(eq, rootComponent, J);
  SampleGrid g(eq, state, t, false);
  if (kind == TermKind::R) {
    std::vector<SeqState> r{remainder ? *remainder : remainder_eval(eq, state, t)};
    g.set_remainder(r);
  }
  EvalOptions opt;
  opt.policy = policy;
  opt.alpha = alpha;
  switch (kind) {
    case TermKind::NR: opt.mask.nr = true; break;
    case TermKind::N0: opt.mask.n0 = true; break;
    case TermKind::R: opt.mask.r = true; break;
    case TermKind::NJ: opt.mask.nj = true; break;
    case TermKind::P: opt.mask.p = true; break;
  }
  TermSeries s = evaluate_generation(eq, rule, J, trees, g, root, opt);
  switch (kind) {
    case TermKind::NR: return s.nr[0];
    case TermKind::N0: return s.n0[0];
    case TermKind::R: return s.r[0];
    case TermKind::NJ: return s.nj[0];
    case TermKind::P: return s.p[0];
  }
  return {};
}

Quadrature integrate_series(const std::vector<cd>& f, double h) {
  Quadrature q{simpson(f.data(), f.size(), h), 0.0};
  std::size_t n = f.size() - 1;
  std::size_t m = n - (n % 2);
  if (m >= 4) {
    cd fine = simpson(f.data(), m + 1, h);
    std::vector<cd> coarse;
    for (std::size_t k = 0; k <= m; k += 2) coarse.push_back(f[k]);
    cd c = simpson(coarse.data(), coarse.size(), 2.0 * h);
    q.error = std::abs(fine - c) / 15.0;
  }
  return q;
}

SeqState GenerationResult::residual() const {
  SeqState r = lhs;
  r -= boundary;
  r -= integral;
  return r;
}
double GenerationResult::residual_norm(double s) const {
  return norm_l2s_all(residual(), s);
}
double GenerationResult::boundary_norm(double s) const {
  return norm_l2s_all(boundary, s);
}
double GenerationResult::integral_norm(double s) const {
  return norm_l2s_all(integral, s);
}
double GenerationResult::quadrature_error(double s) const {
  return norm_l2s_all(quadError, s);
}

namespace {

std::vector<int> component_list(const EquationSpec& eq, const std::vector<int>& req) {
  if (req.empty()) {
    std::vector<int> all(eq.components);
    for (int c = 0; c < eq.components; ++c) all[c] = c;
    return all;
  }
  for (int c : req)
    if (c < 0 || c >= eq.components) throw ConfigError("component index out of range");
  return req;
}

void check_trajectory(const Trajectory& traj, std::size_t sample) {
  if (traj.size() == 0) throw ConfigError("empty trajectory");
  if (sample >= traj.size()) throw ConfigError("sample index beyond the trajectory");
  if (sample < 2)
    throw ConfigError("Simpson quadrature needs at least 3 trajectory samples");
}

}  // namespace

GenerationResult generation_equation(const EquationSpec& eq,
                                     const ResonanceRule& rule, int J,
                                     const Trajectory& traj, std::size_t sample,
                                     const GenerationOptions& opt) {
  check_trajectory(traj, sample);
  if (J < 1) throw ConfigError("generation J must be >= 1");
  const auto comps = component_list(eq, opt.components);
  const auto& lat = traj.lattice();
  SampleGrid grid(eq, traj, 0, sample, true);
  if (!grid.uniform()) throw ConfigError("trajectory samples are not uniform");
  const std::size_t S = grid.samples();
  const double h = traj.dt;
  const bool reg = opt.epsilon > 0.0;
  std::vector<double> lam;
  if (reg) lam = bracket_powers(lat, 2.0 * opt.alpha);

  GenerationResult res{J, traj.times[sample], SeqState(lat, eq.components),
                       SeqState(lat, eq.components), SeqState(lat, eq.components),
                       SeqState(lat, eq.components)};
  for (int c : comps) {
    std::vector<std::vector<Tree>> trees(J + 1);
    for (int j = 1; j <= J; ++j) trees[j] = generation_trees(eq, c, j);
    parallel_for(lat.size(), opt.threads, [&](std::size_t i) {
      const Freq root = lat.freq(i);
      std::vector<cd> integrand(S);
      const cd* r0 = grid.rem_series(c, i);
      const cd* w = grid.series(c, i);
      for (std::size_t s = 0; s < S; ++s) {
        integrand[s] = r0[s];
        if (reg) integrand[s] -= opt.epsilon * lam[i] * w[s];
      }
      cd boundary(0.0, 0.0);
      for (int j = 1; j <= J; ++j) {
        EvalOptions eo;
        eo.policy = opt.policy;
        eo.alpha = opt.alpha;
        if (j < J) {
          eo.mask.nr = eo.mask.n0 = eo.mask.r = true;
          eo.mask.p = reg;
        } else {
          eo.mask.nj = true;
        }
        TermSeries ts = evaluate_generation(eq, rule, j, trees[j], grid, root, eo);
        if (j < J) {
          boundary += ts.n0[S - 1] - ts.n0[0];
          for (std::size_t s = 0; s < S; ++s) {
            integrand[s] += ts.nr[s] + ts.r[s];
            if (reg) integrand[s] -= opt.epsilon * ts.p[s];
          }
        } else {
          for (std::size_t s = 0; s < S; ++s) integrand[s] += ts.nj[s];
        }
      }
      Quadrature q = integrate_series(integrand, h);
      res.lhs.at(c, i) = w[S - 1] - w[0];
      res.boundary.at(c, i) = boundary;
      res.integral.at(c, i) = q.value;
      res.quadError.at(c, i) = q.error;
    });
  }
  return res;
}

std::vector<TailEntry> limit_equation_tail(const EquationSpec& eq,
                                           const ResonanceRule& rule, int Jmax,
                                           const Trajectory& traj,
                                           std::size_t sample,
                                           const TailOptions& opt) {
  check_trajectory(traj, sample);
  if (Jmax < 1) throw ConfigError("Jmax must be >= 1");
  const auto comps = component_list(eq, opt.components);
  const auto& lat = traj.lattice();
  SampleGrid grid(eq, traj, 0, sample, true);
  if (!grid.uniform()) throw ConfigError("trajectory samples are not uniform");
  const std::size_t S = grid.samples();
  const double h = traj.dt;
  const int C = eq.components;
  // Per generation j: boundary, resonant integral, R^(j) integral, top integral.
  std::vector<SeqState> bnd(Jmax + 1, SeqState(lat, C)), res(Jmax + 1, SeqState(lat, C)),
      rem(Jmax + 1, SeqState(lat, C)), top(Jmax + 1, SeqState(lat, C));
  for (int c : comps) {
    for (std::size_t i = 0; i < lat.size(); ++i) {
      std::vector<cd> r0(grid.rem_series(c, i), grid.rem_series(c, i) + S);
      rem[0].at(c, i) = integrate_series(r0, h).value;
    }
    for (int j = 1; j <= Jmax; ++j) {
      auto trees = generation_trees(eq, c, j);
      parallel_for(lat.size(), opt.threads, [&](std::size_t i) {
        EvalOptions eo;
        eo.mask.nr = eo.mask.n0 = eo.mask.r = eo.mask.nj = true;
        TermSeries ts = evaluate_generation(eq, rule, j, trees, grid, lat.freq(i), eo);
        bnd[j].at(c, i) = ts.n0[S - 1] - ts.n0[0];
        res[j].at(c, i) = integrate_series(ts.nr, h).value;
        rem[j].at(c, i) = integrate_series(ts.r, h).value;
        top[j].at(c, i) = integrate_series(ts.nj, h).value;
      });
    }
  }
  auto xnorm = [&](const SeqState& x) {
    if (opt.xnorm == XNorm::L2s) return norm_l2s_all(x, opt.xs);
    double m = 0.0;
    for (int c = 0; c < C; ++c) m = std::max(m, norm_weighted_sup(x, opt.xs, c));
    return m;
  };
  std::vector<TailEntry> out;
  for (int j = 1; j <= Jmax; ++j)
    out.push_back({j, norm_l2s_all(bnd[j], opt.s), norm_l2s_all(res[j], opt.s),
                   norm_l2s_all(rem[j - 1], opt.s), xnorm(top[j])});
  return out;
}

}  // namespace nfrlab
