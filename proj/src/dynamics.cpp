#include "nfrlab/dynamics.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <thread>

#include "nfrlab/error.hpp"
#include "nfrlab/fft.hpp"
#include "nfrlab/kernels.hpp"

namespace nfrlab {

void parallel_for(std::size_t n, int threads,
                  const std::function<void(std::size_t)>& fn) {
  if (threads <= 0)
    threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  threads = static_cast<int>(std::min<std::size_t>(threads, n));
  if (threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex errorMutex;
  auto worker = [&]() {
    while (true) {
      std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(errorMutex);
        if (!error) error = std::current_exception();
        next.store(n);
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  for (int k = 0; k < threads; ++k) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

RhsEvaluator::RhsEvaluator(const EquationSpec& eq, const TruncatedLattice& lat)
    : eq_(&eq), lat_(lat) {
  if (lat.d() != eq.d)
    throw ConfigError("lattice dimension " + std::to_string(lat.d()) +
                      " does not match equation " + eq.name);
  if (eq.dispersion.size() != static_cast<std::size_t>(eq.components))
    throw ConfigError("equation " + eq.name +
                      " has no separable dispersion; FFT evaluation unavailable");
  M_ = dealiased_size(lat.N(), std::max(1, eq.max_degree()));
  const std::size_t L = lat.size();
  psi_.assign(eq.components, std::vector<double>(L));
  for (int c = 0; c < eq.components; ++c)
    for (std::size_t i = 0; i < L; ++i) psi_[c][i] = eq.dispersion[c](lat.freq(i));
  for (int c = 0; c < eq.components; ++c) {
    for (const auto& t : eq.terms[c]) {
      Term term;
      term.outComp = c;
      term.outFactor.resize(L);
      for (std::size_t i = 0; i < L; ++i)
        term.outFactor[i] = t.outFactor ? t.coeff * t.outFactor(lat.freq(i)) : t.coeff;
      for (int j = 0; j < t.degree(); ++j) {
        Slot s;
        s.comp = t.inputs[j];
        if (j < static_cast<int>(t.inFactor.size()) && t.inFactor[j]) {
          s.factor.resize(L);
          for (std::size_t i = 0; i < L; ++i) s.factor[i] = t.inFactor[j](lat.freq(i));
        }
        term.slots.push_back(std::move(s));
      }
      terms_.push_back(std::move(term));
    }
  }
}

void RhsEvaluator::nonlinear(const SeqState& w, double t, SeqState& out) const {
  if (w.lattice() != lat_ || w.components() != eq_->components)
    throw ContractError("rhs: state does not match the evaluator");
  if (out.lattice() != lat_ || out.components() != eq_->components)
    out = SeqState(lat_, eq_->components);
  else
    out.set_zero();
  const std::size_t L = lat_.size();
  FftGrid& g = fft_grid(lat_.d(), M_);
  const std::size_t G = g.total();

  std::vector<std::vector<cd>> rot(eq_->components, std::vector<cd>(L));
  for (int c = 0; c < eq_->components; ++c)
    for (std::size_t i = 0; i < L; ++i) rot[c][i] = std::polar(1.0, -t * psi_[c][i]);

  // Physical images of unweighted slots are shared between terms.
  std::map<int, std::vector<cd>> plain;
  std::vector<cd> coeffs(L), phys(G), prod(G), back(L);
  auto physical = [&](const Slot& s, std::vector<cd>& dst) {
    auto src = w.comp(s.comp);
    for (std::size_t i = 0; i < L; ++i) {
      coeffs[i] = src[i] * rot[s.comp][i];
      if (!s.factor.empty()) coeffs[i] *= s.factor[i];
    }
    g.to_physical(lat_, coeffs.data(), dst.data());
  };
  for (const auto& term : terms_) {
    for (std::size_t j = 0; j < term.slots.size(); ++j) {
      const Slot& s = term.slots[j];
      const std::vector<cd>* img;
      if (s.factor.empty()) {
        auto it = plain.find(s.comp);
        if (it == plain.end()) {
          std::vector<cd> v(G);
          physical(s, v);
          it = plain.emplace(s.comp, std::move(v)).first;
        }
        img = &it->second;
      } else {
        physical(s, phys);
        img = &phys;
      }
      if (j == 0)
        std::copy(img->begin(), img->end(), prod.begin());
      else
        kernels::cmul(prod.data(), img->data(), prod.data(), G);
    }
    g.to_fourier(prod.data(), lat_, back.data());
    auto dst = out.comp(term.outComp);
    for (std::size_t i = 0; i < L; ++i)
      dst[i] += term.outFactor[i] * std::conj(rot[term.outComp][i]) * back[i];
  }
  if (eq_->correction) eq_->correction(w, t, out);
}

void RhsEvaluator::full(const SeqState& w, double t, SeqState& out) const {
  nonlinear(w, t, out);
  if (eq_->remainder) {
    SeqState r(lat_, eq_->components);
    eq_->remainder(w, t, r);
    out += r;
  }
}

SeqState rhs(const EquationSpec& eq, const SeqState& state, double t) {
  RhsEvaluator ev(eq, state.lattice());
  SeqState out(state.lattice(), eq.components);
  ev.full(state, t, out);
  return out;
}

long long step_count(const IntegratorCfg& cfg) {
  if (!(cfg.dt > 0.0)) throw ConfigError("integrator.dt must be > 0");
  if (!(cfg.T >= 0.0)) throw ConfigError("integrator.T must be >= 0");
  if (cfg.storeEvery < 1) throw ConfigError("integrator.storeEvery must be >= 1");
  double q = cfg.T / cfg.dt;
  long long n = std::llround(q);
  if (std::abs(q - static_cast<double>(n)) > 1e-9 * std::max(1.0, q))
    throw ConfigError("integrator.T / integrator.dt must be an integer");
  if (n % cfg.storeEvery != 0)
    throw ConfigError("integrator.storeEvery must divide T / dt");
  return n;
}

namespace {

void scale_by(SeqState& x, const std::vector<double>& e) {
  const std::size_t L = e.size();
  for (int c = 0; c < x.components(); ++c) {
    auto z = x.comp(c);
    for (std::size_t i = 0; i < L; ++i) z[i] *= e[i];
  }
}

Trajectory integrate(const EquationSpec& eq, const SeqState& initial,
                     const RegularizationCfg& reg, const IntegratorCfg& cfg) {
  const long long steps = step_count(cfg);
  if (!(reg.epsilon >= 0.0)) throw ConfigError("regularization.epsilon must be >= 0");
  if (!(reg.alpha > 0.0)) throw ConfigError("regularization.alpha must be > 0");
  if (!initial.all_finite()) throw InvariantError("initial state is not finite");
  const auto& lat = initial.lattice();
  RhsEvaluator ev(eq, lat);
  const double h = cfg.dt;
  const std::size_t L = lat.size();
  std::vector<double> eh(L), eh2(L);
  for (std::size_t i = 0; i < L; ++i) {
    double lam = reg.epsilon * std::pow(bracket(lat.freq(i)), 2.0 * reg.alpha);
    eh[i] = std::exp(-lam * h);
    eh2[i] = std::exp(-lam * 0.5 * h);
  }
  Trajectory traj;
  traj.equation = eq.name;
  traj.dt = h * cfg.storeEvery;
  traj.times.push_back(0.0);
  traj.states.push_back(initial);

  const int C = eq.components;
  SeqState w = initial, u(lat, C), k1(lat, C), k2(lat, C), k3(lat, C), k4(lat, C);
  auto& wr = w.raw();
  auto& ur = u.raw();
  for (long long step = 0; step < steps; ++step) {
    const double t = static_cast<double>(step) * h;
    ev.full(w, t, k1);
    for (std::size_t q = 0; q < ur.size(); ++q) ur[q] = wr[q] + (0.5 * h) * k1.raw()[q];
    scale_by(u, eh2);
    ev.full(u, t + 0.5 * h, k2);
    u = w;
    scale_by(u, eh2);
    for (std::size_t q = 0; q < ur.size(); ++q) ur[q] += (0.5 * h) * k2.raw()[q];
    ev.full(u, t + 0.5 * h, k3);
    SeqState e3 = k3;
    scale_by(e3, eh2);
    u = w;
    scale_by(u, eh);
    for (std::size_t q = 0; q < ur.size(); ++q) ur[q] += h * e3.raw()[q];
    ev.full(u, t + h, k4);
    // w+ = E(h) w + h/6 (E(h) k1 + 2 E(h/2)(k2 + k3) + k4)
    SeqState a = k1, b = k2;
    scale_by(a, eh);
    b += k3;
    scale_by(b, eh2);
    scale_by(w, eh);
    for (std::size_t q = 0; q < wr.size(); ++q)
      wr[q] += (h / 6.0) * (a.raw()[q] + 2.0 * b.raw()[q] + k4.raw()[q]);
    if (!w.all_finite())
      throw InvariantError("non-finite state at t = " +
                           std::to_string(static_cast<double>(step + 1) * h));
    if ((step + 1) % cfg.storeEvery == 0) {
      traj.times.push_back(static_cast<double>(step + 1) * h);
      traj.states.push_back(w);
    }
  }
  return traj;
}

}  // namespace

Trajectory solve(const EquationSpec& eq, const SeqState& initial,
                 const IntegratorCfg& cfg) {
  return integrate(eq, initial, RegularizationCfg{0.0, 1.0}, cfg);
}

Trajectory solve_regularized(const EquationSpec& eq, const SeqState& initial,
                             const RegularizationCfg& reg,
                             const IntegratorCfg& cfg) {
  return integrate(eq, initial, reg, cfg);
}

UniquenessReport uniqueness_gap(const EquationSpec& eq, const SeqState& w0,
                                const SeqState& v0, double s,
                                const IntegratorCfg& cfg) {
  if (w0.lattice() != v0.lattice() || w0.components() != v0.components())
    throw ConfigError("uniqueness: both initial states must share one lattice");
  Trajectory a = solve(eq, w0, cfg);
  Trajectory b = solve(eq, v0, cfg);
  UniquenessReport r;
  r.initialGap = norm_l2s_all(w0 - v0, s);
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (std::size_t k = 0; k < a.size(); ++k) {
    double gap = norm_l2s_all(a.states[k] - b.states[k], s);
    double ratio = r.initialGap > 0.0 ? gap / r.initialGap : nan;
    r.perTime.push_back({a.times[k], gap, ratio});
    r.supGap = std::max(r.supGap, gap);
  }
  r.supRatio = r.initialGap > 0.0 ? r.supGap / r.initialGap : nan;
  return r;
}

WeakLimitReport weak_limit_experiment(const EquationSpec& eq,
                                      const SeqState& initial, double s,
                                      double alpha,
                                      const std::vector<double>& epsList,
                                      const IntegratorCfg& cfg) {
  if (epsList.empty()) throw ConfigError("weaklimit: epsList is empty");
  for (std::size_t k = 0; k < epsList.size(); ++k) {
    if (!(epsList[k] > 0.0 && epsList[k] < 1.0))
      throw ConfigError("weaklimit: every epsilon must lie in (0, 1)");
    if (k > 0 && epsList[k] > epsList[k - 1])
      throw ConfigError("weaklimit: epsList must be non-increasing");
  }
  WeakLimitReport rep;
  std::vector<Trajectory> runs;
  for (double eps : epsList) {
    double Ne = cutoff_radius(eps, alpha);
    SeqState data = apply_cutoff(initial, [Ne](const Freq& n) {
      return bracket(n) <= Ne ? cd(1.0, 0.0) : cd(0.0, 0.0);
    });
    Trajectory tr = solve_regularized(eq, data, {eps, alpha}, cfg);
    WeakLimitRun run{eps, Ne, norm_l2s_all(data, s), 0.0, 0.0, true};
    for (const auto& st : tr.states) {
      run.supNorm = std::max(run.supNorm, norm_l2s_all(st, s));
      run.supNormHigh = std::max(run.supNormHigh, norm_l2s_all(st, s + 2.0 * alpha));
    }
    run.aprioriOk = run.supNorm <= 6.0 * run.initialNorm;
    rep.aprioriOk = rep.aprioriOk && run.aprioriOk;
    rep.runs.push_back(run);
    runs.push_back(std::move(tr));
  }
  for (std::size_t i = 0; i < runs.size(); ++i) {
    for (std::size_t j = i + 1; j < runs.size(); ++j) {
      double dist = 0.0;
      for (std::size_t k = 0; k < runs[i].size(); ++k)
        dist = std::max(dist, norm_l2s_all(runs[i].states[k] - runs[j].states[k], s));
      double bound =
          6.0 * norm_l2s_all(runs[i].states[0] - runs[j].states[0], s) +
          rep.runs[i].epsilon * rep.runs[i].supNormHigh +
          rep.runs[j].epsilon * rep.runs[j].supNormHigh;
      bool ok = dist <= bound;
      rep.cauchyOk = rep.cauchyOk && ok;
      rep.pairs.push_back({i, j, dist, bound, ok});
    }
  }
  double prev = std::numeric_limits<double>::infinity();
  for (const auto& p : rep.pairs) {
    if (p.j != p.i + 1) continue;
    if (!(p.distance < prev || (p.distance == 0.0 && prev == 0.0)))
      rep.distancesDecreasing = false;
    prev = p.distance;
  }
  return rep;
}

cd simpson(const cd* f, std::size_t count, double h) {
  if (count < 3) throw ConfigError("Simpson quadrature needs at least 3 samples");
  const std::size_t n = count - 1;
  cd acc(0.0, 0.0);
  std::size_t m = (n % 2 == 0) ? n : n - 3;
  if (m >= 2) {
    cd s = f[0] + f[m];
    for (std::size_t k = 1; k < m; ++k) s += (k % 2 ? 4.0 : 2.0) * f[k];
    acc += s * (h / 3.0);
  }
  if (m != n)
    acc += (3.0 * h / 8.0) * (f[m] + 3.0 * f[m + 1] + 3.0 * f[m + 2] + f[m + 3]);
  return acc;
}

double simpson(const double* f, std::size_t count, double h) {
  std::vector<cd> z(f, f + count);
  return simpson(z.data(), count, h).real();
}

std::vector<double> cutoff_convergence(const EquationSpec& eq,
                                       const Trajectory& traj,
                                       const std::vector<Symbol>& cutoffs,
                                       const SeqState& testFunction) {
  if (traj.size() < 3) throw ConfigError("cutoff_convergence needs >= 3 samples");
  const auto& lat = traj.lattice();
  if (testFunction.lattice() != lat || testFunction.components() != eq.components)
    throw ConfigError("test function does not match the trajectory");
  RhsEvaluator ev(eq, lat);
  std::vector<SeqState> base(traj.size());
  for (std::size_t k = 0; k < traj.size(); ++k)
    ev.nonlinear(traj.states[k], traj.times[k], base[k]);
  std::vector<double> out;
  SeqState cut;
  for (const auto& m : cutoffs) {
    std::vector<cd> series(traj.size());
    for (std::size_t k = 0; k < traj.size(); ++k) {
      ev.nonlinear(apply_cutoff(traj.states[k], m), traj.times[k], cut);
      cd acc(0.0, 0.0);
      for (std::size_t q = 0; q < cut.raw().size(); ++q)
        acc += (cut.raw()[q] - base[k].raw()[q]) * std::conj(testFunction.raw()[q]);
      series[k] = acc;
    }
    out.push_back(std::abs(simpson(series.data(), series.size(), traj.dt)));
  }
  return out;
}

}  // namespace nfrlab
