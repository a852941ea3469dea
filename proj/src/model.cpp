#include "nfrlab/model.hpp"

#include <cmath>
#include <numbers>

#include <nlohmann/json.hpp>

#include "nfrlab/error.hpp"
#include "nfrlab/fft.hpp"
#include "nfrlab/rng.hpp"

namespace nfrlab {

namespace {

constexpr cd I(0.0, 1.0);

// Calls fn(in) for every P-tuple of box frequencies summing to n.
template <class Fn>
void for_each_tuple(const TruncatedLattice& lat, const Freq& n, int P, Fn&& fn) {
  std::vector<std::size_t> odo(P - 1, 0);
  std::vector<Freq> in(P, Freq(lat.d()));
  const std::size_t base = lat.size();
  while (true) {
    Freq rest = n;
    for (int k = 0; k < P - 1; ++k) {
      in[k] = lat.freq(odo[k]);
      rest -= in[k];
    }
    if (lat.contains(rest)) {
      in[P - 1] = rest;
      fn(in.data());
    }
    int k = P - 2;
    while (k >= 0) {
      if (++odo[k] < base) break;
      odo[k] = 0;
      --k;
    }
    if (k < 0) break;
  }
}

// Sum over tuples rejected by `included`, with the unrestricted multiplier,
// scaled by `sign` and added to `out`.
void add_excluded(const EquationSpec& eq, const SeqState& s, double t,
                  double sign, SeqState& out) {
  const auto& lat = s.lattice();
  for (int c = 0; c < eq.components; ++c) {
    for (const auto& term : eq.terms[c]) {
      if (!term.included) continue;
      for (std::size_t i = 0; i < lat.size(); ++i) {
        Freq n = lat.freq(i);
        cd acc(0.0, 0.0);
        for_each_tuple(lat, n, term.degree(), [&](const Freq* in) {
          if (term.included(n, in)) return;
          cd v = term.unrestricted(n, in) * std::polar(1.0, t * term.phase(n, in));
          for (int j = 0; j < term.degree(); ++j)
            v *= s.at(term.inputs[j], lat.index(in[j]));
          acc += v;
        });
        out.at(c, i) += sign * acc;
      }
    }
  }
}

// Term for the partner equation: W_n = conj(w_{-n}).
TermSpec conjugate_term(const TermSpec& t, const std::vector<int>& partner) {
  TermSpec r;
  r.label = t.label + "*";
  for (int c : t.inputs) r.inputs.push_back(partner[c]);
  auto neg = [](const Freq& n, const Freq* in, int P, Freq& mn,
                std::vector<Freq>& min) {
    mn = -n;
    min.resize(P);
    for (int j = 0; j < P; ++j) min[j] = -in[j];
  };
  const int P = t.degree();
  PhaseFn ph = t.phase;
  r.phase = [ph, P, neg](const Freq& n, const Freq* in) {
    Freq mn;
    std::vector<Freq> min;
    neg(n, in, P, mn, min);
    return -ph(mn, min.data());
  };
  MultFn mu = t.multiplier;
  r.multiplier = [mu, P, neg](const Freq& n, const Freq* in) {
    Freq mn;
    std::vector<Freq> min;
    neg(n, in, P, mn, min);
    return std::conj(mu(mn, min.data()));
  };
  r.coeff = std::conj(t.coeff);
  if (t.outFactor) {
    FreqFn f = t.outFactor;
    r.outFactor = [f](const Freq& n) { return std::conj(f(-n)); };
  }
  r.inFactor.resize(t.inFactor.size());
  for (std::size_t j = 0; j < t.inFactor.size(); ++j) {
    if (!t.inFactor[j]) continue;
    FreqFn f = t.inFactor[j];
    r.inFactor[j] = [f](const Freq& n) { return std::conj(f(-n)); };
  }
  if (t.included) {
    auto inc = t.included;
    r.included = [inc, P, neg](const Freq& n, const Freq* in) {
      Freq mn;
      std::vector<Freq> min;
      neg(n, in, P, mn, min);
      return inc(mn, min.data());
    };
  }
  return r;
}

double abs_pow(const Freq& n, double e) {
  return std::pow(static_cast<double>(n.norm2()), 0.5 * e);
}

EquationSpec make_kdv() {
  EquationSpec eq;
  eq.name = "kdv";
  eq.d = 1;
  eq.components = 1;
  eq.componentNames = {"w"};
  eq.partner = {-1};
  eq.dispersion = {[](const Freq& n) {
    double x = n[0];
    return x * x * x;
  }};
  TermSpec t;
  t.label = "i n w w";
  t.inputs = {0, 0};
  t.phase = [](const Freq& n, const Freq* in) {
    return 3.0 * n[0] * static_cast<double>(in[0][0]) * in[1][0];
  };
  t.multiplier = [](const Freq& n, const Freq*) { return I * double(n[0]); };
  t.coeff = I;
  t.outFactor = [](const Freq& n) { return cd(n[0], 0.0); };
  eq.terms = {{t}};
  eq.defaultS = 0.0;
  return eq;
}

EquationSpec make_cnls(int d, int sign) {
  EquationSpec eq;
  eq.name = d == 1 ? "cnls1d" : "cnls2d";
  eq.d = d;
  eq.components = 2;
  eq.componentNames = {"w", "conj"};
  eq.partner = {1, 0};
  eq.params["sign"] = sign;
  eq.dispersion = {
      [](const Freq& n) { return static_cast<double>(n.norm2()); },
      [](const Freq& n) { return -static_cast<double>(n.norm2()); }};
  TermSpec t;
  t.label = "c w W w";
  t.inputs = {0, 1, 0};
  t.phase = [](const Freq& n, const Freq* in) {
    return static_cast<double>(n.norm2() - in[0].norm2() + in[1].norm2() -
                               in[2].norm2());
  };
  const cd c = -I * double(sign);
  t.multiplier = [c](const Freq&, const Freq*) { return c; };
  t.coeff = c;
  eq.terms = {{t}, {conjugate_term(t, eq.partner)}};
  eq.defaultS = d == 1 ? 0.0 : 2.0 / 3.0;
  return eq;
}

EquationSpec make_fnls(double alpha, int sign) {
  if (!(alpha > 0.5 && alpha < 1.0))
    throw ConfigError("fnls requires 1/2 < alpha < 1 (got " +
                      std::to_string(alpha) + ")");
  EquationSpec eq;
  eq.name = "fnls";
  eq.d = 1;
  eq.components = 2;
  eq.componentNames = {"w", "conj"};
  eq.partner = {1, 0};
  eq.params["alpha"] = alpha;
  eq.params["sign"] = sign;
  const double ta = 2.0 * alpha;
  eq.dispersion = {[ta](const Freq& n) { return -abs_pow(n, ta); },
                   [ta](const Freq& n) { return abs_pow(n, ta); }};
  TermSpec t;
  t.label = "c w W w on Gamma^N";
  t.inputs = {0, 1, 0};
  t.phase = [ta](const Freq& n, const Freq* in) {
    return -(abs_pow(n, ta) - abs_pow(in[0], ta) + abs_pow(in[1], ta) -
             abs_pow(in[2], ta));
  };
  const double e = 1.0 - alpha;
  t.included = [e](const Freq&, const Freq* in) {
    double r = std::pow(std::abs(double(in[1][0])), e);
    return std::abs(double(in[0][0] + in[1][0])) > r &&
           std::abs(double(in[1][0] + in[2][0])) > r;
  };
  const cd c = -I * double(sign);
  auto inc = t.included;
  t.multiplier = [c, inc](const Freq& n, const Freq* in) {
    return inc(n, in) ? c : cd(0.0, 0.0);
  };
  t.coeff = c;
  eq.terms = {{t}, {conjugate_term(t, eq.partner)}};
  eq.correction = [eqp = std::make_shared<EquationSpec>(eq)](
                      const SeqState& s, double t, SeqState& out) {
    add_excluded(*eqp, s, t, -1.0, out);
  };
  eq.remainder = [eqp = std::make_shared<EquationSpec>(eq)](
                     const SeqState& s, double t, SeqState& out) {
    out.set_zero();
    add_excluded(*eqp, s, t, 1.0, out);
  };
  eq.defaultS = (1.0 - alpha) / 2.0 + 0.05;
  return eq;
}

void dnls_remainder(const SeqState& s, double t, SeqState& out) {
  const auto& lat = s.lattice();
  const int N = lat.N();
  FftGrid& g = fft_grid(1, dealiased_size(N, 5));
  const std::size_t L = lat.size(), G = g.total();
  std::vector<cd> a(L), b(L), w(G), wb(G), fw(G), fwb(G), cw(L), cwb(L);
  for (std::size_t i = 0; i < L; ++i) {
    double n = lat.freq(i)[0];
    a[i] = s.at(0, i) * std::polar(1.0, -t * n * n);
    b[i] = s.at(1, i) * std::polar(1.0, t * n * n);
  }
  cd mu(0.0, 0.0);
  for (std::size_t i = 0; i < L; ++i) mu += a[i] * b[lat.mirror(i)];
  g.to_physical(lat, a.data(), w.data());
  g.to_physical(lat, b.data(), wb.data());
  std::vector<cd> q2(G);
  for (std::size_t k = 0; k < G; ++k) {
    cd q = w[k] * wb[k];
    q2[k] = q * q;
  }
  cd p4(0.0, 0.0);
  for (std::size_t k = 0; k < G; ++k) p4 += q2[k];
  p4 /= static_cast<double>(G);
  const cd lin = mu * mu - 0.5 * p4;
  for (std::size_t k = 0; k < G; ++k) {
    cd q = w[k] * wb[k];
    fw[k] = w[k] * (0.5 * I * q2[k] - I * mu * q + I * lin);
    fwb[k] = wb[k] * (-0.5 * I * q2[k] + I * mu * q - I * lin);
  }
  g.to_fourier(fw.data(), lat, cw.data());
  g.to_fourier(fwb.data(), lat, cwb.data());
  for (std::size_t i = 0; i < L; ++i) {
    double n = lat.freq(i)[0];
    std::size_t m = lat.mirror(i);
    cd wn = s.at(0, i), Wn = s.at(1, i);
    out.at(0, i) = -I * n * wn * s.at(1, m) * wn +
                   std::polar(1.0, t * n * n) * cw[i];
    out.at(1, i) = -I * n * Wn * s.at(0, m) * Wn +
                   std::polar(1.0, -t * n * n) * cwb[i];
  }
}

EquationSpec make_dnls(int sign) {
  EquationSpec eq;
  eq.name = "dnls";
  eq.d = 1;
  eq.components = 2;
  eq.componentNames = {"w", "conj"};
  eq.partner = {1, 0};
  eq.params["sign"] = sign;
  eq.dispersion = {
      [](const Freq& n) { return static_cast<double>(n.norm2()); },
      [](const Freq& n) { return -static_cast<double>(n.norm2()); }};
  TermSpec t;
  t.label = "i n2 w W w, n2 != n1,n3";
  t.inputs = {0, 1, 0};
  t.phase = [](const Freq&, const Freq* in) {
    return 2.0 * double(in[0][0] + in[1][0]) * double(in[1][0] + in[2][0]);
  };
  t.included = [](const Freq&, const Freq* in) {
    return in[0][0] + in[1][0] != 0 && in[1][0] + in[2][0] != 0;
  };
  t.multiplier = [](const Freq&, const Freq* in) {
    if (in[0][0] + in[1][0] == 0 || in[1][0] + in[2][0] == 0)
      return cd(0.0, 0.0);
    return -I * double(in[1][0]);
  };
  t.coeff = cd(1.0, 0.0);
  t.inFactor = {FreqFn{}, [](const Freq& n) { return -I * double(n[0]); },
                FreqFn{}};
  eq.terms = {{t}, {conjugate_term(t, eq.partner)}};
  eq.correction = [eqp = std::make_shared<EquationSpec>(eq)](
                      const SeqState& s, double t, SeqState& out) {
    add_excluded(*eqp, s, t, -1.0, out);
  };
  eq.remainder = [](const SeqState& s, double t, SeqState& out) {
    dnls_remainder(s, t, out);
  };
  eq.defaultS = 0.6;
  return eq;
}

EquationSpec make_zakharov() {
  EquationSpec eq;
  eq.name = "zakharov";
  eq.d = 1;
  eq.components = 4;
  eq.componentNames = {"psi+", "psi-", "omega+", "omega-"};
  eq.partner = {1, 0, 3, 2};
  eq.dispersion = {
      [](const Freq& n) { return static_cast<double>(n.norm2()); },
      [](const Freq& n) { return -static_cast<double>(n.norm2()); },
      [](const Freq& n) { return bracket(n); },
      [](const Freq& n) { return -bracket(n); }};
  // psi+ at n1 = n0 + n2 from (omega^{+-}_{n0}, psi+_{n2}).
  auto psi_term = [](int omegaComp, int pm) {
    TermSpec t;
    t.label = omegaComp == 2 ? "omega+ psi+" : "omega- psi+";
    t.inputs = {omegaComp, 0};
    t.phase = [pm](const Freq& n, const Freq* in) {
      return zakharov_phi(n[0], in[1][0], in[0][0], pm);
    };
    t.multiplier = [](const Freq&, const Freq*) { return -0.5 * I; };
    t.coeff = -0.5 * I;
    return t;
  };
  TermSpec a = psi_term(2, -1), b = psi_term(3, +1);
  // omega+ at n0 = n1 + n2 from (psi-_{n1}, psi+_{n2}).
  TermSpec w;
  w.label = "psi- psi+";
  w.inputs = {1, 0};
  w.phase = [](const Freq& n, const Freq* in) {
    return zakharov_phi(in[0][0], in[1][0], n[0], +1);
  };
  w.multiplier = [](const Freq& n, const Freq*) {
    return -I * double(n.norm2()) / bracket(n);
  };
  w.coeff = -I;
  w.outFactor = [](const Freq& n) {
    return cd(double(n.norm2()) / bracket(n), 0.0);
  };
  eq.terms = {{a, b},
              {conjugate_term(a, eq.partner), conjugate_term(b, eq.partner)},
              {w},
              {conjugate_term(w, eq.partner)}};
  eq.remainder = [](const SeqState& s, double t, SeqState& out) {
    const auto& lat = s.lattice();
    out.set_zero();
    for (std::size_t i = 0; i < lat.size(); ++i) {
      double br = bracket(lat.freq(i));
      cd wp = s.at(2, i), wm = s.at(3, i);
      out.at(2, i) = I * (wp + std::polar(1.0, 2.0 * br * t) * wm) / (2.0 * br);
      out.at(3, i) =
          -I * (wm + std::polar(1.0, -2.0 * br * t) * wp) / (2.0 * br);
    }
  };
  eq.defaultS = 0.5;
  return eq;
}

}  // namespace

cd TermSpec::unrestricted(const Freq& n, const Freq* in) const {
  cd v = coeff;
  if (outFactor) v *= outFactor(n);
  for (std::size_t j = 0; j < inFactor.size(); ++j)
    if (inFactor[j]) v *= inFactor[j](in[j]);
  return v;
}

std::vector<int> TermSpec::degrees(int components) const {
  std::vector<int> r(components, 0);
  for (int c : inputs) ++r[c];
  return r;
}

int EquationSpec::max_degree() const {
  int p = 0;
  for (const auto& comp : terms)
    for (const auto& t : comp) p = std::max(p, t.degree());
  return p;
}

SystemShape EquationSpec::shape() const {
  SystemShape s(components);
  for (int c = 0; c < components; ++c)
    for (const auto& t : terms[c]) s[c].push_back(t.inputs);
  return s;
}

double zakharov_phi(int n1, int n2, int n0, int pm) {
  return double(n1) * n1 - double(n2) * n2 + pm * bracket(Freq{n0});
}

std::vector<std::string> registry_names() {
  return {"kdv", "cnls1d", "cnls2d", "fnls", "dnls", "zakharov"};
}

EquationSpec registry(const std::string& name, const EquationParams& params) {
  if (params.sign != 1 && params.sign != -1)
    throw ConfigError("equation sign must be +1 or -1");
  if (name == "kdv") return make_kdv();
  if (name == "cnls1d") return make_cnls(1, params.sign);
  if (name == "cnls2d") return make_cnls(2, params.sign);
  if (name == "fnls") return make_fnls(params.alpha, params.sign);
  if (name == "dnls") return make_dnls(params.sign);
  if (name == "zakharov") return make_zakharov();
  std::string known;
  for (const auto& n : registry_names()) known += (known.empty() ? "" : ", ") + n;
  throw ConfigError("unknown equation '" + name + "' (known: " + known + ")");
}

SeqState remainder_eval(const EquationSpec& eq, const SeqState& state,
                        double t) {
  if (state.lattice().d() != eq.d || state.components() != eq.components)
    throw ContractError("remainder_eval: state does not match equation " +
                        eq.name);
  SeqState out(state.lattice(), state.components());
  if (eq.remainder) eq.remainder(state, t, out);
  return out;
}

SeqState nonlinear_direct(const EquationSpec& eq, const SeqState& state,
                          double t) {
  const auto& lat = state.lattice();
  SeqState out(lat, eq.components);
  for (int c = 0; c < eq.components; ++c) {
    for (const auto& term : eq.terms[c]) {
      for (std::size_t i = 0; i < lat.size(); ++i) {
        Freq n = lat.freq(i);
        cd acc(0.0, 0.0);
        for_each_tuple(lat, n, term.degree(), [&](const Freq* in) {
          cd m = term.multiplier(n, in);
          if (m == cd(0.0, 0.0)) return;
          cd v = m * std::polar(1.0, t * term.phase(n, in));
          for (int j = 0; j < term.degree(); ++j)
            v *= state.at(term.inputs[j], lat.index(in[j]));
          acc += v;
        });
        out.at(c, i) += acc;
      }
    }
  }
  return out;
}

double separability_defect(const EquationSpec& eq, int samples, int range,
                           std::uint64_t seed) {
  PhiloxStream rng(seed, 7);
  double worst = 0.0;
  for (int c = 0; c < eq.components; ++c) {
    for (const auto& term : eq.terms[c]) {
      const int P = term.degree();
      std::vector<Freq> in(P, Freq(eq.d));
      for (int k = 0; k < samples; ++k) {
        Freq n(eq.d);
        for (int j = 0; j < P; ++j) {
          for (int a = 0; a < eq.d; ++a)
            in[j][a] = static_cast<int>(rng.integer(-range, range));
          n += in[j];
        }
        double sep = eq.dispersion[c](n);
        for (int j = 0; j < P; ++j) sep -= eq.dispersion[term.inputs[j]](in[j]);
        worst = std::max(worst, std::abs(sep - term.phase(n, in.data())));
      }
    }
  }
  return worst;
}

void enforce_conjugate_pairs(const EquationSpec& eq, SeqState& state) {
  const auto& lat = state.lattice();
  for (int c = 0; c < eq.components; ++c) {
    int p = eq.partner[c];
    if (p <= c) continue;
    for (std::size_t i = 0; i < lat.size(); ++i)
      state.at(p, i) = std::conj(state.at(c, lat.mirror(i)));
  }
}

SeqState random_state(const EquationSpec& eq, const TruncatedLattice& lat,
                      double norm, double width, std::uint64_t seed,
                      std::uint64_t stream) {
  if (lat.d() != eq.d)
    throw ConfigError("lattice dimension " + std::to_string(lat.d()) +
                      " does not match equation " + eq.name);
  SeqState s(lat, eq.components);
  for (int c = 0; c < eq.components; ++c) {
    if (eq.partner[c] >= 0 && eq.partner[c] < c) continue;
    Philox g(seed, stream * 64 + static_cast<std::uint64_t>(c));
    for (std::size_t i = 0; i < lat.size(); ++i) {
      double env = std::exp(-static_cast<double>(lat.freq(i).norm2()) /
                            (width * width));
      s.at(c, i) = cd(g.normal(2 * i), g.normal(2 * i + 1)) * env;
    }
    double nn = norm_l2s(s, 0.0, c);
    if (nn > 0.0)
      for (std::size_t i = 0; i < lat.size(); ++i) s.at(c, i) *= norm / nn;
  }
  enforce_conjugate_pairs(eq, s);
  return s;
}

double gauge_mu(const SeqState& u) {
  double n = norm_l2s(u, 0.0, 0);
  return n * n;
}

SeqState gauge_forward(const SeqState& u, const GaugeState& gauge) {
  const auto& lat = u.lattice();
  if (lat.d() != 1) throw ConfigError("gauge_forward requires d = 1");
  // Collocation on the 2N+1 points of the box: the discrete transform is
  // unitary, so the pointwise unimodular factor preserves the l^2 norm.
  const int M = lat.side();
  FftGrid& g = fft_grid(1, M);
  const std::size_t L = lat.size();
  std::vector<cd> phys(L), dens(L), coef(L), jc(L);
  g.to_physical(lat, u.comp(0).data(), phys.data());
  for (std::size_t k = 0; k < L; ++k) dens[k] = std::norm(phys[k]);
  g.to_fourier(dens.data(), lat, coef.data());
  for (std::size_t i = 0; i < L; ++i) {
    int n = lat.freq(i)[0];
    jc[i] = n == 0 ? cd(0.0, 0.0) : coef[i] / (I * double(n));
  }
  std::vector<cd> J(L);
  g.to_physical(lat, jc.data(), J.data());
  for (std::size_t k = 0; k < L; ++k)
    phys[k] *= std::polar(1.0, -J[k].real());
  SeqState w(lat, 1);
  g.to_fourier(phys.data(), lat, w.comp(0).data());
  for (std::size_t i = 0; i < L; ++i) {
    int n = lat.freq(i)[0];
    w.at(0, i) *= std::polar(1.0, -2.0 * n * gauge.mu_integral);
  }
  return w;
}

void gauge_advance(GaugeState& g, double muNext, double dt) {
  g.mu_integral += 0.5 * dt * (g.mu + muNext);
  g.mu = muNext;
}

std::string equation_metadata_json(const EquationSpec& eq) {
  nlohmann::json j;
  j["name"] = eq.name;
  j["d"] = eq.d;
  j["components"] = eq.components;
  j["componentNames"] = eq.componentNames;
  j["params"] = eq.params;
  nlohmann::json terms = nlohmann::json::array();
  for (int c = 0; c < eq.components; ++c)
    for (const auto& t : eq.terms[c])
      terms.push_back({{"component", c},
                       {"label", t.label},
                       {"inputs", t.inputs},
                       {"degrees", t.degrees(eq.components)},
                       {"restricted", static_cast<bool>(t.included)}});
  j["terms"] = terms;
  j["hasRemainder"] = eq.has_remainder();
  nlohmann::json psi = nlohmann::json::array();
  for (int c = 0; c < eq.components; ++c) {
    nlohmann::json row = nlohmann::json::array();
    for (int n = -10; n <= 10; ++n) {
      Freq f(eq.d);
      f[0] = n;
      row.push_back(eq.dispersion[c](f));
    }
    psi.push_back(row);
  }
  j["psiOnAxis"] = psi;
  return j.dump(2);
}

}  // namespace nfrlab
