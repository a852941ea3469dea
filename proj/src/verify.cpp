#include "nfrlab/verify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

#include "nfrlab/error.hpp"
#include "nfrlab/kernels.hpp"
#include "nfrlab/rng.hpp"

namespace nfrlab {

void EstimateParams::validate() const {
  if (!(s1 < s && s < s2))
    throw ConfigError("estimate parameters need s1 < s < s2");
  if (!(delta > 0.0 && delta <= 0.5))
    throw ConfigError("estimate parameter delta must lie in (0, 1/2]");
}

SupReport sup_weight_A1(const EquationSpec& eq, int component, int term,
                        double s, int N, LoopOrder order, std::uint64_t cap) {
  if (component < 0 || component >= eq.components ||
      term < 0 || term >= static_cast<int>(eq.terms[component].size()))
    throw ConfigError("sup_weight_A1: term index out of range");
  const TermSpec& t = eq.terms[component][term];
  const int P = t.degree();
  TruncatedLattice lat(eq.d, N);
  const std::size_t L = lat.size();
  double work = std::pow(static_cast<double>(L), P);
  if (work > static_cast<double>(cap))
    throw CapError("sup_weight_A1 would visit " + std::to_string(work) +
                       " tuples, above the cap of " + std::to_string(cap),
                   work);
  std::vector<Freq> freqs(L);
  for (std::size_t i = 0; i < L; ++i) freqs[i] = lat.freq(i);
  auto w = bracket_powers(lat, 2.0 * s);
  auto summand = [&](const Freq& n, std::size_t ni, const Freq* in,
                     const std::size_t* idx) {
    cd m = t.multiplier(n, in);
    double a = std::norm(m);
    if (a == 0.0) return 0.0;
    double phi = t.phase(n, in);
    double den = std::sqrt(1.0 + phi * phi);
    for (int j = 0; j < P; ++j) den *= w[idx[j]];
    return a * w[ni] / den;
  };
  std::vector<double> acc(L, 0.0);
  std::vector<Freq> in(P, Freq(eq.d));
  std::vector<std::size_t> idx(P, 0);
  if (order == LoopOrder::OutputFirst) {
    for (std::size_t ni = 0; ni < L; ++ni) {
      const Freq& n = freqs[ni];
      std::vector<std::size_t> odo(P - 1, 0);
      double sum = 0.0;
      while (true) {
        Freq rest = n;
        for (int j = 0; j < P - 1; ++j) {
          in[j] = freqs[odo[j]];
          idx[j] = odo[j];
          rest -= in[j];
        }
        if (lat.contains(rest)) {
          in[P - 1] = rest;
          idx[P - 1] = lat.index(rest);
          sum += summand(n, ni, in.data(), idx.data());
        }
        int j = P - 2;
        while (j >= 0) {
          if (++odo[j] < L) break;
          odo[j] = 0;
          --j;
        }
        if (j < 0) break;
      }
      acc[ni] = sum;
    }
  } else {
    std::vector<std::size_t> odo(P, 0);
    while (true) {
      Freq n(eq.d);
      for (int j = 0; j < P; ++j) {
        in[j] = freqs[odo[j]];
        idx[j] = odo[j];
        n += in[j];
      }
      if (lat.contains(n)) {
        std::size_t ni = lat.index(n);
        acc[ni] += summand(n, ni, in.data(), idx.data());
      }
      int j = P - 1;
      while (j >= 0) {
        if (++odo[j] < L) break;
        odo[j] = 0;
        --j;
      }
      if (j < 0) break;
    }
  }
  SupReport r;
  r.N = N;
  r.argmax = freqs[0];
  for (std::size_t i = 0; i < L; ++i)
    if (acc[i] > r.supValue) {
      r.supValue = acc[i];
      r.argmax = freqs[i];
    }
  return r;
}

double fit_power_exponent(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2)
    throw ContractError("fit_power_exponent needs two or more points");
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    double a = std::log(x[i]), b = std::log(y[i]);
    sx += a;
    sy += b;
    sxx += a * a;
    sxy += a * b;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

double last_growth(const std::vector<double>& v) {
  if (v.size() < 2) throw ContractError("last_growth needs two or more values");
  double a = v[v.size() - 2], b = v.back();
  return (b - a) / a;
}

namespace {

long long isqrt_exact(long long v) {
  if (v < 0) return -1;
  long long r = static_cast<long long>(std::sqrt(static_cast<double>(v)));
  while (r * r > v) --r;
  while ((r + 1) * (r + 1) <= v) ++r;
  return r * r == v ? r : -1;
}

bool in_ball(long long x, long long y, const Freq& c, double R) {
  double dx = static_cast<double>(x - c[0]), dy = static_cast<double>(y - c[1]);
  return dx * dx + dy * dy <= R * R;
}

}  // namespace

long long circle_count(const Freq& center, long long mu, double R,
                       const Freq& ballCenter) {
  if (center.d != 2 || ballCenter.d != 2)
    throw ConfigError("circle_count works in d = 2");
  if (mu < 0) return 0;
  long long r = static_cast<long long>(std::floor(std::sqrt(static_cast<double>(mu)))) + 1;
  long long count = 0;
  for (long long x = -r; x <= r; ++x) {
    long long y = isqrt_exact(mu - x * x);
    if (y < 0) continue;
    if (in_ball(center[0] + x, center[1] + y, ballCenter, R)) ++count;
    if (y > 0 && in_ball(center[0] + x, center[1] - y, ballCenter, R)) ++count;
  }
  return count;
}

long long circle_count(const Freq& center, long long mu, double R) {
  return circle_count(center, mu, R, center);
}

long long circle_count_scan(const Freq& center, long long mu, double R,
                            const Freq& ballCenter) {
  if (center.d != 2 || ballCenter.d != 2)
    throw ConfigError("circle_count works in d = 2");
  long long count = 0;
  long long r = static_cast<long long>(std::ceil(R)) + 1;
  for (long long y = ballCenter[1] - r; y <= ballCenter[1] + r; ++y)
    for (long long x = ballCenter[0] - r; x <= ballCenter[0] + r; ++x) {
      if (!in_ball(x, y, ballCenter, R)) continue;
      long long dx = x - center[0], dy = y - center[1];
      if (dx * dx + dy * dy == mu) ++count;
    }
  return count;
}

CircleMax max_circle_count(double R) {
  const long long r = static_cast<long long>(std::floor(R));
  const long long muMax = static_cast<long long>(std::floor(R * R));
  std::vector<long long> hist(static_cast<std::size_t>(muMax) + 1, 0);
  for (long long x = -r; x <= r; ++x)
    for (long long y = -r; y <= r; ++y) {
      long long q = x * x + y * y;
      if (q <= muMax && static_cast<double>(q) <= R * R) ++hist[q];
    }
  CircleMax best{R, 0, 0};
  for (long long mu = 0; mu <= muMax; ++mu)
    if (hist[mu] > best.count) best = {R, hist[mu], mu};
  return best;
}

namespace {

double fpow(long long k, double e) {
  return std::pow(std::abs(static_cast<double>(k)), e);
}

bool in_window(double f, double muStar) {
  return f >= muStar - 0.5 && f < muStar + 0.5;
}

}  // namespace

long long fnls_count(int K, double muStar, long long kStar, double alpha, int sign) {
  if (!(alpha > 0.5 && alpha < 1.0)) throw ConfigError("fnls_count needs 1/2 < alpha < 1");
  if (sign != 1 && sign != -1) throw ConfigError("fnls_count sign must be +1 or -1");
  const double e = 2.0 * alpha;
  long long count = 0;
  for (long long k = -K; k <= K; ++k) {
    long long l = sign * (kStar - k);
    if (std::llabs(k) > std::llabs(l)) continue;
    if (in_window(fpow(k, e) + sign * fpow(l, e), muStar)) ++count;
  }
  return count;
}

long long fnls_count_by_l(int K, double muStar, long long kStar, double alpha,
                          int sign) {
  if (!(alpha > 0.5 && alpha < 1.0)) throw ConfigError("fnls_count needs 1/2 < alpha < 1");
  if (sign != 1 && sign != -1) throw ConfigError("fnls_count sign must be +1 or -1");
  const double e = 2.0 * alpha;
  long long count = 0;
  // |k| <= K and |l| >= |k| with k = kStar - sign l, so |l| <= |kStar| + K.
  const long long span = std::llabs(kStar) + K;
  for (long long l = -span; l <= span; ++l) {
    long long k = kStar - sign * l;
    if (std::llabs(k) > K || std::llabs(k) > std::llabs(l)) continue;
    if (in_window(fpow(k, e) + sign * fpow(l, e), muStar)) ++count;
  }
  return count;
}

FnlsMax fnls_max_count(int K, double alpha, int sign) {
  if (K < 1) throw ConfigError("fnls_max_count needs K >= 1");
  const double e = 2.0 * alpha;
  const long long kmin =
      sign == 1 ? 0 : static_cast<long long>(std::ceil(std::pow(K, 1.0 - alpha)));
  FnlsMax best{K, 0, 0, 0};
  std::map<long long, long long> hist;
  for (long long ks = -(2LL * K + 2); ks <= 2LL * K + 2; ++ks) {
    if (std::llabs(ks) < kmin) continue;
    hist.clear();
    for (long long k = -K; k <= K; ++k) {
      long long l = sign * (ks - k);
      if (std::llabs(k) > std::llabs(l)) continue;
      double f = fpow(k, e) + sign * fpow(l, e);
      ++hist[static_cast<long long>(std::floor(f + 0.5))];
    }
    for (const auto& [mu, c] : hist)
      if (c > best.count) best = {K, c, ks, mu};
  }
  return best;
}

double dnls_case_sums(double s, DnlsSum kind, int n, int N) {
  if (!(s > 0.5 && s < 1.0)) throw ConfigError("dnls_case_sums needs 1/2 < s < 1");
  const double eps = (s - 0.5) / 2.0;
  auto br = [](long long k) { return std::sqrt(1.0 + static_cast<double>(k * k)); };
  std::vector<double> w(2 * N + 1);
  for (int k = -N; k <= N; ++k) w[k + N] = std::pow(br(k), 2.0 * s);
  const double wn = std::pow(br(n), 2.0 * s);
  // Visiting (n1, n2) as (o i1, o i2) makes the sums for n and -n add the
  // same values in the same order.
  const int o = n < 0 ? -1 : 1;
  std::vector<double> terms;
  terms.reserve(static_cast<std::size_t>(2 * N + 1));
  for (int i1 = -N; i1 <= N; ++i1) {
    const int n1 = o * i1;
    double row = 0.0;
    for (int i2 = -N; i2 <= N; ++i2) {
      const int n2 = o * i2;
      long long n3 = static_cast<long long>(n) - n1 + n2;
      if (n3 < -N || n3 > N) continue;
      if (n2 == n1 || n2 == n3) continue;
      double a = std::abs(double(n2 - n1)), b = std::abs(double(n2 - n3));
      double v = double(n2) * double(n2) * wn / (w[n1 + N] * w[n2 + N] * w[n3 + N]);
      if (kind == DnlsSum::A) {
        v /= a * b;
      } else {
        long long nm = std::max({std::llabs(n1), std::llabs(n2), std::llabs(n3)});
        v /= a * a * b * b;
        v *= br(nm) * br(nm) / std::pow(br(n), 2.0 - 2.0 * eps);
      }
      row += v;
    }
    terms.push_back(row);
  }
  return kernels::pairwise_sum(terms.data(), terms.size());
}

std::array<double, 4> zakharov_weights(double s, double l, double eps, int n0,
                                       int n1, int n2, int pm) {
  auto br = [](int k) { return std::sqrt(1.0 + double(k) * double(k)); };
  double phi = zakharov_phi(n1, n2, n0, pm);
  double bp = std::sqrt(1.0 + phi * phi);
  double b0 = br(n0), b1 = br(n1), b2 = br(n2);
  double a0 = std::abs(double(n0));
  std::array<double, 4> W;
  W[0] = std::pow(b1, s) / (std::sqrt(bp) * std::pow(b0, l) * std::pow(b2, s));
  W[1] = std::pow(b0, l) * a0 / (std::sqrt(bp) * std::pow(b1, s) * std::pow(b2, s));
  W[2] = std::pow(b1, s - 1.0) * (b0 + b2) /
         (std::pow(bp, 1.0 - eps) * std::pow(b0, l) * std::pow(b2, s));
  W[3] = std::pow(b0, l - 1.0) * a0 * (b1 + b2) /
         (std::pow(bp, 1.0 - eps) * std::pow(b1, s) * std::pow(b2, s));
  return W;
}

ZakharovReport zakharov_weight_check(double s, double l, double eps, int N) {
  if (N < 1) throw ConfigError("zakharov_weight_check needs N >= 1");
  auto br = [](int k) { return std::sqrt(1.0 + double(k) * double(k)); };
  ZakharovReport r;
  r.N = N;
  r.lineMin = std::numeric_limits<double>::infinity();
  r.factorMin = std::numeric_limits<double>::infinity();
  for (int n1 = -N; n1 <= N; ++n1) {
    for (int n2 = -N; n2 <= N; ++n2) {
      const int n0 = n1 - n2;
      if (n0 < -N || n0 > N) continue;
      for (int pm : {1, -1}) {
        ++r.triples;
        auto W = zakharov_weights(s, l, eps, n0, n1, n2, pm);
        if (n0 == 0) {
          for (int j = 0; j < 4; ++j) r.maxOnZero[j] = std::max(r.maxOnZero[j], W[j]);
          continue;
        }
        const int sg = n0 > 0 ? 1 : -1;
        if (n1 + n2 + pm * sg == 0) {
          for (double v : W) r.maxOnLines = std::max(r.maxOnLines, v);
          if (std::abs(n1) >= 10)
            for (double v : W) {
              r.lineMin = std::min(r.lineMin, v);
              r.lineMax = std::max(r.lineMax, v);
            }
          continue;
        }
        double phi = zakharov_phi(n1, n2, n0, pm);
        double f = std::sqrt(1.0 + phi * phi) / (br(n0) * br(n1 + n2));
        r.factorMin = std::min(r.factorMin, f);
        r.factorMax = std::max(r.factorMax, f);
        double lo = W[0] + W[1], hi = W[2] + W[3];
        double q1 = lo / hi;
        if (q1 > r.c1) {
          r.c1 = q1;
          r.worstC1 = {n0, n1, n2, pm};
        }
        const double a1 = std::abs(double(n1)), a2 = std::abs(double(n2));
        const double root0 = std::sqrt(br(n0));
        double dom;
        if (a1 > 2.0 * a2)
          dom = 1.0 / (root0 * std::sqrt(br(n2)));
        else if (a2 > 2.0 * a1)
          dom = 1.0 / (root0 * std::sqrt(br(n1)));
        else
          dom = 1.0 / (root0 * std::sqrt(br(n1 + n2)));
        double q2 = hi / dom;
        if (q2 > r.c2) {
          r.c2 = q2;
          r.worstC2 = {n0, n1, n2, pm};
        }
      }
    }
  }
  if (!std::isfinite(r.lineMin)) r.lineMin = 0.0;
  if (!std::isfinite(r.factorMin)) r.factorMin = 0.0;
  return r;
}

namespace {

struct Block2D {
  std::vector<Freq> pts;
};

// Points of the box |n_i| <= N in d = 2 with Nj <= <n> < 2 Nj.
Block2D dyad_points(int Nj, int N) {
  Block2D b;
  const long long lo = static_cast<long long>(Nj) * Nj, hi = 4LL * Nj * Nj;
  for (int x = -N; x <= N; ++x)
    for (int y = -N; y <= N; ++y) {
      long long q = 1 + static_cast<long long>(x) * x + static_cast<long long>(y) * y;
      if (q >= lo && q < hi) b.pts.push_back(Freq{x, y});
    }
  return b;
}

std::vector<char> dyad_mask(int Nj, const TruncatedLattice& lat) {
  std::vector<char> m(lat.size(), 0);
  const long long lo = static_cast<long long>(Nj) * Nj, hi = 4LL * Nj * Nj;
  for (std::size_t i = 0; i < lat.size(); ++i) {
    long long q = 1 + lat.freq(i).norm2();
    m[i] = q >= lo && q < hi;
  }
  return m;
}

long long cnls_phi(const Freq& n, const Freq& n1, const Freq& n2, const Freq& n3) {
  return n.norm2() - n1.norm2() + n2.norm2() - n3.norm2();
}

// Per-mu maxima of A and B for one block.
void block_maxima(const std::array<int, 4>& dy, bool cubes, int N,
                  std::map<long long, long long>& maxA,
                  std::map<long long, long long>& maxB) {
  TruncatedLattice lat(2, N);
  Block2D D0 = dyad_points(dy[0], N), D1 = dyad_points(dy[1], N),
          D2 = dyad_points(dy[2], N), D3 = dyad_points(dy[3], N);
  auto m2 = dyad_mask(dy[2], lat), m3 = dyad_mask(dy[3], lat);
  std::map<long long, long long> hist;
  for (const Freq& n : D0.pts)
    for (const Freq& n2 : D2.pts) {
      hist.clear();
      for (const Freq& n1 : D1.pts) {
        Freq n3 = n - n1 + n2;
        if (!lat.contains(n3) || !m3[lat.index(n3)]) continue;
        ++hist[cnls_phi(n, n1, n2, n3)];
      }
      for (const auto& [mu, c] : hist) {
        long long& v = maxA[mu];
        v = std::max(v, c);
      }
    }
  std::array<int, 3> sorted{dy[1], dy[2], dy[3]};
  std::sort(sorted.begin(), sorted.end());
  const int med = sorted[1];
  const bool useCubes = cubes && dy[2] == sorted[2] && dy[2] >= 4 * med;
  std::map<std::pair<long long, long long>, long long> hc;
  for (const Freq& n1 : D1.pts)
    for (const Freq& n3 : D3.pts) {
      hc.clear();
      for (const Freq& n : D0.pts) {
        Freq n2 = n1 + n3 - n;
        if (!lat.contains(n2) || !m2[lat.index(n2)]) continue;
        long long cube = 0;
        if (useCubes) {
          auto fl = [med](int v) {
            return static_cast<long long>(std::floor(double(v) / double(med)));
          };
          cube = fl(n[0]) * 100003LL + fl(n[1]);
        }
        ++hc[{cnls_phi(n, n1, n2, n3), cube}];
      }
      for (const auto& [key, c] : hc) {
        long long& v = maxB[key.first];
        v = std::max(v, c);
      }
    }
}

}  // namespace

BlockCounts cnls_block_counts(long long mu, const std::array<int, 4>& dyads,
                              bool cubes, int N) {
  if (N > 64) throw CapError("cnls_block_counts is capped at N = 64", N);
  for (int v : dyads)
    if (v < 1) throw ConfigError("dyadic sizes must be >= 1");
  std::map<long long, long long> a, b;
  block_maxima(dyads, cubes, N, a, b);
  BlockCounts r;
  if (auto it = a.find(mu); it != a.end()) r.aMax = it->second;
  if (auto it = b.find(mu); it != b.end()) r.bMax = it->second;
  return r;
}

BlockSweep cnls_block_sweep(int N, double eps, bool cubes) {
  if (N > 64) throw CapError("cnls_block_sweep is capped at N = 64", N);
  std::vector<int> dy;
  for (int v = 1; 2 * v <= N + 1; v *= 2) dy.push_back(v);
  BlockSweep r;
  r.N = N;
  for (int a : dy)
    for (int b : dy)
      for (int c : dy)
        for (int d : dy) {
          std::array<int, 4> q{a, b, c, d};
          std::map<long long, long long> A, B;
          block_maxima(q, cubes, N, A, B);
          std::array<int, 3> s{b, c, d};
          std::sort(s.begin(), s.end());
          double norm = std::pow(double(s[1]) * double(s[0]), 2.0 * eps);
          for (const auto& [mu, av] : A) {
            auto it = B.find(mu);
            if (it == B.end()) continue;
            double v = double(av) * double(it->second) / norm;
            if (v > r.worst) {
              r.worst = v;
              r.worstDyads = q;
              r.worstMu = mu;
              r.worstA = av;
              r.worstB = it->second;
            }
          }
        }
  return r;
}

namespace {

struct BinTuple {
  std::uint32_t out;
  std::vector<std::uint32_t> in;
  double k;  // |kernel|; phases of the kernel do not change the norm
};

template <class Visit>
void for_each_tuple(const EquationSpec& eq, int component, int term, int N,
                    Visit&& visit) {
  if (component < 0 || component >= eq.components ||
      term < 0 || term >= static_cast<int>(eq.terms[component].size()))
    throw ConfigError("bin probe: term index out of range");
  const TermSpec& t = eq.terms[component][term];
  const int P = t.degree();
  TruncatedLattice lat(eq.d, N);
  const std::size_t L = lat.size();
  std::vector<Freq> in(P);
  std::vector<std::size_t> odo(P - 1, 0), idx(P);
  for (std::size_t ni = 0; ni < L; ++ni) {
    const Freq n = lat.freq(ni);
    std::fill(odo.begin(), odo.end(), 0);
    while (true) {
      Freq rest = n;
      for (int j = 0; j < P - 1; ++j) {
        in[j] = lat.freq(odo[j]);
        idx[j] = odo[j];
        rest -= in[j];
      }
      if (lat.contains(rest)) {
        in[P - 1] = rest;
        idx[P - 1] = lat.index(rest);
        if (!t.included || t.included(n, in.data())) visit(t, n, ni, in.data(), idx.data());
      }
      int j = P - 2;
      while (j >= 0 && ++odo[j] == L) odo[j--] = 0;
      if (j < 0) break;
    }
  }
}

double l2(const std::vector<cd>& v) {
  double acc = 0.0;
  for (const cd& x : v) acc += std::norm(x);
  return std::sqrt(acc);
}

double unit_normalize(std::vector<cd>& v) {
  double nrm = l2(v);
  if (nrm > 0.0)
    for (cd& x : v) x /= nrm;
  return nrm;
}

}  // namespace

std::vector<long long> realized_bins(const EquationSpec& eq, int component,
                                     int term, int N) {
  std::vector<long long> bins;
  for_each_tuple(eq, component, term, N,
                 [&](const TermSpec& t, const Freq& n, std::size_t, const Freq* in,
                     const std::size_t*) {
                   if (std::abs(t.multiplier(n, in)) == 0.0) return;
                   bins.push_back(static_cast<long long>(std::floor(t.phase(n, in))));
                 });
  std::sort(bins.begin(), bins.end());
  bins.erase(std::unique(bins.begin(), bins.end()), bins.end());
  return bins;
}

BinProbe bin_operator_probe(const EquationSpec& eq, int component, int term,
                            double s, int N, long long mu,
                            const ProbeOptions& opt) {
  if (opt.restarts < 1 || opt.sweeps < 1 || opt.innerSteps < 1)
    throw ConfigError("bin probe needs restarts, sweeps and innerSteps >= 1");
  TruncatedLattice lat(eq.d, N);
  const std::size_t L = lat.size();
  auto w = bracket_powers(lat, s);
  std::vector<BinTuple> tuples;
  std::vector<double> rowSq(L, 0.0);
  std::size_t best = 0;
  BinProbe r;
  r.mu = mu;
  for_each_tuple(eq, component, term, N,
                 [&](const TermSpec& t, const Freq& n, std::size_t ni, const Freq* in,
                     const std::size_t* idx) {
                   double phi = t.phase(n, in);
                   if (!(phi >= double(mu) && phi < double(mu) + 1.0)) return;
                   const int P = t.degree();
                   double k = std::abs(t.multiplier(n, in)) * w[ni];
                   for (int j = 0; j < P; ++j) k /= w[idx[j]];
                   if (k == 0.0) return;
                   if (tuples.size() >= opt.cap)
                     throw CapError("bin probe exceeds " + std::to_string(opt.cap) +
                                        " tuples",
                                    static_cast<double>(opt.cap));
                   BinTuple b{static_cast<std::uint32_t>(ni), {}, k};
                   for (int j = 0; j < P; ++j) b.in.push_back(static_cast<std::uint32_t>(idx[j]));
                   tuples.push_back(std::move(b));
                   rowSq[ni] += k * k;
                   if (k > r.lower) {
                     r.lower = k;
                     best = tuples.size() - 1;
                   }
                 });
  r.tuples = static_cast<long long>(tuples.size());
  r.upper = std::sqrt(*std::max_element(rowSq.begin(), rowSq.end()));
  if (tuples.empty()) return r;
  const int P = static_cast<int>(tuples.front().in.size());

  auto apply = [&](const std::vector<std::vector<cd>>& g, std::vector<cd>& y) {
    std::fill(y.begin(), y.end(), cd(0.0, 0.0));
    for (const auto& b : tuples) {
      cd v = b.k;
      for (int j = 0; j < P; ++j) v *= g[j][b.in[j]];
      y[b.out] += v;
    }
  };
  // Adjoint in slot k: (L_k^* y)_a = sum over tuples with n_k = a of
  // K conj(prod_{j != k} g_j) y_n.
  auto adjoint = [&](const std::vector<std::vector<cd>>& g, int k,
                     const std::vector<cd>& y, std::vector<cd>& out) {
    std::fill(out.begin(), out.end(), cd(0.0, 0.0));
    for (const auto& b : tuples) {
      cd v = b.k * y[b.out];
      for (int j = 0; j < P; ++j)
        if (j != k) v *= std::conj(g[j][b.in[j]]);
      out[b.in[k]] += v;
    }
  };

  std::vector<cd> y(L), next(L);
  for (int rs = 0; rs < opt.restarts; ++rs) {
    PhiloxStream rng(opt.seed, static_cast<std::uint64_t>(rs));
    std::vector<std::vector<cd>> g(P, std::vector<cd>(L));
    // The first start sits on the largest kernel entry; power steps never
    // decrease the objective, so the estimate is at least `lower`.
    for (int j = 0; j < P; ++j) {
      if (rs == 0) {
        g[j][tuples[best].in[j]] = 1.0;
        continue;
      }
      for (cd& x : g[j]) x = cd(rng.normal(), rng.normal());
      unit_normalize(g[j]);
    }
    for (int sw = 0; sw < opt.sweeps; ++sw)
      for (int k = 0; k < P; ++k)
        for (int it = 0; it < opt.innerSteps; ++it) {
          apply(g, y);
          adjoint(g, k, y, next);
          if (unit_normalize(next) == 0.0) break;
          g[k] = next;
        }
    apply(g, y);
    r.estimate = std::max(r.estimate, l2(y));
  }
  return r;
}

}  // namespace nfrlab
