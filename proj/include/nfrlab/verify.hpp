#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "nfrlab/lattice.hpp"
#include "nfrlab/model.hpp"

namespace nfrlab {

struct EstimateParams {
  double s = 0.0, s1 = 0.0, s2 = 0.0;
  double delta = 0.5;
  int mu = 0;
  // Throws ConfigError unless s1 < s < s2 and 0 < delta <= 1/2.
  void validate() const;
};

struct SupReport {
  int N = 0;
  double supValue = 0.0;
  Freq argmax;
};

enum class LoopOrder { OutputFirst, InputsFirst };

// sup_{|n| <= N} sum_{n = n_1 + ... + n_p, n_j in the box}
//   |m|^2 <n>^{2s} / (<phi> prod_j <n_j>^{2s})
// for one term of one component.  OutputFirst loops over n and the free
// inputs; InputsFirst loops over all input tuples and scatters to n.
SupReport sup_weight_A1(const EquationSpec& eq, int component, int term,
                        double s, int N, LoopOrder order = LoopOrder::OutputFirst,
                        std::uint64_t cap = 100'000'000);

// Exponent b of a least-squares fit y ~ a x^b (x, y > 0).
double fit_power_exponent(const std::vector<double>& x, const std::vector<double>& y);

// Relative increase (last - previous) / previous of a sweep.
double last_growth(const std::vector<double>& values);

// #{n in Z^2 : |n - center|^2 = mu, |n - ballCenter| <= R}.  Two
// independent loop structures are provided.
long long circle_count(const Freq& center, long long mu, double R,
                       const Freq& ballCenter);
long long circle_count(const Freq& center, long long mu, double R);
long long circle_count_scan(const Freq& center, long long mu, double R,
                            const Freq& ballCenter);

// max_{0 <= mu <= R^2} circle_count(0, mu, R), with the maximiser.
struct CircleMax {
  double R;
  long long count;
  long long mu;
};
CircleMax max_circle_count(double R);

// #{(k, l) : k + sign l = kStar, |k|^{2a} + sign |l|^{2a} in
//   [muStar - 1/2, muStar + 1/2), |k| <= |l|, |k| <= K}.
long long fnls_count(int K, double muStar, long long kStar, double alpha, int sign);
long long fnls_count_by_l(int K, double muStar, long long kStar, double alpha,
                          int sign);

struct FnlsMax {
  int K;
  long long count;
  long long kStar;
  long long muStar;
};
// Maximum over integer muStar and |kStar| <= 2K + 2 (sign -1 additionally
// restricts to |kStar| >= K^{1 - alpha}).
FnlsMax fnls_max_count(int K, double alpha, int sign);

enum class DnlsSum { A, C };

// Truncated sums over n = n1 - n2 + n3 with n2 != n1, n3 and |n_i| <= N:
//   A_n = sum |n2|^2 <n>^{2s} / (|n2-n1||n2-n3| <n1>^{2s}<n2>^{2s}<n3>^{2s})
//   C_n = sum |n2|^2 <n>^{2s} <n_max>^2
//         / (|n2-n1|^2 |n2-n3|^2 <n1>^{2s}<n2>^{2s}<n3>^{2s} <n>^{2-2e})
// with e = (s - 1/2) / 2.
double dnls_case_sums(double s, DnlsSum kind, int n, int N);

struct TripleZ {
  int n0 = 0, n1 = 0, n2 = 0, pm = 1;
};

struct ZakharovReport {
  int N = 0;
  std::array<double, 4> maxOnZero{};  // max W_j over n0 = 0
  double maxOnLines = 0.0;            // max W_j over n1 + n2 +- sgn(n0) = 0
  double lineMin = 0.0, lineMax = 0.0;  // W_j range on those lines, |n1| >= 10
  double c1 = 0.0;  // max (W1 + W2) / (W3 + W4) elsewhere
  double c2 = 0.0;  // max (W3 + W4) / dominating expression elsewhere
  double factorMin = 0.0, factorMax = 0.0;  // <Phi> / (<n0><n1+n2>) elsewhere
  TripleZ worstC1, worstC2;
  long long triples = 0;
};

// Weights W_1..W_4 at one triple (n0 = n1 - n2).
std::array<double, 4> zakharov_weights(double s, double l, double eps, int n0,
                                       int n1, int n2, int pm);

ZakharovReport zakharov_weight_check(double s, double l, double eps, int N);

struct BlockCounts {
  long long aMax = 0;
  long long bMax = 0;
};

// Dyadic blocks D_j = {n in box : N_j <= <n> < 2 N_j} in d = 2 with the
// constraint n = n1 - n2 + n3 and Phi = |n|^2 - |n1|^2 + |n2|^2 - |n3|^2 = mu.
//   A_mu = max over (n, n2) of #{(n1, n3)},  B_mu = max over (n1, n3) of
//   #{(n, n2)}; with `cubes`, (n, n2) in B_mu is further restricted to cubes
//   of side N_med aligned to the origin when N_2 >= 4 N_med.
BlockCounts cnls_block_counts(long long mu, const std::array<int, 4>& dyads,
                              bool cubes, int N);

struct BlockSweep {
  int N = 0;
  double worst = 0.0;  // max A_mu B_mu / (N_med N_min)^{2 eps}
  std::array<int, 4> worstDyads{};
  long long worstMu = 0;
  long long worstA = 0, worstB = 0;
};

// All dyadic blocks with 2 N_j <= N + 1 and every mu.
BlockSweep cnls_block_sweep(int N, double eps, bool cubes);

struct BinProbe {
  long long mu = 0;       // bin mu <= phi < mu + 1
  long long tuples = 0;   // admissible (n, inputs) in the bin
  double estimate = 0.0;  // best ||T(g_1..g_p)|| found with unit inputs
  double lower = 0.0;     // largest single kernel entry
  double upper = 0.0;     // sqrt(sup_n sum |K|^2)
};

struct ProbeOptions {
  int restarts = 4;
  int sweeps = 20;      // passes over all input slots
  int innerSteps = 3;   // power steps per slot and pass
  std::uint64_t seed = 1;
  std::uint64_t cap = 20'000'000;  // admissible tuples per bin
};

// Lower estimate of the norm of the bin-restricted multilinear operator
//   T(g)_n = sum_{n = n_1 + ... + n_p, mu <= phi < mu + 1}
//            m <n>^s / prod_j <n_j>^s  prod_j g_j(n_j)
// on l^2 of the box, by alternating power iteration over the input slots
// with random unit starts.  Slot conjugations do not change the norm and are
// ignored.  Every estimate lies in [lower, upper].
BinProbe bin_operator_probe(const EquationSpec& eq, int component, int term,
                            double s, int N, long long mu,
                            const ProbeOptions& opt = {});

// Integer bins floor(phi) realized by the term on the box.
std::vector<long long> realized_bins(const EquationSpec& eq, int component,
                                     int term, int N);

}  // namespace nfrlab
