#include "nfrlab/kernels.hpp"

#include <immintrin.h>

#include <atomic>
#include <vector>

#include "nfrlab/error.hpp"

namespace nfrlab::kernels {

namespace {

constexpr std::size_t kBlock = 64;
// Lane receiving element i of a 4-group; matches the lane order produced by
// _mm256_hadd_pd on two consecutive complex pairs.
constexpr int kLane[4] = {0, 2, 1, 3};

inline double block_total(const double lane[4]) {
  return (lane[0] + lane[1]) + (lane[2] + lane[3]);
}

double pairwise(const double* x, std::size_t n) {
  if (n == 0) return 0.0;
  if (n == 1) return x[0];
  std::size_t h = n / 2;
  return pairwise(x, h) + pairwise(x + h, n - h);
}

inline void scalar_tail(const double* w, const cd* z, std::size_t begin,
                        std::size_t end, double lane[4]) {
  for (std::size_t i = begin; i < end; ++i) {
    double re = z[i].real(), im = z[i].imag();
    double s = re * re + im * im;
    lane[kLane[i % 4]] += w ? w[i] * s : s;
  }
}

}  // namespace

double pairwise_sum(const double* x, std::size_t n) { return pairwise(x, n); }

namespace scalar {

void cmul(const cd* a, const cd* b, cd* dst, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    double ar = a[i].real(), ai = a[i].imag();
    double br = b[i].real(), bi = b[i].imag();
    dst[i] = cd(ar * br - ai * bi, ai * br + ar * bi);
  }
}

void cmul_acc(cd* acc, const cd* a, const cd* b, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    double ar = a[i].real(), ai = a[i].imag();
    double br = b[i].real(), bi = b[i].imag();
    double pr = ar * br - ai * bi;
    double pi = ai * br + ar * bi;
    acc[i] = cd(acc[i].real() + pr, acc[i].imag() + pi);
  }
}

void axpy(cd* acc, cd s, const cd* a, std::size_t n) {
  double sr = s.real(), si = s.imag();
  for (std::size_t i = 0; i < n; ++i) {
    double ar = a[i].real(), ai = a[i].imag();
    double pr = ar * sr - ai * si;
    double pi = ai * sr + ar * si;
    acc[i] = cd(acc[i].real() + pr, acc[i].imag() + pi);
  }
}

double sumsq_weighted(const double* w, const cd* z, std::size_t n) {
  std::vector<double> blocks;
  blocks.reserve(n / kBlock + 1);
  for (std::size_t b = 0; b < n; b += kBlock) {
    std::size_t e = std::min(n, b + kBlock);
    double lane[4] = {0.0, 0.0, 0.0, 0.0};
    scalar_tail(w, z, b, e, lane);
    blocks.push_back(block_total(lane));
  }
  return pairwise(blocks.data(), blocks.size());
}

}  // namespace scalar

namespace avx2 {

namespace {

__attribute__((target("avx2"))) inline __m256d mul2(__m256d a, __m256d b) {
  __m256d br = _mm256_movedup_pd(b);
  __m256d bi = _mm256_permute_pd(b, 0xF);
  __m256d as = _mm256_permute_pd(a, 0x5);
  __m256d t1 = _mm256_mul_pd(a, br);
  __m256d t2 = _mm256_mul_pd(as, bi);
  return _mm256_addsub_pd(t1, t2);
}

}  // namespace

__attribute__((target("avx2"))) void cmul(const cd* a, const cd* b, cd* dst,
                                          std::size_t n) {
  const double* pa = reinterpret_cast<const double*>(a);
  const double* pb = reinterpret_cast<const double*>(b);
  double* pd = reinterpret_cast<double*>(dst);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    __m256d va = _mm256_loadu_pd(pa + 2 * i);
    __m256d vb = _mm256_loadu_pd(pb + 2 * i);
    _mm256_storeu_pd(pd + 2 * i, mul2(va, vb));
  }
  scalar::cmul(a + i, b + i, dst + i, n - i);
}

__attribute__((target("avx2"))) void cmul_acc(cd* acc, const cd* a,
                                              const cd* b, std::size_t n) {
  const double* pa = reinterpret_cast<const double*>(a);
  const double* pb = reinterpret_cast<const double*>(b);
  double* pc = reinterpret_cast<double*>(acc);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    __m256d va = _mm256_loadu_pd(pa + 2 * i);
    __m256d vb = _mm256_loadu_pd(pb + 2 * i);
    __m256d vc = _mm256_loadu_pd(pc + 2 * i);
    _mm256_storeu_pd(pc + 2 * i, _mm256_add_pd(vc, mul2(va, vb)));
  }
  scalar::cmul_acc(acc + i, a + i, b + i, n - i);
}

__attribute__((target("avx2"))) void axpy(cd* acc, cd s, const cd* a,
                                          std::size_t n) {
  const double* pa = reinterpret_cast<const double*>(a);
  double* pc = reinterpret_cast<double*>(acc);
  __m256d vs = _mm256_setr_pd(s.real(), s.imag(), s.real(), s.imag());
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    __m256d va = _mm256_loadu_pd(pa + 2 * i);
    __m256d vc = _mm256_loadu_pd(pc + 2 * i);
    _mm256_storeu_pd(pc + 2 * i, _mm256_add_pd(vc, mul2(va, vs)));
  }
  scalar::axpy(acc + i, s, a + i, n - i);
}

__attribute__((target("avx2"))) double sumsq_weighted(const double* w,
                                                      const cd* z,
                                                      std::size_t n) {
  const double* pz = reinterpret_cast<const double*>(z);
  std::vector<double> blocks;
  blocks.reserve(n / kBlock + 1);
  for (std::size_t b = 0; b < n; b += kBlock) {
    std::size_t e = std::min(n, b + kBlock);
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = b;
    for (; i + 4 <= e; i += 4) {
      __m256d v0 = _mm256_loadu_pd(pz + 2 * i);
      __m256d v1 = _mm256_loadu_pd(pz + 2 * i + 4);
      __m256d s = _mm256_hadd_pd(_mm256_mul_pd(v0, v0), _mm256_mul_pd(v1, v1));
      if (w) {
        __m256d wv = _mm256_permute4x64_pd(_mm256_loadu_pd(w + i), 0xD8);
        s = _mm256_mul_pd(wv, s);
      }
      acc = _mm256_add_pd(acc, s);
    }
    double lane[4];
    _mm256_storeu_pd(lane, acc);
    scalar_tail(w, z, i, e, lane);
    blocks.push_back(block_total(lane));
  }
  return pairwise(blocks.data(), blocks.size());
}

}  // namespace avx2

namespace {

struct Dispatch {
  Isa isa;
  Dispatch() : isa(avx2_available() ? Isa::Avx2 : Isa::Scalar) {}
};

Dispatch& dispatch() {
  static Dispatch d;
  return d;
}

}  // namespace

bool avx2_available() {
  static const bool ok = __builtin_cpu_supports("avx2");
  return ok;
}

Isa active_isa() { return dispatch().isa; }

void force_isa(Isa isa) {
  if (isa == Isa::Avx2 && !avx2_available())
    throw ContractError("AVX2 requested but not supported by this CPU");
  dispatch().isa = isa;
}

const char* isa_name(Isa isa) {
  return isa == Isa::Avx2 ? "avx2" : "scalar";
}

void cmul(const cd* a, const cd* b, cd* dst, std::size_t n) {
  if (active_isa() == Isa::Avx2)
    avx2::cmul(a, b, dst, n);
  else
    scalar::cmul(a, b, dst, n);
}

void cmul_acc(cd* acc, const cd* a, const cd* b, std::size_t n) {
  if (active_isa() == Isa::Avx2)
    avx2::cmul_acc(acc, a, b, n);
  else
    scalar::cmul_acc(acc, a, b, n);
}

void axpy(cd* acc, cd s, const cd* a, std::size_t n) {
  if (active_isa() == Isa::Avx2)
    avx2::axpy(acc, s, a, n);
  else
    scalar::axpy(acc, s, a, n);
}

double sumsq_weighted(const double* w, const cd* z, std::size_t n) {
  if (active_isa() == Isa::Avx2) return avx2::sumsq_weighted(w, z, n);
  return scalar::sumsq_weighted(w, z, n);
}

}  // namespace nfrlab::kernels
