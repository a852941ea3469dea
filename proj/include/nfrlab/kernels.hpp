#pragma once

// Hot loops shared by the solver and the term evaluator.  Every kernel has a
// scalar reference and an AVX2 variant; the variant is chosen once at
// startup from the CPU flags.  Both produce bitwise identical results: the
// AVX2 code performs the same IEEE operations in the same order and the
// library is compiled without floating-point contraction.

#include <complex>
#include <cstddef>

namespace nfrlab::kernels {

using cd = std::complex<double>;

enum class Isa { Scalar, Avx2 };

Isa active_isa();
bool avx2_available();
// Testing hook; throws ContractError if Avx2 is requested but unsupported.
void force_isa(Isa isa);
const char* isa_name(Isa isa);

// dst[i] = a[i] * b[i]
void cmul(const cd* a, const cd* b, cd* dst, std::size_t n);
// acc[i] += a[i] * b[i]
void cmul_acc(cd* acc, const cd* a, const cd* b, std::size_t n);
// acc[i] += s * a[i]
void axpy(cd* acc, cd s, const cd* a, std::size_t n);
// sum_i w[i] * |z[i]|^2 in a fixed blocked/pairwise order; w may be null.
double sumsq_weighted(const double* w, const cd* z, std::size_t n);
// Pairwise sum of a real array.
double pairwise_sum(const double* x, std::size_t n);

namespace scalar {
void cmul(const cd* a, const cd* b, cd* dst, std::size_t n);
void cmul_acc(cd* acc, const cd* a, const cd* b, std::size_t n);
void axpy(cd* acc, cd s, const cd* a, std::size_t n);
double sumsq_weighted(const double* w, const cd* z, std::size_t n);
}  // namespace scalar

namespace avx2 {
void cmul(const cd* a, const cd* b, cd* dst, std::size_t n);
void cmul_acc(cd* acc, const cd* a, const cd* b, std::size_t n);
void axpy(cd* acc, cd s, const cd* a, std::size_t n);
double sumsq_weighted(const double* w, const cd* z, std::size_t n);
}  // namespace avx2

}  // namespace nfrlab::kernels
