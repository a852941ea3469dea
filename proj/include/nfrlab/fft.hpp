#pragma once

#include <complex>
#include <cstddef>
#include <vector>

#include "nfrlab/lattice.hpp"

namespace nfrlab {

// Smallest integer >= m whose only prime factors are 2, 3 and 5.
int fft_size_at_least(int m);

// Periodic grid of M^d points with FFTW plans.  Physical values are
// f(x_k) = sum_n f_n e^{i n x_k}; to_fourier applies the inverse map
// including the 1/M^d normalisation.
class FftGrid {
 public:
  FftGrid(int d, int M);
  ~FftGrid();
  FftGrid(const FftGrid&) = delete;
  FftGrid& operator=(const FftGrid&) = delete;

  int d() const { return d_; }
  int M() const { return M_; }
  std::size_t total() const { return total_; }

  // Grid position of every lattice point of `lat` (n mod M per axis).
  const std::vector<std::size_t>& positions(const TruncatedLattice& lat);

  // Zero-padded synthesis of box coefficients into `phys` (length total()).
  void to_physical(const TruncatedLattice& lat, const cd* coeffs, cd* phys);
  // Analysis of `phys`, keeping only the box modes.
  void to_fourier(const cd* phys, const TruncatedLattice& lat, cd* coeffs);

 private:
  int d_, M_;
  std::size_t total_;
  cd* work_;
  void* fwd_;
  void* bwd_;
  TruncatedLattice cachedLat_;
  std::vector<std::size_t> cachedPos_;
};

// Thread-local cache of grids keyed by (d, M).
FftGrid& fft_grid(int d, int M);

// Grid size giving exact Galerkin truncation for products of `degree`
// factors from the box |n_i| <= N.
int dealiased_size(int N, int degree);

}  // namespace nfrlab
