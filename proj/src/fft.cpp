#include "nfrlab/fft.hpp"

#include <fftw3.h>

#include <map>
#include <memory>
#include <mutex>

#include "nfrlab/error.hpp"

namespace nfrlab {

namespace {

std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

}  // namespace

int fft_size_at_least(int m) {
  if (m < 1) return 1;
  for (int n = m;; ++n) {
    int r = n;
    for (int p : {2, 3, 5})
      while (r % p == 0) r /= p;
    if (r == 1) return n;
  }
}

int dealiased_size(int N, int degree) {
  return fft_size_at_least((degree + 1) * N + 1);
}

FftGrid::FftGrid(int d, int M) : d_(d), M_(M) {
  if (d < 1 || d > kMaxDim || M < 1)
    throw ContractError("FftGrid: invalid shape");
  total_ = 1;
  for (int i = 0; i < d; ++i) total_ *= static_cast<std::size_t>(M);
  work_ = reinterpret_cast<cd*>(fftw_malloc(sizeof(fftw_complex) * total_));
  int dims[kMaxDim];
  for (int i = 0; i < d; ++i) dims[i] = M;
  auto* w = reinterpret_cast<fftw_complex*>(work_);
  std::lock_guard<std::mutex> lock(planner_mutex());
  fwd_ = fftw_plan_dft(d, dims, w, w, FFTW_FORWARD, FFTW_ESTIMATE);
  bwd_ = fftw_plan_dft(d, dims, w, w, FFTW_BACKWARD, FFTW_ESTIMATE);
}

FftGrid::~FftGrid() {
  std::lock_guard<std::mutex> lock(planner_mutex());
  fftw_destroy_plan(static_cast<fftw_plan>(fwd_));
  fftw_destroy_plan(static_cast<fftw_plan>(bwd_));
  fftw_free(work_);
}

const std::vector<std::size_t>& FftGrid::positions(const TruncatedLattice& lat) {
  if (!cachedPos_.empty() && cachedLat_ == lat) return cachedPos_;
  if (lat.d() != d_) throw ContractError("FftGrid: lattice dimension mismatch");
  if (2 * lat.N() + 1 > M_)
    throw ContractError("FftGrid: grid smaller than the lattice box");
  cachedLat_ = lat;
  cachedPos_.resize(lat.size());
  for (std::size_t i = 0; i < lat.size(); ++i) {
    Freq n = lat.freq(i);
    std::size_t g = 0;
    for (int a = 0; a < d_; ++a) {
      int k = n[a] % M_;
      if (k < 0) k += M_;
      g = g * static_cast<std::size_t>(M_) + static_cast<std::size_t>(k);
    }
    cachedPos_[i] = g;
  }
  return cachedPos_;
}

void FftGrid::to_physical(const TruncatedLattice& lat, const cd* coeffs,
                          cd* phys) {
  const auto& pos = positions(lat);
  std::fill(work_, work_ + total_, cd(0.0, 0.0));
  for (std::size_t i = 0; i < pos.size(); ++i) work_[pos[i]] = coeffs[i];
  fftw_execute(static_cast<fftw_plan>(bwd_));
  std::copy(work_, work_ + total_, phys);
}

void FftGrid::to_fourier(const cd* phys, const TruncatedLattice& lat,
                         cd* coeffs) {
  const auto& pos = positions(lat);
  std::copy(phys, phys + total_, work_);
  fftw_execute(static_cast<fftw_plan>(fwd_));
  const double scale = 1.0 / static_cast<double>(total_);
  for (std::size_t i = 0; i < pos.size(); ++i) coeffs[i] = work_[pos[i]] * scale;
}

FftGrid& fft_grid(int d, int M) {
  thread_local std::map<std::pair<int, int>, std::unique_ptr<FftGrid>> cache;
  auto key = std::make_pair(d, M);
  auto it = cache.find(key);
  if (it == cache.end())
    it = cache.emplace(key, std::make_unique<FftGrid>(d, M)).first;
  return *it->second;
}

}  // namespace nfrlab
