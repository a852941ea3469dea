#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace nfrlab {

using cd = std::complex<double>;

constexpr int kMaxDim = 3;

// Integer frequency n in Z^d.
struct Freq {
  int d = 1;
  std::array<int, kMaxDim> c{};

  Freq() = default;
  explicit Freq(int dim) : d(dim) {}
  Freq(std::initializer_list<int> coords);

  int operator[](int i) const { return c[i]; }
  int& operator[](int i) { return c[i]; }

  Freq operator+(const Freq& o) const;
  Freq operator-(const Freq& o) const;
  Freq operator-() const;
  Freq& operator+=(const Freq& o);
  Freq& operator-=(const Freq& o);
  bool operator==(const Freq& o) const;
  bool operator!=(const Freq& o) const { return !(*this == o); }

  // |n|^2, exact.
  std::int64_t norm2() const;
  // max_i |n_i|
  int sup() const;
  std::string str() const;
};

// <n> = sqrt(1 + |n|^2), with |n|^2 formed exactly before conversion.
double bracket(const Freq& n);
double bracket(std::int64_t n2);

// Sup-norm box |n_i| <= N in dimension d, indexed row-major with the first
// coordinate slowest.
class TruncatedLattice {
 public:
  TruncatedLattice() = default;
  TruncatedLattice(int d, int N);

  int d() const { return d_; }
  int N() const { return N_; }
  int side() const { return 2 * N_ + 1; }
  std::size_t size() const { return size_; }

  bool contains(const Freq& n) const;
  std::size_t index(const Freq& n) const;
  Freq freq(std::size_t idx) const;
  // Index of -n for the point at idx.
  std::size_t mirror(std::size_t idx) const { return size_ - 1 - idx; }

  bool operator==(const TruncatedLattice& o) const {
    return d_ == o.d_ && N_ == o.N_;
  }
  bool operator!=(const TruncatedLattice& o) const { return !(*this == o); }

 private:
  int d_ = 1;
  int N_ = 0;
  std::size_t size_ = 1;
};

// <n>^{power} for every lattice point.
std::vector<double> bracket_powers(const TruncatedLattice& lat, double power);

// Dense complex amplitudes, one array per component over the box.
class SeqState {
 public:
  SeqState() = default;
  SeqState(TruncatedLattice lat, int components);

  const TruncatedLattice& lattice() const { return lat_; }
  int components() const { return comps_; }
  std::size_t size() const { return lat_.size(); }

  std::span<cd> comp(int c) {
    return {data_.data() + static_cast<std::size_t>(c) * lat_.size(),
            lat_.size()};
  }
  std::span<const cd> comp(int c) const {
    return {data_.data() + static_cast<std::size_t>(c) * lat_.size(),
            lat_.size()};
  }
  cd& at(int c, std::size_t i) { return data_[c * lat_.size() + i]; }
  const cd& at(int c, std::size_t i) const { return data_[c * lat_.size() + i]; }
  cd& at(int c, const Freq& n) { return at(c, lat_.index(n)); }
  const cd& at(int c, const Freq& n) const { return at(c, lat_.index(n)); }

  std::vector<cd>& raw() { return data_; }
  const std::vector<cd>& raw() const { return data_; }

  bool all_finite() const;
  void set_zero();

  SeqState& operator+=(const SeqState& o);
  SeqState& operator-=(const SeqState& o);
  SeqState& operator*=(double a);
  friend SeqState operator-(SeqState a, const SeqState& b) { return a -= b; }
  friend SeqState operator+(SeqState a, const SeqState& b) { return a += b; }

 private:
  TruncatedLattice lat_;
  int comps_ = 0;
  std::vector<cd> data_;
};

// (sum_n <n>^{2s} |w_n|^2)^{1/2} over the box for one component.
double norm_l2s(const SeqState& state, double s, int component);
// Same over all components jointly.
double norm_l2s_all(const SeqState& state, double s);
// sup_n <n>^s |w_n|.
double norm_weighted_sup(const SeqState& state, double s, int component);

using Symbol = std::function<cd(const Freq&)>;
// w_n -> symbol(n) w_n on every component.
SeqState apply_cutoff(const SeqState& state, const Symbol& symbol);

// Cutoff radius N_eps = eps^{-1/(4 alpha)}.
double cutoff_radius(double eps, double alpha);

}  // namespace nfrlab
