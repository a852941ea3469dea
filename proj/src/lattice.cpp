#include "nfrlab/lattice.hpp"

#include <cmath>
#include <sstream>

#include "nfrlab/error.hpp"
#include "nfrlab/kernels.hpp"

namespace nfrlab {

Freq::Freq(std::initializer_list<int> coords) {
  if (coords.size() == 0 || coords.size() > kMaxDim)
    throw ContractError("Freq: dimension must be in 1..3");
  d = static_cast<int>(coords.size());
  int i = 0;
  for (int v : coords) c[i++] = v;
}

Freq Freq::operator+(const Freq& o) const {
  Freq r = *this;
  return r += o;
}

Freq Freq::operator-(const Freq& o) const {
  Freq r = *this;
  return r -= o;
}

Freq Freq::operator-() const {
  Freq r(d);
  for (int i = 0; i < d; ++i) r.c[i] = -c[i];
  return r;
}

Freq& Freq::operator+=(const Freq& o) {
  for (int i = 0; i < d; ++i) c[i] += o.c[i];
  return *this;
}

Freq& Freq::operator-=(const Freq& o) {
  for (int i = 0; i < d; ++i) c[i] -= o.c[i];
  return *this;
}

bool Freq::operator==(const Freq& o) const {
  if (d != o.d) return false;
  for (int i = 0; i < d; ++i)
    if (c[i] != o.c[i]) return false;
  return true;
}

std::int64_t Freq::norm2() const {
  std::int64_t s = 0;
  for (int i = 0; i < d; ++i) s += static_cast<std::int64_t>(c[i]) * c[i];
  return s;
}

int Freq::sup() const {
  int m = 0;
  for (int i = 0; i < d; ++i) m = std::max(m, std::abs(c[i]));
  return m;
}

std::string Freq::str() const {
  std::ostringstream os;
  os << '(';
  for (int i = 0; i < d; ++i) os << (i ? "," : "") << c[i];
  os << ')';
  return os.str();
}

double bracket(std::int64_t n2) {
  return std::sqrt(1.0 + static_cast<double>(n2));
}

double bracket(const Freq& n) { return bracket(n.norm2()); }

TruncatedLattice::TruncatedLattice(int d, int N) : d_(d), N_(N) {
  if (d < 1 || d > kMaxDim)
    throw ConfigError("lattice.d must be 1, 2 or 3 (got " + std::to_string(d) +
                      ")");
  if (N < 0) throw ConfigError("lattice.N must be >= 0");
  size_ = 1;
  for (int i = 0; i < d; ++i) size_ *= static_cast<std::size_t>(2 * N + 1);
}

bool TruncatedLattice::contains(const Freq& n) const {
  if (n.d != d_) return false;
  for (int i = 0; i < d_; ++i)
    if (n.c[i] < -N_ || n.c[i] > N_) return false;
  return true;
}

std::size_t TruncatedLattice::index(const Freq& n) const {
  std::size_t idx = 0;
  const std::size_t s = side();
  for (int i = 0; i < d_; ++i) idx = idx * s + static_cast<std::size_t>(n.c[i] + N_);
  return idx;
}

Freq TruncatedLattice::freq(std::size_t idx) const {
  Freq n(d_);
  const std::size_t s = side();
  for (int i = d_ - 1; i >= 0; --i) {
    n.c[i] = static_cast<int>(idx % s) - N_;
    idx /= s;
  }
  return n;
}

std::vector<double> bracket_powers(const TruncatedLattice& lat, double power) {
  std::vector<double> w(lat.size());
  for (std::size_t i = 0; i < lat.size(); ++i)
    w[i] = std::pow(bracket(lat.freq(i)), power);
  return w;
}

SeqState::SeqState(TruncatedLattice lat, int components)
    : lat_(lat), comps_(components) {
  if (components < 1) throw ConfigError("state needs at least one component");
  data_.assign(lat_.size() * static_cast<std::size_t>(components), cd(0.0, 0.0));
}

bool SeqState::all_finite() const {
  for (const cd& z : data_)
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) return false;
  return true;
}

void SeqState::set_zero() { std::fill(data_.begin(), data_.end(), cd(0.0, 0.0)); }

SeqState& SeqState::operator+=(const SeqState& o) {
  if (o.lat_ != lat_ || o.comps_ != comps_)
    throw ContractError("state shape mismatch in +=");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
  return *this;
}

SeqState& SeqState::operator-=(const SeqState& o) {
  if (o.lat_ != lat_ || o.comps_ != comps_)
    throw ContractError("state shape mismatch in -=");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= o.data_[i];
  return *this;
}

SeqState& SeqState::operator*=(double a) {
  for (cd& z : data_) z *= a;
  return *this;
}

double norm_l2s(const SeqState& state, double s, int component) {
  auto z = state.comp(component);
  if (s == 0.0) return std::sqrt(kernels::sumsq_weighted(nullptr, z.data(), z.size()));
  auto w = bracket_powers(state.lattice(), 2.0 * s);
  return std::sqrt(kernels::sumsq_weighted(w.data(), z.data(), z.size()));
}

double norm_l2s_all(const SeqState& state, double s) {
  std::vector<double> parts;
  for (int c = 0; c < state.components(); ++c) {
    double v = norm_l2s(state, s, c);
    parts.push_back(v * v);
  }
  return std::sqrt(kernels::pairwise_sum(parts.data(), parts.size()));
}

double norm_weighted_sup(const SeqState& state, double s, int component) {
  auto z = state.comp(component);
  const auto& lat = state.lattice();
  double m = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    double v = std::abs(z[i]);
    if (s != 0.0) v *= std::pow(bracket(lat.freq(i)), s);
    m = std::max(m, v);
  }
  return m;
}

SeqState apply_cutoff(const SeqState& state, const Symbol& symbol) {
  SeqState out = state;
  const auto& lat = state.lattice();
  for (std::size_t i = 0; i < lat.size(); ++i) {
    cd m = symbol(lat.freq(i));
    for (int c = 0; c < state.components(); ++c) out.at(c, i) *= m;
  }
  return out;
}

double cutoff_radius(double eps, double alpha) {
  return std::pow(eps, -1.0 / (4.0 * alpha));
}

}  // namespace nfrlab
