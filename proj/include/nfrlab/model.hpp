#pragma once

#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "nfrlab/lattice.hpp"
#include "nfrlab/trees.hpp"

namespace nfrlab {

using PhaseFn = std::function<double(const Freq& n, const Freq* in)>;
using MultFn = std::function<cd(const Freq& n, const Freq* in)>;
using FreqFn = std::function<cd(const Freq& n)>;
using DispersionFn = std::function<double(const Freq& n)>;

// One multilinear term of the equation for one component,
//   sum_{n = n_1 + ... + n_P} e^{i t phase} multiplier prod_j w^{inputs[j]}_{n_j}.
// `phase` and `multiplier` are the direct-sum definitions.  The separable
// description (coeff, outFactor, inFactor) drives the FFT path; it covers the
// unrestricted product, and EquationSpec::correction removes the tuples
// rejected by `included`.
struct TermSpec {
  std::string label;
  std::vector<int> inputs;
  PhaseFn phase;
  MultFn multiplier;
  cd coeff{1.0, 0.0};
  FreqFn outFactor;              // optional, depends on the output frequency
  std::vector<FreqFn> inFactor;  // optional per slot
  std::function<bool(const Freq& n, const Freq* in)> included;  // optional

  int degree() const { return static_cast<int>(inputs.size()); }
  // coeff * outFactor(n) * prod_j inFactor_j(n_j).
  cd unrestricted(const Freq& n, const Freq* in) const;
  // Number of slots fed by each component (size = components).
  std::vector<int> degrees(int components) const;
};

// Adds (or overwrites into) `out` for a given state and time.
using StateFn =
    std::function<void(const SeqState& state, double t, SeqState& out)>;

struct EquationSpec {
  std::string name;
  int d = 1;
  int components = 1;
  std::vector<std::string> componentNames;
  // psi per component; every term's phase equals
  // psi_out(n) - sum_j psi_{inputs[j]}(n_j).
  std::vector<DispersionFn> dispersion;
  std::vector<std::vector<TermSpec>> terms;
  // Remainder R[w](t); empty means R = 0.  Overwrites `out`.
  StateFn remainder;
  // Added to the FFT evaluation of the unrestricted products to obtain the
  // restricted sums; empty when no term is restricted.
  StateFn correction;
  // Conjugate partner of each component (-1 if none).
  std::vector<int> partner;
  std::map<std::string, double> params;
  // Default regularity index used by experiments (s of l^2_s).
  double defaultS = 0.0;

  int max_degree() const;
  bool has_remainder() const { return static_cast<bool>(remainder); }
  SystemShape shape() const;
};

struct EquationParams {
  double alpha = 0.75;  // fnls dispersion exponent
  int sign = +1;        // defocusing (+) or focusing (-) cubic sign
};

// Known names: kdv, cnls1d, cnls2d, fnls, dnls, zakharov.
EquationSpec registry(const std::string& name,
                      const EquationParams& params = {});
std::vector<std::string> registry_names();

// Evaluates R[w](t); zero state when the equation has no remainder.
SeqState remainder_eval(const EquationSpec& eq, const SeqState& state,
                        double t);

// Direct (brute-force) evaluation of the nonlinear sums on the box.
SeqState nonlinear_direct(const EquationSpec& eq, const SeqState& state,
                          double t);

// Separability residual: max |phase - (psi_out - sum psi_in)| over the
// given number of random tuples drawn from |n_i| <= range.
double separability_defect(const EquationSpec& eq, int samples, int range,
                           std::uint64_t seed);

// Makes components related by `partner` consistent: W_n = conj(w_{-n}).
void enforce_conjugate_pairs(const EquationSpec& eq, SeqState& state);

// Random state with Gaussian coefficients under the envelope
// exp(-|n|^2 / width^2), scaled so that the l^2 norm of component 0 equals
// `norm`; partner components are set consistently.
SeqState random_state(const EquationSpec& eq, const TruncatedLattice& lat,
                      double norm, double width, std::uint64_t seed,
                      std::uint64_t stream = 0);

// Gauge transform for the derivative NLS (d = 1).
struct GaugeState {
  double mu_integral = 0.0;  // int_0^t mu
  double mu = 0.0;           // mean of |v|^2 at the current time
};

// Returns w = tau_{2 mu} (e^{-i J(u)} u) as Fourier coefficients on the same
// lattice, using gauge.mu_integral for the shift.  `u` has one component.
SeqState gauge_forward(const SeqState& u, const GaugeState& gauge);
// Mean of |u|^2, i.e. the zero mode of |u|^2.
double gauge_mu(const SeqState& u);
// Advances mu_integral by the trapezoid rule over [t, t + dt].
void gauge_advance(GaugeState& g, double muNext, double dt);

// Zakharov phase Phi_pm = n1^2 - n2^2 pm <n0>.
double zakharov_phi(int n1, int n2, int n0, int pm);

// Metadata as JSON text: name, d, components, degrees, psi on |n| <= 10.
std::string equation_metadata_json(const EquationSpec& eq);

}  // namespace nfrlab
