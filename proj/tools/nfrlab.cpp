#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "CLI11.hpp"
#include "nfrlab/dynamics.hpp"
#include "nfrlab/error.hpp"
#include "nfrlab/io.hpp"
#include "nfrlab/kernels.hpp"
#include "nfrlab/lattice.hpp"
#include "nfrlab/model.hpp"
#include "nfrlab/nfr.hpp"
#include "nfrlab/trees.hpp"
#include "nfrlab/verify.hpp"

using nlohmann::json;
using namespace nfrlab;

namespace {

constexpr const char* kVersion = "1.0.0";

json default_config() {
  return json::parse(R"({
    "equation": "cnls1d",
    "params": {"alpha": 0.75, "sign": 1},
    "lattice": {"N": 4},
    "rule": {"variant": "A", "M": 10.0},
    "integrator": {"dt": 0.001, "T": 0.1, "storeEvery": 1},
    "estimate": {"s": null, "s1": null, "s2": null, "delta": 0.5,
                 "alpha": 1.0, "epsilon": 0.0},
    "data": {"norm": 0.1, "width": 3.0, "zero": false, "state": "",
             "perturbation": 0.001},
    "seed": 1,
    "threads": 1,
    "output": {"dir": ".", "binary": false},
    "trees": {"p": 3, "J": 3, "cap": 1000000, "component": -1, "dump": false},
    "nfr": {"J": 3, "component": -1, "every": 0, "tolerance": 0.0,
            "xnorm": "l2s", "xs": null},
    "uniqueness": {"maxRatio": 2.0},
    "weaklimit": {"eps": [0.01, 0.001, 0.0001]},
    "sweep": {"Ns": [8, 16, 32, 64], "component": 0, "term": 0,
              "maxGrowth": 0.05, "cap": 100000000},
    "counting": {"R": 10.0, "mu": 25, "center": [0, 0], "Rs": [],
                 "K": [50, 100, 200, 500], "alpha": 0.75, "sign": 1,
                 "maxSpread": 2.0, "kind": "A", "n": 0, "s": 0.6,
                 "Ns": [16, 32, 64, 128], "l": 0.0, "eps": 0.5, "N": 8,
                 "cubes": true, "blockEps": 0.25, "maxGrowth": 0.05,
                 "restarts": 4, "sweeps": 20}
  })");
}

// Field-level checks on the merged configuration.
void check_known(const json& cfg, const json& defaults, const std::string& path) {
  for (auto it = cfg.begin(); it != cfg.end(); ++it) {
    std::string p = path.empty() ? it.key() : path + "." + it.key();
    if (!defaults.contains(it.key())) throw ConfigError("unknown config field '" + p + "'");
    const json& d = defaults.at(it.key());
    if (d.is_object()) {
      if (!it->is_object()) throw ConfigError("config field '" + p + "' must be an object");
      check_known(*it, d, p);
    }
  }
}

std::string dotted(const std::string& ptr) {
  std::string s = ptr.substr(1);
  for (char& c : s)
    if (c == '/') c = '.';
  return s;
}

double num(const json& cfg, const std::string& ptr) {
  const json& v = cfg.at(json::json_pointer(ptr));
  if (!v.is_number()) throw ConfigError("config field '" + dotted(ptr) + "' must be a number");
  double x = v.get<double>();
  if (!std::isfinite(x)) throw ConfigError("config field '" + dotted(ptr) + "' must be finite");
  return x;
}

long long integer(const json& cfg, const std::string& ptr) {
  const json& v = cfg.at(json::json_pointer(ptr));
  if (!v.is_number_integer() &&
      !(v.is_number_float() && std::floor(v.get<double>()) == v.get<double>()))
    throw ConfigError("config field '" + dotted(ptr) + "' must be an integer");
  return v.is_number_integer() ? v.get<long long>() : static_cast<long long>(v.get<double>());
}

bool boolean(const json& cfg, const std::string& ptr) {
  const json& v = cfg.at(json::json_pointer(ptr));
  if (!v.is_boolean()) throw ConfigError("config field '" + dotted(ptr) + "' must be true or false");
  return v.get<bool>();
}

std::string str(const json& cfg, const std::string& ptr) {
  const json& v = cfg.at(json::json_pointer(ptr));
  if (!v.is_string()) throw ConfigError("config field '" + dotted(ptr) + "' must be a string");
  return v.get<std::string>();
}

std::vector<double> num_list(const json& cfg, const std::string& ptr) {
  const json& v = cfg.at(json::json_pointer(ptr));
  if (!v.is_array()) throw ConfigError("config field '" + dotted(ptr) + "' must be a list");
  std::vector<double> out;
  for (const auto& e : v) {
    if (!e.is_number()) throw ConfigError("config field '" + dotted(ptr) + "' must hold numbers");
    out.push_back(e.get<double>());
  }
  return out;
}

void require(bool ok, const std::string& ptr, const std::string& what) {
  if (!ok) throw ConfigError("config field '" + dotted(ptr) + "' " + what);
}

// Flag text to JSON: numbers, booleans and bracketed lists parse as JSON,
// comma-separated values become lists, anything else is a string.
json flag_value(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::exception&) {
  }
  if (text.find(',') != std::string::npos) {
    json arr = json::array();
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) arr.push_back(flag_value(item));
    return arr;
  }
  return text;
}

struct Flag {
  std::string name;
  std::string ptr;
  std::string help;
};

struct Command {
  std::string name;
  std::string help;
  std::vector<Flag> flags;
  std::function<json(json&, std::map<std::string, double>&, bool&)> run;
  CLI::App* app = nullptr;
  std::map<std::string, std::string> values;
};

const std::vector<Flag> kCommon = {
    {"equation", "/equation", "registry name: kdv, cnls1d, cnls2d, fnls, dnls, zakharov"},
    {"alpha", "/params/alpha", "fnls dispersion exponent"},
    {"sign", "/params/sign", "cubic sign (+1 defocusing, -1 focusing)"},
    {"N", "/lattice/N", "lattice half-width"},
    {"seed", "/seed", "Philox seed for random data"},
    {"threads", "/threads", "worker threads (0: hardware concurrency)"},
    {"out", "/output/dir", "directory for report and CSV files"},
};
const std::vector<Flag> kData = {
    {"norm", "/data/norm", "l2 norm of component 0 of the random data"},
    {"width", "/data/width", "Gaussian envelope width of the random data"},
    {"zero", "/data/zero", "use the zero state"},
    {"state", "/data/state", "read the initial state from a JSON file"},
};
const std::vector<Flag> kIntegrator = {
    {"dt", "/integrator/dt", "RK4 step"},
    {"T", "/integrator/T", "final time"},
    {"store-every", "/integrator/storeEvery", "sample stride"},
};
const std::vector<Flag> kRule = {
    {"case", "/rule/variant", "resonance rule: A or B"},
    {"M", "/rule/M", "resonance threshold"},
};

std::vector<Flag> join(std::initializer_list<std::vector<Flag>> parts) {
  std::vector<Flag> out;
  for (const auto& p : parts) out.insert(out.end(), p.begin(), p.end());
  return out;
}

struct Context {
  EquationSpec eq;
  TruncatedLattice lat;
  int threads = 1;
  std::string outDir;
};

EquationSpec make_equation(json& cfg) {
  std::string name = str(cfg, "/equation");
  auto names = registry_names();
  if (std::find(names.begin(), names.end(), name) == names.end())
    throw ConfigError("config field 'equation': unknown equation '" + name + "'");
  EquationParams p;
  p.alpha = num(cfg, "/params/alpha");
  p.sign = static_cast<int>(integer(cfg, "/params/sign"));
  require(p.sign == 1 || p.sign == -1, "/params/sign", "must be 1 or -1");
  if (name == "fnls")
    require(p.alpha > 0.5 && p.alpha < 1.0, "/params/alpha", "must lie in (1/2, 1)");
  return registry(name, p);
}

Context make_context(json& cfg) {
  Context ctx;
  ctx.eq = make_equation(cfg);
  long long N = integer(cfg, "/lattice/N");
  require(N >= 0 && N <= 4096, "/lattice/N", "must lie in [0, 4096]");
  ctx.lat = TruncatedLattice(ctx.eq.d, static_cast<int>(N));
  long long th = integer(cfg, "/threads");
  require(th >= 0 && th <= 1024, "/threads", "must lie in [0, 1024]");
  ctx.threads = th == 0 ? static_cast<int>(std::max(1u, std::thread::hardware_concurrency()))
                        : static_cast<int>(th);
  ctx.outDir = str(cfg, "/output/dir");
  if (cfg["estimate"]["s"].is_null()) cfg["estimate"]["s"] = ctx.eq.defaultS;
  num(cfg, "/estimate/s");
  return ctx;
}

IntegratorCfg make_integrator(const json& cfg) {
  IntegratorCfg ic;
  ic.dt = num(cfg, "/integrator/dt");
  ic.T = num(cfg, "/integrator/T");
  ic.storeEvery = static_cast<int>(integer(cfg, "/integrator/storeEvery"));
  require(ic.dt > 0, "/integrator/dt", "must be positive");
  require(ic.T > 0, "/integrator/T", "must be positive");
  require(ic.storeEvery >= 1, "/integrator/storeEvery", "must be >= 1");
  step_count(ic);
  return ic;
}

ResonanceRule make_rule(const json& cfg) {
  ResonanceRule r;
  std::string v = str(cfg, "/rule/variant");
  require(v == "A" || v == "B", "/rule/variant", "must be \"A\" or \"B\"");
  r.variant = v == "A" ? ResonanceCase::A : ResonanceCase::B;
  r.M = num(cfg, "/rule/M");
  require(r.M > 0, "/rule/M", "must be positive");
  return r;
}

// Validates the data block; the state itself is built after validation.
std::function<SeqState()> make_data(const json& cfg, const Context& ctx) {
  bool zero = boolean(cfg, "/data/zero");
  std::string path = str(cfg, "/data/state");
  double norm = num(cfg, "/data/norm");
  double width = num(cfg, "/data/width");
  long long seed = integer(cfg, "/seed");
  require(norm >= 0, "/data/norm", "must be >= 0");
  require(width > 0, "/data/width", "must be positive");
  require(seed >= 0, "/seed", "must be >= 0");
  require(!(zero && !path.empty()), "/data/zero", "conflicts with data.state");
  const EquationSpec* eq = &ctx.eq;
  TruncatedLattice lat = ctx.lat;
  return [=]() {
    if (zero) return SeqState(lat, eq->components);
    if (!path.empty()) {
      SeqState s = read_state(path);
      if (s.lattice() != lat || s.components() != eq->components)
        throw ConfigError("config field 'data.state': state does not match the lattice "
                          "and equation");
      return s;
    }
    return random_state(*eq, lat, norm, width, static_cast<std::uint64_t>(seed));
  };
}

std::string out_path(const Context& ctx, const std::string& file) {
  std::filesystem::create_directories(ctx.outDir);
  return (std::filesystem::path(ctx.outDir) / file).string();
}

void write_csv(const std::string& path, const std::string& header,
               const std::vector<std::vector<std::string>>& rows) {
  std::ostringstream os;
  os << header << "\n";
  for (const auto& r : rows) {
    for (std::size_t i = 0; i < r.size(); ++i) os << (i ? "," : "") << r[i];
    os << "\n";
  }
  write_text(path, os.str());
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

using Clock = std::chrono::steady_clock;

struct Phase {
  std::map<std::string, double>& timing;
  std::string name;
  Clock::time_point start = Clock::now();
  ~Phase() {
    timing[name] += std::chrono::duration<double>(Clock::now() - start).count();
  }
};

// ---------------------------------------------------------------- commands

json cmd_trees(json& cfg, std::map<std::string, double>& timing, bool& pass) {
  long long p = integer(cfg, "/trees/p"), J = integer(cfg, "/trees/J");
  long long cap = integer(cfg, "/trees/cap");
  long long comp = integer(cfg, "/trees/component");
  bool dump = boolean(cfg, "/trees/dump");
  require(J >= 1 && J <= 64, "/trees/J", "must lie in [1, 64]");
  require(cap >= 1, "/trees/cap", "must be >= 1");
  std::string outDir = str(cfg, "/output/dir");
  json res;
  std::vector<Tree> trees;
  bool system = comp >= 0;
  if (system) {
    Context ctx = make_context(cfg);
    require(comp < ctx.eq.components, "/trees/component", "out of range for the equation");
    Phase ph{timing, "enumerate"};
    trees = generation_trees(ctx.eq, static_cast<int>(comp), static_cast<int>(J),
                             static_cast<std::uint64_t>(cap));
    res["equation"] = ctx.eq.name;
    res["bound"] = system_tree_bound(ctx.eq.shape(), static_cast<int>(J));
  } else {
    require(p >= 2 && p <= 16, "/trees/p", "must lie in [2, 16]");
    Phase ph{timing, "enumerate"};
    trees = enumerate_trees(static_cast<int>(p), static_cast<int>(J),
                            static_cast<std::uint64_t>(cap));
    std::uint64_t expected = tree_count(static_cast<int>(p), static_cast<int>(J));
    res["expected"] = expected;
    pass = pass && trees.size() == expected;
    bool shapes = true;
    for (const auto& t : trees)
      shapes = shapes && t.J() == J && t.leaf_count() == (p - 1) * J + 1;
    res["leafNodeCountsExact"] = shapes;
    pass = pass && shapes;
  }
  res["count"] = trees.size();
  if (dump) {
    std::filesystem::create_directories(outDir);
    std::string path = (std::filesystem::path(outDir) / "trees_dump.json").string();
    write_text(path, trees_to_json(trees, system));
    res["dump"] = path;
  }
  return res;
}

json cmd_expand(json& cfg, std::map<std::string, double>& timing, bool&) {
  Context ctx = make_context(cfg);
  long long J = integer(cfg, "/nfr/J");
  long long comp = integer(cfg, "/trees/component");
  long long cap = integer(cfg, "/trees/cap");
  require(J >= 1 && J <= 64, "/nfr/J", "must lie in [1, 64]");
  if (comp < 0) comp = 0;
  require(comp < ctx.eq.components, "/trees/component", "out of range for the equation");
  Phase ph{timing, "expand"};
  std::string text = expand_json(ctx.eq, static_cast<int>(comp), static_cast<int>(J),
                                 static_cast<std::uint64_t>(cap));
  std::string path = out_path(ctx, "expand_terms.json");
  write_text(path, text);
  auto terms = expand_generation(ctx.eq, static_cast<int>(comp), static_cast<int>(J),
                                 static_cast<std::uint64_t>(cap));
  std::map<std::string, int> kinds;
  for (const auto& t : terms) ++kinds[term_kind_name(t.kind)];
  return {{"terms", terms.size()}, {"kinds", kinds}, {"file", path}};
}

json cmd_solve(json& cfg, std::map<std::string, double>& timing, bool&) {
  Context ctx = make_context(cfg);
  IntegratorCfg ic = make_integrator(cfg);
  auto data = make_data(cfg, ctx);
  double eps = num(cfg, "/estimate/epsilon"), alpha = num(cfg, "/estimate/alpha");
  double s = num(cfg, "/estimate/s");
  bool binary = boolean(cfg, "/output/binary");
  require(eps >= 0 && eps < 1, "/estimate/epsilon", "must lie in [0, 1)");
  require(alpha > 0, "/estimate/alpha", "must be positive");
  SeqState w0 = data();
  Trajectory traj;
  {
    Phase ph{timing, "integrate"};
    traj = eps > 0 ? solve_regularized(ctx.eq, w0, {eps, alpha}, ic) : solve(ctx.eq, w0, ic);
  }
  Phase ph{timing, "write"};
  std::vector<std::vector<std::string>> rows;
  double m0 = 0.0, drift = 0.0;
  for (std::size_t k = 0; k < traj.size(); ++k) {
    std::vector<std::string> row{fmt(traj.times[k])};
    double mass = 0.0;
    for (int c = 0; c < traj.states[k].components(); ++c) {
      double n = norm_l2s(traj.states[k], 0.0, c);
      mass += n * n;
      row.push_back(fmt(n));
    }
    row.push_back(fmt(norm_l2s_all(traj.states[k], s)));
    rows.push_back(row);
    if (k == 0) m0 = mass;
    drift = std::max(drift, std::abs(mass - m0));
  }
  std::string header = "t";
  for (int c = 0; c < ctx.eq.components; ++c) header += ",l2_c" + std::to_string(c);
  header += ",l2s_all";
  std::string csv = out_path(ctx, "solve_norms.csv");
  write_csv(csv, header, rows);
  std::string file = out_path(ctx, binary ? "trajectory.bin" : "trajectory.json");
  if (binary)
    write_trajectory_binary(file, traj);
  else
    write_text(file, trajectory_to_json(traj));
  return {{"samples", traj.size()}, {"maxMassDrift", drift}, {"csv", csv},
          {"trajectory", file}};
}

json cmd_residual(json& cfg, std::map<std::string, double>& timing, bool& pass) {
  Context ctx = make_context(cfg);
  IntegratorCfg ic = make_integrator(cfg);
  ResonanceRule rule = make_rule(cfg);
  auto data = make_data(cfg, ctx);
  long long Jmax = integer(cfg, "/nfr/J"), every = integer(cfg, "/nfr/every");
  long long comp = integer(cfg, "/nfr/component");
  double tol = num(cfg, "/nfr/tolerance"), s = num(cfg, "/estimate/s");
  double eps = num(cfg, "/estimate/epsilon"), alpha = num(cfg, "/estimate/alpha");
  require(Jmax >= 1 && Jmax <= 8, "/nfr/J", "must lie in [1, 8]");
  require(every >= 0, "/nfr/every", "must be >= 0");
  require(comp >= -1 && comp < ctx.eq.components, "/nfr/component", "out of range");
  require(tol >= 0, "/nfr/tolerance", "must be >= 0");
  require(eps >= 0 && eps < 1, "/estimate/epsilon", "must lie in [0, 1)");
  require(ic.T / ic.dt / ic.storeEvery >= 2.0 - 1e-9, "/integrator/T",
          "must leave at least three stored samples");
  SeqState w0 = data();
  Trajectory traj;
  {
    Phase ph{timing, "integrate"};
    traj = eps > 0 ? solve_regularized(ctx.eq, w0, {eps, alpha}, ic) : solve(ctx.eq, w0, ic);
  }
  GenerationOptions go;
  go.threads = ctx.threads;
  go.epsilon = eps;
  go.alpha = alpha;
  if (comp >= 0) go.components = {static_cast<int>(comp)};
  std::vector<std::size_t> samples;
  if (every == 0) {
    samples.push_back(traj.size() - 1);
  } else {
    for (std::size_t k = static_cast<std::size_t>(every); k < traj.size();
         k += static_cast<std::size_t>(every))
      if (k >= 2) samples.push_back(k);
  }
  std::vector<std::vector<std::string>> rows;
  json table = json::array();
  Phase ph{timing, "residual"};
  for (long long J = 1; J <= Jmax; ++J)
    for (std::size_t k : samples) {
      auto g = generation_equation(ctx.eq, rule, static_cast<int>(J), traj, k, go);
      double r = g.residual_norm(s);
      rows.push_back({std::to_string(J), fmt(g.t), fmt(r), fmt(g.boundary_norm(s)),
                      fmt(g.integral_norm(s)), fmt(g.quadrature_error(s))});
      table.push_back({{"J", J}, {"t", g.t}, {"residual", r},
                       {"quadratureError", g.quadrature_error(s)}});
      pass = pass && std::isfinite(r) && (tol == 0.0 || r <= tol);
      if (tol == 0.0 && w0.raw() == SeqState(w0.lattice(), w0.components()).raw())
        pass = pass && r == 0.0;
    }
  std::string csv = out_path(ctx, "residual.csv");
  write_csv(csv, "J,t,residual_l2s,boundary_norm,integral_norm,quadrature_err", rows);
  return {{"rows", table}, {"csv", csv}};
}

json cmd_limit_tail(json& cfg, std::map<std::string, double>& timing, bool& pass) {
  Context ctx = make_context(cfg);
  IntegratorCfg ic = make_integrator(cfg);
  ResonanceRule rule = make_rule(cfg);
  auto data = make_data(cfg, ctx);
  long long Jmax = integer(cfg, "/nfr/J"), comp = integer(cfg, "/nfr/component");
  std::string xn = str(cfg, "/nfr/xnorm");
  require(Jmax >= 1 && Jmax <= 8, "/nfr/J", "must lie in [1, 8]");
  require(xn == "l2s" || xn == "sup", "/nfr/xnorm", "must be \"l2s\" or \"sup\"");
  require(comp >= -1 && comp < ctx.eq.components, "/nfr/component", "out of range");
  TailOptions to;
  to.s = num(cfg, "/estimate/s");
  to.xnorm = xn == "l2s" ? XNorm::L2s : XNorm::WeightedSup;
  if (cfg["nfr"]["xs"].is_null()) cfg["nfr"]["xs"] = to.s;
  to.xs = num(cfg, "/nfr/xs");
  to.threads = ctx.threads;
  if (comp >= 0) to.components = {static_cast<int>(comp)};
  SeqState w0 = data();
  Trajectory traj;
  {
    Phase ph{timing, "integrate"};
    traj = solve(ctx.eq, w0, ic);
  }
  Phase ph{timing, "tail"};
  auto tail = limit_equation_tail(ctx.eq, rule, static_cast<int>(Jmax), traj,
                                  traj.size() - 1, to);
  std::vector<std::vector<std::string>> rows;
  json table = json::array();
  for (std::size_t i = 0; i < tail.size(); ++i) {
    const auto& e = tail[i];
    double ratio = i > 0 && tail[i - 1].top > 0 ? e.top / tail[i - 1].top : NAN;
    rows.push_back({std::to_string(e.j), fmt(e.boundary), fmt(e.resonant), fmt(e.remainder),
                    fmt(e.top), fmt(ratio)});
    table.push_back({{"j", e.j}, {"boundary", e.boundary}, {"resonant", e.resonant},
                     {"remainder", e.remainder}, {"top", e.top},
                     {"ratio", std::isfinite(ratio) ? json(ratio) : json(nullptr)}});
    pass = pass && std::isfinite(e.top);
  }
  std::string csv = out_path(ctx, "limit_tail.csv");
  write_csv(csv, "j,boundary,resonant,remainder,top,ratio", rows);
  return {{"rows", table}, {"csv", csv}};
}

json cmd_verify_estimate(json& cfg, std::map<std::string, double>& timing, bool& pass) {
  Context ctx = make_context(cfg);
  double s = num(cfg, "/estimate/s");
  auto Ns = num_list(cfg, "/sweep/Ns");
  long long comp = integer(cfg, "/sweep/component"), term = integer(cfg, "/sweep/term");
  double maxGrowth = num(cfg, "/sweep/maxGrowth");
  long long cap = integer(cfg, "/sweep/cap");
  require(!Ns.empty(), "/sweep/Ns", "must not be empty");
  for (double n : Ns) require(n >= 1 && std::floor(n) == n, "/sweep/Ns", "must hold integers >= 1");
  require(comp >= 0 && comp < ctx.eq.components, "/sweep/component", "out of range");
  require(term >= 0 && term < static_cast<long long>(ctx.eq.terms[comp].size()),
          "/sweep/term", "out of range");
  require(cap >= 1, "/sweep/cap", "must be >= 1");
  EstimateParams ep;
  ep.s = s;
  if (!cfg["estimate"]["s1"].is_null() || !cfg["estimate"]["s2"].is_null()) {
    ep.s1 = num(cfg, "/estimate/s1");
    ep.s2 = num(cfg, "/estimate/s2");
    ep.delta = num(cfg, "/estimate/delta");
    ep.validate();
  }
  Phase ph{timing, "sweep"};
  std::vector<std::vector<std::string>> rows;
  std::vector<double> xs, ys;
  json table = json::array();
  for (double n : Ns) {
    auto r = sup_weight_A1(ctx.eq, static_cast<int>(comp), static_cast<int>(term), s,
                           static_cast<int>(n), LoopOrder::OutputFirst,
                           static_cast<std::uint64_t>(cap));
    rows.push_back({std::to_string(r.N), fmt(r.supValue), r.argmax.str()});
    table.push_back({{"N", r.N}, {"supValue", r.supValue}, {"argmax", r.argmax.str()}});
    xs.push_back(n);
    ys.push_back(r.supValue);
  }
  std::string csv = out_path(ctx, "verify_estimate.csv");
  write_csv(csv, "N,supValue,argmax", rows);
  json res{{"rows", table}, {"csv", csv}};
  if (ys.size() >= 2 && ys[ys.size() - 2] > 0) {
    double g = last_growth(ys);
    res["lastGrowth"] = g;
    res["fittedExponent"] = fit_power_exponent(xs, ys);
    pass = pass && g <= maxGrowth;
  }
  return res;
}

json cmd_counting(const std::string& mode, json& cfg, std::map<std::string, double>& timing,
                  bool& pass) {
  std::string outDir = str(cfg, "/output/dir");
  std::filesystem::create_directories(outDir);
  auto path = [&](const std::string& f) {
    return (std::filesystem::path(outDir) / f).string();
  };
  Phase ph{timing, "count"};
  json res;
  if (mode == "circle") {
    auto Rs = num_list(cfg, "/counting/Rs");
    for (double R : Rs) require(R > 1, "/counting/Rs", "must hold radii > 1");
    if (Rs.empty()) {
      double R = num(cfg, "/counting/R");
      long long mu = integer(cfg, "/counting/mu");
      auto c = num_list(cfg, "/counting/center");
      require(R > 1, "/counting/R", "must exceed 1");
      require(mu >= 0, "/counting/mu", "must be >= 0");
      require(c.size() == 2, "/counting/center", "must have two coordinates");
      Freq center{static_cast<int>(c[0]), static_cast<int>(c[1])};
      long long a = circle_count(center, mu, R);
      long long b = circle_count_scan(center, mu, R, center);
      res = {{"R", R}, {"mu", mu}, {"count", a}, {"pathsAgree", a == b}};
      pass = pass && a == b;
    } else {
      std::vector<std::vector<std::string>> rows;
      std::vector<double> ys;
      for (double R : Rs) {
        auto m = max_circle_count(R);
        rows.push_back({fmt(R), std::to_string(m.count), std::to_string(m.mu)});
        ys.push_back(static_cast<double>(m.count));
      }
      write_csv(path("circle_sweep.csv"), "R,maxCount,mu", rows);
      res = {{"Rs", Rs}, {"maxCounts", ys}, {"csv", path("circle_sweep.csv")}};
      if (Rs.size() >= 2) res["fittedExponent"] = fit_power_exponent(Rs, ys);
    }
  } else if (mode == "fnls") {
    auto Ks = num_list(cfg, "/counting/K");
    double alpha = num(cfg, "/counting/alpha"), spread = num(cfg, "/counting/maxSpread");
    long long sign = integer(cfg, "/counting/sign");
    require(!Ks.empty(), "/counting/K", "must not be empty");
    for (double K : Ks) require(K >= 1 && std::floor(K) == K, "/counting/K", "must hold integers >= 1");
    require(alpha > 0.5 && alpha < 1, "/counting/alpha", "must lie in (1/2, 1)");
    require(sign == 1 || sign == -1, "/counting/sign", "must be 1 or -1");
    std::vector<std::vector<std::string>> rows;
    double lo = INFINITY, hi = 0;
    json table = json::array();
    for (double K : Ks) {
      auto m = fnls_max_count(static_cast<int>(K), alpha, static_cast<int>(sign));
      double norm = static_cast<double>(m.count) / std::pow(K, 1 - alpha);
      lo = std::min(lo, norm);
      hi = std::max(hi, norm);
      rows.push_back({std::to_string(m.K), std::to_string(m.count), std::to_string(m.kStar),
                      std::to_string(m.muStar), fmt(norm)});
      table.push_back({{"K", m.K}, {"count", m.count}, {"kStar", m.kStar},
                       {"muStar", m.muStar}, {"normalized", norm}});
    }
    write_csv(path("fnls_counts.csv"), "K,maxCount,kStar,muStar,normalized", rows);
    res = {{"rows", table}, {"spread", hi / lo}, {"csv", path("fnls_counts.csv")}};
    pass = pass && hi / lo <= spread;
  } else if (mode == "dnls") {
    double s = num(cfg, "/counting/s"), maxGrowth = num(cfg, "/counting/maxGrowth");
    long long n = integer(cfg, "/counting/n");
    std::string kind = str(cfg, "/counting/kind");
    auto Ns = num_list(cfg, "/counting/Ns");
    require(s > 0.5 && s < 1, "/counting/s", "must lie in (1/2, 1)");
    require(kind == "A" || kind == "C", "/counting/kind", "must be \"A\" or \"C\"");
    require(!Ns.empty(), "/counting/Ns", "must not be empty");
    std::vector<std::vector<std::string>> rows;
    std::vector<double> ys;
    for (double N : Ns) {
      double v = dnls_case_sums(s, kind == "A" ? DnlsSum::A : DnlsSum::C,
                                static_cast<int>(n), static_cast<int>(N));
      rows.push_back({fmt(N), fmt(v)});
      ys.push_back(v);
    }
    write_csv(path("dnls_sums.csv"), "N,value", rows);
    res = {{"Ns", Ns}, {"values", ys}, {"csv", path("dnls_sums.csv")}};
    if (ys.size() >= 2 && ys[ys.size() - 2] > 0) {
      res["lastGrowth"] = last_growth(ys);
      pass = pass && last_growth(ys) <= maxGrowth;
    }
  } else if (mode == "zakharov") {
    double s = num(cfg, "/counting/s"), l = num(cfg, "/counting/l");
    double eps = num(cfg, "/counting/eps"), maxGrowth = num(cfg, "/counting/maxGrowth");
    auto Ns = num_list(cfg, "/counting/Ns");
    require(!Ns.empty(), "/counting/Ns", "must not be empty");
    std::vector<std::vector<std::string>> rows;
    json table = json::array();
    std::vector<double> c1, c2;
    for (double N : Ns) {
      auto r = zakharov_weight_check(s, l, eps, static_cast<int>(N));
      double z = *std::max_element(r.maxOnZero.begin(), r.maxOnZero.end());
      rows.push_back({fmt(N), fmt(z), fmt(r.maxOnLines), fmt(r.c1), fmt(r.c2),
                      fmt(r.lineMin), fmt(r.lineMax), fmt(r.factorMin), fmt(r.factorMax)});
      table.push_back({{"N", N}, {"maxOnZero", z}, {"maxOnLines", r.maxOnLines},
                       {"c1", r.c1}, {"c2", r.c2}, {"lineMin", r.lineMin},
                       {"lineMax", r.lineMax}, {"factorMin", r.factorMin},
                       {"factorMax", r.factorMax}, {"triples", r.triples}});
      c1.push_back(r.c1);
      c2.push_back(r.c2);
    }
    write_csv(path("zakharov_weights.csv"),
              "N,max_on_zero,max_on_lines,c1,c2,line_min,line_max,factor_min,factor_max", rows);
    res = {{"rows", table}, {"csv", path("zakharov_weights.csv")}};
    if (c1.size() >= 2) {
      res["growthC1"] = last_growth(c1);
      res["growthC2"] = last_growth(c2);
      pass = pass && last_growth(c1) <= maxGrowth && last_growth(c2) <= maxGrowth;
    }
  } else if (mode == "blocks") {
    long long N = integer(cfg, "/counting/N");
    double eps = num(cfg, "/counting/blockEps");
    bool cubes = boolean(cfg, "/counting/cubes");
    require(N >= 1, "/counting/N", "must be >= 1");
    auto r = cnls_block_sweep(static_cast<int>(N), eps, cubes);
    res = {{"N", r.N}, {"worst", r.worst}, {"worstDyads", r.worstDyads},
           {"worstMu", r.worstMu}, {"worstA", r.worstA}, {"worstB", r.worstB}};
  } else if (mode == "bprobe") {
    EquationSpec eq = make_equation(cfg);
    long long N = integer(cfg, "/counting/N");
    double s = num(cfg, "/counting/s");
    long long comp = integer(cfg, "/sweep/component"), term = integer(cfg, "/sweep/term");
    ProbeOptions po;
    po.restarts = static_cast<int>(integer(cfg, "/counting/restarts"));
    po.sweeps = static_cast<int>(integer(cfg, "/counting/sweeps"));
    po.seed = static_cast<std::uint64_t>(integer(cfg, "/seed"));
    require(N >= 1 && N <= 64, "/counting/N", "must lie in [1, 64]");
    require(comp >= 0 && comp < eq.components, "/sweep/component", "out of range");
    require(term >= 0 && term < static_cast<long long>(eq.terms[comp].size()), "/sweep/term",
            "out of range");
    require(po.restarts >= 1, "/counting/restarts", "must be >= 1");
    require(po.sweeps >= 1, "/counting/sweeps", "must be >= 1");
    std::vector<std::vector<std::string>> rows;
    BinProbe worst;
    bool bracketed = true;
    for (long long mu : realized_bins(eq, static_cast<int>(comp), static_cast<int>(term),
                                      static_cast<int>(N))) {
      auto b = bin_operator_probe(eq, static_cast<int>(comp), static_cast<int>(term), s,
                                  static_cast<int>(N), mu, po);
      rows.push_back({std::to_string(b.mu), std::to_string(b.tuples), fmt(b.estimate),
                      fmt(b.lower), fmt(b.upper)});
      bracketed = bracketed && b.estimate >= b.lower * (1.0 - 1e-12) &&
                  b.estimate <= b.upper * (1.0 + 1e-12);
      if (b.estimate > worst.estimate) worst = b;
    }
    write_csv(path("bprobe.csv"), "mu,tuples,estimate,lower,upper", rows);
    res = {{"bins", rows.size()}, {"worstMu", worst.mu}, {"worstEstimate", worst.estimate},
           {"worstLower", worst.lower}, {"worstUpper", worst.upper},
           {"bracketed", bracketed}, {"csv", path("bprobe.csv")}};
    pass = pass && bracketed;
  }
  return res;
}

json cmd_uniqueness(json& cfg, std::map<std::string, double>& timing, bool& pass) {
  Context ctx = make_context(cfg);
  IntegratorCfg ic = make_integrator(cfg);
  auto data = make_data(cfg, ctx);
  double pert = num(cfg, "/data/perturbation"), s = num(cfg, "/estimate/s");
  double maxRatio = num(cfg, "/uniqueness/maxRatio");
  long long seed = integer(cfg, "/seed");
  require(pert >= 0, "/data/perturbation", "must be >= 0");
  SeqState w0 = data();
  SeqState v0 = w0;
  if (pert > 0) {
    SeqState d = random_state(ctx.eq, ctx.lat, pert, num(cfg, "/data/width"),
                              static_cast<std::uint64_t>(seed), 1);
    v0 += d;
  }
  Phase ph{timing, "integrate"};
  auto rep = uniqueness_gap(ctx.eq, w0, v0, s, ic);
  std::vector<std::vector<std::string>> rows;
  for (const auto& g : rep.perTime) rows.push_back({fmt(g.t), fmt(g.gap), fmt(g.ratio)});
  std::string csv = out_path(ctx, "uniqueness.csv");
  write_csv(csv, "t,gap,ratio", rows);
  json res{{"initialGap", rep.initialGap}, {"supGap", rep.supGap}, {"csv", csv}};
  if (std::isfinite(rep.supRatio)) {
    res["supRatio"] = rep.supRatio;
    pass = pass && rep.supRatio <= maxRatio;
  } else {
    res["supRatio"] = nullptr;
    pass = pass && rep.supGap <= 1e-10;
  }
  return res;
}

json cmd_weaklimit(json& cfg, std::map<std::string, double>& timing, bool& pass) {
  Context ctx = make_context(cfg);
  IntegratorCfg ic = make_integrator(cfg);
  auto data = make_data(cfg, ctx);
  double s = num(cfg, "/estimate/s"), alpha = num(cfg, "/estimate/alpha");
  auto eps = num_list(cfg, "/weaklimit/eps");
  require(!eps.empty(), "/weaklimit/eps", "must not be empty");
  for (double e : eps) require(e > 0 && e < 1, "/weaklimit/eps", "must hold values in (0, 1)");
  for (std::size_t i = 1; i < eps.size(); ++i)
    require(eps[i] <= eps[i - 1], "/weaklimit/eps", "must be non-increasing");
  require(alpha > 0, "/estimate/alpha", "must be positive");
  SeqState w0 = data();
  Phase ph{timing, "integrate"};
  auto rep = weak_limit_experiment(ctx.eq, w0, s, alpha, eps, ic);
  std::vector<std::vector<std::string>> rows;
  json runs = json::array(), pairs = json::array();
  for (const auto& r : rep.runs) {
    rows.push_back({fmt(r.epsilon), fmt(r.cutoff), fmt(r.initialNorm), fmt(r.supNorm),
                    fmt(r.supNormHigh), r.aprioriOk ? "1" : "0"});
    runs.push_back({{"epsilon", r.epsilon}, {"cutoff", r.cutoff},
                    {"initialNorm", r.initialNorm}, {"supNorm", r.supNorm},
                    {"supNormHigh", r.supNormHigh}, {"aprioriOk", r.aprioriOk}});
  }
  for (const auto& p : rep.pairs)
    pairs.push_back({{"i", p.i}, {"j", p.j}, {"distance", p.distance}, {"bound", p.bound},
                     {"ok", p.ok}});
  std::string csv = out_path(ctx, "weaklimit.csv");
  write_csv(csv, "epsilon,cutoff,initial_norm,sup_norm,sup_norm_high,apriori_ok", rows);
  pass = pass && rep.aprioriOk && rep.cauchyOk;
  return {{"runs", runs}, {"pairs", pairs}, {"aprioriOk", rep.aprioriOk},
          {"cauchyOk", rep.cauchyOk}, {"distancesDecreasing", rep.distancesDecreasing},
          {"csv", csv}};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Normal form reduction laboratory"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);
  std::string configPath;
  app.add_option("--config", configPath, "JSON experiment configuration");

  std::vector<Command> cmds;
  cmds.push_back({"trees", "enumerate ordered (or system) trees",
                  join({kCommon,
                        {{"p", "/trees/p", "arity"},
                         {"J", "/trees/J", "number of nodes"},
                         {"cap", "/trees/cap", "enumeration cap"},
                         {"component", "/trees/component",
                          "root component of system trees of --equation (-1: ordered trees)"},
                         {"dump", "/trees/dump", "write trees_dump.json"}}}),
                  cmd_trees});
  cmds.push_back({"expand", "symbolic terms of generation J",
                  join({kCommon,
                        {{"J", "/nfr/J", "generation"},
                         {"component", "/trees/component", "root component"},
                         {"cap", "/trees/cap", "enumeration cap"}}}),
                  cmd_expand});
  cmds.push_back({"solve", "integrate the truncated system",
                  join({kCommon, kData, kIntegrator,
                        {{"s", "/estimate/s", "weight of the l2s column"},
                         {"epsilon", "/estimate/epsilon", "regularization strength"},
                         {"reg-alpha", "/estimate/alpha", "regularization exponent"},
                         {"binary", "/output/binary", "binary trajectory file"}}}),
                  cmd_solve});
  cmds.push_back({"residual", "generation-J identity residuals",
                  join({kCommon, kData, kIntegrator, kRule,
                        {{"J", "/nfr/J", "largest generation"},
                         {"s", "/estimate/s", "norm weight"},
                         {"component", "/nfr/component", "root component (-1: all)"},
                         {"every", "/nfr/every", "evaluate every k-th sample (0: last only)"},
                         {"tolerance", "/nfr/tolerance", "assert residual <= tolerance"},
                         {"epsilon", "/estimate/epsilon", "regularization strength"},
                         {"reg-alpha", "/estimate/alpha", "regularization exponent"}}}),
                  cmd_residual});
  cmds.push_back({"limit-tail", "per-generation norms of the limit equation",
                  join({kCommon, kData, kIntegrator, kRule,
                        {{"J", "/nfr/J", "largest generation"},
                         {"s", "/estimate/s", "l2s weight"},
                         {"component", "/nfr/component", "root component (-1: all)"},
                         {"xnorm", "/nfr/xnorm", "norm of the top term: l2s or sup"},
                         {"xs", "/nfr/xs", "weight of the top-term norm"}}}),
                  cmd_limit_tail});
  cmds.push_back({"verify-estimate", "sup-weight sweep for one term",
                  join({kCommon,
                        {{"s", "/estimate/s", "weight exponent"},
                         {"s1", "/estimate/s1", "lower exponent"},
                         {"s2", "/estimate/s2", "upper exponent"},
                         {"delta", "/estimate/delta", "smoothing gain"},
                         {"Ns", "/sweep/Ns", "lattice sizes"},
                         {"component", "/sweep/component", "component"},
                         {"term", "/sweep/term", "term index"},
                         {"max-growth", "/sweep/maxGrowth", "allowed last growth"},
                         {"cap", "/sweep/cap", "tuple cap"}}}),
                  cmd_verify_estimate});
  cmds.push_back({"uniqueness", "gap between two nearby solutions",
                  join({kCommon, kData, kIntegrator,
                        {{"s", "/estimate/s", "norm weight"},
                         {"perturbation", "/data/perturbation", "size of the perturbation"},
                         {"max-ratio", "/uniqueness/maxRatio", "asserted ratio bound"}}}),
                  cmd_uniqueness});
  cmds.push_back({"weaklimit", "regularized epsilon sweep",
                  join({kCommon, kData, kIntegrator,
                        {{"s", "/estimate/s", "norm weight"},
                         {"reg-alpha", "/estimate/alpha", "regularization exponent"},
                         {"eps", "/weaklimit/eps", "epsilon list"}}}),
                  cmd_weaklimit});

  for (auto& c : cmds) {
    c.app = app.add_subcommand(c.name, c.help);
    for (const auto& f : c.flags) c.app->add_option("--" + f.name, c.values[f.ptr], f.help);
  }

  CLI::App* counting = app.add_subcommand("counting", "lattice counting verifiers");
  counting->require_subcommand(1);
  const std::vector<std::pair<std::string, std::vector<Flag>>> modes = {
      {"circle",
       {{"R", "/counting/R", "ball radius"}, {"mu", "/counting/mu", "squared radius"},
        {"center", "/counting/center", "center x,y"},
        {"Rs", "/counting/Rs", "radii for the maximum-count sweep"}}},
      {"fnls",
       {{"K", "/counting/K", "K values"}, {"alpha", "/counting/alpha", "exponent"},
        {"sign", "/counting/sign", "+1 or -1"},
        {"max-spread", "/counting/maxSpread", "allowed max/min ratio"}}},
      {"dnls",
       {{"s", "/counting/s", "weight"}, {"kind", "/counting/kind", "A or C"},
        {"n", "/counting/n", "output frequency"}, {"Ns", "/counting/Ns", "lattice sizes"},
        {"max-growth", "/counting/maxGrowth", "allowed last growth"}}},
      {"zakharov",
       {{"s", "/counting/s", "s"}, {"l", "/counting/l", "l"}, {"eps", "/counting/eps", "eps"},
        {"Ns", "/counting/Ns", "lattice sizes"},
        {"max-growth", "/counting/maxGrowth", "allowed last growth"}}},
      {"blocks",
       {{"N", "/counting/N", "lattice size (<= 64)"},
        {"eps", "/counting/blockEps", "exponent of the normalisation"},
        {"cubes", "/counting/cubes", "cube refinement"}}},
      {"bprobe",
       {{"equation", "/equation", "equation name"}, {"N", "/counting/N", "lattice size (<= 64)"},
        {"s", "/counting/s", "weight exponent"}, {"component", "/sweep/component", "component"},
        {"term", "/sweep/term", "term index"}, {"restarts", "/counting/restarts", "random starts"},
        {"sweeps", "/counting/sweeps", "passes over the input slots"}}},
  };
  std::map<std::string, std::map<std::string, std::string>> modeValues;
  std::map<std::string, CLI::App*> modeApps;
  std::map<std::string, std::vector<Flag>> modeFlags;
  for (const auto& [name, flags] : modes) {
    CLI::App* sub = counting->add_subcommand(name, name + " counts");
    auto all = join({{{"seed", "/seed", "unused seed (echoed)"},
                      {"threads", "/threads", "worker threads"},
                      {"out", "/output/dir", "output directory"}},
                     flags});
    modeFlags[name] = all;
    for (const auto& f : all)
      sub->add_option("--" + f.name, modeValues[name][f.ptr], f.help);
    modeApps[name] = sub;
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  auto started = Clock::now();
  std::string subName;
  try {
    json defaults = default_config();
    json cfg = defaults;
    if (!configPath.empty()) {
      json file;
      try {
        file = json::parse(read_text(configPath));
      } catch (const json::exception& e) {
        throw ConfigError("config file: " + std::string(e.what()));
      }
      if (!file.is_object()) throw ConfigError("config file must hold a JSON object");
      check_known(file, defaults, "");
      cfg.merge_patch(file);
    }
    auto apply = [&](CLI::App* sub, const std::vector<Flag>& flags,
                     std::map<std::string, std::string>& values) {
      for (const auto& f : flags)
        if (sub->count("--" + f.name) > 0)
          cfg[json::json_pointer(f.ptr)] = flag_value(values[f.ptr]);
    };
    std::function<json(json&, std::map<std::string, double>&, bool&)> runner;
    for (auto& c : cmds)
      if (c.app->parsed()) {
        subName = c.name;
        apply(c.app, c.flags, c.values);
        runner = c.run;
      }
    if (counting->parsed())
      for (auto& [name, sub] : modeApps)
        if (sub->parsed()) {
          subName = "counting-" + name;
          apply(sub, modeFlags[name], modeValues[name]);
          std::string mode = name;
          runner = [mode](json& c, std::map<std::string, double>& t, bool& p) {
            return cmd_counting(mode, c, t, p);
          };
        }
    integer(cfg, "/seed");
    integer(cfg, "/threads");

    std::map<std::string, double> timing;
    bool pass = true;
    json results = runner(cfg, timing, pass);

    json report;
    report["subcommand"] = subName;
    report["config"] = cfg;
    report["environment"] = {
        {"version", kVersion},
        {"threads", cfg["threads"]},
        {"hardwareThreads", std::thread::hardware_concurrency()},
        {"isa", kernels::isa_name(kernels::active_isa())},
        {"compiler", __VERSION__}};
    timing["total"] = std::chrono::duration<double>(Clock::now() - started).count();
    report["timing"] = timing;
    report["results"] = results;
    report["pass"] = pass;
    std::string dir = cfg["output"]["dir"].get<std::string>();
    std::filesystem::create_directories(dir);
    write_text((std::filesystem::path(dir) / (subName + ".json")).string(), report.dump(2));
    std::cout << report.dump(2) << std::endl;
    return pass ? 0 : 1;
  } catch (const CapError& e) {
    std::cerr << "cap exceeded (size " << e.size() << "): " << e.what() << std::endl;
    return 3;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << std::endl;
    return 2;
  } catch (const ContractError& e) {
    std::cerr << "config error: " << e.what() << std::endl;
    return 2;
  } catch (const InvariantError& e) {
    std::cerr << "invariant failure: " << e.what() << std::endl;
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << std::endl;
    return 1;
  }
}
