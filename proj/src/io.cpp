#include "nfrlab/io.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "nfrlab/error.hpp"

namespace nfrlab {

using nlohmann::json;

namespace {

json state_json(const SeqState& s) {
  json data = json::array();
  for (const cd& v : s.raw()) data.push_back({v.real(), v.imag()});
  return {{"d", s.lattice().d()},
          {"N", s.lattice().N()},
          {"components", s.components()},
          {"data", std::move(data)}};
}

SeqState state_parse(const json& j) {
  try {
    int d = j.at("d").get<int>(), N = j.at("N").get<int>();
    int c = j.at("components").get<int>();
    if (d < 1 || d > kMaxDim || N < 0 || c < 1)
      throw ConfigError("state: invalid d, N or components");
    SeqState s(TruncatedLattice(d, N), c);
    const json& data = j.at("data");
    if (data.size() != s.raw().size())
      throw ConfigError("state: data has " + std::to_string(data.size()) +
                        " entries, expected " + std::to_string(s.raw().size()));
    for (std::size_t i = 0; i < data.size(); ++i)
      s.raw()[i] = cd(data[i].at(0).get<double>(), data[i].at(1).get<double>());
    if (!s.all_finite()) throw ConfigError("state: non-finite entries");
    return s;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("state: ") + e.what());
  }
}

template <class T>
void put(std::ostream& os, T v) {
  static_assert(std::is_trivially_copyable_v<T>);
  unsigned char b[sizeof(T)];
  std::memcpy(b, &v, sizeof(T));
  if constexpr (std::endian::native == std::endian::big)
    for (std::size_t i = 0; i < sizeof(T) / 2; ++i) std::swap(b[i], b[sizeof(T) - 1 - i]);
  os.write(reinterpret_cast<const char*>(b), sizeof(T));
}

template <class T>
T get(std::istream& is) {
  unsigned char b[sizeof(T)];
  if (!is.read(reinterpret_cast<char*>(b), sizeof(T)))
    throw ConfigError("binary trajectory: truncated file");
  if constexpr (std::endian::native == std::endian::big)
    for (std::size_t i = 0; i < sizeof(T) / 2; ++i) std::swap(b[i], b[sizeof(T) - 1 - i]);
  T v;
  std::memcpy(&v, b, sizeof(T));
  return v;
}

json tree_json(const Tree& t, bool system) {
  json arr = json::array();
  for (int e = 0; e < t.element_count(); ++e) {
    json el;
    if (t.is_leaf(e))
      el["label"] = nullptr;
    else
      el["label"] = t.label(e);
    if (t.parent(e) < 0) {
      el["parentLabelOrNull"] = nullptr;
      el["childSlot"] = nullptr;
    } else {
      el["parentLabelOrNull"] = t.label(t.parent(e));
      el["childSlot"] = t.slot(e);
    }
    if (system) {
      el["componentIndex"] = t.component(e);
      if (t.is_leaf(e))
        el["termIndex"] = nullptr;
      else
        el["termIndex"] = t.term(e);
    }
    arr.push_back(std::move(el));
  }
  return arr;
}

}  // namespace

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path);
  out << text;
  if (!out) throw ConfigError("write failed for " + path);
}

std::string state_to_json(const SeqState& state) { return state_json(state).dump(); }

SeqState state_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("state: ") + e.what());
  }
  return state_parse(j);
}

void write_state(const std::string& path, const SeqState& state) {
  write_text(path, state_to_json(state));
}

SeqState read_state(const std::string& path) { return state_from_json(read_text(path)); }

std::string trajectory_to_json(const Trajectory& traj) {
  json states = json::array();
  for (const auto& s : traj.states) states.push_back(state_json(s));
  json j{{"equation", traj.equation},
         {"dt", traj.dt},
         {"times", traj.times},
         {"states", std::move(states)}};
  return j.dump();
}

Trajectory trajectory_from_json(const std::string& text) {
  try {
    json j = json::parse(text);
    Trajectory t;
    t.equation = j.at("equation").get<std::string>();
    t.dt = j.at("dt").get<double>();
    t.times = j.at("times").get<std::vector<double>>();
    for (const auto& s : j.at("states")) t.states.push_back(state_parse(s));
    if (t.times.size() != t.states.size())
      throw ConfigError("trajectory: times and states differ in length");
    return t;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("trajectory: ") + e.what());
  }
}

void write_trajectory_binary(const std::string& path, const Trajectory& traj) {
  if (traj.states.empty()) throw ContractError("empty trajectory");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path);
  out.write("NFRT", 4);
  put<std::uint32_t>(out, 1);
  const auto& lat = traj.lattice();
  put<std::int32_t>(out, lat.d());
  put<std::int32_t>(out, lat.N());
  put<std::int32_t>(out, traj.states.front().components());
  put<std::uint64_t>(out, traj.size());
  put<double>(out, traj.dt);
  std::uint32_t nameLen = static_cast<std::uint32_t>(traj.equation.size());
  put<std::uint32_t>(out, nameLen);
  out.write(traj.equation.data(), nameLen);
  for (std::size_t k = 0; k < traj.size(); ++k) {
    put<double>(out, traj.times[k]);
    for (const cd& v : traj.states[k].raw()) {
      put<double>(out, v.real());
      put<double>(out, v.imag());
    }
  }
  if (!out) throw ConfigError("write failed for " + path);
}

Trajectory read_trajectory_binary(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open " + path);
  char magic[4];
  if (!in.read(magic, 4) || std::memcmp(magic, "NFRT", 4) != 0)
    throw ConfigError("binary trajectory: bad magic in " + path);
  if (get<std::uint32_t>(in) != 1) throw ConfigError("binary trajectory: unknown version");
  int d = get<std::int32_t>(in), N = get<std::int32_t>(in), c = get<std::int32_t>(in);
  auto steps = get<std::uint64_t>(in);
  if (d < 1 || d > kMaxDim || N < 0 || c < 1)
    throw ConfigError("binary trajectory: invalid header");
  Trajectory t;
  t.dt = get<double>(in);
  auto nameLen = get<std::uint32_t>(in);
  if (nameLen > 256) throw ConfigError("binary trajectory: invalid header");
  t.equation.resize(nameLen);
  if (!in.read(t.equation.data(), nameLen))
    throw ConfigError("binary trajectory: truncated file");
  TruncatedLattice lat(d, N);
  for (std::uint64_t k = 0; k < steps; ++k) {
    t.times.push_back(get<double>(in));
    SeqState s(lat, c);
    for (cd& v : s.raw()) {
      double re = get<double>(in);
      double im = get<double>(in);
      v = cd(re, im);
    }
    t.states.push_back(std::move(s));
  }
  return t;
}

std::string tree_to_json(const Tree& tree, bool system) {
  return tree_json(tree, system).dump();
}

std::string trees_to_json(const std::vector<Tree>& trees, bool system) {
  json arr = json::array();
  for (const auto& t : trees) arr.push_back(tree_json(t, system));
  return arr.dump(1);
}

}  // namespace nfrlab
