#pragma once

#include <string>
#include <vector>

#include "nfrlab/dynamics.hpp"
#include "nfrlab/lattice.hpp"
#include "nfrlab/trees.hpp"

namespace nfrlab {

// {"d", "N", "components", "data": [[re, im], ...]} with component-major data.
// Doubles are written with 17 significant digits, so reading back is exact.
std::string state_to_json(const SeqState& state);
SeqState state_from_json(const std::string& text);

void write_state(const std::string& path, const SeqState& state);
SeqState read_state(const std::string& path);

// {"equation", "dt", "times", "states": [state, ...]}.
std::string trajectory_to_json(const Trajectory& traj);
Trajectory trajectory_from_json(const std::string& text);

// Little-endian binary: magic "NFRT", uint32 version, int32 d, N, c, uint64
// steps, float64 dt, then per step a float64 time and the state's
// (re, im) float64 pairs.
void write_trajectory_binary(const std::string& path, const Trajectory& traj);
Trajectory read_trajectory_binary(const std::string& path);

// [{"label", "parentLabelOrNull", "childSlot"}, ...] per element in creation
// order.  Leaves have a null label, the root has null parent and slot.  With
// `system` each element also carries "componentIndex" and "termIndex" (null
// on leaves).
std::string tree_to_json(const Tree& tree, bool system = false);
std::string trees_to_json(const std::vector<Tree>& trees, bool system = false);

std::string read_text(const std::string& path);
void write_text(const std::string& path, const std::string& text);

}  // namespace nfrlab
