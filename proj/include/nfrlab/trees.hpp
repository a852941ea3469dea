#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "nfrlab/lattice.hpp"

namespace nfrlab {

constexpr std::uint64_t kDefaultTreeCap = 1'000'000;

// A rooted tree whose internal nodes carry labels 1..J in creation order and
// whose children are ordered.  Elements are stored in creation order with the
// root at index 0.  For an ordered p-ary tree every node has p children,
// component() is 0 everywhere and term() is 0 on nodes.  A system tree
// additionally records the component of every element and the term chosen at
// every node; the arity of a node is the input count of that term.
class Tree {
 public:
  // Single node (label 1) with `arity` leaf children.
  static Tree root(int arity, int rootComponent = 0, int rootTerm = 0,
                   const std::vector<int>& childComponents = {});

  int J() const { return static_cast<int>(nodes_.size()); }
  int element_count() const { return static_cast<int>(parent_.size()); }
  int leaf_count() const { return element_count() - J(); }
  // Uniform arity of an ordered tree, 0 for mixed arity.
  int p() const { return p_; }

  int parent(int e) const { return parent_[e]; }
  int slot(int e) const { return slot_[e]; }
  int label(int e) const { return label_[e]; }
  bool is_leaf(int e) const { return label_[e] == 0; }
  int component(int e) const { return component_[e]; }
  int term(int e) const { return term_[e]; }
  const std::vector<int>& children(int e) const { return children_[e]; }
  // Element carrying node label j (1-based).
  int node(int j) const { return nodes_[j - 1]; }

  std::vector<int> preorder() const;
  std::vector<int> leaves() const;  // preorder

  // New tree with `leaf` developed into node J+1; children take the given
  // components (defaults to the leaf's component) and the node takes `term`.
  Tree extend(int leaf, int arity, int term = 0,
              const std::vector<int>& childComponents = {}) const;

  // Preorder listing of (label, slot, component, term) tuples.
  std::string canonical() const;

 private:
  int p_ = 0;
  std::vector<int> parent_, slot_, label_, component_, term_;
  std::vector<std::vector<int>> children_;
  std::vector<int> nodes_;
};

using OrderedTree = Tree;
using SystemTree = Tree;

// prod_{j=0}^{J-1} ((p-1) j + 1), saturating at UINT64_MAX.
std::uint64_t tree_count(int p, int J);

std::vector<OrderedTree> enumerate_trees(int p, int J,
                                         std::uint64_t cap = kDefaultTreeCap);

// Ordered-tree extension at a leaf with the tree's own arity.
OrderedTree extend_at_leaf(const OrderedTree& tree, int leaf);

// Input components of every term, per component: specs[c][k] lists the
// component feeding each slot of term k of component c.
using SystemShape = std::vector<std::vector<std::vector<int>>>;

std::vector<SystemTree> enumerate_system_trees(const SystemShape& specs,
                                               int rootComponent, int J,
                                               std::uint64_t cap = kDefaultTreeCap);

// prod_{j=0}^{J-1} ((P-1) j + 1) I with P the largest arity and I the
// largest number of terms per component.
double system_tree_bound(const SystemShape& specs, int J);

enum class NodePolicy {
  LeavesOnly,   // leaves in the box, node frequencies unrestricted
  AllElements,  // every element in the box
};

struct IndexAssignment {
  std::vector<Freq> freqs;  // per element
};

// Lexicographic iteration over leaf frequencies (leaves in preorder).  The
// root may lie outside the box; under AllElements it then has no assignment.
class AssignmentIterator {
 public:
  AssignmentIterator(const Tree& tree, const TruncatedLattice& lat, Freq root,
                     NodePolicy policy = NodePolicy::LeavesOnly);
  bool next();
  const IndexAssignment& current() const { return cur_; }

 private:
  bool fill();

  const Tree* tree_;
  TruncatedLattice lat_;
  Freq root_;
  NodePolicy policy_;
  std::vector<int> leaves_;
  std::vector<int> post_;  // nodes, children before parents
  std::vector<std::size_t> odo_;
  bool started_ = false;
  bool done_ = false;
  IndexAssignment cur_;
};

std::vector<IndexAssignment> enumerate_assignments(
    const Tree& tree, const TruncatedLattice& lat, const Freq& root,
    NodePolicy policy = NodePolicy::LeavesOnly);

}  // namespace nfrlab
