#include "nfrlab/trees.hpp"

#include <algorithm>
#include <limits>
#include <sstream>

#include "nfrlab/error.hpp"

namespace nfrlab {

Tree Tree::root(int arity, int rootComponent, int rootTerm,
                const std::vector<int>& childComponents) {
  if (arity < 1) throw ContractError("tree arity must be >= 1");
  if (!childComponents.empty() &&
      static_cast<int>(childComponents.size()) != arity)
    throw ContractError("child component list does not match arity");
  Tree t;
  t.p_ = arity;
  t.parent_ = {-1};
  t.slot_ = {-1};
  t.label_ = {1};
  t.component_ = {rootComponent};
  t.term_ = {rootTerm};
  t.children_ = {{}};
  t.nodes_ = {0};
  for (int k = 0; k < arity; ++k) {
    int e = t.element_count();
    t.parent_.push_back(0);
    t.slot_.push_back(k);
    t.label_.push_back(0);
    t.component_.push_back(childComponents.empty() ? rootComponent
                                                   : childComponents[k]);
    t.term_.push_back(-1);
    t.children_.push_back({});
    t.children_[0].push_back(e);
  }
  return t;
}

Tree Tree::extend(int leaf, int arity, int term,
                  const std::vector<int>& childComponents) const {
  if (leaf < 0 || leaf >= element_count() || !is_leaf(leaf))
    throw ContractError("extend: element " + std::to_string(leaf) +
                        " is not a leaf");
  if (!childComponents.empty() &&
      static_cast<int>(childComponents.size()) != arity)
    throw ContractError("child component list does not match arity");
  Tree t = *this;
  if (t.p_ != arity) t.p_ = 0;
  t.label_[leaf] = J() + 1;
  t.term_[leaf] = term;
  t.nodes_.push_back(leaf);
  for (int k = 0; k < arity; ++k) {
    int e = t.element_count();
    t.parent_.push_back(leaf);
    t.slot_.push_back(k);
    t.label_.push_back(0);
    t.component_.push_back(childComponents.empty() ? component_[leaf]
                                                   : childComponents[k]);
    t.term_.push_back(-1);
    t.children_.push_back({});
    t.children_[leaf].push_back(e);
  }
  return t;
}

std::vector<int> Tree::preorder() const {
  std::vector<int> out;
  out.reserve(element_count());
  std::vector<int> stack{0};
  while (!stack.empty()) {
    int e = stack.back();
    stack.pop_back();
    out.push_back(e);
    const auto& ch = children_[e];
    for (auto it = ch.rbegin(); it != ch.rend(); ++it) stack.push_back(*it);
  }
  return out;
}

std::vector<int> Tree::leaves() const {
  std::vector<int> out;
  for (int e : preorder())
    if (is_leaf(e)) out.push_back(e);
  return out;
}

std::string Tree::canonical() const {
  std::ostringstream os;
  for (int e : preorder())
    os << '(' << label_[e] << ',' << slot_[e] << ',' << component_[e] << ','
       << term_[e] << ')';
  return os.str();
}

std::uint64_t tree_count(int p, int J) {
  std::uint64_t prod = 1;
  for (int j = 0; j < J; ++j) {
    std::uint64_t f = static_cast<std::uint64_t>(p - 1) * j + 1;
    if (prod > std::numeric_limits<std::uint64_t>::max() / f)
      return std::numeric_limits<std::uint64_t>::max();
    prod *= f;
  }
  return prod;
}

std::vector<OrderedTree> enumerate_trees(int p, int J, std::uint64_t cap) {
  if (p < 2) throw ConfigError("trees: p must be >= 2");
  if (J < 1) throw ConfigError("trees: J must be >= 1");
  std::uint64_t count = tree_count(p, J);
  if (count > cap)
    throw CapError("tree enumeration would produce " + std::to_string(count) +
                       " trees, above the cap of " + std::to_string(cap),
                   static_cast<double>(count));
  std::vector<OrderedTree> gen{Tree::root(p)};
  for (int j = 2; j <= J; ++j) {
    std::vector<OrderedTree> next;
    next.reserve(tree_count(p, j));
    for (const auto& t : gen)
      for (int leaf : t.leaves()) next.push_back(t.extend(leaf, p));
    gen.swap(next);
  }
  return gen;
}

OrderedTree extend_at_leaf(const OrderedTree& tree, int leaf) {
  if (tree.p() < 1) throw ContractError("extend_at_leaf needs an ordered tree");
  return tree.extend(leaf, tree.p());
}

std::vector<SystemTree> enumerate_system_trees(const SystemShape& specs,
                                               int rootComponent, int J,
                                               std::uint64_t cap) {
  if (J < 1) throw ConfigError("trees: J must be >= 1");
  if (rootComponent < 0 || rootComponent >= static_cast<int>(specs.size()))
    throw ConfigError("trees: root component out of range");
  for (const auto& comp : specs)
    for (const auto& term : comp)
      if (term.size() < 2)
        throw ConfigError("trees: every term needs total degree >= 2");
  std::vector<SystemTree> gen;
  for (int k = 0; k < static_cast<int>(specs[rootComponent].size()); ++k) {
    const auto& in = specs[rootComponent][k];
    gen.push_back(Tree::root(static_cast<int>(in.size()), rootComponent, k, in));
  }
  for (int j = 2; j <= J; ++j) {
    std::vector<SystemTree> next;
    for (const auto& t : gen) {
      for (int leaf : t.leaves()) {
        const auto& terms = specs[t.component(leaf)];
        for (int k = 0; k < static_cast<int>(terms.size()); ++k) {
          next.push_back(
              t.extend(leaf, static_cast<int>(terms[k].size()), k, terms[k]));
          if (next.size() > cap)
            throw CapError("system tree enumeration exceeds the cap of " +
                               std::to_string(cap),
                           static_cast<double>(next.size()));
        }
      }
    }
    gen.swap(next);
  }
  if (gen.size() > cap)
    throw CapError("system tree enumeration exceeds the cap of " +
                       std::to_string(cap),
                   static_cast<double>(gen.size()));
  return gen;
}

double system_tree_bound(const SystemShape& specs, int J) {
  std::size_t P = 0, I = 0;
  for (const auto& comp : specs) {
    I = std::max(I, comp.size());
    for (const auto& term : comp) P = std::max(P, term.size());
  }
  double b = 1.0;
  for (int j = 0; j < J; ++j)
    b *= (static_cast<double>(P - 1) * j + 1.0) * static_cast<double>(I);
  return b;
}

AssignmentIterator::AssignmentIterator(const Tree& tree,
                                       const TruncatedLattice& lat, Freq root,
                                       NodePolicy policy)
    : tree_(&tree), lat_(lat), root_(root), policy_(policy) {
  if (root.d != lat.d())
    throw ContractError("enumerate_assignments: root " + root.str() +
                        " has the wrong dimension");
  leaves_ = tree.leaves();
  auto pre = tree.preorder();
  for (auto it = pre.rbegin(); it != pre.rend(); ++it)
    if (!tree.is_leaf(*it)) post_.push_back(*it);
  odo_.assign(leaves_.size() - 1, 0);
  cur_.freqs.assign(tree.element_count(), Freq(lat.d()));
}

bool AssignmentIterator::fill() {
  auto& f = cur_.freqs;
  Freq rest = root_;
  for (std::size_t k = 0; k < odo_.size(); ++k) {
    f[leaves_[k]] = lat_.freq(odo_[k]);
    rest -= f[leaves_[k]];
  }
  if (!lat_.contains(rest)) return false;
  f[leaves_.back()] = rest;
  for (int e : post_) {
    Freq s(lat_.d());
    for (int ch : tree_->children(e)) s += f[ch];
    if (policy_ == NodePolicy::AllElements && !lat_.contains(s)) return false;
    f[e] = s;
  }
  return true;
}

bool AssignmentIterator::next() {
  if (done_) return false;
  const std::size_t base = lat_.size();
  while (true) {
    if (!started_) {
      started_ = true;
    } else {
      std::size_t k = odo_.size();
      while (k > 0) {
        --k;
        if (++odo_[k] < base) break;
        odo_[k] = 0;
        if (k == 0) {
          done_ = true;
          return false;
        }
      }
      if (odo_.empty()) {
        done_ = true;
        return false;
      }
    }
    if (fill()) return true;
  }
}

std::vector<IndexAssignment> enumerate_assignments(const Tree& tree,
                                                   const TruncatedLattice& lat,
                                                   const Freq& root,
                                                   NodePolicy policy) {
  std::vector<IndexAssignment> out;
  AssignmentIterator it(tree, lat, root, policy);
  while (it.next()) out.push_back(it.current());
  return out;
}

}  // namespace nfrlab
