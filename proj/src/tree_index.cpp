#include "horo/tree_index.hpp"

#include <stdexcept>

namespace horo {

TreeIndex::TreeIndex(PointedTreeEnv env) : env_(std::move(env)) {}

TreeIndex::Id TreeIndex::intern(const TreeVertexAddr& x) {
  if (auto it = ids_.find(x); it != ids_.end()) return it->second;
  if (nodes_.size() >= npos) throw std::length_error("tree index exhausted");
  const auto id = static_cast<Id>(nodes_.size());
  Node node;
  node.addr = x;
  node.offspring = env_.offspring(x);
  node.children.assign(node.offspring, npos);
  nodes_.push_back(std::move(node));
  ids_.emplace(x, id);
  return id;
}

std::optional<TreeIndex::Id> TreeIndex::find(const TreeVertexAddr& x) const {
  if (auto it = ids_.find(x); it != ids_.end()) return it->second;
  return std::nullopt;
}

TreeIndex::Id TreeIndex::parent(Id id) {
  if (nodes_[id].parent != npos) return nodes_[id].parent;
  const Id p = intern(env_.parent(nodes_[id].addr));
  nodes_[id].parent = p;
  nodes_[p].children[env_.index_in_parent(nodes_[id].addr)] = id;
  return p;
}

TreeIndex::Id TreeIndex::child(Id id, ChildIndex i) {
  if (i >= nodes_[id].offspring) throw std::out_of_range("child index out of range");
  if (nodes_[id].children[i] != npos) return nodes_[id].children[i];
  const Id c = intern(env_.child(nodes_[id].addr, i));
  nodes_[id].children[i] = c;
  nodes_[c].parent = id;
  return c;
}

}  // namespace horo
