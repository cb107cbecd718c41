#pragma once

#include <cstdint>
#include <optional>
#include <unordered_map>
#include <vector>

#include "horo/tree.hpp"

namespace horo {

/// Lazily materialized portion of a tree: assigns dense ids to vertices as
/// they are reached and caches parent/child links. Single-consumer; not
/// thread-safe.
class TreeIndex {
 public:
  using Id = std::uint32_t;
  static constexpr Id npos = ~Id{0};

  explicit TreeIndex(PointedTreeEnv env);

  const PointedTreeEnv& env() const noexcept { return env_; }

  Id intern(const TreeVertexAddr& x);
  std::optional<Id> find(const TreeVertexAddr& x) const;

  Id parent(Id id);
  Id child(Id id, ChildIndex i);
  ChildIndex offspring(Id id) const noexcept { return nodes_[id].offspring; }
  Height height(Id id) const noexcept { return nodes_[id].addr.height(); }
  const TreeVertexAddr& addr(Id id) const noexcept { return nodes_[id].addr; }
  std::size_t size() const noexcept { return nodes_.size(); }

 private:
  struct Node {
    TreeVertexAddr addr;
    ChildIndex offspring = 0;
    Id parent = npos;
    std::vector<Id> children;
  };

  PointedTreeEnv env_;
  std::vector<Node> nodes_;
  std::unordered_map<TreeVertexAddr, Id, TreeVertexAddrHash> ids_;
};

}  // namespace horo
