#pragma once

#include "slh/sha256.hpp"

namespace slh {

// Interior node: sha256d(0x01 ∥ left ∥ right). Leaves are hashed with the
// 0x00 prefix elsewhere, so the two node kinds can never collide.
Digest256 merkle_parent(const Digest256& left, const Digest256& right);

struct InclusionProof {
  struct Step {
    Digest256 sibling;
    bool sibling_on_left = false;
  };
  uint64_t leaf_index = 0;
  std::vector<Step> steps;
};

// Binary hash tree with odd-node duplication: a node without a right
// sibling is paired with itself. A single-leaf tree still performs one
// fold, so its root is sha256d(0x01 ∥ L ∥ L), never the bare leaf.
class MerkleTree {
 public:
  static MerkleTree build(const std::vector<Digest256>& leaves);  // throws on empty input

  const Digest256& root() const { return levels_.back()[0]; }
  size_t leaf_count() const { return levels_.front().size(); }
  size_t depth() const { return levels_.size() - 1; }
  const std::vector<Digest256>& leaves() const { return levels_.front(); }

  InclusionProof prove(uint64_t index) const;  // throws on out-of-range index

  // Incremental maintenance. Both recompute only the affected root path,
  // and always leave the tree identical to a fresh build() of the same
  // leaf sequence.
  void append(const Digest256& leaf);
  void update(uint64_t index, const Digest256& leaf);

 private:
  // levels_[0] = leaves, levels_.back() = {root}
  std::vector<std::vector<Digest256>> levels_;
};

struct InclusionVerdict {
  bool ok = false;
  Digest256 computed_root{};
};

InclusionVerdict verify_inclusion(const Digest256& root, const Digest256& leaf,
                                  const InclusionProof& proof);

}  // namespace slh
