#include "slh/merkle.hpp"

namespace slh {

Digest256 merkle_parent(const Digest256& left, const Digest256& right) {
  uint8_t buf[65];
  buf[0] = 0x01;
  std::memcpy(buf + 1, left.data(), 32);
  std::memcpy(buf + 33, right.data(), 32);
  return sha256d(buf, sizeof buf);
}

MerkleTree MerkleTree::build(const std::vector<Digest256>& leaves) {
  if (leaves.empty()) throw Error(Errc::bad_argument, "cannot build a tree with no leaves");

  MerkleTree tree;
  tree.levels_.push_back(leaves);
  if (leaves.size() == 1) {
    tree.levels_.push_back({merkle_parent(leaves[0], leaves[0])});
    return tree;
  }
  while (tree.levels_.back().size() > 1) {
    const auto& prev = tree.levels_.back();
    std::vector<Digest256> next;
    next.reserve((prev.size() + 1) / 2);
    for (size_t i = 0; i < prev.size(); i += 2) {
      const Digest256& left = prev[i];
      const Digest256& right = (i + 1 < prev.size()) ? prev[i + 1] : prev[i];
      next.push_back(merkle_parent(left, right));
    }
    tree.levels_.push_back(std::move(next));
  }
  return tree;
}

void MerkleTree::append(const Digest256& leaf) {
  if (levels_.empty()) {
    *this = build({leaf});
    return;
  }
  levels_[0].push_back(leaf);
  for (size_t level = 0; levels_[level].size() > 1; ++level) {
    if (level + 1 == levels_.size()) levels_.emplace_back();
    const auto& nodes = levels_[level];
    size_t w = nodes.size();
    size_t p = (w - 1) / 2;
    const Digest256& left = nodes[2 * p];
    const Digest256& right = (2 * p + 1 < w) ? nodes[2 * p + 1] : nodes[2 * p];
    Digest256 parent = merkle_parent(left, right);
    if (p == levels_[level + 1].size()) {
      levels_[level + 1].push_back(parent);
    } else {
      levels_[level + 1][p] = parent;
    }
  }
}

void MerkleTree::update(uint64_t index, const Digest256& leaf) {
  if (levels_.empty() || index >= leaf_count()) {
    throw Error(Errc::bad_argument, "leaf index out of range");
  }
  levels_[0][index] = leaf;
  if (leaf_count() == 1) {
    levels_[1][0] = merkle_parent(leaf, leaf);
    return;
  }
  size_t pos = index;
  for (size_t level = 0; level + 1 < levels_.size(); ++level) {
    const auto& nodes = levels_[level];
    size_t w = nodes.size();
    size_t p = pos / 2;
    const Digest256& left = nodes[2 * p];
    const Digest256& right = (2 * p + 1 < w) ? nodes[2 * p + 1] : nodes[2 * p];
    levels_[level + 1][p] = merkle_parent(left, right);
    pos = p;
  }
}

InclusionProof MerkleTree::prove(uint64_t index) const {
  if (index >= leaf_count()) throw Error(Errc::bad_argument, "leaf index out of range");

  InclusionProof proof;
  proof.leaf_index = index;
  size_t pos = index;
  for (size_t level = 0; level + 1 < levels_.size(); ++level) {
    const auto& nodes = levels_[level];
    size_t sibling = pos ^ 1;
    if (sibling >= nodes.size()) sibling = pos;  // odd node pairs with itself
    proof.steps.push_back({nodes[sibling], sibling < pos});
    pos /= 2;
  }
  return proof;
}

InclusionVerdict verify_inclusion(const Digest256& root, const Digest256& leaf,
                                  const InclusionProof& proof) {
  Digest256 acc = leaf;
  for (const auto& step : proof.steps) {
    acc = step.sibling_on_left ? merkle_parent(step.sibling, acc)
                               : merkle_parent(acc, step.sibling);
  }
  InclusionVerdict v;
  v.computed_root = acc;
  v.ok = !proof.steps.empty() && acc == root;
  return v;
}

}  // namespace slh
