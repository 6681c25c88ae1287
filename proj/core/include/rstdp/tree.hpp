#pragma once

#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace rstdp {

/// Orientation of a binary discourse relation: which side is the nucleus.
enum class Nuclearity { NS, SN, NN };

std::string to_string(Nuclearity nuc);
std::optional<Nuclearity> nuclearity_from_string(std::string_view s);

/// Joint (nuclearity, relation) label carried by internal tree nodes.
struct NucRel {
  Nuclearity nuc = Nuclearity::NS;
  std::string relation;
  bool operator==(const NucRel&) const = default;
};

/// An elementary discourse unit: the leaf unit of a discourse tree.
struct EDU {
  int index = 0;  // 1-based position in the document
  std::vector<std::string> tokens;
  std::vector<std::string> pos_tags;  // one per token
  bool paragraph_final = false;
  bool sentence_final = false;
  bool operator==(const EDU&) const = default;
};

/// Inclusive EDU index bounds of a (sub)sequence. Splittable iff n > m.
struct Segment {
  int m = 0;
  int n = 0;
  bool splittable() const { return n > m; }
  int length() const { return n - m + 1; }
  bool operator==(const Segment&) const = default;
};

/// Immutable binary discourse tree. A node is either a leaf holding an EDU
/// index or an internal node with exactly two children, a nuclearity, and a
/// relation label. Spans are derived; copies share structure and are safe to
/// use across threads.
class RSTTree {
 public:
  RSTTree() = default;

  static RSTTree leaf(int edu_index);
  static RSTTree internal(RSTTree left, RSTTree right, Nuclearity nuc, std::string relation);

  bool empty() const { return node_ == nullptr; }
  bool is_leaf() const;
  int start() const;
  int end() const;
  Segment span() const { return Segment{start(), end()}; }

  int edu_index() const;  // leaves only
  RSTTree left() const;   // internal nodes only
  RSTTree right() const;
  Nuclearity nuclearity() const;
  const std::string& relation() const;
  NucRel label() const;

  int leaf_count() const;
  int internal_count() const;

  /// Deep structural equality: shape, nuclearity, and relations.
  bool operator==(const RSTTree& other) const;

 private:
  struct Node;
  explicit RSTTree(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
  const Node& node() const;
  std::shared_ptr<const Node> node_;
};

/// N-ary interchange tree as read from corpus files. Internal nodes carry a
/// relation and one 'N'/'S' status per child.
struct NaryTree {
  int edu_index = 0;      // leaves only
  std::string relation;   // internal nodes only
  std::string statuses;   // one char per child
  std::vector<NaryTree> children;
  bool is_leaf() const { return children.empty(); }

  static NaryTree leaf(int edu_index);
  static NaryTree node(std::string statuses, std::string relation, std::vector<NaryTree> children);
};

/// Per-EDU pre-order split ranks and labels of a binary tree over q EDUs.
/// rank[i-1] is the 1-based pre-order rank of the internal node whose split
/// boundary falls immediately after EDU i; label[i-1] is that node's label.
/// Both are absent exactly at the last EDU.
struct CanonicalOrder {
  std::vector<std::optional<int>> rank;
  std::vector<std::optional<NucRel>> label;
  int edu_count() const { return static_cast<int>(rank.size()); }
};

/// Converts an n-ary tree into a binary one by expanding every k-ary node
/// (k > 2) into a right-branching chain. Introduced nodes inherit the
/// original relation; each binary node's nuclearity is derived from the
/// status of its left child and of the remaining group (the group counts as
/// nucleus if it contains one). Throws ValidationError on internal nodes
/// with fewer than two children or without any nucleus.
RSTTree binarize_right_heavy(const NaryTree& tree);

/// Pre-order (root, left, right) split ranks of a valid binary tree.
CanonicalOrder tree_to_order(const RSTTree& tree);

/// Inverse of tree_to_order: recursively splits each segment at the
/// minimum-rank position. Throws ValidationError when the ranks are not a
/// permutation of 1..q-1 with the none entry last.
RSTTree order_to_tree(const CanonicalOrder& order);

struct GoldSplit {
  int split = 0;
  NucRel label;
};

/// Best still-reachable gold split of a segment: the candidate position in
/// [seg.m, seg.n-1] whose gold rank is minimal, with that node's label.
GoldSplit match_gold(const Segment& seg, const CanonicalOrder& order);

}  // namespace rstdp
