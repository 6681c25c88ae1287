#include "rstdp/tree.hpp"

#include <algorithm>
#include <cassert>

#include "rstdp/errors.hpp"

namespace rstdp {

std::string to_string(Nuclearity nuc) {
  switch (nuc) {
    case Nuclearity::NS: return "NS";
    case Nuclearity::SN: return "SN";
    case Nuclearity::NN: return "NN";
  }
  return "NS";
}

std::optional<Nuclearity> nuclearity_from_string(std::string_view s) {
  if (s == "NS") return Nuclearity::NS;
  if (s == "SN") return Nuclearity::SN;
  if (s == "NN") return Nuclearity::NN;
  return std::nullopt;
}

struct RSTTree::Node {
  bool leaf = true;
  int edu_index = 0;
  int start = 0;
  int end = 0;
  Nuclearity nuc = Nuclearity::NS;
  std::string relation;
  std::shared_ptr<const Node> left;
  std::shared_ptr<const Node> right;
};

RSTTree RSTTree::leaf(int edu_index) {
  if (edu_index < 1) {
    throw ValidationError("leaf EDU index must be >= 1, got " + std::to_string(edu_index));
  }
  auto node = std::make_shared<Node>();
  node->leaf = true;
  node->edu_index = edu_index;
  node->start = edu_index;
  node->end = edu_index;
  return RSTTree(std::move(node));
}

RSTTree RSTTree::internal(RSTTree left, RSTTree right, Nuclearity nuc, std::string relation) {
  if (left.empty() || right.empty()) {
    throw ValidationError("internal node requires two non-empty children");
  }
  if (left.end() + 1 != right.start()) {
    throw ValidationError("child spans must be adjacent: left ends at " +
                          std::to_string(left.end()) + ", right starts at " +
                          std::to_string(right.start()));
  }
  auto node = std::make_shared<Node>();
  node->leaf = false;
  node->start = left.start();
  node->end = right.end();
  node->nuc = nuc;
  node->relation = std::move(relation);
  node->left = left.node_;
  node->right = right.node_;
  return RSTTree(std::move(node));
}

const RSTTree::Node& RSTTree::node() const {
  if (!node_) throw ValidationError("operation on empty tree");
  return *node_;
}

bool RSTTree::is_leaf() const { return node().leaf; }
int RSTTree::start() const { return node().start; }
int RSTTree::end() const { return node().end; }

int RSTTree::edu_index() const {
  const Node& n = node();
  if (!n.leaf) throw ValidationError("edu_index on internal node");
  return n.edu_index;
}

RSTTree RSTTree::left() const {
  const Node& n = node();
  if (n.leaf) throw ValidationError("left() on leaf");
  return RSTTree(n.left);
}

RSTTree RSTTree::right() const {
  const Node& n = node();
  if (n.leaf) throw ValidationError("right() on leaf");
  return RSTTree(n.right);
}

Nuclearity RSTTree::nuclearity() const {
  const Node& n = node();
  if (n.leaf) throw ValidationError("nuclearity on leaf");
  return n.nuc;
}

const std::string& RSTTree::relation() const {
  const Node& n = node();
  if (n.leaf) throw ValidationError("relation on leaf");
  return n.relation;
}

NucRel RSTTree::label() const { return NucRel{nuclearity(), relation()}; }

int RSTTree::leaf_count() const {
  const Node& n = node();
  return n.end - n.start + 1;
}

int RSTTree::internal_count() const { return leaf_count() - 1; }

namespace {

bool deep_equal(const RSTTree& a, const RSTTree& b) {
  if (a.is_leaf() != b.is_leaf()) return false;
  if (a.is_leaf()) return a.edu_index() == b.edu_index();
  if (a.nuclearity() != b.nuclearity() || a.relation() != b.relation()) return false;
  return deep_equal(a.left(), b.left()) && deep_equal(a.right(), b.right());
}

}  // namespace

bool RSTTree::operator==(const RSTTree& other) const {
  if (empty() || other.empty()) return empty() == other.empty();
  return deep_equal(*this, other);
}

NaryTree NaryTree::leaf(int edu_index) {
  NaryTree t;
  t.edu_index = edu_index;
  return t;
}

NaryTree NaryTree::node(std::string statuses, std::string relation, std::vector<NaryTree> children) {
  NaryTree t;
  t.statuses = std::move(statuses);
  t.relation = std::move(relation);
  t.children = std::move(children);
  return t;
}

namespace {

RSTTree binarize_node(const NaryTree& t) {
  if (t.is_leaf()) return RSTTree::leaf(t.edu_index);
  if (t.children.size() < 2) {
    throw ValidationError("internal node must have at least 2 children, got " +
                          std::to_string(t.children.size()));
  }
  if (t.statuses.size() != t.children.size()) {
    throw ValidationError("status string length " + std::to_string(t.statuses.size()) +
                          " does not match child count " + std::to_string(t.children.size()));
  }
  for (char c : t.statuses) {
    if (c != 'N' && c != 'S') {
      throw ValidationError(std::string("invalid status character '") + c + "'");
    }
  }
  if (t.statuses.find('N') == std::string::npos) {
    throw ValidationError("internal node has no nucleus child");
  }

  std::vector<RSTTree> kids;
  kids.reserve(t.children.size());
  for (const NaryTree& c : t.children) kids.push_back(binarize_node(c));

  // Fold from the right: the accumulated group counts as nucleus if any
  // member is.
  auto group_status = [&](size_t from) {
    return t.statuses.find('N', from) != std::string::npos ? 'N' : 'S';
  };
  RSTTree acc = kids.back();
  for (size_t i = kids.size() - 1; i-- > 0;) {
    char left_status = t.statuses[i];
    char right_status = group_status(i + 1);
    Nuclearity nuc;
    if (left_status == 'N' && right_status == 'N') {
      nuc = Nuclearity::NN;
    } else if (left_status == 'N') {
      nuc = Nuclearity::NS;
    } else if (right_status == 'N') {
      nuc = Nuclearity::SN;
    } else {
      throw ValidationError("satellite-satellite pair has no nucleus");
    }
    acc = RSTTree::internal(kids[i], acc, nuc, t.relation);
  }
  return acc;
}

void assign_ranks(const RSTTree& t, int& next_rank, CanonicalOrder& out) {
  if (t.is_leaf()) return;
  int split = t.left().end();
  out.rank[split - 1] = next_rank++;
  out.label[split - 1] = t.label();
  assign_ranks(t.left(), next_rank, out);
  assign_ranks(t.right(), next_rank, out);
}

}  // namespace

RSTTree binarize_right_heavy(const NaryTree& tree) { return binarize_node(tree); }

CanonicalOrder tree_to_order(const RSTTree& tree) {
  if (tree.empty()) throw ValidationError("tree_to_order on empty tree");
  int q = tree.leaf_count();
  if (tree.start() != 1 || tree.end() != q) {
    throw ValidationError("tree must span EDUs 1..q, spans " + std::to_string(tree.start()) +
                          ".." + std::to_string(tree.end()));
  }
  CanonicalOrder order;
  order.rank.assign(q, std::nullopt);
  order.label.assign(q, std::nullopt);
  int next_rank = 1;
  assign_ranks(tree, next_rank, order);
  return order;
}

namespace {

RSTTree build_from_order(const CanonicalOrder& order, int m, int n) {
  if (m == n) return RSTTree::leaf(m);
  int best = -1;
  int best_rank = 0;
  for (int i = m; i < n; ++i) {
    const auto& r = order.rank[i - 1];
    if (!r) {
      throw ValidationError("missing split rank at EDU " + std::to_string(i));
    }
    if (best < 0 || *r < best_rank) {
      best = i;
      best_rank = *r;
    }
  }
  const auto& lbl = order.label[best - 1];
  if (!lbl) throw ValidationError("missing label at EDU " + std::to_string(best));
  RSTTree left = build_from_order(order, m, best);
  RSTTree right = build_from_order(order, best + 1, n);
  return RSTTree::internal(std::move(left), std::move(right), lbl->nuc, lbl->relation);
}

}  // namespace

RSTTree order_to_tree(const CanonicalOrder& order) {
  int q = order.edu_count();
  if (q < 1) throw ValidationError("order must cover at least one EDU");
  if (static_cast<int>(order.label.size()) != q) {
    throw ValidationError("rank/label size mismatch");
  }
  if (order.rank[q - 1].has_value() || order.label[q - 1].has_value()) {
    throw ValidationError("last EDU must have no split rank");
  }
  std::vector<int> seen;
  for (int i = 0; i + 1 < q; ++i) {
    if (!order.rank[i]) throw ValidationError("missing split rank at EDU " + std::to_string(i + 1));
    if (!order.label[i]) throw ValidationError("missing label at EDU " + std::to_string(i + 1));
    seen.push_back(*order.rank[i]);
  }
  std::sort(seen.begin(), seen.end());
  for (int i = 0; i < static_cast<int>(seen.size()); ++i) {
    if (seen[i] != i + 1) {
      throw ValidationError("split ranks must form a permutation of 1.." + std::to_string(q - 1));
    }
  }
  return build_from_order(order, 1, q);
}

GoldSplit match_gold(const Segment& seg, const CanonicalOrder& order) {
  if (!seg.splittable()) {
    throw ValidationError("match_gold on unsplittable segment [" + std::to_string(seg.m) + ", " +
                          std::to_string(seg.n) + "]");
  }
  if (seg.m < 1 || seg.n > order.edu_count()) {
    throw ValidationError("segment out of range");
  }
  int best = -1;
  int best_rank = 0;
  for (int i = seg.m; i < seg.n; ++i) {
    const auto& r = order.rank[i - 1];
    if (!r) throw ValidationError("missing split rank at EDU " + std::to_string(i));
    if (best < 0 || *r < best_rank) {
      best = i;
      best_rank = *r;
    }
  }
  return GoldSplit{best, *order.label[best - 1]};
}

}  // namespace rstdp
