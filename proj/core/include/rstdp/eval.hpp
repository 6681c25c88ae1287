#pragma once

#include <string>
#include <utility>
#include <vector>

#include "rstdp/tree.hpp"

namespace rstdp {

/// A labelled attachment decision: an EDU span with its nuclearity and
/// relation tags under one of the two Parseval conventions.
struct Constituent {
  Segment span;
  std::string nuclearity_tag;
  std::string relation_tag;
  bool operator==(const Constituent&) const = default;
};

/// One constituent per internal node except the root, tagged with the
/// node's own nuclearity (NS/SN/NN) and relation. include_root adds the
/// root node. q ≤ 2 documents yield the empty set.
std::vector<Constituent> extract_original_parseval(const RSTTree& tree, bool include_root = false);

/// One constituent per non-root node, leaves included. Each child is
/// tagged with its own status (N or S); its relation is the parent's
/// relation when the child is a satellite or the parent is multinuclear,
/// and the reserved tag "span" when it is the nucleus of NS/SN.
/// include_root adds the root as N/span.
std::vector<Constituent> extract_rst_parseval(const RSTTree& tree, bool include_root = false);

struct LevelCounts {
  long matched = 0;
  long gold_total = 0;
  long pred_total = 0;

  /// Micro F1 as a percentage. Empty on both sides counts as perfect.
  double f1() const;
};

/// Micro-averaged scores at the four levels: Span, Nuclearity (span +
/// nuclearity), Relation (span + relation), Full (everything).
struct MetricReport {
  LevelCounts span;
  LevelCounts nuclearity;
  LevelCounts relation;
  LevelCounts full;

  double S() const { return span.f1(); }
  double N() const { return nuclearity.f1(); }
  double R() const { return relation.f1(); }
  double F() const { return full.f1(); }
};

/// Pools constituent matches over all documents. golds and preds are
/// aligned per document; a size mismatch is an argument error.
MetricReport evaluate_constituents(const std::vector<std::vector<Constituent>>& golds,
                                   const std::vector<std::vector<Constituent>>& preds);

enum class ParsevalVariant { Original, Rst };

MetricReport evaluate_trees(const std::vector<RSTTree>& golds, const std::vector<RSTTree>& preds,
                            ParsevalVariant variant = ParsevalVariant::Original,
                            bool include_root = false);

/// Scores grouped by document length (EDU count, taken from the gold
/// tree), bucket b holding documents with lo < q ≤ hi. hi < 0 means
/// unbounded.
struct LengthBucket {
  int lo = 0;
  int hi = -1;
  int doc_count = 0;
  MetricReport metrics;
};

struct BucketReport {
  std::vector<LengthBucket> buckets;
};

std::vector<std::pair<int, int>> default_buckets();

BucketReport bucket_report(const std::vector<RSTTree>& golds, const std::vector<RSTTree>& preds,
                           ParsevalVariant variant = ParsevalVariant::Original,
                           bool include_root = false,
                           const std::vector<std::pair<int, int>>& buckets = default_buckets());

/// Confusion counts over span-matched constituent pairs (rows = gold,
/// columns = predicted). The relation matrix keeps the 7 most frequent
/// gold relations and folds the rest into "other".
struct ConfusionMatrices {
  std::vector<std::string> nuclearity_labels;  // NS, NN, SN
  std::vector<std::vector<long>> nuclearity;
  std::vector<std::string> relation_labels;  // top-7 by gold frequency, then "other"
  std::vector<std::vector<long>> relation;
  long matched_pairs = 0;
};

ConfusionMatrices confusion_matrices(const std::vector<RSTTree>& golds,
                                     const std::vector<RSTTree>& preds,
                                     bool include_root = false);

std::string format_metric_report(const MetricReport& report);
std::string format_bucket_report(const BucketReport& report);
std::string format_confusion(const ConfusionMatrices& matrices);

}  // namespace rstdp
