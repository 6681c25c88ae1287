#include "rstdp/eval.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <unordered_map>

#include "rstdp/errors.hpp"

namespace rstdp {

namespace {

constexpr const char* kSpanTag = "span";

void collect_original(const RSTTree& node, bool is_root, bool include_root,
                      std::vector<Constituent>& out) {
  if (node.is_leaf()) return;
  if (!is_root || include_root) {
    out.push_back(Constituent{node.span(), to_string(node.nuclearity()), node.relation()});
  }
  collect_original(node.left(), false, include_root, out);
  collect_original(node.right(), false, include_root, out);
}

void collect_rst(const RSTTree& node, std::vector<Constituent>& out) {
  if (node.is_leaf()) return;
  Nuclearity nuc = node.nuclearity();
  bool left_nucleus = nuc == Nuclearity::NS || nuc == Nuclearity::NN;
  bool right_nucleus = nuc == Nuclearity::SN || nuc == Nuclearity::NN;
  RSTTree left = node.left();
  RSTTree right = node.right();
  out.push_back(Constituent{left.span(), left_nucleus ? "N" : "S",
                            nuc == Nuclearity::NS ? kSpanTag : node.relation()});
  out.push_back(Constituent{right.span(), right_nucleus ? "N" : "S",
                            nuc == Nuclearity::SN ? kSpanTag : node.relation()});
  collect_rst(left, out);
  collect_rst(right, out);
}

long span_key(const Segment& s) { return static_cast<long>(s.m) * 1000000L + s.n; }

void tally(const std::vector<Constituent>& gold, const std::vector<Constituent>& pred,
           MetricReport& report) {
  std::unordered_map<long, const Constituent*> by_span;
  by_span.reserve(gold.size());
  for (const Constituent& c : gold) by_span[span_key(c.span)] = &c;

  report.span.gold_total += static_cast<long>(gold.size());
  report.nuclearity.gold_total += static_cast<long>(gold.size());
  report.relation.gold_total += static_cast<long>(gold.size());
  report.full.gold_total += static_cast<long>(gold.size());
  report.span.pred_total += static_cast<long>(pred.size());
  report.nuclearity.pred_total += static_cast<long>(pred.size());
  report.relation.pred_total += static_cast<long>(pred.size());
  report.full.pred_total += static_cast<long>(pred.size());

  for (const Constituent& p : pred) {
    auto it = by_span.find(span_key(p.span));
    if (it == by_span.end()) continue;
    const Constituent& g = *it->second;
    ++report.span.matched;
    bool nuc_ok = g.nuclearity_tag == p.nuclearity_tag;
    bool rel_ok = g.relation_tag == p.relation_tag;
    if (nuc_ok) ++report.nuclearity.matched;
    if (rel_ok) ++report.relation.matched;
    if (nuc_ok && rel_ok) ++report.full.matched;
  }
}

std::vector<Constituent> extract(const RSTTree& tree, ParsevalVariant variant, bool include_root) {
  return variant == ParsevalVariant::Original ? extract_original_parseval(tree, include_root)
                                              : extract_rst_parseval(tree, include_root);
}

std::string format_pct(double value) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.1f", value);
  return buf;
}

}  // namespace

std::vector<Constituent> extract_original_parseval(const RSTTree& tree, bool include_root) {
  std::vector<Constituent> out;
  if (tree.empty()) throw ArgumentError("cannot extract constituents from an empty tree");
  collect_original(tree, true, include_root, out);
  return out;
}

std::vector<Constituent> extract_rst_parseval(const RSTTree& tree, bool include_root) {
  std::vector<Constituent> out;
  if (tree.empty()) throw ArgumentError("cannot extract constituents from an empty tree");
  if (include_root) out.push_back(Constituent{tree.span(), "N", kSpanTag});
  collect_rst(tree, out);
  return out;
}

double LevelCounts::f1() const {
  if (gold_total == 0 && pred_total == 0) return 100.0;
  if (matched == 0) return 0.0;
  double p = static_cast<double>(matched) / static_cast<double>(pred_total);
  double r = static_cast<double>(matched) / static_cast<double>(gold_total);
  return 100.0 * 2.0 * p * r / (p + r);
}

MetricReport evaluate_constituents(const std::vector<std::vector<Constituent>>& golds,
                                   const std::vector<std::vector<Constituent>>& preds) {
  if (golds.size() != preds.size()) {
    throw ArgumentError("gold and predicted sets cover " + std::to_string(golds.size()) +
                        " vs " + std::to_string(preds.size()) + " documents");
  }
  MetricReport report;
  for (std::size_t i = 0; i < golds.size(); ++i) tally(golds[i], preds[i], report);
  return report;
}

MetricReport evaluate_trees(const std::vector<RSTTree>& golds, const std::vector<RSTTree>& preds,
                            ParsevalVariant variant, bool include_root) {
  if (golds.size() != preds.size()) {
    throw ArgumentError("gold and predicted trees cover " + std::to_string(golds.size()) +
                        " vs " + std::to_string(preds.size()) + " documents");
  }
  MetricReport report;
  for (std::size_t i = 0; i < golds.size(); ++i) {
    tally(extract(golds[i], variant, include_root), extract(preds[i], variant, include_root),
          report);
  }
  return report;
}

std::vector<std::pair<int, int>> default_buckets() {
  return {{0, 50}, {50, 100}, {100, 150}, {150, -1}};
}

BucketReport bucket_report(const std::vector<RSTTree>& golds, const std::vector<RSTTree>& preds,
                           ParsevalVariant variant, bool include_root,
                           const std::vector<std::pair<int, int>>& buckets) {
  if (golds.size() != preds.size()) {
    throw ArgumentError("gold and predicted trees cover " + std::to_string(golds.size()) +
                        " vs " + std::to_string(preds.size()) + " documents");
  }
  BucketReport report;
  for (const auto& [lo, hi] : buckets) {
    LengthBucket bucket;
    bucket.lo = lo;
    bucket.hi = hi;
    std::vector<std::vector<Constituent>> g, p;
    for (std::size_t i = 0; i < golds.size(); ++i) {
      int q = golds[i].leaf_count();
      if (q <= lo || (hi >= 0 && q > hi)) continue;
      ++bucket.doc_count;
      g.push_back(extract(golds[i], variant, include_root));
      p.push_back(extract(preds[i], variant, include_root));
    }
    bucket.metrics = evaluate_constituents(g, p);
    report.buckets.push_back(std::move(bucket));
  }
  return report;
}

ConfusionMatrices confusion_matrices(const std::vector<RSTTree>& golds,
                                     const std::vector<RSTTree>& preds, bool include_root) {
  if (golds.size() != preds.size()) {
    throw ArgumentError("gold and predicted trees cover " + std::to_string(golds.size()) +
                        " vs " + std::to_string(preds.size()) + " documents");
  }

  std::vector<std::pair<Constituent, Constituent>> pairs;  // (gold, pred) with equal spans
  std::map<std::string, long> gold_relation_freq;
  for (std::size_t i = 0; i < golds.size(); ++i) {
    std::vector<Constituent> gold = extract_original_parseval(golds[i], include_root);
    std::vector<Constituent> pred = extract_original_parseval(preds[i], include_root);
    for (const Constituent& c : gold) ++gold_relation_freq[c.relation_tag];
    std::unordered_map<long, const Constituent*> by_span;
    for (const Constituent& c : gold) by_span[span_key(c.span)] = &c;
    for (const Constituent& p : pred) {
      auto it = by_span.find(span_key(p.span));
      if (it != by_span.end()) pairs.emplace_back(*it->second, p);
    }
  }

  ConfusionMatrices out;
  out.matched_pairs = static_cast<long>(pairs.size());
  out.nuclearity_labels = {"NS", "NN", "SN"};
  out.nuclearity.assign(3, std::vector<long>(3, 0));

  // Top relations by gold frequency, largest first, names ascending on ties.
  std::vector<std::pair<std::string, long>> freq(gold_relation_freq.begin(),
                                                 gold_relation_freq.end());
  std::sort(freq.begin(), freq.end(), [](const auto& a, const auto& b) {
    return a.second != b.second ? a.second > b.second : a.first < b.first;
  });
  std::unordered_map<std::string, int> relation_slot;
  for (std::size_t i = 0; i < freq.size() && i < 7; ++i) {
    out.relation_labels.push_back(freq[i].first);
    relation_slot[freq[i].first] = static_cast<int>(i);
  }
  int other = static_cast<int>(out.relation_labels.size());
  out.relation_labels.push_back("other");
  out.relation.assign(out.relation_labels.size(),
                      std::vector<long>(out.relation_labels.size(), 0));

  std::unordered_map<std::string, int> nuc_slot{{"NS", 0}, {"NN", 1}, {"SN", 2}};
  auto rel_index = [&](const std::string& r) {
    auto it = relation_slot.find(r);
    return it == relation_slot.end() ? other : it->second;
  };
  for (const auto& [g, p] : pairs) {
    out.nuclearity[static_cast<std::size_t>(nuc_slot.at(g.nuclearity_tag))]
                  [static_cast<std::size_t>(nuc_slot.at(p.nuclearity_tag))]++;
    out.relation[static_cast<std::size_t>(rel_index(g.relation_tag))]
                [static_cast<std::size_t>(rel_index(p.relation_tag))]++;
  }
  return out;
}

std::string format_metric_report(const MetricReport& report) {
  std::string s;
  s += "level      F1     matched  gold    pred\n";
  auto line = [&](const char* name, const LevelCounts& c) {
    char buf[96];
    std::snprintf(buf, sizeof(buf), "%-10s %-6s %-8ld %-7ld %ld\n", name,
                  format_pct(c.f1()).c_str(), c.matched, c.gold_total, c.pred_total);
    s += buf;
  };
  line("span", report.span);
  line("nuclearity", report.nuclearity);
  line("relation", report.relation);
  line("full", report.full);
  return s;
}

std::string format_bucket_report(const BucketReport& report) {
  std::string s;
  s += "bucket      docs  S      N      R      F\n";
  for (const LengthBucket& b : report.buckets) {
    std::string range = "(" + std::to_string(b.lo) + "," +
                        (b.hi < 0 ? std::string("inf") : std::to_string(b.hi)) + "]";
    char buf[128];
    if (b.doc_count == 0) {
      std::snprintf(buf, sizeof(buf), "%-11s %-5d —      —      —      —\n", range.c_str(),
                    b.doc_count);
    } else {
      std::snprintf(buf, sizeof(buf), "%-11s %-5d %-6s %-6s %-6s %-6s\n", range.c_str(),
                    b.doc_count, format_pct(b.metrics.S()).c_str(),
                    format_pct(b.metrics.N()).c_str(), format_pct(b.metrics.R()).c_str(),
                    format_pct(b.metrics.F()).c_str());
    }
    s += buf;
  }
  return s;
}

namespace {

std::string format_matrix(const std::vector<std::string>& labels,
                          const std::vector<std::vector<long>>& matrix) {
  std::size_t width = 6;
  for (const std::string& l : labels) width = std::max(width, l.size() + 1);
  std::string s(width, ' ');
  auto pad = [&](const std::string& cell) {
    std::string out = cell;
    while (out.size() < width) out = " " + out;
    return out;
  };
  for (const std::string& l : labels) s += pad(l);
  s += "\n";
  for (std::size_t i = 0; i < labels.size(); ++i) {
    std::string row = labels[i];
    while (row.size() < width) row += " ";
    for (std::size_t j = 0; j < labels.size(); ++j) row += pad(std::to_string(matrix[i][j]));
    s += row + "\n";
  }
  return s;
}

}  // namespace

std::string format_confusion(const ConfusionMatrices& matrices) {
  std::string s;
  s += "nuclearity confusion (rows = gold, columns = predicted, " +
       std::to_string(matrices.matched_pairs) + " matched pairs)\n";
  s += format_matrix(matrices.nuclearity_labels, matrices.nuclearity);
  s += "\nrelation confusion (rows = gold, columns = predicted)\n";
  s += format_matrix(matrices.relation_labels, matrices.relation);
  return s;
}

}  // namespace rstdp
