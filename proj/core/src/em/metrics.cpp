#include "emview/em/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <unordered_map>

#include "emview/error.hpp"

namespace emview::em {
namespace {

double entropy_of(const std::map<std::string, double>& counts, double n) {
  double h = 0.0;
  for (const auto& [label, c] : counts) {
    if (c > 0) h -= (c / n) * std::log(c / n);
  }
  return h;
}

}  // namespace

ClusteringScore evaluate_clustering(const Relation& clusters, const Relation& truth,
                                    std::string_view label_column) {
  const std::size_t ci = clusters.schema().index_of("id");
  const std::size_t ck = clusters.schema().index_of("k");
  const std::size_t ti = truth.schema().index_of("id");
  const std::size_t tl = truth.schema().index_of(label_column);

  std::unordered_map<std::string, std::string> label_of;
  for (const Row& row : truth.rows()) {
    if (!label_of.emplace(format_value(row[ti]), format_value(row[tl])).second) {
      fail(ErrorCode::LabelMismatch, "ground truth lists id " + format_value(row[ti]) + " twice");
    }
  }
  if (clusters.size() != label_of.size()) {
    fail(ErrorCode::LabelMismatch, "assignment covers " + std::to_string(clusters.size()) +
                                       " ids, ground truth " + std::to_string(label_of.size()));
  }
  std::map<std::pair<std::string, std::string>, double> joint;
  std::map<std::string, double> by_cluster;
  std::map<std::string, double> by_class;
  std::unordered_map<std::string, bool> seen;
  for (const Row& row : clusters.rows()) {
    const std::string id = format_value(row[ci]);
    auto it = label_of.find(id);
    if (it == label_of.end()) fail(ErrorCode::LabelMismatch, "id " + id + " has no ground truth");
    if (!seen.emplace(id, true).second) fail(ErrorCode::LabelMismatch, "id " + id + " assigned twice");
    const std::string k = format_value(row[ck]);
    joint[{k, it->second}] += 1.0;
    by_cluster[k] += 1.0;
    by_class[it->second] += 1.0;
  }
  const double n = static_cast<double>(clusters.size());
  ClusteringScore score;
  if (n == 0) return score;

  std::map<std::string, double> majority;
  for (const auto& [key, c] : joint) majority[key.first] = std::max(majority[key.first], c);
  double hits = 0.0;
  for (const auto& [k, c] : majority) hits += c;
  score.purity = hits / n;

  double mi = 0.0;
  for (const auto& [key, c] : joint) {
    mi += (c / n) * std::log(n * c / (by_cluster[key.first] * by_class[key.second]));
  }
  const double hc = entropy_of(by_cluster, n);
  const double ht = entropy_of(by_class, n);
  if (hc == 0.0 && ht == 0.0) {
    score.nmi = 1.0;
  } else if (hc == 0.0 || ht == 0.0) {
    score.nmi = 0.0;
  } else {
    score.nmi = std::clamp(mi / ((hc + ht) / 2.0), 0.0, 1.0);
  }
  return score;
}

}  // namespace emview::em
