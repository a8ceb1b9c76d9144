#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "specmatch/corpus.hpp"
#include "specmatch/geodesics.hpp"
#include "specmatch/mesh.hpp"
#include "specmatch/mlp.hpp"

namespace specmatch {

// Pair-classification statistics at threshold 0.5 * margin:
//   tnr  fraction of matching pairs classified non-matching,
//   fpr  fraction of non-matching pairs classified matching,
//   err  their sum; loss is the mean contrastive loss with hard labels.
struct Metrics {
  double loss = 0.0;
  double tnr = 0.0;
  double fpr = 0.0;
  double err = 0.0;
  int matching_pairs = 0;
  int non_matching_pairs = 0;
};

struct MatchRecord {
  int source = 0;
  int target = 0;
  double distance_sq = 0.0;
  bool accepted = false;  // within the distance threshold
  bool correct = false;   // additionally within the geodesic tolerance
};

struct MatchReport {
  std::vector<MatchRecord> pairs;  // one per evaluated source vertex
  int evaluated = 0;
  int accepted_count = 0;
  int correct_count = 0;
  double matching_accuracy = 0.0;  // correct / evaluated
  double shape_diameter = 0.0;
  double geodesic_tolerance = 0.0;  // absolute length used for acceptance
  std::optional<Metrics> metrics;
};

// Runs the trained branch over every row; output kind is Embedded.
DescriptorField embed_field(const MlpParams& params, const DescriptorField& field);

// For each source row, the target row minimizing Euclidean distance; ties
// break toward the lowest target index. accepted = within `threshold`
// (squared distance by default, plain distance when on_distance). A missing
// threshold accepts everything.
std::vector<MatchRecord> match_nearest(const Eigen::MatrixXd& source, const Eigen::MatrixXd& target,
                                       std::optional<double> threshold = 2.5, bool on_distance = false);

// Marks records whose matched target lies within tolerance_fraction of the
// target shape diameter (geodesically) from the ground-truth vertex.
// Returns the absolute tolerance used.
double filter_by_geodesic(std::vector<MatchRecord>& records, const TriMesh& target_mesh,
                          const std::vector<int>& ground_truth_target, double tolerance_fraction = 0.05);

Metrics metrics_from_embeddings(const Eigen::MatrixXd& embedded_f, const Eigen::MatrixXd& embedded_g,
                                const std::vector<std::uint8_t>& is_match, double margin,
                                bool threshold_on_distance = false);

// Embeds both sides of a labeled pair set and computes the metric block.
// Ground truth is the boolean match flag of each pair (hard labels).
Metrics classification_metrics(const MlpParams& params, const PairBatch& pairs, double margin,
                               bool threshold_on_distance = false);

struct MatchOptions {
  std::optional<double> threshold = 2.5;  // 0.5 * default margin, on squared distance
  bool threshold_on_distance = false;
  double geodesic_tolerance = 0.05;  // fraction of the target shape diameter
  double sample_fraction = 1.0;      // 1.0 evaluates every vertex
  std::uint64_t sample_seed = 1;
  const std::vector<std::uint8_t>* rigid_mask = nullptr;  // 1 = excluded from sampling
};

// Full pipeline over descriptor rows: (optional) vertex sampling, nearest
// neighbor with threshold rejection, geodesic-distortion acceptance against
// the ground truth, and the count / accuracy statistics.
MatchReport evaluate_matching(const Eigen::MatrixXd& source_desc, const Eigen::MatrixXd& target_desc,
                              const TriMesh& target_mesh, const std::vector<int>& ground_truth_target,
                              const MatchOptions& options = {});

std::string report_to_json(const MatchReport& report, bool include_pairs = true);

// Both models side by side with line elements connecting the correct
// matches; any OBJ viewer renders it.
std::string match_visualization_obj(const TriMesh& source_mesh, const TriMesh& target_mesh,
                                    const std::vector<MatchRecord>& records);

// Identity ground truth for registered pairs.
std::vector<int> identity_ground_truth(int vertex_count);

}  // namespace specmatch
