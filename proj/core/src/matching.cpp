#include "specmatch/matching.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include <json.hpp>

#include "specmatch/error.hpp"
#include "specmatch/parallel.hpp"
#include "specmatch/rng.hpp"

namespace specmatch {

using nlohmann::json;

DescriptorField embed_field(const MlpParams& params, const DescriptorField& field) {
  require(field.kind == params.input_kind, ErrorCode::KindMismatch,
          std::string("model expects ") + descriptor_kind_name(params.input_kind) + ", field is " +
              descriptor_kind_name(field.kind));
  require(field.dimension() == params.input_dim(), ErrorCode::DimensionMismatch,
          "field dimension " + std::to_string(field.dimension()) + " != model input " +
              std::to_string(params.input_dim()));
  DescriptorField out;
  out.kind = DescriptorKind::Embedded;
  out.values = forward_batch(params, field.values);
  out.params_json = std::string("{\"kind\":\"embedded\",\"source\":\"") +
                    descriptor_kind_name(params.input_kind) + "\"}";
  return out;
}

std::vector<MatchRecord> match_nearest(const Eigen::MatrixXd& source, const Eigen::MatrixXd& target,
                                       std::optional<double> threshold, bool on_distance) {
  require(source.cols() == target.cols(), ErrorCode::DimensionMismatch,
          "source and target descriptor dimensions differ");
  require(target.rows() > 0, ErrorCode::InvalidArgument, "empty target field");
  if (threshold) {
    require(*threshold >= 0.0, ErrorCode::InvalidArgument, "threshold must be nonnegative");
  }

  // Row-major copies so the scalar scan below walks contiguous memory. The
  // distance accumulation is a plain ordered loop on purpose: the brute-force
  // oracle must be able to reproduce every bit, ties included.
  const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> src = source;
  const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> tgt = target;
  const int n_source = static_cast<int>(src.rows());
  const int n_target = static_cast<int>(tgt.rows());
  const int dim = static_cast<int>(src.cols());

  std::vector<MatchRecord> records(static_cast<std::size_t>(n_source));
  parallel_for(static_cast<std::size_t>(n_source), [&](std::size_t begin, std::size_t end) {
    for (std::size_t s = begin; s < end; ++s) {
      const double* srow = src.data() + s * static_cast<std::size_t>(dim);
      int best = 0;
      double best_d2 = std::numeric_limits<double>::infinity();
      for (int t = 0; t < n_target; ++t) {
        const double* trow = tgt.data() + static_cast<std::size_t>(t) * dim;
        double d2 = 0.0;
        for (int c = 0; c < dim; ++c) {
          const double diff = srow[c] - trow[c];
          d2 += diff * diff;
        }
        if (d2 < best_d2) {  // strict: first minimum wins, i.e. lowest index
          best_d2 = d2;
          best = t;
        }
      }
      MatchRecord& rec = records[s];
      rec.source = static_cast<int>(s);
      rec.target = best;
      rec.distance_sq = best_d2;
      const double measure = on_distance ? std::sqrt(best_d2) : best_d2;
      rec.accepted = !threshold || measure <= *threshold;
    }
  });
  return records;
}

double filter_by_geodesic(std::vector<MatchRecord>& records, const TriMesh& target_mesh,
                          const std::vector<int>& ground_truth_target, double tolerance_fraction) {
  require(tolerance_fraction >= 0.0, ErrorCode::InvalidArgument, "tolerance must be nonnegative");
  const GeodesicSolver solver(target_mesh);
  const double diameter = solver.shape_diameter();
  const double tolerance = tolerance_fraction * diameter;

  // one Dijkstra per distinct ground-truth vertex
  std::map<int, std::vector<std::size_t>> by_truth;
  for (std::size_t i = 0; i < records.size(); ++i) {
    MatchRecord& rec = records[i];
    rec.correct = false;
    if (!rec.accepted) continue;
    require(rec.source >= 0 && rec.source < static_cast<int>(ground_truth_target.size()),
            ErrorCode::IndexOutOfRange, "match source outside ground-truth table");
    const int truth = ground_truth_target[static_cast<std::size_t>(rec.source)];
    require(truth >= 0 && truth < target_mesh.vertex_count(), ErrorCode::IndexOutOfRange,
            "ground-truth vertex out of range");
    require(rec.target >= 0 && rec.target < target_mesh.vertex_count(), ErrorCode::IndexOutOfRange,
            "matched vertex out of range");
    by_truth[truth].push_back(i);
  }

  std::vector<std::pair<int, std::vector<std::size_t>>> groups(by_truth.begin(), by_truth.end());
  parallel_for(groups.size(), [&](std::size_t begin, std::size_t end) {
    for (std::size_t g = begin; g < end; ++g) {
      const GeodesicField field = solver.distances_from(groups[g].first);
      for (const std::size_t i : groups[g].second) {
        records[i].correct = field.distances[records[i].target] <= tolerance;
      }
    }
  });
  return tolerance;
}

Metrics metrics_from_embeddings(const Eigen::MatrixXd& embedded_f, const Eigen::MatrixXd& embedded_g,
                                const std::vector<std::uint8_t>& is_match, double margin,
                                bool threshold_on_distance) {
  const auto count = embedded_f.rows();
  require(count > 0, ErrorCode::EmptyTestSet, "no pairs to evaluate");
  require(embedded_g.rows() == count && static_cast<Eigen::Index>(is_match.size()) == count,
          ErrorCode::DimensionMismatch, "pair sides and labels must agree");
  require(margin > 0.0, ErrorCode::InvalidArgument, "margin must be positive");

  const double threshold = 0.5 * margin;
  Metrics metrics;
  double loss_total = 0.0;
  int tn = 0, fp = 0;
  for (Eigen::Index k = 0; k < count; ++k) {
    const double d2 = (embedded_f.row(k) - embedded_g.row(k)).squaredNorm();
    const double y = is_match[static_cast<std::size_t>(k)] ? 1.0 : 0.0;
    loss_total += y * d2 + (1.0 - y) * std::max(0.0, margin - d2);
    const double measure = threshold_on_distance ? std::sqrt(d2) : d2;
    const bool classified_matching = measure <= threshold;
    if (is_match[static_cast<std::size_t>(k)]) {
      ++metrics.matching_pairs;
      if (!classified_matching) ++tn;
    } else {
      ++metrics.non_matching_pairs;
      if (classified_matching) ++fp;
    }
  }
  metrics.loss = loss_total / static_cast<double>(count);
  metrics.tnr = metrics.matching_pairs > 0 ? static_cast<double>(tn) / metrics.matching_pairs : 0.0;
  metrics.fpr = metrics.non_matching_pairs > 0 ? static_cast<double>(fp) / metrics.non_matching_pairs : 0.0;
  metrics.err = metrics.tnr + metrics.fpr;
  return metrics;
}

Metrics classification_metrics(const MlpParams& params, const PairBatch& pairs, double margin,
                               bool threshold_on_distance) {
  require(pairs.size() > 0, ErrorCode::EmptyTestSet, "no pairs to evaluate");
  std::vector<std::uint8_t> is_match(static_cast<std::size_t>(pairs.size()));
  for (int k = 0; k < pairs.size(); ++k) is_match[static_cast<std::size_t>(k)] = pairs.pair_is_match(k) ? 1 : 0;
  const Eigen::MatrixXd ef = forward_batch(params, pairs.rows_f);
  const Eigen::MatrixXd eg = forward_batch(params, pairs.rows_g);
  return metrics_from_embeddings(ef, eg, is_match, margin, threshold_on_distance);
}

std::vector<int> identity_ground_truth(int vertex_count) {
  std::vector<int> truth(static_cast<std::size_t>(vertex_count));
  std::iota(truth.begin(), truth.end(), 0);
  return truth;
}

MatchReport evaluate_matching(const Eigen::MatrixXd& source_desc, const Eigen::MatrixXd& target_desc,
                              const TriMesh& target_mesh, const std::vector<int>& ground_truth_target,
                              const MatchOptions& options) {
  const int n_source = static_cast<int>(source_desc.rows());
  require(static_cast<int>(ground_truth_target.size()) == n_source, ErrorCode::DimensionMismatch,
          "ground truth must cover every source vertex");
  require(target_desc.rows() == target_mesh.vertex_count(), ErrorCode::DimensionMismatch,
          "target descriptors and mesh disagree on vertex count");
  require(options.sample_fraction > 0.0 && options.sample_fraction <= 1.0, ErrorCode::InvalidArgument,
          "sample fraction must be in (0, 1]");
  if (options.rigid_mask) {
    require(static_cast<int>(options.rigid_mask->size()) == n_source, ErrorCode::DimensionMismatch,
            "rigid mask must cover every source vertex");
  }

  // candidate source pool, mask excluded
  std::vector<int> pool;
  pool.reserve(static_cast<std::size_t>(n_source));
  for (int v = 0; v < n_source; ++v) {
    if (options.rigid_mask && (*options.rigid_mask)[static_cast<std::size_t>(v)]) continue;
    pool.push_back(v);
  }
  require(!pool.empty(), ErrorCode::EmptySample, "every vertex is masked out");

  std::vector<int> selected;
  if (options.sample_fraction >= 1.0) {
    selected = pool;
  } else {
    const int want = static_cast<int>(options.sample_fraction * n_source);
    require(want >= 1, ErrorCode::EmptySample, "sample fraction selects zero vertices");
    const int take = std::min<int>(want, static_cast<int>(pool.size()));
    Rng rng(options.sample_seed);
    // partial Fisher-Yates
    for (int i = 0; i < take; ++i) {
      const auto j = i + static_cast<int>(rng.next_below(pool.size() - static_cast<std::size_t>(i)));
      std::swap(pool[static_cast<std::size_t>(i)], pool[static_cast<std::size_t>(j)]);
    }
    selected.assign(pool.begin(), pool.begin() + take);
    std::sort(selected.begin(), selected.end());
  }

  Eigen::MatrixXd rows(static_cast<int>(selected.size()), source_desc.cols());
  for (std::size_t i = 0; i < selected.size(); ++i) rows.row(static_cast<int>(i)) = source_desc.row(selected[i]);

  MatchReport report;
  report.pairs = match_nearest(rows, target_desc, options.threshold, options.threshold_on_distance);
  for (std::size_t i = 0; i < selected.size(); ++i) {
    report.pairs[i].source = selected[i];  // restore original vertex ids
  }
  report.geodesic_tolerance =
      filter_by_geodesic(report.pairs, target_mesh, ground_truth_target, options.geodesic_tolerance);
  report.shape_diameter = options.geodesic_tolerance > 0.0
                              ? report.geodesic_tolerance / options.geodesic_tolerance
                              : shape_diameter(target_mesh);

  report.evaluated = static_cast<int>(report.pairs.size());
  for (const auto& rec : report.pairs) {
    report.accepted_count += rec.accepted ? 1 : 0;
    report.correct_count += rec.correct ? 1 : 0;
  }
  report.matching_accuracy =
      report.evaluated > 0 ? static_cast<double>(report.correct_count) / report.evaluated : 0.0;
  return report;
}

std::string report_to_json(const MatchReport& report, bool include_pairs) {
  json j;
  j["evaluated"] = report.evaluated;
  j["accepted"] = report.accepted_count;
  j["correct"] = report.correct_count;
  j["matching_accuracy"] = report.matching_accuracy;
  j["shape_diameter"] = report.shape_diameter;
  j["geodesic_tolerance"] = report.geodesic_tolerance;
  if (report.metrics) {
    j["metrics"] = {{"loss", report.metrics->loss}, {"tnr", report.metrics->tnr},
                    {"fpr", report.metrics->fpr},  {"err", report.metrics->err},
                    {"matching_pairs", report.metrics->matching_pairs},
                    {"non_matching_pairs", report.metrics->non_matching_pairs}};
  }
  if (include_pairs) {
    json pairs = json::array();
    for (const auto& rec : report.pairs) {
      pairs.push_back({{"source", rec.source},
                       {"target", rec.target},
                       {"distance_sq", rec.distance_sq},
                       {"accepted", rec.accepted},
                       {"correct", rec.correct}});
    }
    j["pairs"] = std::move(pairs);
  }
  return j.dump(2);
}

std::string match_visualization_obj(const TriMesh& source_mesh, const TriMesh& target_mesh,
                                    const std::vector<MatchRecord>& records) {
  // place the target to the right of the source with a margin
  const double src_max_x = source_mesh.vertices.col(0).maxCoeff();
  const double tgt_min_x = target_mesh.vertices.col(0).minCoeff();
  const double src_span = src_max_x - source_mesh.vertices.col(0).minCoeff();
  const double offset = src_max_x - tgt_min_x + 0.3 * std::max(src_span, 1e-9);

  std::string out;
  char buf[160];
  for (int i = 0; i < source_mesh.vertex_count(); ++i) {
    std::snprintf(buf, sizeof buf, "v %.9g %.9g %.9g\n", source_mesh.vertices(i, 0), source_mesh.vertices(i, 1),
                  source_mesh.vertices(i, 2));
    out += buf;
  }
  for (int i = 0; i < target_mesh.vertex_count(); ++i) {
    std::snprintf(buf, sizeof buf, "v %.9g %.9g %.9g\n", target_mesh.vertices(i, 0) + offset,
                  target_mesh.vertices(i, 1), target_mesh.vertices(i, 2));
    out += buf;
  }
  const int shift = source_mesh.vertex_count();
  for (int f = 0; f < source_mesh.face_count(); ++f) {
    std::snprintf(buf, sizeof buf, "f %d %d %d\n", source_mesh.faces(f, 0) + 1, source_mesh.faces(f, 1) + 1,
                  source_mesh.faces(f, 2) + 1);
    out += buf;
  }
  for (int f = 0; f < target_mesh.face_count(); ++f) {
    std::snprintf(buf, sizeof buf, "f %d %d %d\n", target_mesh.faces(f, 0) + shift + 1,
                  target_mesh.faces(f, 1) + shift + 1, target_mesh.faces(f, 2) + shift + 1);
    out += buf;
  }
  for (const auto& rec : records) {
    if (!rec.correct) continue;
    std::snprintf(buf, sizeof buf, "l %d %d\n", rec.source + 1, rec.target + shift + 1);
    out += buf;
  }
  return out;
}

}  // namespace specmatch
