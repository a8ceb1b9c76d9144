// Command-line front end: descriptor computation, dimensionality analysis,
// training, embedding, matching, evaluation, and synthetic corpus generation.

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "specmatch/corpus.hpp"
#include "specmatch/descriptors.hpp"
#include "specmatch/error.hpp"
#include "specmatch/geodesics.hpp"
#include "specmatch/intrinsic_dim.hpp"
#include "specmatch/laplace.hpp"
#include "specmatch/matching.hpp"
#include "specmatch/mesh_io.hpp"
#include "specmatch/mlp.hpp"
#include "specmatch/parallel.hpp"
#include "specmatch/synth.hpp"
#include "specmatch/train.hpp"

namespace {

using namespace specmatch;
using nlohmann::json;

struct GlobalOptions {
  std::uint64_t seed = 1;
  int threads = 1;
  int verbosity = 0;
};

GlobalOptions g_options;

void note(const std::string& message) {
  if (g_options.verbosity > 0) std::cerr << message << "\n";
}

// Spectrum with .lbs caching; a cached file is reused only if it still
// satisfies the eigen-residual bound for freshly assembled operators.
LaplaceSpectrum cached_spectrum(const std::filesystem::path& mesh_path, const TriMesh& mesh, int modes,
                                bool force_recompute) {
  const OperatorPair ops = build_operators(mesh);
  if (ops.clamped_cotangents > 0) {
    std::cerr << "warning: " << mesh_path.string() << ": clamped " << ops.clamped_cotangents
              << " near-degenerate cotangents\n";
  }
  const auto cache = spectrum_cache_path(mesh_path);
  if (!force_recompute && std::filesystem::exists(cache)) {
    try {
      LaplaceSpectrum spectrum = load_spectrum(cache);
      if (spectrum.mode_count() >= modes && spectrum_consistent(spectrum, ops)) {
        note("reusing spectrum cache " + cache.string());
        return spectrum;
      }
      note("spectrum cache stale, recomputing: " + cache.string());
    } catch (const Error&) {
      note("spectrum cache unreadable, recomputing: " + cache.string());
    }
  }
  LaplaceSpectrum spectrum = compute_spectrum(ops, modes);
  save_spectrum(spectrum, cache);
  return spectrum;
}

struct DescriptorFlags {
  DescriptorParams params;
  std::string kind_name = "hks";

  DescriptorKind kind() const { return descriptor_kind_from_name(kind_name); }

  void attach(CLI::App* cmd, bool with_kind = true) {
    if (with_kind) {
      cmd->add_option("--kind", kind_name, "descriptor kind: gps, hks, wks")
          ->check(CLI::IsMember({"gps", "hks", "wks"}))
          ->capture_default_str();
    }
    cmd->add_option("--modes", params.k_modes, "eigenpairs for hks/wks")->capture_default_str();
    cmd->add_option("--samples", params.samples, "time/energy samples for hks/wks")->capture_default_str();
    cmd->add_option("--gps-n", params.gps_components, "GPS components")->capture_default_str();
    cmd->add_option("--sigma-mult", params.wks_sigma_multiple, "WKS sigma as a multiple of the energy spacing")
        ->capture_default_str();
    cmd->add_flag_callback("--no-wks-normalize", [this] { params.wks_normalize = false; },
                           "emit the unnormalized WKS bands");
  }
};

DescriptorField compute_descriptor(const std::filesystem::path& mesh_path, const TriMesh& mesh,
                                   DescriptorKind kind, const DescriptorParams& params, bool force) {
  const int modes = kind == DescriptorKind::Gps ? params.gps_components + 1 : params.k_modes;
  const LaplaceSpectrum spectrum = cached_spectrum(mesh_path, mesh, modes, force);
  DescriptorField field;
  switch (kind) {
    case DescriptorKind::Gps: field = gps(spectrum, params.gps_components); break;
    case DescriptorKind::Hks:
      field = hks(spectrum, HksSchedule::from_spectrum(spectrum, params.samples, params.k_modes));
      break;
    case DescriptorKind::Wks:
      field = wks(spectrum, WksSchedule::from_spectrum(spectrum, params.samples, params.k_modes,
                                                       params.wks_sigma_multiple, params.wks_normalize));
      break;
    case DescriptorKind::Embedded:
      fail(ErrorCode::InvalidArgument, "embedded fields come from `embed`");
  }
  field.params_json = descriptor_cache_key(kind, params, mesh_content_hash(mesh));
  return field;
}

// Descriptor field with .dsc caching keyed by mesh hash + parameters.
DescriptorField cached_descriptor(const std::filesystem::path& mesh_path, DescriptorKind kind,
                                  const DescriptorParams& params, bool force) {
  const TriMesh mesh = load_mesh(mesh_path);
  const auto cache = descriptor_cache_path(mesh_path, kind);
  const std::string wanted_key = descriptor_cache_key(kind, params, mesh_content_hash(mesh));
  if (!force && std::filesystem::exists(cache)) {
    try {
      DescriptorField field = load_descriptors(cache);
      if (field.params_json == wanted_key && field.vertex_count() == mesh.vertex_count()) {
        note("reusing descriptor cache " + cache.string());
        return field;
      }
    } catch (const Error&) {
    }
    note("descriptor cache stale, recomputing: " + cache.string());
  }
  DescriptorField field = compute_descriptor(mesh_path, mesh, kind, params, force);
  save_descriptors(field, cache);
  note("wrote " + cache.string());
  return field;
}

std::vector<int> load_ground_truth(const std::string& spec_string, int vertex_count) {
  if (spec_string == "identity") return identity_ground_truth(vertex_count);
  std::ifstream in(spec_string);
  require(in.good(), ErrorCode::MissingFile, spec_string);
  std::vector<int> truth;
  long value;
  while (in >> value) {
    require(value >= 0, ErrorCode::ParseError, "negative ground-truth index");
    truth.push_back(static_cast<int>(value));
  }
  require(static_cast<int>(truth.size()) == vertex_count, ErrorCode::DimensionMismatch,
          "ground-truth file must list one target per source vertex");
  return truth;
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path);
  require(out.good(), ErrorCode::IoError, "cannot write " + path.string());
  out << text;
  require(out.good(), ErrorCode::IoError, "write failed for " + path.string());
}

// --config FILE: JSON {"global": {...}, "<subcommand>": {...}} injected as
// arguments ahead of the user-provided flags, so explicit flags win.
std::vector<std::string> splice_config(std::vector<std::string> args, const std::vector<std::string>& commands) {
  std::string config_path;
  for (std::size_t i = 0; i + 1 < args.size(); ++i) {
    if (args[i] == "--config") {
      config_path = args[i + 1];
      args.erase(args.begin() + static_cast<long>(i), args.begin() + static_cast<long>(i) + 2);
      break;
    }
  }
  if (config_path.empty()) return args;

  std::ifstream in(config_path);
  require(in.good(), ErrorCode::MissingFile, config_path);
  json config;
  try {
    in >> config;
  } catch (const json::exception& e) {
    fail(ErrorCode::ParseError, "config " + config_path + ": " + e.what());
  }
  require(config.is_object(), ErrorCode::ParseError, "config root must be a JSON object");

  auto to_args = [](const json& section) {
    std::vector<std::string> out;
    for (const auto& [key, value] : section.items()) {
      const std::string flag = "--" + key;
      if (value.is_boolean()) {
        if (value.get<bool>()) out.push_back(flag);
      } else {
        out.push_back(flag + "=" + (value.is_string() ? value.get<std::string>() : value.dump()));
      }
    }
    return out;
  };

  std::size_t sub_at = args.size();
  std::string sub_name;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (std::find(commands.begin(), commands.end(), args[i]) != commands.end()) {
      sub_at = i;
      sub_name = args[i];
      break;
    }
  }

  std::vector<std::string> result;
  if (config.contains("global")) {
    const auto injected = to_args(config["global"]);
    result.insert(result.end(), injected.begin(), injected.end());
  }
  result.insert(result.end(), args.begin(), args.begin() + static_cast<long>(sub_at));
  if (sub_at < args.size()) {
    result.push_back(args[sub_at]);
    if (!sub_name.empty() && config.contains(sub_name)) {
      const auto injected = to_args(config[sub_name]);
      result.insert(result.end(), injected.begin(), injected.end());
    }
    result.insert(result.end(), args.begin() + static_cast<long>(sub_at) + 1, args.end());
  }
  return result;
}

int run(int argc, char** argv) {
  CLI::App app{"spectral shape descriptors, Siamese metric embedding, and correspondence evaluation"};
  app.require_subcommand(1);
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  app.add_option("--seed", g_options.seed, "global random seed")->capture_default_str();
  app.add_option("--threads", g_options.threads, "worker-thread cap for data-parallel stages")
      ->capture_default_str();
  app.add_flag("-v,--verbose", g_options.verbosity, "progress notes on stderr");
  app.set_help_all_flag("--help-all");

  // ---- spectrum ----
  auto* spectrum_cmd = app.add_subcommand("spectrum", "compute and cache the Laplace-Beltrami spectrum");
  spectrum_cmd->option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  std::string spectrum_mesh;
  int spectrum_modes = 300;
  std::string spectrum_out;
  bool spectrum_force = false;
  spectrum_cmd->add_option("mesh", spectrum_mesh, "mesh file (obj/off/ply)")->required();
  spectrum_cmd->add_option("--modes", spectrum_modes, "eigenpair count")->capture_default_str();
  spectrum_cmd->add_option("--out", spectrum_out, "output path (default <mesh>.lbs)");
  spectrum_cmd->add_flag("--force", spectrum_force, "ignore caches");
  spectrum_cmd->callback([&] {
    const TriMesh mesh = load_mesh(spectrum_mesh);
    const LaplaceSpectrum spectrum = cached_spectrum(spectrum_mesh, mesh, spectrum_modes, spectrum_force);
    const auto out = spectrum_out.empty() ? spectrum_cache_path(spectrum_mesh)
                                          : std::filesystem::path(spectrum_out);
    save_spectrum(spectrum, out);
    std::cout << out.string() << " n=" << spectrum.vertex_count() << " m=" << spectrum.mode_count()
              << " lambda1=" << (spectrum.mode_count() > 1 ? spectrum.eigenvalues[1] : 0.0) << "\n";
  });

  // ---- descriptors ----
  auto* desc_cmd = app.add_subcommand("descriptors", "compute per-vertex descriptor fields");
  desc_cmd->option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  std::vector<std::string> desc_meshes;
  auto desc_flags = std::make_shared<DescriptorFlags>();
  bool desc_force = false;
  desc_cmd->add_option("meshes", desc_meshes, "mesh files")->required();
  desc_flags->attach(desc_cmd);
  desc_cmd->add_flag("--force", desc_force, "ignore caches");
  desc_cmd->callback([&, desc_flags] {
    for (const auto& mesh_path : desc_meshes) {
      const DescriptorField field =
          cached_descriptor(mesh_path, desc_flags->kind(), desc_flags->params, desc_force);
      const auto out = descriptor_cache_path(mesh_path, desc_flags->kind());
      std::cout << out.string() << " n=" << field.vertex_count() << " d=" << field.dimension() << "\n";
    }
  });

  // ---- intrinsic-dim ----
  auto* dim_cmd = app.add_subcommand("intrinsic-dim", "local-PCA intrinsic dimensionality analysis");
  dim_cmd->option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  std::vector<std::string> dim_dsc_files;
  std::string dim_manifest;
  auto dim_flags = std::make_shared<DescriptorFlags>();
  int dim_samples = 10000, dim_k = 10, dim_trials = 200;
  double dim_threshold = 0.99;
  std::string dim_csv;
  dim_cmd->add_option("--dsc", dim_dsc_files, "descriptor files to pool samples from");
  dim_cmd->add_option("--manifest", dim_manifest, "corpus manifest (descriptors computed as needed)");
  dim_flags->attach(dim_cmd);
  dim_cmd->add_option("--pool", dim_samples, "sample pool size drawn from all vertices")->capture_default_str();
  dim_cmd->add_option("--k-neighbors", dim_k, "neighborhood size")->capture_default_str();
  dim_cmd->add_option("--trials", dim_trials, "local PCA trials")->capture_default_str();
  dim_cmd->add_option("--threshold", dim_threshold, "variance fraction")->capture_default_str();
  dim_cmd->add_option("--csv", dim_csv, "write residual curves as CSV");
  dim_cmd->callback([&, dim_flags] {
    std::vector<Eigen::MatrixXd> blocks;
    if (!dim_manifest.empty()) {
      Corpus corpus = build_corpus(dim_manifest);
      ensure_descriptors(corpus, dim_flags->kind(), dim_flags->params);
      for (int m = 0; m < corpus.model_count(); ++m) {
        blocks.push_back(corpus.descriptors(m, dim_flags->kind()).values);
      }
    }
    for (const auto& file : dim_dsc_files) blocks.push_back(load_descriptors(file).values);
    require(!blocks.empty(), ErrorCode::InvalidArgument, "need --manifest or --dsc inputs");
    const int d = static_cast<int>(blocks.front().cols());
    int total = 0;
    for (const auto& b : blocks) {
      require(static_cast<int>(b.cols()) == d, ErrorCode::DimensionMismatch,
              "descriptor dimensions differ across inputs");
      total += static_cast<int>(b.rows());
    }
    Eigen::MatrixXd pool(total, d);
    int at = 0;
    for (const auto& b : blocks) {
      pool.middleRows(at, static_cast<int>(b.rows())) = b;
      at += static_cast<int>(b.rows());
    }
    if (total > dim_samples) {
      Rng rng(g_options.seed);
      Eigen::MatrixXd sub(dim_samples, d);
      std::vector<int> order(static_cast<std::size_t>(total));
      for (int i = 0; i < total; ++i) order[static_cast<std::size_t>(i)] = i;
      for (int i = 0; i < dim_samples; ++i) {
        const auto j = i + static_cast<int>(rng.next_below(static_cast<std::uint64_t>(total - i)));
        std::swap(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(j)]);
        sub.row(i) = pool.row(order[static_cast<std::size_t>(i)]);
      }
      pool = std::move(sub);
    }
    const DimReport report =
        estimate_intrinsic_dimension(pool, dim_k, dim_threshold, dim_trials, g_options.seed);
    if (!dim_csv.empty()) write_file(dim_csv, dim_report_csv(report));
    std::cout << "samples=" << pool.rows() << " k=" << dim_k << " trials=" << dim_trials
              << " summary_dimension=" << report.summary_dimension
              << " modal_dimension=" << report.modal_dimension << "\n";
  });

  // ---- train ----
  auto* train_cmd = app.add_subcommand("train", "train the Siamese embedding on a registered corpus");
  train_cmd->option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  std::string train_manifest, train_out = "model.smn", train_history;
  auto train_flags = std::make_shared<DescriptorFlags>();
  auto train_config = std::make_shared<TrainConfig>();
  train_cmd->add_option("--manifest", train_manifest, "corpus manifest")->required();
  train_cmd->add_option("--out", train_out, "model output path")->capture_default_str();
  train_cmd->add_option("--history", train_history, "training history CSV path");
  train_flags->attach(train_cmd);
  train_cmd->add_option("--iterations", train_config->iterations)->capture_default_str();
  train_cmd->add_option("--batch", train_config->batch_size)->capture_default_str();
  train_cmd->add_option("--margin", train_config->margin)->capture_default_str();
  train_cmd->add_option("--lr", train_config->lr0)->capture_default_str();
  train_cmd->add_option("--decay", train_config->lr_decay)->capture_default_str();
  train_cmd->add_option("--soft-max", train_config->soft_label_max)->capture_default_str();
  train_cmd->add_option("--h1", train_config->hidden1, "first hidden width (0 = per-kind default)")
      ->capture_default_str();
  train_cmd->add_option("--h2", train_config->hidden2, "second hidden width (0 = per-kind default)")
      ->capture_default_str();
  train_cmd->add_option("--embedding-dim", train_config->embedding_dim)->capture_default_str();
  train_cmd->add_option("--cadence", train_config->eval_cadence, "validation metric period (0 = off)")
      ->capture_default_str();
  train_cmd->add_option("--val-pairs", train_config->eval_pairs)->capture_default_str();
  train_cmd->add_flag_callback("--no-standardize", [train_config] { train_config->standardize_inputs = false; },
                               "feed raw descriptors to the network");
  train_cmd->callback([&, train_flags, train_config] {
    Corpus corpus = build_corpus(train_manifest);
    ensure_descriptors(corpus, train_flags->kind(), train_flags->params);
    train_config->seed = g_options.seed;
    const TrainResult result = train(corpus, train_flags->kind(), *train_config);
    save_model(result.params, train_out);
    if (!train_history.empty()) write_file(train_history, history_csv(result.history, *train_config));
    double final_loss = result.history.train_loss.empty() ? 0.0 : result.history.train_loss.back();
    std::cout << train_out << " iterations=" << result.history.train_loss.size()
              << " final_loss=" << final_loss << "\n";
  });

  // ---- embed ----
  auto* embed_cmd = app.add_subcommand("embed", "map a descriptor field through a trained model");
  embed_cmd->option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  std::string embed_model, embed_in, embed_out;
  embed_cmd->add_option("--model", embed_model, "SMN1 model file")->required();
  embed_cmd->add_option("--dsc", embed_in, "input descriptor file")->required();
  embed_cmd->add_option("--out", embed_out, "output descriptor file")->required();
  embed_cmd->callback([&] {
    const MlpParams params = load_model(embed_model);
    const DescriptorField field = load_descriptors(embed_in);
    const DescriptorField embedded = embed_field(params, field);
    save_descriptors(embedded, embed_out);
    std::cout << embed_out << " n=" << embedded.vertex_count() << " d=" << embedded.dimension() << "\n";
  });

  // ---- match ----
  auto* match_cmd = app.add_subcommand("match", "nearest-neighbor correspondence with acceptance tests");
  match_cmd->option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  std::string match_source, match_target, match_model, match_truth = "identity", match_mode = "count";
  std::string match_report_path, match_vis_path, match_mask_path;
  auto match_flags = std::make_shared<DescriptorFlags>();
  bool match_raw = false, match_no_threshold = false, match_threshold_on_distance = false;
  bool match_no_pairs = false;
  double match_threshold = 2.5, match_geo_tol = 0.05, match_fraction = 0.10;
  match_cmd->add_option("--source", match_source, "source mesh")->required();
  match_cmd->add_option("--target", match_target, "target mesh")->required();
  match_cmd->add_option("--model", match_model, "trained model (omit with --raw)");
  match_cmd->add_flag("--raw", match_raw, "match raw descriptors without embedding");
  match_flags->attach(match_cmd);
  match_cmd->add_option("--mode", match_mode, "count (all vertices) or accuracy (sampled)")
      ->check(CLI::IsMember({"count", "accuracy"}))
      ->capture_default_str();
  match_cmd->add_option("--sample-fraction", match_fraction, "vertex fraction in accuracy mode")
      ->capture_default_str();
  match_cmd->add_option("--threshold", match_threshold, "distance acceptance threshold (squared distance)")
      ->capture_default_str();
  match_cmd->add_flag("--no-threshold", match_no_threshold, "skip the distance rejection stage");
  match_cmd->add_flag("--threshold-on-distance", match_threshold_on_distance,
                      "compare plain distance instead of squared distance");
  match_cmd->add_option("--geo-tol", match_geo_tol, "geodesic tolerance as a fraction of shape diameter")
      ->capture_default_str();
  match_cmd->add_option("--ground-truth", match_truth, "'identity' or a per-source target index file")
      ->capture_default_str();
  match_cmd->add_option("--rigid-mask", match_mask_path, "vertex-index file of excluded vertices");
  match_cmd->add_option("--report", match_report_path, "write the full report as JSON");
  match_cmd->add_flag("--no-pairs", match_no_pairs, "omit per-pair records from the JSON report");
  match_cmd->add_option("--export-vis", match_vis_path, "write side-by-side OBJ with match lines");
  match_cmd->callback([&, match_flags] {
    require(match_raw || !match_model.empty(), ErrorCode::InvalidArgument,
            "provide --model or pass --raw");
    const TriMesh source_mesh = load_mesh(match_source);
    const TriMesh target_mesh = load_mesh(match_target);
    DescriptorField source_field =
        cached_descriptor(match_source, match_flags->kind(), match_flags->params, false);
    DescriptorField target_field =
        cached_descriptor(match_target, match_flags->kind(), match_flags->params, false);
    if (!match_raw) {
      const MlpParams params = load_model(match_model);
      source_field = embed_field(params, source_field);
      target_field = embed_field(params, target_field);
    }

    MatchOptions options;
    if (match_no_threshold) {
      options.threshold.reset();
    } else {
      options.threshold = match_threshold;
    }
    options.threshold_on_distance = match_threshold_on_distance;
    options.geodesic_tolerance = match_geo_tol;
    options.sample_fraction = (match_mode == "accuracy") ? match_fraction : 1.0;
    options.sample_seed = g_options.seed;
    std::vector<std::uint8_t> mask;
    if (!match_mask_path.empty()) {
      mask = load_rigid_mask(match_mask_path, source_mesh.vertex_count());
      options.rigid_mask = &mask;
    }
    const std::vector<int> truth = load_ground_truth(match_truth, source_mesh.vertex_count());
    const MatchReport report =
        evaluate_matching(source_field.values, target_field.values, target_mesh, truth, options);

    if (!match_report_path.empty()) write_file(match_report_path, report_to_json(report, !match_no_pairs));
    if (!match_vis_path.empty()) {
      write_file(match_vis_path, match_visualization_obj(source_mesh, target_mesh, report.pairs));
    }
    std::cout << "evaluated=" << report.evaluated << " accepted=" << report.accepted_count
              << " correct=" << report.correct_count << " accuracy=" << report.matching_accuracy << "\n";
  });

  // ---- eval ----
  auto* eval_cmd = app.add_subcommand("eval", "pair-classification metrics of a trained model");
  eval_cmd->option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  std::string eval_manifest, eval_model, eval_csv;
  auto eval_flags = std::make_shared<DescriptorFlags>();
  int eval_pairs = 2048;
  double eval_margin = 5.0;
  bool eval_threshold_on_distance = false;
  eval_cmd->add_option("--manifest", eval_manifest, "corpus manifest")->required();
  eval_cmd->add_option("--model", eval_model, "SMN1 model file")->required();
  eval_flags->attach(eval_cmd);
  eval_cmd->add_option("--pairs", eval_pairs, "labeled pairs to sample")->capture_default_str();
  eval_cmd->add_option("--margin", eval_margin)->capture_default_str();
  eval_cmd->add_flag("--threshold-on-distance", eval_threshold_on_distance,
                     "classify on plain distance instead of squared distance");
  eval_cmd->add_option("--csv", eval_csv, "write the metric block as CSV");
  eval_cmd->callback([&, eval_flags] {
    Corpus corpus = build_corpus(eval_manifest);
    ensure_descriptors(corpus, eval_flags->kind(), eval_flags->params);
    const MlpParams params = load_model(eval_model);
    Rng rng(g_options.seed);
    std::vector<PairBatch> chunks;
    int remaining = eval_pairs;
    while (remaining > 0) {
      const int chunk = std::min(remaining, 512);
      chunks.push_back(sample_batch(corpus, eval_flags->kind(), chunk % 2 ? chunk + 1 : chunk, rng));
      remaining -= chunks.back().size();
    }
    const PairBatch pairs = PairBatch::concatenate(chunks);
    const Metrics metrics = classification_metrics(params, pairs, eval_margin, eval_threshold_on_distance);
    if (!eval_csv.empty()) {
      write_file(eval_csv, "loss,tnr,fpr,err\n" + std::to_string(metrics.loss) + "," +
                               std::to_string(metrics.tnr) + "," + std::to_string(metrics.fpr) + "," +
                               std::to_string(metrics.err) + "\n");
    }
    std::cout << "pairs=" << pairs.size() << " loss=" << metrics.loss << " tnr=" << metrics.tnr
              << " fpr=" << metrics.fpr << " err=" << metrics.err << "\n";
  });

  // ---- synth-corpus ----
  auto* synth_cmd = app.add_subcommand("synth-corpus", "generate a registered synthetic corpus");
  synth_cmd->option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  std::string synth_out;
  auto synth_options = std::make_shared<SynthOptions>();
  synth_cmd->add_option("--out", synth_out, "output directory")->required();
  synth_cmd->add_option("--subjects", synth_options->subjects)->capture_default_str();
  synth_cmd->add_option("--poses", synth_options->poses)->capture_default_str();
  synth_cmd->add_option("--subdiv", synth_options->subdivisions)->capture_default_str();
  synth_cmd->add_option("--strength", synth_options->subject_strength, "subject metric distortion scale")
      ->capture_default_str();
  synth_cmd->add_option("--pose-strength", synth_options->pose_strength, "pose bend/twist scale")
      ->capture_default_str();
  synth_cmd->callback([&, synth_options] {
    synth_options->seed = g_options.seed;
    const SynthCorpus corpus = make_synth_corpus(*synth_options);
    const auto manifest = write_synth_corpus(corpus, synth_out);
    std::cout << manifest.string() << " models=" << corpus.meshes.size()
              << " vertices=" << corpus.base.vertex_count() << "\n";
  });

  std::vector<std::string> command_names;
  for (auto* sub : app.get_subcommands({})) {
    command_names.push_back(sub->get_name());
    // globals precede the subcommand token, so they are bound by now
    sub->preparse_callback([](std::size_t) { set_thread_count(g_options.threads); });
  }

  std::vector<std::string> args(argv + 1, argv + argc);
  args = splice_config(std::move(args), command_names);

  std::vector<const char*> c_args;
  c_args.push_back(argv[0]);
  for (const auto& a : args) c_args.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(c_args.size()), c_args.data());
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    const int code = run(argc, argv);
    return code;
  } catch (const specmatch::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: Internal: " << e.what() << "\n";
    return 1;
  }
}
