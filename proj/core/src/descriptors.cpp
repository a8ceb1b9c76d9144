#include "specmatch/descriptors.hpp"

#include <cmath>
#include <string>

#include "binio.hpp"
#include "specmatch/error.hpp"

namespace specmatch {

namespace {

constexpr double kZeroEigenvalueFloor = 1e-12;
const double kFourLn10 = 4.0 * std::log(10.0);

void check_modes(const LaplaceSpectrum& spectrum, int k_modes) {
  require(k_modes >= 3, ErrorCode::InvalidArgument, "descriptor needs at least 3 eigenpairs");
  require(spectrum.mode_count() >= k_modes, ErrorCode::InsufficientVertices,
          "spectrum has " + std::to_string(spectrum.mode_count()) + " modes, need " + std::to_string(k_modes));
}

std::string schedule_json(const char* kind, int k_modes, int samples, double lo, double hi, double sigma) {
  std::string json = std::string("{\"kind\":\"") + kind + "\",\"k_modes\":" + std::to_string(k_modes) +
                     ",\"samples\":" + std::to_string(samples) + ",\"lo\":" + std::to_string(lo) +
                     ",\"hi\":" + std::to_string(hi);
  if (sigma > 0.0) json += ",\"sigma\":" + std::to_string(sigma);
  return json + "}";
}

}  // namespace

const char* descriptor_kind_name(DescriptorKind kind) {
  switch (kind) {
    case DescriptorKind::Gps: return "gps";
    case DescriptorKind::Hks: return "hks";
    case DescriptorKind::Wks: return "wks";
    case DescriptorKind::Embedded: return "embedded";
  }
  return "unknown";
}

DescriptorKind descriptor_kind_from_name(const std::string& name) {
  if (name == "gps") return DescriptorKind::Gps;
  if (name == "hks") return DescriptorKind::Hks;
  if (name == "wks") return DescriptorKind::Wks;
  if (name == "embedded") return DescriptorKind::Embedded;
  fail(ErrorCode::InvalidArgument, "unknown descriptor kind '" + name + "'");
}

HksSchedule HksSchedule::from_spectrum(const LaplaceSpectrum& spectrum, int samples, int k_modes) {
  check_modes(spectrum, k_modes);
  require(samples >= 2, ErrorCode::InvalidArgument, "need at least 2 time samples");
  const double lambda_hi = spectrum.eigenvalues[k_modes - 1];
  const double lambda_lo = spectrum.eigenvalues[2];
  require(lambda_lo > kZeroEigenvalueFloor, ErrorCode::ZeroEigenvalue,
          "third eigenvalue is numerically zero; mesh may be disconnected");
  require(lambda_hi > lambda_lo, ErrorCode::InvalidSchedule,
          "degenerate diffusion-time interval: spectrum too flat for this mode count");

  HksSchedule schedule;
  schedule.k_modes = k_modes;
  schedule.times.resize(samples);
  const double log_min = std::log(kFourLn10 / lambda_hi);
  const double log_max = std::log(kFourLn10 / lambda_lo);
  for (int i = 0; i < samples; ++i) {
    const double f = static_cast<double>(i) / (samples - 1);
    schedule.times[i] = std::exp(log_min + f * (log_max - log_min));
  }
  return schedule;
}

WksSchedule WksSchedule::from_spectrum(const LaplaceSpectrum& spectrum, int samples, int k_modes,
                                       double sigma_spacing_multiple, bool normalize) {
  check_modes(spectrum, k_modes);
  require(samples >= 2, ErrorCode::InvalidArgument, "need at least 2 energy samples");
  const double lambda_lo = spectrum.eigenvalues[1];
  const double lambda_hi = spectrum.eigenvalues[k_modes - 1];
  require(lambda_lo > kZeroEigenvalueFloor, ErrorCode::ZeroEigenvalue,
          "second eigenvalue is numerically zero; mesh may be disconnected");
  require(lambda_hi > lambda_lo, ErrorCode::InvalidSchedule, "degenerate energy interval");

  WksSchedule schedule;
  schedule.k_modes = k_modes;
  schedule.normalize = normalize;
  schedule.energies.resize(samples);
  const double e_min = std::log(lambda_lo);
  const double e_max = std::log(lambda_hi);
  const double spacing = (e_max - e_min) / (samples - 1);
  for (int i = 0; i < samples; ++i) schedule.energies[i] = e_min + i * spacing;
  schedule.sigma = sigma_spacing_multiple * spacing;
  require(schedule.sigma > 0.0, ErrorCode::InvalidSchedule, "sigma must be positive");
  return schedule;
}

DescriptorField gps(const LaplaceSpectrum& spectrum, int components) {
  require(components >= 1, ErrorCode::InvalidArgument, "GPS needs at least one component");
  require(spectrum.mode_count() >= components + 1, ErrorCode::InsufficientVertices,
          "GPS with " + std::to_string(components) + " components needs " + std::to_string(components + 1) +
              " eigenpairs");
  DescriptorField field;
  field.kind = DescriptorKind::Gps;
  field.values.resize(spectrum.vertex_count(), components);
  for (int k = 1; k <= components; ++k) {
    const double lambda = spectrum.eigenvalues[k];
    require(lambda > kZeroEigenvalueFloor, ErrorCode::ZeroEigenvalue,
            "eigenvalue " + std::to_string(k) + " is numerically zero; mesh may be disconnected");
    field.values.col(k - 1) = spectrum.eigenfunctions.col(k) / std::sqrt(lambda);
  }
  field.params_json = schedule_json("gps", components + 1, components, spectrum.eigenvalues[1],
                                    spectrum.eigenvalues[components], 0.0);
  return field;
}

DescriptorField hks(const LaplaceSpectrum& spectrum, const HksSchedule& schedule) {
  check_modes(spectrum, schedule.k_modes);
  const int n = spectrum.vertex_count();
  const int samples = static_cast<int>(schedule.times.size());

  DescriptorField field;
  field.kind = DescriptorKind::Hks;
  field.values = Eigen::MatrixXd::Zero(n, samples);
  // H_t(x,x) = sum_k exp(-lambda_k t) phi_k(x)^2, zero mode included
  const Eigen::MatrixXd phi_sq =
      spectrum.eigenfunctions.leftCols(schedule.k_modes).array().square().matrix();
  Eigen::VectorXd weights(schedule.k_modes);
  for (int j = 0; j < samples; ++j) {
    const double t = schedule.times[j];
    for (int k = 0; k < schedule.k_modes; ++k) weights[k] = std::exp(-spectrum.eigenvalues[k] * t);
    field.values.col(j).noalias() = phi_sq * weights;
  }
  field.params_json = schedule_json("hks", schedule.k_modes, samples, schedule.times[0],
                                    schedule.times[samples - 1], 0.0);
  return field;
}

DescriptorField wks(const LaplaceSpectrum& spectrum, const WksSchedule& schedule) {
  check_modes(spectrum, schedule.k_modes);
  require(schedule.sigma > 0.0, ErrorCode::InvalidSchedule, "sigma must be positive");
  const int n = spectrum.vertex_count();
  const int samples = static_cast<int>(schedule.energies.size());
  const int bands = schedule.k_modes - 1;  // zero mode excluded

  Eigen::VectorXd log_lambda(bands);
  for (int k = 1; k < schedule.k_modes; ++k) {
    const double lambda = spectrum.eigenvalues[k];
    require(lambda > kZeroEigenvalueFloor, ErrorCode::ZeroEigenvalue,
            "eigenvalue " + std::to_string(k) + " is numerically zero; mesh may be disconnected");
    log_lambda[k - 1] = std::log(lambda);
  }

  DescriptorField field;
  field.kind = DescriptorKind::Wks;
  field.values = Eigen::MatrixXd::Zero(n, samples);
  const Eigen::MatrixXd phi_sq =
      spectrum.eigenfunctions.middleCols(1, bands).array().square().matrix();
  const double inv_two_sigma_sq = 1.0 / (2.0 * schedule.sigma * schedule.sigma);
  Eigen::VectorXd weights(bands);
  for (int j = 0; j < samples; ++j) {
    const double rho = schedule.energies[j];
    double total = 0.0;
    for (int k = 0; k < bands; ++k) {
      const double d = rho - log_lambda[k];
      weights[k] = std::exp(-d * d * inv_two_sigma_sq);
      total += weights[k];
    }
    if (schedule.normalize) {
      require(total > 0.0, ErrorCode::InvalidSchedule, "empty energy band");
      weights /= total;
    }
    field.values.col(j).noalias() = phi_sq * weights;
  }
  field.params_json = schedule_json("wks", schedule.k_modes, samples, schedule.energies[0],
                                    schedule.energies[samples - 1], schedule.sigma);
  return field;
}

void save_descriptors(const DescriptorField& field, const std::filesystem::path& path) {
  binio::Writer out(path);
  out.magic("DSC1");
  out.u8(static_cast<std::uint8_t>(field.kind));
  out.u64(static_cast<std::uint64_t>(field.vertex_count()));
  out.u64(static_cast<std::uint64_t>(field.dimension()));
  out.u64(field.params_json.size());
  out.bytes(field.params_json.data(), field.params_json.size());
  // row-major on disk
  const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rows = field.values;
  out.f64_array(rows.data(), static_cast<std::size_t>(rows.size()));
  out.close();
}

DescriptorField load_descriptors(const std::filesystem::path& path) {
  binio::Reader in(path);
  in.expect_magic("DSC1");
  const auto kind = static_cast<DescriptorKind>(in.u8());
  require(kind == DescriptorKind::Gps || kind == DescriptorKind::Hks || kind == DescriptorKind::Wks ||
              kind == DescriptorKind::Embedded,
          ErrorCode::ParseError, path.string() + ": unknown descriptor kind tag");
  const auto n = static_cast<int>(in.u64());
  const auto d = static_cast<int>(in.u64());
  require(n >= 1 && d >= 1, ErrorCode::ParseError, path.string() + ": implausible dimensions");
  const auto blob_len = in.u64();
  DescriptorField field;
  field.kind = kind;
  field.params_json.resize(blob_len);
  if (blob_len > 0) in.bytes(field.params_json.data(), blob_len);
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rows(n, d);
  in.f64_array(rows.data(), static_cast<std::size_t>(rows.size()));
  field.values = rows;
  return field;
}

}  // namespace specmatch
