#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <filesystem>
#include <string>

#include "specmatch/laplace.hpp"

namespace specmatch {

enum class DescriptorKind : std::uint8_t { Gps = 1, Hks = 2, Wks = 3, Embedded = 4 };

const char* descriptor_kind_name(DescriptorKind kind);
DescriptorKind descriptor_kind_from_name(const std::string& name);

// Per-vertex descriptor matrix (row x = descriptor at vertex x). params_json
// is a free-form record of how the field was produced (schedule, mode count,
// source mesh hash) and travels with the DSC1 file.
struct DescriptorField {
  DescriptorKind kind = DescriptorKind::Hks;
  std::string params_json;
  Eigen::MatrixXd values;

  int vertex_count() const { return static_cast<int>(values.rows()); }
  int dimension() const { return static_cast<int>(values.cols()); }
};

// Diffusion-time samples: log-uniform over [4 ln10 / lambda[k_modes-1],
// 4 ln10 / lambda[2]], endpoints included. Indices follow the spectrum's
// ascending 0-based order with lambda[0] the (near-)zero mode.
struct HksSchedule {
  Eigen::VectorXd times;
  int k_modes = 300;

  static HksSchedule from_spectrum(const LaplaceSpectrum& spectrum, int samples = 100, int k_modes = 300);
};

// Energy samples: uniform over [ln lambda[1], ln lambda[k_modes-1]] with a
// log-normal band of width sigma (default 7x the energy spacing).
struct WksSchedule {
  Eigen::VectorXd energies;
  double sigma = 0.0;
  int k_modes = 300;
  bool normalize = true;  // scale each band so it integrates to 1 against the mass

  static WksSchedule from_spectrum(const LaplaceSpectrum& spectrum, int samples = 100, int k_modes = 300,
                                   double sigma_spacing_multiple = 7.0, bool normalize = true);
};

// Eigenfunction components scaled by inverse square-root eigenvalues; the
// zero mode is excluded and n components are taken from mode 1 upward.
DescriptorField gps(const LaplaceSpectrum& spectrum, int components = 25);

// Heat kernel diagonal at the scheduled times, truncated to k_modes pairs
// (zero mode included).
DescriptorField hks(const LaplaceSpectrum& spectrum, const HksSchedule& schedule);

// Band-filtered eigenfunction energy at the scheduled energies (zero mode
// excluded; its log-eigenvalue is undefined).
DescriptorField wks(const LaplaceSpectrum& spectrum, const WksSchedule& schedule);

// DSC1 file: magic, kind tag byte, n and d as u64 LE, params blob, then the
// matrix row-major float64 LE.
void save_descriptors(const DescriptorField& field, const std::filesystem::path& path);
DescriptorField load_descriptors(const std::filesystem::path& path);

}  // namespace specmatch
