#pragma once

#include <Eigen/Dense>

#include <filesystem>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "entq/operators.hpp"

namespace entq {

enum class Region { All, A, B };

Region parse_region(std::string_view label);
std::string_view region_label(Region region);

/// One detected shot: atom counts in the two hyperfine states for one region.
struct ShotRecord {
  long long shot_id = 0;
  Axis setting = Axis::Z;
  Region region = Region::All;
  long long n1 = 0;
  long long n2 = 0;

  /// Half the population difference, (n1 - n2)/2.
  double spin() const { return 0.5 * static_cast<double>(n1 - n2); }
  long long total() const { return n1 + n2; }

  friend bool operator==(const ShotRecord&, const ShotRecord&) = default;
};

using BoolMatrix = Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>;
using BoolVector = Eigen::Matrix<bool, Eigen::Dynamic, 1>;

/// Dimension-agnostic view of first and second moments over a list of
/// components (3 for one ensemble, 6 for a bipartition). Accessors refuse to
/// read entries flagged as unmeasured.
struct FlatMoments {
  Eigen::VectorXd mean;
  Eigen::MatrixXd covariance;
  BoolMatrix unmeasured;
  BoolVector unmeasured_mean;

  Index size() const { return mean.size(); }

  /// <sum_i c_i X_i>
  double mean_of(const Eigen::VectorXd& coeffs) const;
  /// Var(sum_i c_i X_i) = c^T Cov c, touching only entries with c_i c_j != 0.
  double variance_of(const Eigen::VectorXd& coeffs) const;
};

/// Collective-spin moments of one ensemble; components ordered (x, y, z).
struct MomentData {
  double n_particles = 0.0;
  Eigen::Vector3d mean = Eigen::Vector3d::Zero();
  Eigen::Matrix3d covariance = Eigen::Matrix3d::Zero();
  Eigen::Matrix<bool, 3, 3> unmeasured = Eigen::Matrix<bool, 3, 3>::Constant(false);
  Eigen::Matrix<bool, 3, 1> unmeasured_mean = Eigen::Matrix<bool, 3, 1>::Constant(false);
  std::map<std::string, long long> counts;

  /// Throws InvalidInput on hard violations; returns soft warnings.
  std::vector<std::string> validate() const;
  FlatMoments flat() const;
  double variance(Axis a) const;
  double mean_of(Axis a) const;

  friend bool operator==(const MomentData&, const MomentData&) = default;
};

/// Moments of two collective spins; components ordered (x_A, y_A, z_A, x_B, y_B, z_B).
struct BipartiteMomentData {
  using Matrix6d = Eigen::Matrix<double, 6, 6>;
  using Mask6 = Eigen::Matrix<bool, 6, 6>;

  double n_A = 0.0;
  double n_B = 0.0;
  Eigen::Vector3d mean_A = Eigen::Vector3d::Zero();
  Eigen::Vector3d mean_B = Eigen::Vector3d::Zero();
  Matrix6d covariance = Matrix6d::Zero();
  Mask6 unmeasured = Mask6::Constant(false);
  Eigen::Matrix<bool, 6, 1> unmeasured_mean = Eigen::Matrix<bool, 6, 1>::Constant(false);
  std::map<std::string, long long> counts;

  std::vector<std::string> validate() const;
  FlatMoments flat() const;
  MomentData block_A() const;
  MomentData block_B() const;

  friend bool operator==(const BipartiteMomentData&, const BipartiteMomentData&) = default;
};

/// Component index of J_axis in region A (0..2) or B (3..5).
inline Index component(Region region, Axis axis) {
  return (region == Region::B ? 3 : 0) + static_cast<Index>(axis);
}

using AnyMoments = std::variant<MomentData, BipartiteMomentData>;

/// Per-axis sample means and Bessel-corrected variances of (n1 - n2)/2.
/// Off-diagonal covariances cannot be estimated from single-axis settings and
/// are flagged unmeasured, as is every entry of an axis with no shots.
MomentData estimate_moments(std::span<const ShotRecord> shots);

/// Same for paired region-A/region-B shots; same-axis cross covariances come
/// from the paired values, mixed-axis entries are flagged unmeasured.
BipartiteMomentData estimate_bipartite_moments(std::span<const ShotRecord> shots);

nlohmann::json moments_to_json(const AnyMoments& data);
AnyMoments moments_from_json(const nlohmann::json& doc);

void save_moments(const AnyMoments& data, const std::filesystem::path& path);
/// Throws IoError if unreadable, SchemaError on malformed content.
AnyMoments load_moments(const std::filesystem::path& path);

std::vector<ShotRecord> parse_shots_csv(std::istream& in);
void write_shots_csv(std::ostream& out, std::span<const ShotRecord> shots);
std::vector<ShotRecord> load_shots_csv(const std::filesystem::path& path);
void save_shots_csv(std::span<const ShotRecord> shots, const std::filesystem::path& path);

}  // namespace entq
