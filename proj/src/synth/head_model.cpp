#include <cmath>
#include <numbers>

#include "ctfconn/errors.hpp"
#include "ctfconn/synth.hpp"

namespace ctfconn {

namespace {

// Lowest electrode row sits below the equator so that every octant has
// electrodes above it.
constexpr double kCapBottomZ = -0.5;

}  // namespace

Octant octant_of(const Eigen::Vector3d& p) {
  return static_cast<Octant>((p.x() >= 0.0 ? 4 : 0) | (p.y() >= 0.0 ? 2 : 0) | (p.z() >= 0.0 ? 1 : 0));
}

std::string octant_name(Octant o) {
  std::string s = "xyz";
  s[0] = (o & 4) ? '+' : '-';
  s[1] = (o & 2) ? '+' : '-';
  s[2] = (o & 1) ? '+' : '-';
  return s;
}

RealMatrix electrode_cap(Index channels) {
  const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
  RealMatrix pos(channels, 3);
  for (Index i = 0; i < channels; ++i) {
    const double z = 1.0 - (1.0 - kCapBottomZ) * (static_cast<double>(i) + 0.5) / static_cast<double>(channels);
    const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
    const double phi = golden * static_cast<double>(i);
    pos(i, 0) = r * std::cos(phi);
    pos(i, 1) = r * std::sin(phi);
    pos(i, 2) = z;
  }
  return pos;
}

HeadModel build_head_model(Index channels, Index n_lead_fields, Rng& rng) {
  if (channels < 16) throw InvalidInput("head model needs at least 16 channels");
  if (n_lead_fields < 8) throw InvalidInput("head model needs at least 8 lead fields");

  HeadModel head;
  head.electrodes = electrode_cap(channels);
  head.lead_fields.resize(channels, n_lead_fields);
  head.source_positions.resize(n_lead_fields, 3);
  head.source_widths.resize(n_lead_fields);
  head.octants.resize(static_cast<std::size_t>(n_lead_fields));

  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_real_distribution<double> width(0.3, 0.6);

  for (Index s = 0; s < n_lead_fields; ++s) {
    Eigen::Vector3d dir;
    do {
      dir = Eigen::Vector3d(normal(rng), normal(rng), normal(rng));
    } while (dir.norm() < 1e-12);
    const Eigen::Vector3d p = dir.normalized() * std::cbrt(unit(rng));
    const double sigma = width(rng);

    RealVector col(channels);
    for (Index e = 0; e < channels; ++e) {
      const double d2 = (head.electrodes.row(e).transpose() - p).squaredNorm();
      col(e) = std::exp(-d2 / (2.0 * sigma * sigma));
    }
    head.lead_fields.col(s) = col / col.norm();
    head.source_positions.row(s) = p.transpose();
    head.source_widths(s) = sigma;
    head.octants[static_cast<std::size_t>(s)] = octant_of(p);
  }
  return head;
}

HeadModel build_head_model(const SceneSettings& settings) {
  Rng rng(settings.head_seed);
  return build_head_model(settings.channels, settings.n_lead_fields, rng);
}

}  // namespace ctfconn
