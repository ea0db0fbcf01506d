#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "qmghost/core.hpp"

namespace qmg {

/// Counter-based generator: the stream for (seed, index) is a pure function of
/// both, so pair i is identical no matter which worker draws it. SplitMix64
/// output function over a Weyl sequence.
class CounterRng {
 public:
  using result_type = std::uint64_t;

  CounterRng(std::uint64_t seed, std::uint64_t stream)
      : state_(mix(seed ^ mix(stream + 0x9e3779b97f4a7c15ULL))) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() {
    state_ += 0x9e3779b97f4a7c15ULL;
    return mix(state_);
  }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

 private:
  static constexpr std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  std::uint64_t state_;
};

struct SpdcConfig {
  Vec3 crystal_point{0, 0, 0};
  Vec3 crystal_normal{0, 0, 1};
  double omega_s_min = 0.5;
  double omega_s_max = 0.5;
  // Standard deviation of each transverse component of the signal
  // wavevector (units of 1/length, or omega_p/c in normalized mode).
  double sigma_k = 0.0;
  std::string sampling_law = "gaussian";
  double spot_radius = 0.0;
  std::uint64_t seed = 0;
  UnitSystem units = UnitSystem::normalized();

  void validate(const PumpModel& pump) const;
};

template <std::floating_point T>
Vec3T<T> local_pump_wavevector(const PumpModel& pump, const Vec3T<T>& point,
                               UnitSystem units = UnitSystem::normalized()) {
  const T k = static_cast<T>(pump.omega_p / units.c);
  if (pump.kind == PumpModel::Kind::Plane) return Vec3T<T>(pump.axis) * k;
  const Vec3T<T> to_center = Vec3T<T>(pump.curvature_center) - point;
  const T dist = norm(to_center);
  if (!(dist > T(0)))
    throw Error(ErrorKind::DegenerateGeometry, "crystal point coincides with pump curvature center");
  const Vec3T<T> dir = pump.R > 0 ? to_center / dist : -to_center / dist;
  return dir * k;
}

struct PairResidual {
  double energy_rel = 0;
  double transverse_abs = 0;
};

/// Draws pair number `index` of the stream defined by cfg.seed.
PhotonPair sample_pair(const PumpModel& pump, const SpdcConfig& cfg, std::uint64_t index);

/// Same as above, drawing from a caller-owned generator.
PhotonPair sample_pair(const PumpModel& pump, const SpdcConfig& cfg, CounterRng& rng);

PairResidual validate_pair(const PhotonPair& pair, const PumpModel& pump,
                           UnitSystem units = UnitSystem::normalized());

/// Pairs [first, first + out.size()) of the stream. The parallel version fills
/// disjoint slots per worker; the serial one is the reference.
void sample_pairs(const PumpModel& pump, const SpdcConfig& cfg, std::uint64_t first,
                  std::span<PhotonPair> out, int workers);
void sample_pairs_serial(const PumpModel& pump, const SpdcConfig& cfg, std::uint64_t first,
                         std::span<PhotonPair> out);

struct ConservationAudit {
  std::size_t n = 0;
  double max_energy_rel = 0;
  double max_transverse_abs = 0;  // in units of omega_p / c
  double max_longitudinal_mismatch = 0;  // |k_p - k_s - k_i| along the pump, same units
};

ConservationAudit audit_pairs(const PumpModel& pump, const SpdcConfig& cfg,
                              std::span<const PhotonPair> pairs);

/// One row per pair, fixed-precision, suitable for byte comparison.
std::string pairs_csv(std::span<const PhotonPair> pairs);

}  // namespace qmg
