#include "qmghost/spdc.hpp"

#include <algorithm>
#include <cstdio>
#include <numbers>
#include <random>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace qmg {

namespace {

constexpr int kMaxAttempts = 1000;  // acceptance below 1e-3 is a misconfiguration

}  // namespace

void SpdcConfig::validate(const PumpModel& pump) const {
  if (!(omega_s_min > 0) || !(omega_s_min <= omega_s_max) || !(omega_s_max < pump.omega_p))
    throw Error(ErrorKind::Domain, "spectral band must satisfy 0 < omega_s_min <= omega_s_max < omega_p");
  if (!(sigma_k >= 0) || !std::isfinite(sigma_k))
    throw Error(ErrorKind::Domain, "sigma_k must be non-negative");
  if (!(spot_radius >= 0)) throw Error(ErrorKind::Domain, "spot_radius must be non-negative");
  if (sampling_law != "gaussian")
    throw Error(ErrorKind::Domain, "unknown sampling law '" + sampling_law + "'");
  if (std::abs(norm(crystal_normal) - 1.0) > 1e-12)
    throw Error(ErrorKind::Domain, "crystal normal must be a unit vector");
}

PhotonPair sample_pair(const PumpModel& pump, const SpdcConfig& cfg, std::uint64_t index) {
  CounterRng rng(cfg.seed, index);
  return sample_pair(pump, cfg, rng);
}

PhotonPair sample_pair(const PumpModel& pump, const SpdcConfig& cfg, CounterRng& rng) {
  const Frame crystal = Frame::from_axis(cfg.crystal_normal);

  const double r = cfg.spot_radius * std::sqrt(rng.uniform());
  const double phi = 2.0 * std::numbers::pi * rng.uniform();
  const Vec3 birth = cfg.crystal_point + crystal.e1 * (r * std::cos(phi)) + crystal.e2 * (r * std::sin(phi));

  const double omega_s =
      cfg.omega_s_min == cfg.omega_s_max
          ? cfg.omega_s_min
          : cfg.omega_s_min + (cfg.omega_s_max - cfg.omega_s_min) * rng.uniform();
  const double omega_i = pump.omega_p - omega_s;

  const Vec3 kp = local_pump_wavevector(pump, birth, cfg.units);
  const Frame local = Frame::from_axis(kp);

  const double ks = omega_s / cfg.units.c;
  const double ki = omega_i / cfg.units.c;
  const double bound2 = std::min(ks, ki) * std::min(ks, ki);

  double kx = 0, ky = 0;
  if (cfg.sigma_k > 0) {
    std::normal_distribution<double> gauss(0.0, cfg.sigma_k);
    int attempt = 0;
    for (;; ++attempt) {
      if (attempt == kMaxAttempts)
        throw Error(ErrorKind::SamplingExhausted,
                    "transverse sampling acceptance below 1e-3; sigma_k too large for the band");
      kx = gauss(rng);
      ky = gauss(rng);
      if (kx * kx + ky * ky < bound2) break;
    }
  }
  const Vec3 kt = local.e1 * kx + local.e2 * ky;
  const double t2 = kx * kx + ky * ky;
  const Vec3 k_signal = kt + local.axis * std::sqrt(ks * ks - t2);
  const Vec3 k_idler = -kt + local.axis * std::sqrt(ki * ki - t2);

  PhotonPair pair;
  pair.birth_point = birth;
  pair.local_pump_k = kp;
  pair.signal = Ray{birth, normalized(k_signal), omega_s, PolTag{0, false}};
  pair.idler = Ray{birth, normalized(k_idler), omega_i, PolTag{0, true}};
  return pair;
}

PairResidual validate_pair(const PhotonPair& pair, const PumpModel& pump, UnitSystem units) {
  PairResidual res;
  res.energy_rel = std::abs(pair.signal.omega + pair.idler.omega - pump.omega_p) / pump.omega_p;
  const Vec3 u = normalized(local_pump_wavevector(pump, pair.birth_point, units));
  const Vec3 sum = transverse_part(wavevector(pair.signal, units), u) +
                   transverse_part(wavevector(pair.idler, units), u);
  res.transverse_abs = norm(sum);
  return res;
}

void sample_pairs_serial(const PumpModel& pump, const SpdcConfig& cfg, std::uint64_t first,
                         std::span<PhotonPair> out) {
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = sample_pair(pump, cfg, first + i);
}

void sample_pairs(const PumpModel& pump, const SpdcConfig& cfg, std::uint64_t first,
                  std::span<PhotonPair> out, int workers) {
  const auto n = static_cast<std::int64_t>(out.size());
  bool failed = false;
  Error first_error(ErrorKind::Domain, "");
#pragma omp parallel for schedule(static) num_threads(std::max(1, workers))
  for (std::int64_t i = 0; i < n; ++i) {
    try {
      out[i] = sample_pair(pump, cfg, first + static_cast<std::uint64_t>(i));
    } catch (const Error& e) {
#pragma omp critical
      {
        if (!failed) {
          failed = true;
          first_error = e;
        }
      }
    }
  }
  if (failed) throw first_error;
}

ConservationAudit audit_pairs(const PumpModel& pump, const SpdcConfig& cfg,
                              std::span<const PhotonPair> pairs) {
  ConservationAudit audit;
  audit.n = pairs.size();
  const double kp = pump.omega_p / cfg.units.c;
  for (const auto& pair : pairs) {
    const PairResidual r = validate_pair(pair, pump, cfg.units);
    audit.max_energy_rel = std::max(audit.max_energy_rel, r.energy_rel);
    audit.max_transverse_abs = std::max(audit.max_transverse_abs, r.transverse_abs / kp);
    const Vec3 u = pair.local_pump_k / kp;
    const double along = dot(pair.local_pump_k - wavevector(pair.signal, cfg.units) -
                                 wavevector(pair.idler, cfg.units),
                             u);
    audit.max_longitudinal_mismatch = std::max(audit.max_longitudinal_mismatch, std::abs(along) / kp);
  }
  return audit;
}

std::string pairs_csv(std::span<const PhotonPair> pairs) {
  std::string out = "index,omega_s,omega_i,bx,by,bz,sx,sy,sz,ix,iy,iz\n";
  out.reserve(out.size() + pairs.size() * 220);
  char line[512];
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const auto& p = pairs[i];
    std::snprintf(line, sizeof line,
                  "%zu,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", i,
                  p.signal.omega, p.idler.omega, p.birth_point.x, p.birth_point.y, p.birth_point.z,
                  p.signal.direction.x, p.signal.direction.y, p.signal.direction.z,
                  p.idler.direction.x, p.idler.direction.y, p.idler.direction.z);
    out += line;
  }
  return out;
}

}  // namespace qmg
