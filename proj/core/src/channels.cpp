// SPDX-License-Identifier: Apache-2.0
#include "fdisac/channels.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "fdisac/errors.hpp"
#include "fdisac/random.hpp"

namespace fdisac {

double two_way_delay(double range) { return 2.0 * range / kSpeedOfLight; }
double range_from_delay(double delay) { return kSpeedOfLight * delay / 2.0; }
double doppler_from_velocity(double velocity, double wavelength) {
  return 2.0 * velocity / wavelength;
}
double velocity_from_doppler(double doppler, double wavelength) {
  return doppler * wavelength / 2.0;
}

double reflection_power(double range, double wavelength, double rcs, double array_gain) {
  const double four_pi_cubed = std::pow(4.0 * kPi, 3);
  return array_gain * wavelength * wavelength * rcs /
         (four_pi_cubed * std::pow(range, 4));
}

RadarTarget make_target(double doa, double range, double velocity, Complex reflection,
                        double wavelength) {
  RadarTarget t;
  t.doa = doa;
  t.range = range;
  t.velocity = velocity;
  t.delay = two_way_delay(range);
  t.doppler = doppler_from_velocity(velocity, wavelength);
  t.reflection = reflection;
  return t;
}

std::vector<RadarTarget> Scenario::dl_scatterers() const {
  std::vector<RadarTarget> out;
  std::copy_if(targets.begin(), targets.end(), std::back_inserter(out),
               [](const RadarTarget& t) { return t.is_dl_scatterer; });
  return out;
}

std::uint64_t si_channel_seed(std::uint64_t scenario_seed) {
  return derive_seed(scenario_seed, {stream_tag("si-channel")});
}

Scenario generate_scenario(const ArrayConfig& config, const ScenarioSpec& spec,
                           std::uint64_t seed) {
  config.validate();
  const auto& lim = spec.limits;
  if (spec.k_targets < 0 || spec.l_scatterers < 0) {
    throw InvalidArgument("generate_scenario: counts must be non-negative");
  }
  if (spec.l_scatterers > spec.k_targets) {
    throw InvalidArgument("generate_scenario: L must not exceed K");
  }
  if (static_cast<int>(spec.anchors.size()) > spec.k_targets) {
    throw InvalidArgument("generate_scenario: more anchors than targets");
  }
  if (!(lim.max_range_m > lim.min_range_m) || lim.min_range_m < 0.0 ||
      lim.max_speed_mps < 0.0 || !(lim.max_doa_deg >= lim.min_doa_deg)) {
    throw InvalidArgument("generate_scenario: empty bounds");
  }

  Rng rng(derive_seed(seed, {stream_tag("targets")}));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double gain =
      lim.include_array_gain ? static_cast<double>(config.n_tx()) * config.m_rx() : 1.0;

  Scenario sc;
  sc.seed = seed;
  sc.channel = spec.channel;
  sc.targets.reserve(spec.k_targets);

  auto draw_doa = [&]() {
    const double sep = lim.min_doa_separation_deg;
    for (int attempt = 0; attempt < 100000; ++attempt) {
      const double deg = lim.min_doa_deg + (lim.max_doa_deg - lim.min_doa_deg) * unit(rng);
      const bool clear = std::all_of(sc.targets.begin(), sc.targets.end(), [&](const auto& t) {
        return std::abs(rad_to_deg(t.doa) - deg) >= sep;
      });
      if (sep <= 0.0 || clear) return deg_to_rad(deg);
    }
    throw InvalidArgument("generate_scenario: DoA separation cannot be satisfied");
  };

  for (int k = 0; k < spec.k_targets; ++k) {
    const TargetAnchor* anchor =
        k < static_cast<int>(spec.anchors.size()) ? &spec.anchors[k] : nullptr;
    const double doa_draw = anchor ? deg_to_rad(anchor->doa_deg) : draw_doa();
    // Range, speed and phases are drawn even when anchored, so pinning a
    // range does not shift the draws of later targets.
    const double range_u = unit(rng);
    const double speed_u = unit(rng);
    const double alpha_phase = 2.0 * kPi * unit(rng);
    const double dl_phase = 2.0 * kPi * unit(rng);

    double range = lim.max_range_m - (lim.max_range_m - lim.min_range_m) * range_u;
    double velocity = lim.max_speed_mps * (2.0 * speed_u - 1.0);
    if (anchor && anchor->range_m) range = *anchor->range_m;
    if (anchor && anchor->velocity_mps) velocity = *anchor->velocity_mps;

    RadarTarget t = make_target(doa_draw, range, velocity, {}, config.wavelength);
    if (spec.on_grid) {
      const double db = spec.on_grid->delay_bin();
      const double fb = spec.on_grid->doppler_bin();
      t.delay = std::round(t.delay / db) * db;
      t.doppler = std::round(t.doppler / fb) * fb;
      t.range = range_from_delay(t.delay);
      t.velocity = velocity_from_doppler(t.doppler, config.wavelength);
    }
    const double power =
        t.range > 0.0 ? reflection_power(t.range, config.wavelength, lim.rcs_m2, gain)
                      : reflection_power(lim.max_range_m, config.wavelength, lim.rcs_m2, gain);
    t.reflection = std::polar(std::sqrt(power), alpha_phase);
    t.dl_phase = dl_phase;
    sc.targets.push_back(t);
  }

  std::vector<int> order(spec.k_targets);
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  for (int l = 0; l < spec.l_scatterers; ++l) sc.targets[order[l]].is_dl_scatterer = true;
  sc.dl_scatterer_count = spec.l_scatterers;

  sc.si_channel =
      rician_si_channel(config, spec.channel.si_rician_k_db, spec.channel.si_pathloss_db,
                        si_channel_seed(seed), spec.channel.si_array_separation_m);
  return sc;
}

Eigen::RowVectorXcd echo_modulation(const RadarTarget& target, const OfdmParams& ofdm) {
  const int P = ofdm.subcarriers;
  const int Q = ofdm.symbols;
  const double Ts = ofdm.symbol_duration();
  CVector delay_rot(P);
  for (int p = 0; p < P; ++p) {
    delay_rot[p] = std::polar(1.0, -2.0 * kPi * p * target.delay * ofdm.subcarrier_spacing);
  }
  Eigen::RowVectorXcd mod(static_cast<Eigen::Index>(P) * Q);
  for (int q = 0; q < Q; ++q) {
    const Complex rot = target.reflection * std::polar(1.0, 2.0 * kPi * q * Ts * target.doppler);
    for (int p = 0; p < P; ++p) {
      mod[OfdmGrid::cell_index(p, q, P)] = rot * delay_rot[p];
    }
  }
  return mod;
}

OfdmGrid radar_echo(const OfdmGrid& x_grid, const std::vector<RadarTarget>& targets,
                    const OfdmParams& ofdm, const ArrayConfig& config) {
  if (x_grid.space_dim() != config.n_tx()) {
    throw InvalidArgument("radar_echo: grid space dimension must equal N_b");
  }
  if (x_grid.subcarriers() != ofdm.subcarriers || x_grid.symbols() != ofdm.symbols) {
    throw InvalidArgument("radar_echo: grid does not match OfdmParams");
  }
  OfdmGrid y(ofdm.subcarriers, ofdm.symbols, config.m_rx());
  auto out = y.values();

  for (const auto& t : targets) {
    const CVector a_rx =
        steering(t.doa, config.m_rx(), config.element_spacing, config.wavelength);
    const CVector a_tx =
        steering(t.doa, config.n_tx(), config.element_spacing, config.wavelength);
    // Projection of every transmitted cell onto the target direction.
    Eigen::RowVectorXcd proj = a_tx.adjoint() * x_grid.data();
    proj.array() *= echo_modulation(t, ofdm).array();
    out.noalias() += a_rx * proj;
  }
  return y;
}

CMatrix los_si_matrix(const ArrayConfig& config, double separation) {
  const int M = config.m_rx();
  const int N = config.n_tx();
  CMatrix h(M, N);
  const double d = config.element_spacing;
  for (int n = 0; n < N; ++n) {
    for (int m = 0; m < M; ++m) {
      const double dx = (m - n) * d;
      const double r = std::sqrt(dx * dx + separation * separation);
      h(m, n) = std::polar(1.0, 2.0 * kPi * r / config.wavelength);
    }
  }
  return h;
}

CMatrix rician_si_channel(const ArrayConfig& config, double k_factor_db, double pathloss_db,
                          std::uint64_t seed, double separation) {
  config.validate();
  const double pl = db_to_linear(-pathloss_db);
  const double kappa = db_to_linear(k_factor_db);
  CMatrix h = CMatrix::Zero(config.m_rx(), config.n_tx());
  if (std::isinf(kappa)) {
    h = los_si_matrix(config, separation);
  } else {
    const double los_w = std::sqrt(kappa / (kappa + 1.0));
    const double nlos_w = std::sqrt(1.0 / (kappa + 1.0));
    Rng rng(seed);
    CMatrix nlos = complex_gaussian_matrix(config.m_rx(), config.n_tx(), 1.0, rng);
    if (los_w > 0.0) h = los_w * los_si_matrix(config, separation);
    h += nlos_w * nlos;
  }
  return std::sqrt(pl) * h;
}

CMatrix dl_channel(const std::vector<RadarTarget>& scatterers, const ArrayConfig& config,
                   double pathloss_db) {
  if (scatterers.empty()) throw InvalidArgument("dl_channel: need at least one scatterer");
  const double path_power = db_to_linear(-pathloss_db) / static_cast<double>(scatterers.size());
  CMatrix h = CMatrix::Zero(config.ue_antennas, config.n_tx());
  for (const auto& s : scatterers) {
    const Complex beta = std::polar(std::sqrt(path_power), s.dl_phase);
    const CVector a_ue =
        steering(s.doa, config.ue_antennas, config.element_spacing, config.wavelength);
    const CVector a_bs =
        steering(s.doa, config.n_tx(), config.element_spacing, config.wavelength);
    h.noalias() += beta * a_ue * a_bs.adjoint();
  }
  return h;
}

OfdmGrid add_noise(const OfdmGrid& grid, double noise_floor_dbm, std::uint64_t seed) {
  OfdmGrid out = grid;
  const double variance = dbm_to_watts(noise_floor_dbm);
  if (variance == 0.0) return out;
  Rng rng(seed);
  out.values() += complex_gaussian_matrix(grid.space_dim(), grid.cells(), variance, rng);
  return out;
}

}  // namespace fdisac
