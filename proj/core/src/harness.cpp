// SPDX-License-Identifier: Apache-2.0
#include "fdisac/harness.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <exception>
#include <filesystem>
#include <fstream>
#include <limits>
#include <mutex>
#include <thread>

#include "fdisac/errors.hpp"
#include "fdisac/random.hpp"
#include "fdisac/transceiver.hpp"

namespace fdisac {

int RunRecord::matched_count() const {
  return static_cast<int>(std::count_if(targets.begin(), targets.end(),
                                        [](const TargetRecord& t) { return t.matched; }));
}

std::uint64_t run_seed(std::uint64_t master, int run) {
  return derive_seed(master, {stream_tag("run"), static_cast<std::uint64_t>(run)});
}

Scenario scenario_for_run(const ExperimentConfig& config, std::uint64_t seed) {
  ScenarioSpec spec = config.scenario;
  if (config.on_grid) spec.on_grid = config.ofdm;
  return generate_scenario(config.array, spec, derive_seed(seed, {stream_tag("scenario")}));
}

BeamformerSet bootstrap_beamformers(const ExperimentConfig& config, const CMatrix& si_channel,
                                    double tx_power_w) {
  const ArrayConfig& a = config.array;
  const BeamCodebook tx_book = dft_codebook(config.codebook_bits, a.n_per_chain_tx);
  const BeamCodebook rx_book = dft_codebook(config.codebook_bits, a.m_per_chain_rx);
  BeamformerSet set;
  set.tx_power_w = tx_power_w;
  set.v_rf = beams_from_indices(
      tx_book, sector_sweep_indices(a.n_rf_tx, tx_book.size(), a.n_per_chain_tx));
  set.w_rf = beams_from_indices(
      rx_book, sector_sweep_indices(a.m_rf_rx, rx_book.size(), a.m_per_chain_rx));

  // Stream s drives every chain j with j mod d_b == s.
  set.v_bb = CMatrix::Zero(a.n_rf_tx, a.streams);
  for (int s = 0; s < a.streams; ++s) {
    int count = 0;
    for (int j = s; j < a.n_rf_tx; j += a.streams) ++count;
    for (int j = s; j < a.n_rf_tx; j += a.streams) {
      set.v_bb(j, s) = std::sqrt(tx_power_w / a.streams / count);
    }
  }
  set.w_ue = CMatrix::Identity(a.ue_antennas, a.streams);
  const CMatrix h = effective_si_channel(si_channel, set.v_rf, set.w_rf);
  set.c_analog = CMatrix::Zero(a.m_rf_rx, a.n_rf_tx);
  set.d_digital = -h;
  return set;
}

namespace {

std::uint64_t power_stream(double tx_power_dbm) { return std::bit_cast<std::uint64_t>(tx_power_dbm); }

struct SensingOutput {
  MusicSpectrum spectrum;
  std::vector<SensingEstimate> estimates;
};

SensingOutput sense(const ExperimentConfig& config, const OfdmGrid& symbols,
                    const BeamformerSet& set, const OfdmGrid& y) {
  const ArrayConfig& a = config.array;
  SensingOutput out;
  out.spectrum = music_spectrum(sample_covariance(y), set.w_rf, config.scenario.k_targets,
                                a.element_spacing, a.wavelength, config.music);
  std::vector<double> doas;
  for (const auto& p : out.spectrum.peaks) doas.push_back(p.angle);
  if (doas.empty()) return out;
  const auto dd = estimate_delay_doppler(symbols, set.precoder(), y, set.w_rf, doas, config.ofdm,
                                         a.element_spacing, a.wavelength, config.delay_doppler);
  for (std::size_t k = 0; k < doas.size(); ++k) {
    out.estimates.push_back(make_estimate(doas[k], dd[k], a.wavelength));
  }
  return out;
}

// DL path identity is taken as known: every true DL scatterer contributes the
// DoA of its matched estimate, or of the nearest estimate when it was missed.
std::vector<double> dl_doas_from(const std::vector<SensingEstimate>& est,
                                 const std::vector<RadarTarget>& truth,
                                 const Association& assoc) {
  std::vector<double> out;
  if (est.empty()) return out;
  for (int t = 0; t < static_cast<int>(truth.size()); ++t) {
    if (!truth[t].is_dl_scatterer) continue;
    auto it = std::find_if(assoc.pairs.begin(), assoc.pairs.end(),
                           [&](const MatchedPair& p) { return p.truth == t; });
    if (it != assoc.pairs.end()) {
      out.push_back(est[it->estimate].doa);
      continue;
    }
    int best = 0;
    for (int e = 1; e < static_cast<int>(est.size()); ++e) {
      if (std::abs(est[e].doa - truth[t].doa) < std::abs(est[best].doa - truth[t].doa)) best = e;
    }
    out.push_back(est[best].doa);
  }
  return out;
}

CMatrix si_estimate_for(const ExperimentConfig& config, const Scenario& scenario,
                        std::uint64_t seed) {
  if (!config.si_estimate_nmse_db) return scenario.si_channel;
  const double mean_power =
      scenario.si_channel.squaredNorm() / static_cast<double>(scenario.si_channel.size());
  Rng rng(derive_seed(seed, {stream_tag("si-estimate")}));
  return scenario.si_channel +
         complex_gaussian_matrix(scenario.si_channel.rows(), scenario.si_channel.cols(),
                                 mean_power * db_to_linear(*config.si_estimate_nmse_db), rng);
}

std::vector<TargetRecord> target_records(const std::vector<SensingEstimate>& est,
                                         const std::vector<RadarTarget>& truth,
                                         const Association& assoc) {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  std::vector<TargetRecord> out;
  for (int t = 0; t < static_cast<int>(truth.size()); ++t) {
    TargetRecord r;
    r.index = t;
    r.is_dl = truth[t].is_dl_scatterer;
    r.true_doa_deg = rad_to_deg(truth[t].doa);
    r.true_range_m = truth[t].range;
    r.true_velocity_mps = truth[t].velocity;
    r.est_doa_deg = r.est_range_m = r.est_velocity_mps = nan;
    r.doa_error_deg = r.range_error_m = r.velocity_error_mps = r.relative_velocity_error = nan;
    for (const auto& p : assoc.pairs) {
      if (p.truth != t) continue;
      const auto& e = est[p.estimate];
      r.matched = true;
      r.est_doa_deg = rad_to_deg(e.doa);
      r.est_range_m = e.range;
      r.est_velocity_mps = e.velocity;
      r.doa_error_deg = rad_to_deg(p.doa_error);
      r.range_error_m = p.range_error;
      r.velocity_error_mps = p.velocity_error;
      r.relative_velocity_error = p.relative_velocity_error;
    }
    out.push_back(r);
  }
  return out;
}

}  // namespace

double ideal_rate_baseline(const Scenario& scenario, const ExperimentConfig& config,
                           const std::vector<double>& doas, const std::vector<double>& dl_doas,
                           double tx_power_w) {
  const ArrayConfig& a = config.array;
  const auto dl = scenario.dl_scatterers();
  if (doas.empty() || dl.empty()) return 0.0;
  OptimizerConfig oc = config.optimizer_config(tx_power_w);
  oc.n_taps = a.n_rf_tx * a.m_rf_rx;
  const CMatrix zero_si = CMatrix::Zero(a.m_rx(), a.n_tx());
  const OptimizerResult ideal = optimize(doas, dl_doas, zero_si, a, oc);
  const CMatrix h_dl = dl_channel(dl, a, scenario.channel.dl_pathloss_db);
  return dl_rate(h_dl, ideal.set, dbm_to_watts(scenario.channel.ue_noise_floor_dbm));
}

RunRecord run_with_scenario(const ExperimentConfig& config, const Scenario& scenario,
                            double tx_power_dbm, std::uint64_t seed, RunArtifacts* artifacts) {
  const ArrayConfig& a = config.array;
  const double pw = dbm_to_watts(tx_power_dbm);
  const std::uint64_t ps = power_stream(tx_power_dbm);

  RunRecord rec;
  rec.seed = seed;
  rec.tx_power_dbm = tx_power_dbm;

  // Slot 0: nothing is known yet, so sweep the field of view.
  const BeamformerSet boot = bootstrap_beamformers(config, scenario.si_channel, pw);
  const OfdmGrid symbols =
      make_symbol_grid(config.ofdm, a.streams, derive_seed(seed, {stream_tag("symbols"), ps}));
  const OfdmGrid y = simulate_fd_reception(symbols, scenario.targets, config.ofdm,
                                           scenario.si_channel, boot, a,
                                           scenario.channel.noise_floor_dbm,
                                           derive_seed(seed, {stream_tag("noise"), ps}));
  SensingOutput sensed = sense(config, symbols, boot, y);
  const double threshold = deg_to_rad(config.association_threshold_deg);
  Association assoc = associate_estimates(sensed.estimates, scenario.targets, threshold);

  std::vector<double> doas;
  for (const auto& e : sensed.estimates) doas.push_back(e.doa);
  const std::vector<double> dl_doas = dl_doas_from(sensed.estimates, scenario.targets, assoc);

  const auto dl = scenario.dl_scatterers();
  if (!doas.empty() && !dl.empty()) {
    const OptimizerConfig oc = config.optimizer_config(pw);
    const OptimizerResult opt =
        optimize(doas, dl_doas, si_estimate_for(config, scenario, seed), a, oc);
    const CMatrix h_dl = dl_channel(dl, a, scenario.channel.dl_pathloss_db);
    rec.dl_rate_bps_hz = dl_rate(h_dl, opt.set, dbm_to_watts(scenario.channel.ue_noise_floor_dbm));
    rec.ideal_dl_rate_bps_hz = ideal_rate_baseline(scenario, config, doas, dl_doas, pw);
    rec.feasible = opt.feasible;
    rec.alpha = opt.alpha;

    const ConstraintReport check = check_constraints(opt.set, scenario.si_channel,
                                                     oc.si_threshold_w, oc.tx_codebook,
                                                     oc.rx_codebook);
    rec.certified = opt.feasible && check.ok();
    const CMatrix analog =
        effective_si_channel(scenario.si_channel, opt.set.v_rf, opt.set.w_rf) + opt.set.c_analog;
    const RVector rows = (analog * opt.set.v_bb).rowwise().squaredNorm();
    for (Eigen::Index j = 0; j < rows.size(); ++j) rec.residual_si_dbm.push_back(watts_to_dbm(rows[j]));

    if (config.sensing_slot == 1) {
      // Slot 1: sense again through the optimised beams and cancellers.
      const OfdmGrid s1 = make_symbol_grid(config.ofdm, a.streams,
                                           derive_seed(seed, {stream_tag("symbols-1"), ps}));
      const OfdmGrid y1 = simulate_fd_reception(s1, scenario.targets, config.ofdm,
                                                scenario.si_channel, opt.set, a,
                                                scenario.channel.noise_floor_dbm,
                                                derive_seed(seed, {stream_tag("noise-1"), ps}));
      sensed = sense(config, s1, opt.set, y1);
      assoc = associate_estimates(sensed.estimates, scenario.targets, threshold);
    }
    if (artifacts) artifacts->optimizer = opt;
  }

  rec.targets = target_records(sensed.estimates, scenario.targets, assoc);
  rec.unmatched_estimates = static_cast<int>(assoc.unmatched_estimates.size());
  if (artifacts) artifacts->spectrum = std::move(sensed.spectrum);
  return rec;
}

RunRecord run_single(const ExperimentConfig& config, double tx_power_dbm, std::uint64_t seed,
                     RunArtifacts* artifacts) {
  config.validate();
  return run_with_scenario(config, scenario_for_run(config, seed), tx_power_dbm, seed, artifacts);
}

void ensure_writable_dir(const std::string& dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) {
    throw IoError("cannot create output directory '" + dir + "'");
  }
  const fs::path probe = fs::path(dir) / ".write_probe";
  {
    std::ofstream out(probe);
    if (!out || !(out << "ok")) throw IoError("output directory '" + dir + "' is not writable");
  }
  fs::remove(probe, ec);
}

ExperimentReport run_experiment(const ExperimentConfig& config, bool write_outputs) {
  config.validate();
  namespace fs = std::filesystem;
  if (write_outputs) ensure_writable_dir(config.output_dir);

  const int powers = static_cast<int>(config.tx_power_dbm.size());
  const int jobs = powers * config.runs;
  const bool keep_artifacts = write_outputs && (config.dump_spectrum || config.dump_optimizer);

  ExperimentReport report;
  report.records.resize(jobs);
  std::vector<RunArtifacts> artifacts(keep_artifacts ? jobs : 0);

  int threads = config.threads > 0 ? config.threads
                                   : static_cast<int>(std::thread::hardware_concurrency());
  threads = std::clamp(threads, 1, jobs);

  std::atomic<int> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&]() {
    for (;;) {
      const int i = next.fetch_add(1);
      if (i >= jobs) return;
      const int pi = i / config.runs;
      const int run = i % config.runs;
      try {
        const std::uint64_t seed = run_seed(config.seed, run);
        RunRecord rec = run_with_scenario(config, scenario_for_run(config, seed),
                                          config.tx_power_dbm[pi], seed,
                                          keep_artifacts ? &artifacts[i] : nullptr);
        rec.run = run;
        rec.power_index = pi;
        report.records[i] = std::move(rec);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next.store(jobs);
        return;
      }
    }
  };
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);

  report.aggregates = aggregate_records(report.records, config.tx_power_dbm);

  if (write_outputs) {
    const fs::path dir(config.output_dir);
    write_records_csv((dir / "records.csv").string(), report.records);
    write_targets_csv((dir / "targets.csv").string(), report.records);
    write_aggregate_csv((dir / "aggregate.csv").string(), report.aggregates);
    {
      std::ofstream cfg(dir / "config.json");
      if (!cfg) throw IoError("cannot write config.json");
      cfg << experiment_config_to_json(config) << '\n';
    }
    if (keep_artifacts) {
      if (config.dump_spectrum) fs::create_directories(dir / "spectra");
      if (config.dump_optimizer) fs::create_directories(dir / "optimizer");
      for (int i = 0; i < jobs; ++i) {
        const std::string stem = "run" + std::to_string(i % config.runs) + "_p" +
                                 std::to_string(i / config.runs);
        if (config.dump_spectrum) {
          std::ofstream out(dir / "spectra" / (stem + ".csv"));
          if (!out) throw IoError("cannot write spectrum dump");
          write_spectrum_csv(out, artifacts[i].spectrum);
        }
        if (config.dump_optimizer && artifacts[i].optimizer) {
          std::ofstream out(dir / "optimizer" / (stem + ".json"));
          if (!out) throw IoError("cannot write optimizer dump");
          write_optimizer_debug(out, *artifacts[i].optimizer);
        }
      }
    }
  }
  return report;
}

}  // namespace fdisac
