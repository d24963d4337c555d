// SPDX-License-Identifier: Apache-2.0
#include "fdisac/experiment_config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

#include "fdisac/errors.hpp"

namespace fdisac {

using nlohmann::json;

void ExperimentConfig::sync_geometry() {
  array.wavelength = kSpeedOfLight / carrier_hz;
  array.element_spacing = spacing_wavelengths * array.wavelength;
}

void ExperimentConfig::validate() const {
  array.validate();
  ofdm.validate();
  if (!(carrier_hz > 0.0) || !(spacing_wavelengths > 0.0)) {
    throw InvalidArgument("config: carrier_hz and element spacing must be positive");
  }
  const auto& s = scenario;
  if (s.k_targets < 1) throw InvalidArgument("config: k_targets must be >= 1");
  if (s.l_scatterers < 1 || s.l_scatterers > s.k_targets) {
    throw InvalidArgument("config: l_scatterers must lie in [1, k_targets]");
  }
  if (s.k_targets >= array.m_rf_rx) {
    throw InvalidArgument("config: k_targets must be smaller than m_rf_rx for MUSIC");
  }
  if (static_cast<int>(s.anchors.size()) > s.k_targets) {
    throw InvalidArgument("config: more anchors than targets");
  }
  if (n_taps < 0 || n_taps > array.n_rf_tx * array.m_rf_rx || n_taps % array.m_rf_rx != 0) {
    throw InvalidArgument("config: n_taps must be a multiple of m_rf_rx in [0, N_RF*M_RF]");
  }
  if (!std::isfinite(si_threshold_dbm)) throw InvalidArgument("config: si_threshold_dbm");
  if (codebook_bits < 1 || codebook_bits > 20) {
    throw InvalidArgument("config: codebook_bits must lie in [1, 20]");
  }
  if (!(music.grid_step > 0.0)) throw InvalidArgument("config: music_step_deg must be > 0");
  if (!(association_threshold_deg > 0.0)) {
    throw InvalidArgument("config: association_threshold_deg must be > 0");
  }
  if (sensing_slot != 0 && sensing_slot != 1) {
    throw InvalidArgument("config: sensing.slot must be 0 or 1");
  }
  if (tx_power_dbm.empty()) throw InvalidArgument("config: tx_power_dbm is empty");
  for (double p : tx_power_dbm) {
    if (!std::isfinite(p)) throw InvalidArgument("config: tx_power_dbm values must be finite");
  }
  if (runs < 1) throw InvalidArgument("config: runs must be >= 1");
  if (threads < 0) throw InvalidArgument("config: threads must be >= 0");
}

OptimizerConfig ExperimentConfig::optimizer_config(double tx_power_w) const {
  OptimizerConfig o;
  o.n_taps = n_taps;
  o.si_threshold_w = dbm_to_watts(si_threshold_dbm);
  o.tx_power_w = tx_power_w;
  o.noise_var_w = dbm_to_watts(scenario.channel.ue_noise_floor_dbm);
  o.dl_path_gain =
      db_to_linear(-scenario.channel.dl_pathloss_db) / std::max(1, scenario.l_scatterers);
  o.tx_codebook = dft_codebook(codebook_bits, array.n_per_chain_tx);
  o.rx_codebook = dft_codebook(codebook_bits, array.m_per_chain_rx);
  return o;
}

namespace {

// Tracks which keys of an object were consumed.
class Section {
 public:
  Section(const json& j, std::string name) : j_(j), name_(std::move(name)) {
    if (!j_.is_object()) throw InvalidArgument("config: '" + name_ + "' must be an object");
  }

  template <typename T>
  void read(const char* key, T& out) {
    seen_.insert(key);
    auto it = j_.find(key);
    if (it == j_.end()) return;
    try {
      out = it->template get<T>();
    } catch (const json::exception& e) {
      throw InvalidArgument("config: bad value for '" + name_ + "." + key + "': " + e.what());
    }
  }

  const json* child(const char* key) {
    seen_.insert(key);
    auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  void finish() const {
    for (const auto& [k, v] : j_.items()) {
      if (!seen_.count(k)) throw InvalidArgument("config: unknown key '" + name_ + "." + k + "'");
    }
  }

 private:
  const json& j_;
  std::string name_;
  std::set<std::string> seen_;
};

void read_array(const json& j, ExperimentConfig& c) {
  Section s(j, "array");
  s.read("n_rf_tx", c.array.n_rf_tx);
  s.read("n_per_chain_tx", c.array.n_per_chain_tx);
  s.read("m_rf_rx", c.array.m_rf_rx);
  s.read("m_per_chain_rx", c.array.m_per_chain_rx);
  s.read("ue_antennas", c.array.ue_antennas);
  s.read("streams", c.array.streams);
  s.read("carrier_hz", c.carrier_hz);
  s.read("element_spacing_wavelengths", c.spacing_wavelengths);
  s.finish();
}

void read_ofdm(const json& j, ExperimentConfig& c) {
  Section s(j, "ofdm");
  s.read("subcarriers", c.ofdm.subcarriers);
  s.read("symbols", c.ofdm.symbols);
  s.read("subcarrier_spacing_hz", c.ofdm.subcarrier_spacing);
  double ts = c.ofdm.symbol_duration();
  s.read("symbol_duration_s", ts);
  c.ofdm.cp_duration = ts - 1.0 / c.ofdm.subcarrier_spacing;
  s.finish();
  if (c.ofdm.cp_duration < -1e-15) {
    throw InvalidArgument("config: symbol_duration_s shorter than 1/subcarrier_spacing");
  }
  c.ofdm.cp_duration = std::max(0.0, c.ofdm.cp_duration);
}

void read_scenario(const json& j, ExperimentConfig& c) {
  Section s(j, "scenario");
  auto& sc = c.scenario;
  auto& lim = sc.limits;
  s.read("k_targets", sc.k_targets);
  s.read("l_scatterers", sc.l_scatterers);
  s.read("min_range_m", lim.min_range_m);
  s.read("max_range_m", lim.max_range_m);
  double kmh = lim.max_speed_mps * 3.6;
  s.read("max_speed_kmh", kmh);
  lim.max_speed_mps = kmh_to_mps(kmh);
  s.read("min_doa_deg", lim.min_doa_deg);
  s.read("max_doa_deg", lim.max_doa_deg);
  s.read("min_doa_separation_deg", lim.min_doa_separation_deg);
  s.read("rcs_m2", lim.rcs_m2);
  s.read("include_array_gain", lim.include_array_gain);
  s.read("on_grid", c.on_grid);
  if (const json* anchors = s.child("anchors")) {
    if (!anchors->is_array()) throw InvalidArgument("config: scenario.anchors must be a list");
    sc.anchors.clear();
    for (const auto& a : *anchors) {
      Section as(a, "scenario.anchors[]");
      TargetAnchor t;
      if (!a.contains("doa_deg")) throw InvalidArgument("config: anchor without doa_deg");
      as.read("doa_deg", t.doa_deg);
      double v = 0.0;
      if (a.contains("range_m")) {
        as.read("range_m", v);
        t.range_m = v;
      }
      if (a.contains("velocity_mps")) {
        as.read("velocity_mps", v);
        t.velocity_mps = v;
      }
      as.finish();
      sc.anchors.push_back(t);
    }
  }
  s.finish();
}

void read_channel(const json& j, ExperimentConfig& c) {
  Section s(j, "channel");
  auto& ch = c.scenario.channel;
  s.read("si_k_factor_db", ch.si_rician_k_db);
  s.read("si_pathloss_db", ch.si_pathloss_db);
  s.read("dl_pathloss_db", ch.dl_pathloss_db);
  s.read("noise_floor_dbm", ch.noise_floor_dbm);
  s.read("ue_noise_floor_dbm", ch.ue_noise_floor_dbm);
  s.read("si_array_separation_m", ch.si_array_separation_m);
  if (const json* e = s.child("si_estimate_nmse_db")) {
    if (e->is_null()) {
      c.si_estimate_nmse_db.reset();
    } else if (e->is_number()) {
      c.si_estimate_nmse_db = e->get<double>();
    } else {
      throw InvalidArgument("config: channel.si_estimate_nmse_db must be a number or null");
    }
  }
  s.finish();
}

void read_optimizer(const json& j, ExperimentConfig& c) {
  Section s(j, "optimizer");
  s.read("n_taps", c.n_taps);
  s.read("si_threshold_dbm", c.si_threshold_dbm);
  s.read("codebook_bits", c.codebook_bits);
  s.finish();
}

void read_sensing(const json& j, ExperimentConfig& c) {
  Section s(j, "sensing");
  double step_deg = rad_to_deg(c.music.grid_step);
  s.read("music_step_deg", step_deg);
  c.music.grid_step = deg_to_rad(step_deg);
  s.read("music_refine", c.music.refine);
  s.read("music_normalize", c.music.normalize);
  s.read("delay_doppler_refine", c.delay_doppler.refine);
  s.read("quotient_guard", c.delay_doppler.guard);
  s.read("association_threshold_deg", c.association_threshold_deg);
  s.read("slot", c.sensing_slot);
  s.finish();
}

void read_dumps(const json& j, ExperimentConfig& c) {
  Section s(j, "dumps");
  s.read("spectrum", c.dump_spectrum);
  s.read("optimizer", c.dump_optimizer);
  s.finish();
}

}  // namespace

ExperimentConfig parse_experiment_config(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw InvalidArgument(std::string("config: malformed JSON: ") + e.what());
  }
  ExperimentConfig c;
  Section top(j, "config");
  if (const json* a = top.child("array")) read_array(*a, c);
  if (const json* o = top.child("ofdm")) read_ofdm(*o, c);
  if (const json* s = top.child("scenario")) read_scenario(*s, c);
  if (const json* ch = top.child("channel")) read_channel(*ch, c);
  if (const json* o = top.child("optimizer")) read_optimizer(*o, c);
  if (const json* s = top.child("sensing")) read_sensing(*s, c);
  if (const json* d = top.child("dumps")) read_dumps(*d, c);
  if (const json* p = top.child("tx_power_dbm")) {
    try {
      c.tx_power_dbm = p->is_array() ? p->get<std::vector<double>>()
                                     : std::vector<double>{p->get<double>()};
    } catch (const json::exception& e) {
      throw InvalidArgument(std::string("config: bad tx_power_dbm: ") + e.what());
    }
  }
  top.read("runs", c.runs);
  top.read("seed", c.seed);
  top.read("threads", c.threads);
  top.read("output_dir", c.output_dir);
  top.finish();
  c.sync_geometry();
  c.validate();
  return c;
}

ExperimentConfig load_experiment_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_experiment_config(ss.str());
}

std::string experiment_config_to_json(const ExperimentConfig& c) {
  json j;
  j["array"] = {{"n_rf_tx", c.array.n_rf_tx},
                {"n_per_chain_tx", c.array.n_per_chain_tx},
                {"m_rf_rx", c.array.m_rf_rx},
                {"m_per_chain_rx", c.array.m_per_chain_rx},
                {"ue_antennas", c.array.ue_antennas},
                {"streams", c.array.streams},
                {"carrier_hz", c.carrier_hz},
                {"element_spacing_wavelengths", c.spacing_wavelengths}};
  j["ofdm"] = {{"subcarriers", c.ofdm.subcarriers},
               {"symbols", c.ofdm.symbols},
               {"subcarrier_spacing_hz", c.ofdm.subcarrier_spacing},
               {"symbol_duration_s", c.ofdm.symbol_duration()}};
  const auto& lim = c.scenario.limits;
  json anchors = json::array();
  for (const auto& a : c.scenario.anchors) {
    json aj = {{"doa_deg", a.doa_deg}};
    if (a.range_m) aj["range_m"] = *a.range_m;
    if (a.velocity_mps) aj["velocity_mps"] = *a.velocity_mps;
    anchors.push_back(aj);
  }
  j["scenario"] = {{"k_targets", c.scenario.k_targets},
                   {"l_scatterers", c.scenario.l_scatterers},
                   {"min_range_m", lim.min_range_m},
                   {"max_range_m", lim.max_range_m},
                   {"max_speed_kmh", lim.max_speed_mps * 3.6},
                   {"min_doa_deg", lim.min_doa_deg},
                   {"max_doa_deg", lim.max_doa_deg},
                   {"min_doa_separation_deg", lim.min_doa_separation_deg},
                   {"rcs_m2", lim.rcs_m2},
                   {"include_array_gain", lim.include_array_gain},
                   {"on_grid", c.on_grid},
                   {"anchors", anchors}};
  const auto& ch = c.scenario.channel;
  j["channel"] = {{"si_k_factor_db", ch.si_rician_k_db},
                  {"si_pathloss_db", ch.si_pathloss_db},
                  {"dl_pathloss_db", ch.dl_pathloss_db},
                  {"noise_floor_dbm", ch.noise_floor_dbm},
                  {"ue_noise_floor_dbm", ch.ue_noise_floor_dbm},
                  {"si_array_separation_m", ch.si_array_separation_m},
                  {"si_estimate_nmse_db", c.si_estimate_nmse_db
                                              ? json(*c.si_estimate_nmse_db)
                                              : json(nullptr)}};
  j["optimizer"] = {{"n_taps", c.n_taps},
                    {"si_threshold_dbm", c.si_threshold_dbm},
                    {"codebook_bits", c.codebook_bits}};
  j["sensing"] = {{"music_step_deg", rad_to_deg(c.music.grid_step)},
                  {"music_refine", c.music.refine},
                  {"music_normalize", c.music.normalize},
                  {"delay_doppler_refine", c.delay_doppler.refine},
                  {"quotient_guard", c.delay_doppler.guard},
                  {"association_threshold_deg", c.association_threshold_deg},
                  {"slot", c.sensing_slot}};
  j["dumps"] = {{"spectrum", c.dump_spectrum}, {"optimizer", c.dump_optimizer}};
  j["tx_power_dbm"] = c.tx_power_dbm;
  j["runs"] = c.runs;
  j["seed"] = c.seed;
  j["threads"] = c.threads;
  j["output_dir"] = c.output_dir;
  return j.dump(2);
}

ExperimentConfig full_scale_config() {
  ExperimentConfig c;
  c.sync_geometry();
  return c;
}

ExperimentConfig pinned_targets_config() {
  ExperimentConfig c = full_scale_config();
  c.scenario.anchors = {
      {3.0, 80.0, std::nullopt},
      {10.0, 40.0, std::nullopt},
      {12.0, 44.0, std::nullopt},
  };
  c.scenario.limits.min_doa_separation_deg = 5.0;
  return c;
}

ExperimentConfig desk_scale_config() {
  ExperimentConfig c;
  c.array.n_rf_tx = 4;
  c.array.n_per_chain_tx = 8;
  c.array.m_rf_rx = 4;
  c.array.m_per_chain_rx = 8;
  c.array.ue_antennas = 4;
  c.array.streams = 4;
  c.ofdm.subcarriers = 128;
  c.ofdm.symbols = 56;
  c.scenario.k_targets = 3;
  c.scenario.l_scatterers = 2;
  c.n_taps = 4;
  c.codebook_bits = 4;
  c.tx_power_dbm = {0.0, 10.0, 20.0, 30.0};
  c.sync_geometry();
  return c;
}

}  // namespace fdisac
