// SPDX-License-Identifier: Apache-2.0
#include "fdisac/scenario_io.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"

#include "fdisac/errors.hpp"

namespace fdisac {

using nlohmann::json;

std::string scenario_to_json(const ScenarioFile& file) {
  const Scenario& sc = file.scenario;
  json targets = json::array();
  for (const auto& t : sc.targets) {
    targets.push_back({{"doa_deg", rad_to_deg(t.doa)},
                       {"doa_rad", t.doa},
                       {"range_m", t.range},
                       {"velocity_mps", t.velocity},
                       {"delay_s", t.delay},
                       {"doppler_hz", t.doppler},
                       {"reflection_re", t.reflection.real()},
                       {"reflection_im", t.reflection.imag()},
                       {"is_dl_scatterer", t.is_dl_scatterer},
                       {"dl_phase_rad", t.dl_phase}});
  }
  json j;
  j["seed"] = sc.seed;
  j["run_seed"] = file.run_seed;
  j["k_factor_db"] = sc.channel.si_rician_k_db;
  j["si_pathloss_db"] = sc.channel.si_pathloss_db;
  j["dl_pathloss_db"] = sc.channel.dl_pathloss_db;
  j["noise_floor_dbm"] = sc.channel.noise_floor_dbm;
  j["ue_noise_floor_dbm"] = sc.channel.ue_noise_floor_dbm;
  j["si_array_separation_m"] = sc.channel.si_array_separation_m;
  j["dl_scatterer_count"] = sc.dl_scatterer_count;
  j["targets"] = targets;
  if (file.config) j["config"] = json::parse(experiment_config_to_json(*file.config));
  return j.dump(2);
}

ScenarioFile scenario_from_json(const std::string& text, const std::optional<ArrayConfig>& array) {
  ScenarioFile out;
  try {
    const json j = json::parse(text);
    if (j.contains("config")) out.config = parse_experiment_config(j.at("config").dump());
    Scenario& sc = out.scenario;
    sc.seed = j.at("seed").get<std::uint64_t>();
    out.run_seed = j.value("run_seed", sc.seed);
    sc.channel.si_rician_k_db = j.at("k_factor_db").get<double>();
    sc.channel.si_pathloss_db = j.at("si_pathloss_db").get<double>();
    sc.channel.dl_pathloss_db = j.at("dl_pathloss_db").get<double>();
    sc.channel.noise_floor_dbm = j.value("noise_floor_dbm", sc.channel.noise_floor_dbm);
    sc.channel.ue_noise_floor_dbm = j.value("ue_noise_floor_dbm", sc.channel.ue_noise_floor_dbm);
    sc.channel.si_array_separation_m =
        j.value("si_array_separation_m", sc.channel.si_array_separation_m);
    for (const auto& tj : j.at("targets")) {
      RadarTarget t;
      t.doa = tj.contains("doa_rad") ? tj.at("doa_rad").get<double>()
                                     : deg_to_rad(tj.at("doa_deg").get<double>());
      t.range = tj.at("range_m").get<double>();
      t.velocity = tj.at("velocity_mps").get<double>();
      t.delay = tj.value("delay_s", two_way_delay(t.range));
      t.doppler = tj.contains("doppler_hz") ? tj.at("doppler_hz").get<double>() : 0.0;
      t.reflection = {tj.at("reflection_re").get<double>(), tj.at("reflection_im").get<double>()};
      t.is_dl_scatterer = tj.value("is_dl_scatterer", false);
      t.dl_phase = tj.value("dl_phase_rad", 0.0);
      sc.targets.push_back(t);
    }
    int flagged = 0;
    for (const auto& t : sc.targets) flagged += t.is_dl_scatterer ? 1 : 0;
    sc.dl_scatterer_count = j.value("dl_scatterer_count", flagged);
    if (sc.dl_scatterer_count != flagged) {
      throw InvalidArgument("scenario: dl_scatterer_count does not match flagged targets");
    }
  } catch (const json::exception& e) {
    throw InvalidArgument(std::string("scenario: ") + e.what());
  }

  ArrayConfig cfg;
  if (array) {
    cfg = *array;
  } else if (out.config) {
    cfg = out.config->array;
  }
  // Doppler depends on the wavelength; fill it in when the file omitted it.
  for (auto& t : out.scenario.targets) {
    if (t.doppler == 0.0 && t.velocity != 0.0) {
      t.doppler = doppler_from_velocity(t.velocity, cfg.wavelength);
    }
  }
  const auto& ch = out.scenario.channel;
  out.scenario.si_channel =
      rician_si_channel(cfg, ch.si_rician_k_db, ch.si_pathloss_db,
                        si_channel_seed(out.scenario.seed), ch.si_array_separation_m);
  return out;
}

void save_scenario(const std::string& path, const ScenarioFile& file) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write scenario file '" + path + "'");
  out << scenario_to_json(file) << '\n';
  if (!out) throw IoError("write failed for '" + path + "'");
}

ScenarioFile load_scenario(const std::string& path, const std::optional<ArrayConfig>& array) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open scenario file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return scenario_from_json(ss.str(), array);
}

}  // namespace fdisac
