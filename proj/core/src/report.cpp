// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <string>
#include <utility>

#include "fdisac/errors.hpp"
#include "fdisac/harness.hpp"

namespace fdisac {

const char* const kRecordsHeader =
    "run,power_index,tx_power_dbm,seed,k_targets,matched,unmatched_estimates,feasible,"
    "certified,alpha,dl_rate_bps_hz,ideal_dl_rate_bps_hz,residual_si_dbm";
const char* const kTargetsHeader =
    "run,power_index,tx_power_dbm,target,is_dl,matched,true_doa_deg,true_range_m,"
    "true_velocity_mps,est_doa_deg,est_range_m,est_velocity_mps,doa_error_deg,range_error_m,"
    "velocity_error_mps,relative_velocity_error";
const char* const kAggregateHeader =
    "tx_power_dbm,runs,all_detected_fraction,matched_fraction,rmse_doa_deg,rmse_range_m,"
    "rmse_velocity_mps,median_range_error_m,median_rel_velocity_error,p90_rel_velocity_error,"
    "mean_dl_rate_bps_hz,mean_ideal_rate_bps_hz,mean_rate_gap_bps_hz,feasible_fraction,"
    "certified_fraction,mean_alpha";

namespace {

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double parse_num(const std::string& s) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str() || *end != '\0') throw IoError("CSV: bad number '" + s + "'");
  return v;
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(line);
  while (std::getline(in, cur, sep)) out.push_back(cur);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write '" + path + "'");
  return out;
}

void close_checked(std::ofstream& out, const std::string& path) {
  out.close();
  if (!out) throw IoError("write failed for '" + path + "'");
}

double median(std::vector<double> v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// Linear interpolation between order statistics.
double percentile(std::vector<double> v, double q) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(v.begin(), v.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, v.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  if (frac == 0.0) return v[lo];
  return v[lo] + frac * (v[hi] - v[lo]);
}

double rms(const std::vector<double>& v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s / static_cast<double>(v.size()));
}

}  // namespace

void write_records_csv(const std::string& path, const std::vector<RunRecord>& records) {
  auto out = open_out(path);
  out << kRecordsHeader << '\n';
  for (const auto& r : records) {
    std::string res;
    for (std::size_t j = 0; j < r.residual_si_dbm.size(); ++j) {
      if (j) res += ';';
      res += num(r.residual_si_dbm[j]);
    }
    out << r.run << ',' << r.power_index << ',' << num(r.tx_power_dbm) << ',' << r.seed << ','
        << r.targets.size() << ',' << r.matched_count() << ',' << r.unmatched_estimates << ','
        << (r.feasible ? 1 : 0) << ',' << (r.certified ? 1 : 0) << ',' << r.alpha << ','
        << num(r.dl_rate_bps_hz) << ',' << num(r.ideal_dl_rate_bps_hz) << ',' << res << '\n';
  }
  close_checked(out, path);
}

void write_targets_csv(const std::string& path, const std::vector<RunRecord>& records) {
  auto out = open_out(path);
  out << kTargetsHeader << '\n';
  for (const auto& r : records) {
    for (const auto& t : r.targets) {
      out << r.run << ',' << r.power_index << ',' << num(r.tx_power_dbm) << ',' << t.index << ','
          << (t.is_dl ? 1 : 0) << ',' << (t.matched ? 1 : 0) << ',' << num(t.true_doa_deg) << ','
          << num(t.true_range_m) << ',' << num(t.true_velocity_mps) << ','
          << num(t.est_doa_deg) << ',' << num(t.est_range_m) << ','
          << num(t.est_velocity_mps) << ',' << num(t.doa_error_deg) << ','
          << num(t.range_error_m) << ',' << num(t.velocity_error_mps) << ','
          << num(t.relative_velocity_error) << '\n';
    }
  }
  close_checked(out, path);
}

void write_aggregate_csv(const std::string& path, const std::vector<AggregateRow>& rows) {
  auto out = open_out(path);
  out << kAggregateHeader << '\n';
  for (const auto& a : rows) {
    out << num(a.tx_power_dbm) << ',' << a.runs << ',' << num(a.all_detected_fraction) << ','
        << num(a.matched_fraction) << ',' << num(a.rmse_doa_deg) << ',' << num(a.rmse_range_m)
        << ',' << num(a.rmse_velocity_mps) << ',' << num(a.median_range_error_m) << ','
        << num(a.median_rel_velocity_error) << ',' << num(a.p90_rel_velocity_error) << ','
        << num(a.mean_dl_rate) << ',' << num(a.mean_ideal_rate) << ','
        << num(a.mean_rate_gap) << ',' << num(a.feasible_fraction) << ','
        << num(a.certified_fraction) << ',' << num(a.mean_alpha) << '\n';
  }
  close_checked(out, path);
}

std::vector<RunRecord> read_records_csv(const std::string& records_path,
                                        const std::string& targets_path) {
  std::ifstream rin(records_path);
  if (!rin) throw IoError("cannot open '" + records_path + "'");
  std::string line;
  if (!std::getline(rin, line) || line != kRecordsHeader) {
    throw IoError("unexpected header in '" + records_path + "'");
  }
  std::vector<RunRecord> records;
  std::map<std::pair<int, int>, std::size_t> where;
  while (std::getline(rin, line)) {
    if (line.empty()) continue;
    const auto f = split(line, ',');
    if (f.size() != 13) throw IoError("records.csv: wrong field count");
    RunRecord r;
    r.run = std::stoi(f[0]);
    r.power_index = std::stoi(f[1]);
    r.tx_power_dbm = parse_num(f[2]);
    r.seed = std::stoull(f[3]);
    r.unmatched_estimates = std::stoi(f[6]);
    r.feasible = f[7] == "1";
    r.certified = f[8] == "1";
    r.alpha = std::stoi(f[9]);
    r.dl_rate_bps_hz = parse_num(f[10]);
    r.ideal_dl_rate_bps_hz = parse_num(f[11]);
    if (!f[12].empty()) {
      for (const auto& s : split(f[12], ';')) r.residual_si_dbm.push_back(parse_num(s));
    }
    where[{r.run, r.power_index}] = records.size();
    records.push_back(std::move(r));
  }

  std::ifstream tin(targets_path);
  if (!tin) throw IoError("cannot open '" + targets_path + "'");
  if (!std::getline(tin, line) || line != kTargetsHeader) {
    throw IoError("unexpected header in '" + targets_path + "'");
  }
  while (std::getline(tin, line)) {
    if (line.empty()) continue;
    const auto f = split(line, ',');
    if (f.size() != 16) throw IoError("targets.csv: wrong field count");
    auto it = where.find({std::stoi(f[0]), std::stoi(f[1])});
    if (it == where.end()) throw IoError("targets.csv: row without a run record");
    TargetRecord t;
    t.index = std::stoi(f[3]);
    t.is_dl = f[4] == "1";
    t.matched = f[5] == "1";
    t.true_doa_deg = parse_num(f[6]);
    t.true_range_m = parse_num(f[7]);
    t.true_velocity_mps = parse_num(f[8]);
    t.est_doa_deg = parse_num(f[9]);
    t.est_range_m = parse_num(f[10]);
    t.est_velocity_mps = parse_num(f[11]);
    t.doa_error_deg = parse_num(f[12]);
    t.range_error_m = parse_num(f[13]);
    t.velocity_error_mps = parse_num(f[14]);
    t.relative_velocity_error = parse_num(f[15]);
    records[it->second].targets.push_back(t);
  }
  return records;
}

std::vector<AggregateRow> aggregate_records(const std::vector<RunRecord>& records,
                                            const std::vector<double>& tx_power_dbm) {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  std::vector<AggregateRow> rows;
  for (int pi = 0; pi < static_cast<int>(tx_power_dbm.size()); ++pi) {
    AggregateRow a;
    a.tx_power_dbm = tx_power_dbm[pi];
    std::vector<double> doa, range, vel, rel;
    int all_detected = 0, matched = 0, total = 0, feasible = 0, certified = 0;
    double rate = 0.0, ideal = 0.0, gap = 0.0, alpha = 0.0;
    for (const auto& r : records) {
      if (r.power_index != pi) continue;
      ++a.runs;
      const int m = r.matched_count();
      matched += m;
      total += static_cast<int>(r.targets.size());
      if (m == static_cast<int>(r.targets.size())) ++all_detected;
      for (const auto& t : r.targets) {
        if (!t.matched) continue;
        doa.push_back(t.doa_error_deg);
        range.push_back(t.range_error_m);
        vel.push_back(t.velocity_error_mps);
        rel.push_back(t.relative_velocity_error);
      }
      rate += r.dl_rate_bps_hz;
      ideal += r.ideal_dl_rate_bps_hz;
      gap += r.ideal_dl_rate_bps_hz - r.dl_rate_bps_hz;
      alpha += r.alpha;
      feasible += r.feasible ? 1 : 0;
      certified += r.certified ? 1 : 0;
    }
    if (a.runs == 0) {
      rows.push_back(a);
      continue;
    }
    const double n = a.runs;
    a.all_detected_fraction = all_detected / n;
    a.matched_fraction = total ? static_cast<double>(matched) / total : nan;
    a.rmse_doa_deg = rms(doa);
    a.rmse_range_m = rms(range);
    a.rmse_velocity_mps = rms(vel);
    a.median_range_error_m = median(range);
    a.median_rel_velocity_error = median(rel);
    a.p90_rel_velocity_error = percentile(rel, 0.9);
    a.mean_dl_rate = rate / n;
    a.mean_ideal_rate = ideal / n;
    a.mean_rate_gap = gap / n;
    a.feasible_fraction = feasible / n;
    a.certified_fraction = feasible ? static_cast<double>(certified) / feasible : nan;
    a.mean_alpha = alpha / n;
    rows.push_back(a);
  }
  return rows;
}

}  // namespace fdisac
