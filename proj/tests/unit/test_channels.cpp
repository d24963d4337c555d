#include <gtest/gtest.h>

#include <algorithm>

#include "fdisac/channels.hpp"
#include "fdisac/errors.hpp"
#include "test_util.hpp"

using namespace fdisac;
using fdisac::testing::max_abs;
using fdisac::testing::random_cmatrix;
using fdisac::testing::ula_element;

namespace {

ArrayConfig small_array() {
  ArrayConfig a;
  a.n_rf_tx = 2;
  a.n_per_chain_tx = 4;
  a.m_rf_rx = 2;
  a.m_per_chain_rx = 3;
  a.ue_antennas = 2;
  a.streams = 2;
  return a;
}

OfdmParams small_ofdm(int p = 6, int q = 4) {
  OfdmParams o;
  o.subcarriers = p;
  o.symbols = q;
  return o;
}

}  // namespace

TEST(Kinematics, DelayAndDopplerRoundTrip) {
  EXPECT_DOUBLE_EQ(two_way_delay(150.0), 300.0 / kSpeedOfLight);
  EXPECT_NEAR(range_from_delay(two_way_delay(42.125)), 42.125, 1e-12);
  const double lam = kSpeedOfLight / 28e9;
  EXPECT_DOUBLE_EQ(doppler_from_velocity(10.0, lam), 20.0 / lam);
  EXPECT_NEAR(velocity_from_doppler(doppler_from_velocity(-27.7, lam), lam), -27.7, 1e-12);
  // Grid resolution quoted for the default numerology.
  const OfdmParams o;
  EXPECT_NEAR(o.range_bin(), kSpeedOfLight / (2.0 * 792 * 120e3), 1e-12);
  EXPECT_NEAR(o.range_bin(), 1.577, 1e-3);
  EXPECT_NEAR(o.symbol_duration(), 8.92e-6, 1e-18);
}

TEST(Kinematics, RadarEquation) {
  const double lam = 0.01;
  const double expected = 3.0 * lam * lam * 2.0 / (std::pow(4.0 * kPi, 3) * std::pow(20.0, 4));
  EXPECT_NEAR(reflection_power(20.0, lam, 2.0, 3.0) / expected, 1.0, 1e-12);
  EXPECT_NEAR(reflection_power(40.0, lam, 1.0, 1.0) / reflection_power(20.0, lam, 1.0, 1.0),
              1.0 / 16.0, 1e-12);
}

TEST(Scenario, DeterministicInSeed) {
  ScenarioSpec spec;
  const ArrayConfig a = small_array();
  const Scenario s1 = generate_scenario(a, spec, 77);
  const Scenario s2 = generate_scenario(a, spec, 77);
  const Scenario s3 = generate_scenario(a, spec, 78);
  ASSERT_EQ(s1.targets.size(), 6u);
  for (std::size_t k = 0; k < s1.targets.size(); ++k) {
    EXPECT_EQ(s1.targets[k].doa, s2.targets[k].doa);
    EXPECT_EQ(s1.targets[k].reflection, s2.targets[k].reflection);
    EXPECT_EQ(s1.targets[k].is_dl_scatterer, s2.targets[k].is_dl_scatterer);
  }
  EXPECT_EQ(s1.si_channel, s2.si_channel);
  EXPECT_NE(s1.targets[0].doa, s3.targets[0].doa);
}

TEST(Scenario, DrawsRespectBoundsAndCounts) {
  ScenarioSpec spec;
  spec.limits.min_doa_separation_deg = 4.0;
  const ArrayConfig a = small_array();
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    const Scenario s = generate_scenario(a, spec, seed);
    int dl = 0;
    for (const auto& t : s.targets) {
      EXPECT_GT(t.range, 0.0);
      EXPECT_LE(t.range, 80.0);
      EXPECT_LE(std::abs(t.velocity), 100.0 / 3.6 + 1e-12);
      EXPECT_LE(std::abs(t.doa), kPi / 2 + 1e-12);
      EXPECT_NEAR(t.delay, 2.0 * t.range / kSpeedOfLight, 1e-20);
      EXPECT_NEAR(t.doppler, 2.0 * t.velocity / a.wavelength, 1e-9);
      const double expect = reflection_power(t.range, a.wavelength, 1.0, a.n_tx() * a.m_rx());
      EXPECT_NEAR(std::norm(t.reflection) / expect, 1.0, 1e-12);
      dl += t.is_dl_scatterer;
    }
    EXPECT_EQ(dl, 2);
    EXPECT_EQ(s.dl_scatterer_count, 2);
    EXPECT_EQ(s.dl_scatterers().size(), 2u);
    for (std::size_t i = 0; i < s.targets.size(); ++i)
      for (std::size_t j = i + 1; j < s.targets.size(); ++j)
        EXPECT_GE(std::abs(rad_to_deg(s.targets[i].doa - s.targets[j].doa)), 4.0 - 1e-9);
  }
}

TEST(Scenario, AnchorsAndOnGridSnapping) {
  ScenarioSpec spec;
  spec.anchors = {{10.0, 40.0, 5.0}, {12.0, std::nullopt, std::nullopt}};
  const OfdmParams o = small_ofdm(32, 16);
  spec.on_grid = o;
  const ArrayConfig a = small_array();
  const Scenario s = generate_scenario(a, spec, 5);
  EXPECT_DOUBLE_EQ(s.targets[0].doa, deg_to_rad(10.0));
  EXPECT_DOUBLE_EQ(s.targets[1].doa, deg_to_rad(12.0));
  for (const auto& t : s.targets) {
    const double n = t.delay / o.delay_bin();
    const double m = t.doppler / o.doppler_bin();
    EXPECT_NEAR(n, std::round(n), 1e-9);
    EXPECT_NEAR(m, std::round(m), 1e-9);
    EXPECT_NEAR(t.range, range_from_delay(t.delay), 1e-12);
  }
}

TEST(Scenario, RejectsInconsistentSpec) {
  ScenarioSpec spec;
  spec.l_scatterers = 7;
  EXPECT_THROW(generate_scenario(small_array(), spec, 1), InvalidArgument);
  spec = ScenarioSpec{};
  spec.limits.max_range_m = 0.0;
  EXPECT_THROW(generate_scenario(small_array(), spec, 1), InvalidArgument);
  spec = ScenarioSpec{};
  spec.limits.min_doa_separation_deg = 60.0;  // six targets cannot fit
  EXPECT_THROW(generate_scenario(small_array(), spec, 1), InvalidArgument);
}

TEST(Echo, ModulationMatchesFormula) {
  const OfdmParams o = small_ofdm(5, 3);
  const RadarTarget t = make_target(0.2, 17.0, 9.0, Complex(0.3, -0.1), 0.0107);
  const auto mod = echo_modulation(t, o);
  for (int q = 0; q < 3; ++q) {
    for (int p = 0; p < 5; ++p) {
      const double ph = 2.0 * kPi * (q * o.symbol_duration() * t.doppler -
                                     p * t.delay * o.subcarrier_spacing);
      const Complex expect = t.reflection * Complex(std::cos(ph), std::sin(ph));
      EXPECT_NEAR(std::abs(mod[q * 5 + p] - expect), 0.0, 1e-12);
    }
  }
}

TEST(Echo, MatchesDenseOracle) {
  const ArrayConfig a = small_array();
  const OfdmParams o = small_ofdm();
  std::vector<RadarTarget> targets{
      make_target(deg_to_rad(-20.0), 12.0, 3.0, Complex(0.7, 0.2), a.wavelength),
      make_target(deg_to_rad(33.0), 51.0, -8.0, Complex(-0.1, 0.4), a.wavelength)};
  const OfdmGrid x(o.subcarriers, o.symbols, random_cmatrix(a.n_tx(), 24, 3));
  const OfdmGrid y = radar_echo(x, targets, o, a);

  for (int q = 0; q < o.symbols; ++q) {
    for (int p = 0; p < o.subcarriers; ++p) {
      CMatrix h = CMatrix::Zero(a.m_rx(), a.n_tx());
      for (const auto& t : targets) {
        const double ph = 2.0 * kPi * (q * o.symbol_duration() * t.doppler -
                                       p * t.delay * o.subcarrier_spacing);
        for (int m = 0; m < a.m_rx(); ++m)
          for (int n = 0; n < a.n_tx(); ++n)
            h(m, n) += t.reflection * Complex(std::cos(ph), std::sin(ph)) *
                       ula_element(t.doa, m, a.m_rx(), 0.5) *
                       std::conj(ula_element(t.doa, n, a.n_tx(), 0.5));
      }
      const CVector expect = h * x.cell(p, q);
      EXPECT_LT((y.cell(p, q) - expect).norm(), 1e-12);
    }
  }
}

TEST(Echo, StaticTargetsReduceToMatrixProduct) {
  const ArrayConfig a = small_array();
  const OfdmParams o = small_ofdm();
  std::vector<RadarTarget> targets;
  CMatrix h = CMatrix::Zero(a.m_rx(), a.n_tx());
  for (double deg : {-40.0, 5.0, 61.0}) {
    RadarTarget t;
    t.doa = deg_to_rad(deg);
    t.reflection = Complex(0.5, deg / 100.0);
    targets.push_back(t);
    h += t.reflection * steering(t.doa, a.m_rx(), a.element_spacing, a.wavelength) *
         steering(t.doa, a.n_tx(), a.element_spacing, a.wavelength).adjoint();
  }
  const OfdmGrid x(o.subcarriers, o.symbols, random_cmatrix(a.n_tx(), 24, 9));
  const OfdmGrid y = radar_echo(x, targets, o, a);
  EXPECT_LT(max_abs(y.data() - h * x.data()), 1e-12);
}

TEST(Echo, LinearInTransmitGrid) {
  const ArrayConfig a = small_array();
  const OfdmParams o = small_ofdm();
  std::vector<RadarTarget> targets{
      make_target(0.4, 30.0, 12.0, Complex(0.2, 0.9), a.wavelength)};
  const CMatrix x1 = random_cmatrix(a.n_tx(), 24, 1);
  const CMatrix x2 = random_cmatrix(a.n_tx(), 24, 2);
  const Complex c(0.3, -2.0);
  const OfdmGrid y1 = radar_echo(OfdmGrid(6, 4, x1), targets, o, a);
  const OfdmGrid y2 = radar_echo(OfdmGrid(6, 4, x2), targets, o, a);
  const OfdmGrid y12 = radar_echo(OfdmGrid(6, 4, CMatrix(x1 + c * x2)), targets, o, a);
  EXPECT_LT(max_abs(y12.data() - y1.data() - c * y2.data()), 1e-12);
  EXPECT_THROW(radar_echo(OfdmGrid(6, 4, 3), targets, o, a), InvalidArgument);
}

TEST(SiChannel, RicianMoments) {
  // K = 0 dB splits power evenly between the LOS matrix and the scattered part.
  const ArrayConfig a = small_array();
  const double pl = db_to_linear(-40.0);
  const int draws = 3000;
  CMatrix mean = CMatrix::Zero(a.m_rx(), a.n_tx());
  double power = 0.0;
  for (int s = 0; s < draws; ++s) {
    const CMatrix h = rician_si_channel(a, 0.0, 40.0, 1000 + s);
    mean += h;
    power += h.squaredNorm();
  }
  mean /= draws;
  power /= draws * a.m_rx() * a.n_tx();
  EXPECT_NEAR(power / pl, 1.0, 0.03);
  const CMatrix los = std::sqrt(pl * 0.5) * los_si_matrix(a, 0.1);
  // Sample mean error ~ sqrt(pl/2/draws) per entry.
  EXPECT_LT(max_abs(mean - los) / std::sqrt(pl), 5.0 * std::sqrt(0.5 / draws));
}

TEST(SiChannel, PureLosAndNearFieldGeometry) {
  const ArrayConfig a = small_array();
  const CMatrix h = rician_si_channel(a, std::numeric_limits<double>::infinity(), 40.0, 3);
  const CMatrix los = los_si_matrix(a, 0.1);
  EXPECT_LT(max_abs(h - 0.01 * los), 1e-15);
  const double r = std::hypot(2.0 * a.element_spacing, 0.1);
  EXPECT_NEAR(std::arg(los(3, 1) * std::polar(1.0, -2.0 * kPi * r / a.wavelength)), 0.0, 1e-9);
  EXPECT_NEAR(std::abs(los(3, 1)), 1.0, 1e-15);
}

TEST(DlChannel, SinglePathUnitGain) {
  ArrayConfig a = small_array();
  RadarTarget t;
  t.doa = 0.3;
  t.dl_phase = 1.1;
  const CMatrix h = dl_channel({t}, a, 0.0);
  const Eigen::JacobiSVD<CMatrix> svd(h);
  EXPECT_NEAR(svd.singularValues()[0], 1.0, 1e-12);
  EXPECT_NEAR(svd.singularValues()[1], 0.0, 1e-12);
}

TEST(DlChannel, ColumnSpaceAndPathPower) {
  ArrayConfig a = small_array();
  a.ue_antennas = 4;
  std::vector<RadarTarget> paths(2);
  paths[0].doa = -0.5;
  paths[1].doa = 0.7;
  paths[1].dl_phase = 2.0;
  const CMatrix h = dl_channel(paths, a, 100.0);
  CMatrix basis(4, 2);
  for (int l = 0; l < 2; ++l) basis.col(l) = steering(paths[l].doa, 4, a.element_spacing, a.wavelength);
  const CMatrix proj = basis * basis.completeOrthogonalDecomposition().pseudoInverse();
  EXPECT_LT((h - proj * h).norm(), 1e-10 * h.norm());
  EXPECT_THROW(dl_channel({}, a, 100.0), InvalidArgument);
}

TEST(DlChannel, EachPathCarriesPathlossOverL) {
  // TX directions with sin = 0 and 2/N_b are orthogonal, so projecting onto
  // one of them isolates that path: ||H a_N|| = |beta| = sqrt(PL / L).
  const ArrayConfig a = small_array();
  std::vector<RadarTarget> paths(2);
  paths[0].doa = 0.0;
  paths[1].doa = std::asin(2.0 / a.n_tx());
  const CMatrix h = dl_channel(paths, a, 100.0);
  for (const auto& t : paths) {
    const double g = (h * steering(t.doa, a.n_tx(), a.element_spacing, a.wavelength)).norm();
    EXPECT_NEAR(g / std::sqrt(0.5e-10), 1.0, 1e-9);
  }
}

TEST(Noise, PowerMatchesFloor) {
  const OfdmGrid zero(64, 32, 4);
  const OfdmGrid n = add_noise(zero, -90.0, 11);
  const double var = n.data().squaredNorm() / static_cast<double>(n.data().size());
  EXPECT_NEAR(var / 1e-12, 1.0, 0.03);
  // Real and imaginary parts split the variance.
  const double re = n.data().real().squaredNorm() / static_cast<double>(n.data().size());
  EXPECT_NEAR(re / 0.5e-12, 1.0, 0.04);
  EXPECT_EQ(add_noise(zero, -90.0, 11).data(), n.data());
}
