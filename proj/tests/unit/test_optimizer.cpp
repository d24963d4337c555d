#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "json.hpp"

#include "fdisac/channels.hpp"
#include "fdisac/errors.hpp"
#include "fdisac/optimizer.hpp"
#include "test_util.hpp"

using namespace fdisac;
using fdisac::testing::max_abs;
using fdisac::testing::random_cmatrix;

namespace {

ArrayConfig small_array() {
  ArrayConfig a;
  a.n_rf_tx = 2;
  a.n_per_chain_tx = 4;
  a.m_rf_rx = 2;
  a.m_per_chain_rx = 4;
  a.ue_antennas = 2;
  a.streams = 2;
  return a;
}

OptimizerConfig small_config(const ArrayConfig& a) {
  OptimizerConfig c;
  c.n_taps = 2;
  c.si_threshold_w = 1e-3;
  c.tx_power_w = 1.0;
  c.noise_var_w = 1e-3;
  c.tx_codebook = dft_codebook(3, a.n_per_chain_tx);
  c.rx_codebook = dft_codebook(3, a.m_per_chain_rx);
  return c;
}

std::vector<double> deg(std::initializer_list<double> d) {
  std::vector<double> out;
  for (double x : d) out.push_back(deg_to_rad(x));
  return out;
}

}  // namespace

TEST(VirtualChannels, SumOfOuterProducts) {
  const ArrayConfig a = small_array();
  const auto doas = deg({-10.0, 25.0});
  const VirtualChannels vc = make_virtual_channels(doas, {doas[1]}, a);
  CMatrix expect = CMatrix::Zero(8, 8);
  for (double t : doas) {
    expect += steering(t, 8, a.element_spacing, a.wavelength) *
              steering(t, 8, a.element_spacing, a.wavelength).adjoint();
  }
  EXPECT_LT(max_abs(vc.h_radar - expect), 1e-14);
  EXPECT_EQ(vc.h_dl_virtual.rows(), 2);
}

TEST(BeamSearch, TxMatchesExhaustiveJointSearch) {
  const ArrayConfig a = small_array();
  const BeamCodebook book = dft_codebook(3, 4);
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-60.0, 60.0);
  for (int trial = 0; trial < 25; ++trial) {
    const VirtualChannels vc = make_virtual_channels(deg({u(rng), u(rng), u(rng)}), {}, a);
    double best = -1.0;
    for (int i = 0; i < 8; ++i) {
      for (int j = 0; j < 8; ++j) {
        const auto v = beams_from_indices(book, {i, j});
        best = std::max(best, (vc.h_radar * v.assembled).squaredNorm());
      }
    }
    const BeamSelection sel = select_tx_beams(vc, book, a);
    EXPECT_NEAR((vc.h_radar * sel.beams.assembled).squaredNorm(), best, 1e-12 * best);
  }
}

TEST(BeamSearch, RxMatchesExhaustiveRatioSearch) {
  const ArrayConfig a = small_array();
  const BeamCodebook book = dft_codebook(3, 4);
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(-60.0, 60.0);
  for (int trial = 0; trial < 40; ++trial) {
    const VirtualChannels vc = make_virtual_channels(deg({u(rng), u(rng)}), {}, a);
    const CMatrix si = random_cmatrix(8, 8, 100 + trial);
    const AnalogBeamformer v = select_tx_beams(vc, book, a).beams;
    auto ratio = [&](const AnalogBeamformer& w) {
      const double num = (w.assembled.adjoint() * vc.h_radar * v.assembled).squaredNorm();
      const double den = (w.assembled.adjoint() * si * v.assembled).squaredNorm();
      return num / den;
    };
    double best = -1.0;
    for (int i = 0; i < 8; ++i) {
      for (int j = 0; j < 8; ++j) best = std::max(best, ratio(beams_from_indices(book, {i, j})));
    }
    const BeamSelection sel = select_rx_beams(vc, si, v, book, a);
    EXPECT_NEAR(ratio(sel.beams), best, 1e-10 * best) << "trial " << trial;
  }
}

TEST(BeamSearch, RxPrefersSiFreeBeams) {
  const ArrayConfig a = small_array();
  const BeamCodebook book = dft_codebook(3, 4);
  const VirtualChannels vc = make_virtual_channels(deg({5.0}), {}, a);
  const AnalogBeamformer v = select_tx_beams(vc, book, a).beams;
  const BeamSelection sel = select_rx_beams(vc, CMatrix::Zero(8, 8), v, book, a);
  double best = -1.0;
  for (int i = 0; i < 8; ++i) {
    for (int j = 0; j < 8; ++j) {
      const auto w = beams_from_indices(book, {i, j});
      best = std::max(best, (w.assembled.adjoint() * vc.h_radar * v.assembled).squaredNorm());
    }
  }
  EXPECT_NEAR((sel.beams.assembled.adjoint() * vc.h_radar * v.assembled).squaredNorm(), best,
              1e-12);
}

TEST(WaterFilling, SatisfiesKkt) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> g(0.0, 5.0);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 1 + trial % 6;
    RVector gains(n);
    for (int i = 0; i < n; ++i) gains[i] = g(rng) * g(rng);
    const double power = 0.01 + g(rng);
    const double s2 = 0.05 + g(rng);
    const RVector p = water_filling(gains, power, s2);
    EXPECT_NEAR(p.sum(), power, 1e-12 * power);
    double mu = -1.0;
    for (int i = 0; i < n; ++i) {
      ASSERT_GE(p[i], 0.0);
      if (p[i] > 0.0) {
        const double level = p[i] + s2 / gains[i];
        if (mu < 0.0) mu = level;
        EXPECT_NEAR(level, mu, 1e-9 * mu);
      }
    }
    for (int i = 0; i < n; ++i) {
      if (p[i] == 0.0 && gains[i] > 0.0) EXPECT_GE(s2 / gains[i], mu * (1.0 - 1e-9));
    }
  }
}

TEST(WaterFilling, EdgeCases) {
  EXPECT_EQ(water_filling(RVector(0), 1.0, 1.0).size(), 0);
  const RVector even = water_filling(RVector::Zero(4), 2.0, 1.0);
  for (int i = 0; i < 4; ++i) EXPECT_DOUBLE_EQ(even[i], 0.5);
  RVector one(2);
  one << 1.0, 0.0;
  const RVector p = water_filling(one, 3.0, 1.0);
  EXPECT_DOUBLE_EQ(p[0], 3.0);
  EXPECT_EQ(p[1], 0.0);
  EXPECT_TRUE(water_filling(one, 0.0, 1.0).isZero());
  EXPECT_THROW(water_filling(one, 1.0, 0.0), InvalidArgument);
}

TEST(Cancellation, TapsCoverLeadingColumns) {
  const CMatrix h = random_cmatrix(4, 6, 8);
  for (int taps : {0, 4, 8, 24}) {
    const Cancellation c = design_cancellation(h, taps);
    const int cols = taps / 4;
    EXPECT_LT(max_abs(c.c_analog.leftCols(cols) + h.leftCols(cols)), 1e-15);
    EXPECT_TRUE(c.c_analog.rightCols(6 - cols).isZero());
    EXPECT_LT(max_abs(h + c.c_analog + c.d_digital), 1e-15);
    int nonzero = 0;
    for (Eigen::Index i = 0; i < c.c_analog.size(); ++i) nonzero += c.c_analog.data()[i] != Complex{};
    EXPECT_EQ(nonzero, taps);
  }
  EXPECT_THROW(design_cancellation(h, 3), InvalidArgument);
  EXPECT_THROW(design_cancellation(h, 28), InvalidArgument);
  EXPECT_THROW(design_cancellation(h, -4), InvalidArgument);
}

TEST(OptimizerConfig, RejectsBadTapCount) {
  const ArrayConfig a = small_array();
  OptimizerConfig c = small_config(a);
  c.validate(a);
  c.n_taps = 3;
  EXPECT_THROW(c.validate(a), InvalidArgument);
  c.n_taps = 6;
  EXPECT_THROW(c.validate(a), InvalidArgument);
  c.n_taps = 2;
  c.tx_codebook = dft_codebook(3, 8);
  EXPECT_THROW(c.validate(a), InvalidArgument);
  EXPECT_THROW(optimize(deg({0.0}), deg({0.0}), CMatrix::Zero(8, 8), a, c), InvalidArgument);
}

namespace {

// Residual with prescribed singular values and random singular vectors.
CMatrix shaped_residual(const std::vector<double>& sv, std::uint64_t seed) {
  const int n = static_cast<int>(sv.size());
  const Eigen::HouseholderQR<CMatrix> qu(random_cmatrix(n, n, seed));
  const Eigen::HouseholderQR<CMatrix> qv(random_cmatrix(n, n, seed + 1));
  const CMatrix u = qu.householderQ();
  const CMatrix v = qv.householderQ();
  RVector s(n);
  for (int i = 0; i < n; ++i) s[i] = sv[i];
  return u * s.cast<Complex>().asDiagonal() * v.adjoint();
}

}  // namespace

TEST(DigitalPrecoder, FullSpaceWhenThresholdIsLoose) {
  const CMatrix res = shaped_residual({1e-2, 5e-3, 1e-3, 1e-4}, 10);
  const CMatrix hdl = random_cmatrix(2, 4, 12);
  OptimizerConfig c;
  c.si_threshold_w = 1.0;
  c.tx_power_w = 2.0;
  c.noise_var_w = 0.1;
  const DigitalDesign d = design_digital_precoder(res, hdl, 2, c);
  EXPECT_TRUE(d.feasible);
  EXPECT_EQ(d.alpha, 4);
  EXPECT_NEAR(d.v_bb.squaredNorm(), 2.0, 1e-12);
  EXPECT_LT(max_abs(d.row_residual_w - (res * d.v_bb).rowwise().squaredNorm()), 1e-15);
}

TEST(DigitalPrecoder, ShrinksToWeakSubspace) {
  const std::vector<double> sv{10.0, 1.0, 1e-3, 1e-4};
  const CMatrix res = shaped_residual(sv, 20);
  const CMatrix hdl = random_cmatrix(2, 4, 22);
  OptimizerConfig c;
  c.si_threshold_w = 1e-4;
  c.tx_power_w = 1.0;
  c.noise_var_w = 0.1;
  const DigitalDesign d = design_digital_precoder(res, hdl, 2, c);
  ASSERT_TRUE(d.feasible);
  EXPECT_EQ(d.alpha, 2);
  EXPECT_LE(d.row_residual_w.maxCoeff(), c.si_threshold_w);
  EXPECT_NEAR(d.v_bb.squaredNorm(), 1.0, 1e-12);
  // Orthogonal to the two dominant right singular vectors.
  const Eigen::JacobiSVD<CMatrix> svd(res, Eigen::ComputeFullV);
  EXPECT_LT((svd.matrixV().leftCols(2).adjoint() * d.v_bb).norm(), 1e-10);
  // Water-filled on the subspace: same rate as the best allocation there.
  const CMatrix f = svd.matrixV().rightCols(2);
  const CMatrix g = f.adjoint() * d.v_bb;
  EXPECT_LT((f * g - d.v_bb).norm(), 1e-10);
}

TEST(DigitalPrecoder, InfeasibleScalesOntoCeiling) {
  const CMatrix res = shaped_residual({3.0, 2.0, 1.0, 0.5}, 30);
  const CMatrix hdl = random_cmatrix(2, 4, 32);
  OptimizerConfig c;
  c.si_threshold_w = 1e-3;
  c.tx_power_w = 1.0;
  c.noise_var_w = 0.1;
  const DigitalDesign d = design_digital_precoder(res, hdl, 2, c);
  EXPECT_FALSE(d.feasible);
  EXPECT_EQ(d.alpha, 2);
  EXPECT_NEAR(d.row_residual_w.maxCoeff(), 1e-3, 1e-12);
  EXPECT_LT(d.v_bb.squaredNorm(), 1.0);
}

TEST(Constraints, OptimizedSetPassesChecker) {
  const ArrayConfig a = small_array();
  const OptimizerConfig c = small_config(a);
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const CMatrix si = rician_si_channel(a, 3.0, 40.0, seed);
    const OptimizerResult r = optimize(deg({-20.0, 10.0, 30.0}), deg({-20.0, 30.0}), si, a, c);
    const ConstraintReport rep = check_constraints(r.set, si, c.si_threshold_w, c.tx_codebook,
                                                   c.rx_codebook);
    EXPECT_TRUE(rep.codebook_ok);
    EXPECT_TRUE(rep.power_ok);
    EXPECT_TRUE(rep.residual_ok);  // infeasible designs sit on the ceiling
    if (r.feasible) EXPECT_NEAR(rep.max_residual_w, r.row_residual_w.maxCoeff(), 1e-15);
  }
}

TEST(Constraints, CheckerFlagsEachViolation) {
  const ArrayConfig a = small_array();
  const OptimizerConfig c = small_config(a);
  const CMatrix si = rician_si_channel(a, 3.0, 60.0, 3);
  const OptimizerResult r = optimize(deg({0.0, 40.0}), deg({40.0}), si, a, c);
  ASSERT_TRUE(r.feasible);
  ASSERT_TRUE(check_constraints(r.set, si, c.si_threshold_w, c.tx_codebook, c.rx_codebook).ok());

  BeamformerSet loud = r.set;
  loud.v_bb *= 1.1;
  EXPECT_FALSE(check_constraints(loud, si, 1.0, c.tx_codebook, c.rx_codebook).power_ok);

  EXPECT_FALSE(check_constraints(r.set, si, r.row_residual_w.maxCoeff() * 0.5, c.tx_codebook,
                                 c.rx_codebook)
                   .residual_ok);

  BeamformerSet off = r.set;
  std::vector<CVector> beams = off.v_rf.per_chain_beams;
  beams[1] = steering(0.123, 4, a.element_spacing, a.wavelength);
  off.v_rf = assemble_block_diagonal(beams);
  EXPECT_FALSE(check_constraints(off, si, 1.0, c.tx_codebook, c.rx_codebook).codebook_ok);
}

TEST(Optimizer, IdealSetDominatesOnVirtualChannel) {
  const ArrayConfig a = small_array();
  OptimizerConfig c = small_config(a);
  c.si_threshold_w = 1e-6;
  OptimizerConfig ideal = c;
  ideal.n_taps = a.n_rf_tx * a.m_rf_rx;
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(-60.0, 60.0);
  for (int trial = 0; trial < 20; ++trial) {
    const auto doas = deg({u(rng), u(rng), u(rng)});
    const std::vector<double> dl{doas[0], doas[2]};
    const CMatrix si = rician_si_channel(a, 3.0, 30.0, 500 + trial);
    const OptimizerResult r = optimize(doas, dl, si, a, c);
    const OptimizerResult best = optimize(doas, dl, CMatrix::Zero(8, 8), a, ideal);
    EXPECT_EQ(r.tx_beams, best.tx_beams);
    EXPECT_TRUE(best.feasible);
    const CMatrix h = std::sqrt(c.dl_path_gain) * r.vc.h_dl_virtual;
    EXPECT_GE(dl_rate(h, best.set, c.noise_var_w) + 1e-9, dl_rate(h, r.set, c.noise_var_w))
        << "trial " << trial;
  }
}

TEST(Optimizer, SnrDefinitions) {
  const ArrayConfig a = small_array();
  const OptimizerConfig c = small_config(a);
  const CMatrix si = rician_si_channel(a, 3.0, 40.0, 4);
  const OptimizerResult r = optimize(deg({-5.0, 20.0}), deg({20.0}), si, a, c);
  const CMatrix heff = effective_si_channel(si, r.set.v_rf, r.set.w_rf);
  const CMatrix& w = r.set.w_rf.assembled;
  const double num = (w.adjoint() * r.vc.h_radar * r.set.precoder()).squaredNorm();
  const double resid = ((heff + r.set.c_analog + r.set.d_digital) * r.set.v_bb).squaredNorm();
  EXPECT_NEAR(radar_snr(r.set, r.vc, heff, 0.01), num / (resid + w.squaredNorm() * 0.01),
              1e-12 * num);
  EXPECT_THROW(radar_snr(r.set, r.vc, heff, 0.0), DegenerateNoise);
  const double dl = (r.set.w_ue.adjoint() * r.vc.h_dl_virtual * r.set.precoder()).squaredNorm();
  EXPECT_NEAR(dl_snr(r.set, r.vc, 0.5), dl / (r.set.w_ue.squaredNorm() * 0.5), 1e-12);
}

TEST(Optimizer, UeCombinerIsOrthonormal) {
  const CMatrix h = random_cmatrix(4, 8, 40);
  const CMatrix w = ue_combiner(h, 3);
  EXPECT_LT(max_abs(w.adjoint() * w - CMatrix::Identity(3, 3)), 1e-12);
  EXPECT_THROW(ue_combiner(h, 5), InvalidArgument);
}

TEST(Optimizer, DebugDumpIsJson) {
  const ArrayConfig a = small_array();
  const OptimizerConfig c = small_config(a);
  const OptimizerResult r =
      optimize(deg({0.0}), deg({0.0}), rician_si_channel(a, 3.0, 40.0, 1), a, c);
  std::ostringstream out;
  write_optimizer_debug(out, r);
  const auto j = nlohmann::json::parse(out.str());
  EXPECT_EQ(j["tx_beams"].size(), 2u);
  EXPECT_EQ(j["rx_beams"].size(), 2u);
  EXPECT_EQ(j["alpha"].get<int>(), r.alpha);
}
