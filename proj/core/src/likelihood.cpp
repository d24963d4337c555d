// SPDX-License-Identifier: Apache-2.0
#include "fdisac/likelihood.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <mutex>

#include "fdisac/errors.hpp"

namespace fdisac {
namespace {

// FFTW's planner is not re-entrant; execution with the new-array API is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

class FftwBuffer {
 public:
  explicit FftwBuffer(std::size_t n)
      : data_(static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * n))) {
    if (!data_) throw std::bad_alloc();
  }
  ~FftwBuffer() { fftw_free(data_); }
  FftwBuffer(const FftwBuffer&) = delete;
  FftwBuffer& operator=(const FftwBuffer&) = delete;
  fftw_complex* get() { return data_; }

 private:
  fftw_complex* data_;
};

/// Forward 2-D DFT of a column-major P x Q matrix.
CMatrix fft2_forward(const CMatrix& z) {
  const int P = static_cast<int>(z.rows());
  const int Q = static_cast<int>(z.cols());
  const std::size_t n = static_cast<std::size_t>(P) * Q;
  FftwBuffer in(n);
  FftwBuffer out(n);
  static_assert(sizeof(fftw_complex) == sizeof(Complex));
  std::memcpy(in.get(), z.data(), sizeof(Complex) * n);

  fftw_plan plan;
  {
    std::lock_guard lock(planner_mutex());
    // Column-major P x Q is row-major Q x P.
    plan = fftw_plan_dft_2d(Q, P, in.get(), out.get(), FFTW_FORWARD, FFTW_ESTIMATE);
  }
  if (!plan) throw std::runtime_error("likelihood_map: FFTW planning failed");
  fftw_execute(plan);
  {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(plan);
  }
  CMatrix result(P, Q);
  std::memcpy(static_cast<void*>(result.data()), out.get(), sizeof(Complex) * n);
  return result;
}

CVector twiddles(int length, double index, double sign) {
  CVector t(length);
  for (int k = 0; k < length; ++k) {
    t[k] = std::polar(1.0, sign * 2.0 * kPi * k * index / length);
  }
  return t;
}

template <typename F>
double golden_max(F&& f, double lo, double hi) {
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo;
  double b = hi;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = f(c);
  double fd = f(d);
  while (b - a > 1e-7) {
    if (fc >= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = f(d);
    }
  }
  return (a + b) / 2.0;
}

}  // namespace

CMatrix likelihood_map(const QuotientGrid& z) {
  if (z.size() == 0) throw InvalidArgument("likelihood_map: empty quotient grid");
  const int P = static_cast<int>(z.rows());
  const int Q = static_cast<int>(z.cols());
  const CMatrix spectrum = fft2_forward(z);
  CMatrix a(P, Q);
  for (int c = 0; c < Q; ++c) {
    const int m = c - Q / 2;
    const int kq = ((m % Q) + Q) % Q;
    for (int n = 0; n < P; ++n) {
      a(n, c) = spectrum((P - n) % P, kq);
    }
  }
  return a;
}

Complex likelihood_at(const QuotientGrid& z, double nu, double mu) {
  const int P = static_cast<int>(z.rows());
  const int Q = static_cast<int>(z.cols());
  const CVector u = z * twiddles(Q, mu, -1.0);
  return twiddles(P, nu, +1.0).transpose() * u;
}

LikelihoodPeak find_likelihood_peak(const QuotientGrid& z, bool refine) {
  const CMatrix a = likelihood_map(z);
  const int P = static_cast<int>(z.rows());
  const int Q = static_cast<int>(z.cols());

  LikelihoodPeak peak;
  double best = -1.0;
  for (int n = 0; n < P; ++n) {
    for (int c = 0; c < Q; ++c) {
      const double v = std::norm(a(n, c));
      if (v > best) {
        best = v;
        peak.delay_bin = n;
        peak.doppler_bin = c - Q / 2;
      }
    }
  }
  peak.delay_index = peak.delay_bin;
  peak.doppler_index = peak.doppler_bin;
  peak.power = best;
  if (!refine) return peak;

  double nu = peak.delay_bin;
  double mu = peak.doppler_bin;
  const double nu_lo = std::max(0.0, nu - 1.0);
  const double nu_hi = nu + 1.0;
  const double mu_lo = mu - 1.0;
  const double mu_hi = mu + 1.0;
  for (int round = 0; round < 3; ++round) {
    // Delay axis with Doppler fixed: A = t_P(nu)^T u(mu).
    const CVector u = z * twiddles(Q, mu, -1.0);
    nu = golden_max(
        [&](double x) { return std::norm(Complex(twiddles(P, x, +1.0).transpose() * u)); },
        nu_lo, nu_hi);
    // Doppler axis with delay fixed: A = t_Q(mu)^T v(nu).
    const CVector v = z.transpose() * twiddles(P, nu, +1.0);
    mu = golden_max(
        [&](double x) { return std::norm(Complex(twiddles(Q, x, -1.0).transpose() * v)); },
        mu_lo, mu_hi);
  }
  const double refined = std::norm(likelihood_at(z, nu, mu));
  if (refined >= best) {
    peak.delay_index = nu;
    peak.doppler_index = mu;
    peak.power = refined;
  }
  return peak;
}

}  // namespace fdisac
