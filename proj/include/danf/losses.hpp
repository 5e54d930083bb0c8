// Copyright 2026 The danf authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)
#pragma once

#include <array>

#include "danf/foa.hpp"

namespace danf {

// All losses follow the sum (norm) reduction convention, not means, and all
// gradients are taken with respect to the estimate only; the reference is
// data.

template <typename T>
struct LossResult {
  double value = 0;
  Mat<T> grad;  // d value / d estimate, same shape as the estimate
};

// Squared L2 norm of the difference over all channels and samples.
template <typename T>
LossResult<T> mse_loss(const Mat<T>& est, const Mat<T>& ref) {
  if (est.rows() != ref.rows() || est.cols() != ref.cols())
    throw ShapeError("mse_loss: shape mismatch");
  LossResult<T> out;
  Mat<T> diff = est - ref;
  out.value = static_cast<double>(diff.template cast<double>().squaredNorm());
  out.grad = T(2) * diff;
  return out;
}

template <typename T>
struct StftLossResult {
  double mag = 0;    // L1 of magnitude difference over all channels and bins
  double phase = 0;  // L2 of wrapped phase difference
  double sc = 0;     // global spectral convergence
  Mat<T> grad;
  bool sc_guarded = false;  // reference spectrum was (near) all-zero
};

namespace loss_detail {

inline double wrap_angle(double x) { return std::remainder(x, 2.0 * kPi); }

template <typename T>
struct ChannelSpectra {
  StftPair<T> est, ref;
  Mat<double> est_mag, ref_mag, phase_diff;
};

}  // namespace loss_detail

// Composite STFT loss: magnitude L1 + wrapped-phase L2 + spectral
// convergence, with the norms running over every channel and bin.
template <typename T>
StftLossResult<T> stft_loss(const Mat<T>& est, const Mat<T>& ref,
                            const StftParams& p, bool w_only = false) {
  if (est.rows() != kFoaChannels || est.rows() != ref.rows() ||
      est.cols() != ref.cols())
    throw ShapeError("stft_loss: expected matching 4 x T inputs");
  const int len = static_cast<int>(est.cols());
  const int channels = w_only ? 1 : kFoaChannels;
  StftBasis<T> basis(p);

  std::vector<loss_detail::ChannelSpectra<T>> spectra(
      static_cast<std::size_t>(channels));
  double mag_sum = 0.0, phase_sq = 0.0, sc_num_sq = 0.0, sc_den_sq = 0.0;
  for (int c = 0; c < channels; ++c) {
    auto& s = spectra[static_cast<std::size_t>(c)];
    s.est = stft_pair<T>(est.row(c).transpose(), p, basis);
    s.ref = stft_pair<T>(ref.row(c).transpose(), p, basis);
    const Eigen::Index m = s.est.re.rows(), f = s.est.re.cols();
    s.est_mag.resize(m, f);
    s.ref_mag.resize(m, f);
    s.phase_diff.resize(m, f);
    for (Eigen::Index i = 0; i < m; ++i)
      for (Eigen::Index j = 0; j < f; ++j) {
        double er = s.est.re(i, j), ei = s.est.im(i, j);
        double rr = s.ref.re(i, j), ri = s.ref.im(i, j);
        double em = std::sqrt(er * er + ei * ei);
        double rm = std::sqrt(rr * rr + ri * ri);
        s.est_mag(i, j) = em;
        s.ref_mag(i, j) = rm;
        double d = loss_detail::wrap_angle(std::atan2(ei, er) -
                                           std::atan2(ri, rr));
        s.phase_diff(i, j) = d;
        mag_sum += std::abs(em - rm);
        phase_sq += d * d;
        sc_num_sq += (em - rm) * (em - rm);
        sc_den_sq += rm * rm;
      }
  }

  StftLossResult<T> out;
  out.mag = mag_sum;
  out.phase = std::sqrt(phase_sq);
  double sc_den = std::sqrt(sc_den_sq);
  out.sc_guarded = !(sc_den > 1e-12);
  if (out.sc_guarded) sc_den = 1e-12;
  double sc_num = std::sqrt(sc_num_sq);
  out.sc = sc_num / sc_den;

  // gradient: d(mag)+d(phase)+d(sc) routed back through each channel STFT
  out.grad = Mat<T>::Zero(kFoaChannels, len);
  for (int c = 0; c < channels; ++c) {
    auto& s = spectra[static_cast<std::size_t>(c)];
    const Eigen::Index m = s.est.re.rows(), f = s.est.re.cols();
    Mat<T> d_re = Mat<T>::Zero(m, f), d_im = Mat<T>::Zero(m, f);
    for (Eigen::Index i = 0; i < m; ++i)
      for (Eigen::Index j = 0; j < f; ++j) {
        double er = s.est.re(i, j), ei = s.est.im(i, j);
        double em = s.est_mag(i, j), rm = s.ref_mag(i, j);
        double d_mag_d_em = (em > rm) ? 1.0 : (em < rm ? -1.0 : 0.0);
        double d_sc_d_em = sc_num > 0.0 ? (em - rm) / (sc_num * sc_den) : 0.0;
        double d_em = d_mag_d_em + d_sc_d_em;
        double g_re = 0.0, g_im = 0.0;
        double m2 = er * er + ei * ei;
        if (em > 0.0) {
          g_re += d_em * er / em;
          g_im += d_em * ei / em;
        }
        if (out.phase > 0.0 && m2 > 1e-24) {
          double d_ph = s.phase_diff(i, j) / out.phase;
          g_re += d_ph * (-ei / m2);
          g_im += d_ph * (er / m2);
        }
        d_re(i, j) = static_cast<T>(g_re);
        d_im(i, j) = static_cast<T>(g_im);
      }
    out.grad.row(c) = stft_adjoint(d_re, d_im, p, len, basis).transpose();
  }
  return out;
}

template <typename T>
struct IvLossResult {
  double value = 0;  // in [0, 1]
  Mat<T> grad;
  bool degenerate = false;  // an integrated intensity was near zero
};

namespace loss_detail {

template <typename T>
std::array<StftPair<T>, kFoaChannels> foa_pairs(const Mat<T>& x,
                                                const StftParams& p,
                                                const StftBasis<T>& basis) {
  std::array<StftPair<T>, kFoaChannels> out;
  for (int c = 0; c < kFoaChannels; ++c)
    out[static_cast<std::size_t>(c)] =
        stft_pair<T>(x.row(c).transpose(), p, basis);
  return out;
}

template <typename T>
std::array<double, 3> integrated_iv(
    const std::array<StftPair<T>, kFoaChannels>& s) {
  std::array<double, 3> iv{};
  for (int a = 0; a < 3; ++a) {
    const auto& d = s[static_cast<std::size_t>(kX + a)];
    iv[static_cast<std::size_t>(a)] = static_cast<double>(
        (s[kW].re.cwiseProduct(d.re) + s[kW].im.cwiseProduct(d.im))
            .template cast<double>()
            .sum());
  }
  return iv;
}

}  // namespace loss_detail

// Half the cosine distance between the integrated intensity vectors. A
// near-zero intensity norm on either side contributes 0.5 with zero
// gradient and sets the degenerate flag.
template <typename T>
IvLossResult<T> iv_loss(const Mat<T>& est, const Mat<T>& ref,
                        const StftParams& p) {
  if (est.rows() != kFoaChannels || est.rows() != ref.rows() ||
      est.cols() != ref.cols())
    throw ShapeError("iv_loss: expected matching 4 x T inputs");
  const int len = static_cast<int>(est.cols());
  StftBasis<T> basis(p);
  auto se = loss_detail::foa_pairs(est, p, basis);
  auto sr = loss_detail::foa_pairs(ref, p, basis);
  std::array<double, 3> ive = loss_detail::integrated_iv(se);
  std::array<double, 3> ivr = loss_detail::integrated_iv(sr);

  double ne = std::sqrt(ive[0] * ive[0] + ive[1] * ive[1] + ive[2] * ive[2]);
  double nr = std::sqrt(ivr[0] * ivr[0] + ivr[1] * ivr[1] + ivr[2] * ivr[2]);

  IvLossResult<T> out;
  out.grad = Mat<T>::Zero(kFoaChannels, len);
  if (!(ne > 1e-12) || !(nr > 1e-12)) {
    out.value = 0.5;
    out.degenerate = true;
    return out;
  }
  double dot = ive[0] * ivr[0] + ive[1] * ivr[1] + ive[2] * ivr[2];
  out.value = 0.5 * (1.0 - dot / (ne * nr));

  // d value / d I(est); reference treated as constant
  std::array<double, 3> g{};
  for (int a = 0; a < 3; ++a)
    g[static_cast<std::size_t>(a)] =
        -0.5 * (ivr[static_cast<std::size_t>(a)] / (ne * nr) -
                dot * ive[static_cast<std::size_t>(a)] / (ne * ne * ne * nr));

  // I_x = sum(Wre Xre + Wim Xim), likewise y, z
  const Eigen::Index m = se[kW].re.rows(), f = se[kW].re.cols();
  Mat<T> dw_re = Mat<T>::Zero(m, f), dw_im = Mat<T>::Zero(m, f);
  for (int a = 0; a < 3; ++a) {
    T ga = static_cast<T>(g[static_cast<std::size_t>(a)]);
    const auto& d = se[static_cast<std::size_t>(kX + a)];
    dw_re += ga * d.re;
    dw_im += ga * d.im;
    Mat<T> dd_re = ga * se[kW].re;
    Mat<T> dd_im = ga * se[kW].im;
    out.grad.row(kX + a) =
        stft_adjoint(dd_re, dd_im, p, len, basis).transpose();
  }
  out.grad.row(kW) = stft_adjoint(dw_re, dw_im, p, len, basis).transpose();
  return out;
}

struct LossBreakdown {
  double mse = 0, mag = 0, phase = 0, sc = 0, iv = 0, total = 0;
  double lambda = 0;
  bool iv_degenerate = false;
  bool sc_guarded = false;

  double stft() const { return mag + phase + sc; }
};

template <typename T>
struct TrainLossResult {
  LossBreakdown breakdown;
  Mat<T> grad;
};

// L_train = L_MSE + L_STFT + lambda * L_IV.
template <typename T>
TrainLossResult<T> train_loss(const Mat<T>& est, const Mat<T>& ref,
                              double lambda, const StftParams& p,
                              bool stft_w_only = false) {
  if (!(lambda >= 0)) throw InvalidConfig("train_loss: lambda must be >= 0");
  TrainLossResult<T> out;
  LossResult<T> mse = mse_loss(est, ref);
  StftLossResult<T> st = stft_loss(est, ref, p, stft_w_only);
  out.breakdown.mse = mse.value;
  out.breakdown.mag = st.mag;
  out.breakdown.phase = st.phase;
  out.breakdown.sc = st.sc;
  out.breakdown.sc_guarded = st.sc_guarded;
  out.breakdown.lambda = lambda;
  out.grad = mse.grad + st.grad;
  if (lambda > 0) {
    IvLossResult<T> iv = iv_loss(est, ref, p);
    out.breakdown.iv = iv.value;
    out.breakdown.iv_degenerate = iv.degenerate;
    out.grad += static_cast<T>(lambda) * iv.grad;
  }
  out.breakdown.total = out.breakdown.mse + out.breakdown.stft() +
                        lambda * out.breakdown.iv;
  return out;
}

}  // namespace danf
