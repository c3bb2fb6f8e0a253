#include "features/yin.hpp"

#include <algorithm>
#include <cmath>

#include "common/error.hpp"
#include "kernels/kernels.hpp"

namespace svc::features {

namespace {

// Difference function d(tau) for tau in [0, tau_max], over an integration
// window of win_int samples:
//   d(tau) = sum_j (x[j] - x[j+tau])^2
//          = E[0..win_int) + E[tau..tau+win_int) - 2 * corr(tau)
void difference_function(const double* x, int win_int, int tau_max,
                         std::vector<double>& d) {
  std::vector<double> prefix_sq(win_int + tau_max + 1, 0.0);
  for (int i = 0; i < win_int + tau_max; ++i)
    prefix_sq[i + 1] = prefix_sq[i] + x[i] * x[i];
  const double e0 = prefix_sq[win_int];
  d.assign(tau_max + 1, 0.0);
  for (int tau = 0; tau <= tau_max; ++tau) {
    double e_tau = prefix_sq[tau + win_int] - prefix_sq[tau];
    double corr = kernels::dot(x, x + tau, size_t(win_int));
    d[tau] = std::max(e0 + e_tau - 2.0 * corr, 0.0);
  }
}

}  // namespace

F0Contour track_f0(const dsp::AudioBuffer& audio, const dsp::StftConfig& cfg,
                   const YinConfig& yin) {
  const int64_t len = int64_t(audio.samples.size());
  if (len < cfg.win_length)
    raise(ErrorKind::InvalidInput, "track_f0: audio shorter than one analysis window");

  const int sr = audio.sample_rate;
  const int tau_min = std::max(2, int(std::floor(sr / yin.fmax)));
  const int tau_max = int(std::ceil(sr / yin.fmin));
  const int win = yin.window;
  const int win_int = win - tau_max;
  if (win_int < tau_max)
    raise(ErrorKind::InvalidConfig, "track_f0: window too short for fmin");

  const int frames = cfg.frame_count(audio.samples.size());
  F0Contour out;
  out.f0_hz.assign(frames, 0.0f);
  out.voiced.assign(frames, 0);

  std::vector<double> slice(win);
  std::vector<double> d, cmnd;

  for (int t = 0; t < frames; ++t) {
    // slice centered on the frame; shifted (not padded) near the edges so
    // periodic content stays exactly periodic in the slice
    int64_t start = int64_t(t) * cfg.hop_length - win / 2;
    if (len >= win) {
      start = std::clamp<int64_t>(start, 0, len - win);
      for (int j = 0; j < win; ++j) slice[j] = audio.samples[start + j];
    } else {
      for (int j = 0; j < win; ++j)
        slice[j] = audio.samples[dsp::reflect_index(start + j, len)];
    }

    if (kernels::sumsq(slice.data(), size_t(win)) < 1e-10) continue;  // silence

    difference_function(slice.data(), win_int, tau_max, d);

    // cumulative mean normalization
    cmnd.assign(tau_max + 1, 1.0);
    double running = 0.0;
    for (int tau = 1; tau <= tau_max; ++tau) {
      running += d[tau];
      cmnd[tau] = running > 0.0 ? d[tau] * tau / running : 1.0;
    }

    // absolute threshold, then descend to the local minimum
    int tau = -1;
    for (int k = tau_min; k <= tau_max; ++k) {
      if (cmnd[k] < yin.threshold) {
        while (k + 1 <= tau_max && cmnd[k + 1] < cmnd[k]) ++k;
        tau = k;
        break;
      }
    }
    if (tau < 0) continue;

    // parabolic interpolation of the dip
    double better = double(tau);
    if (tau > tau_min && tau < tau_max) {
      double s0 = cmnd[tau - 1], s1 = cmnd[tau], s2 = cmnd[tau + 1];
      double denom = 2.0 * (2.0 * s1 - s2 - s0);
      if (std::fabs(denom) > 1e-12) better = tau + (s2 - s0) / denom;
    }

    double f0 = sr / better;
    if (f0 >= yin.fmin && f0 <= yin.fmax) {
      out.f0_hz[t] = float(f0);
      out.voiced[t] = 1;
    }
  }
  return out;
}

}  // namespace svc::features
