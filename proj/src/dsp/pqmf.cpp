#include "dsp/pqmf.hpp"

#include <algorithm>
#include <cmath>

#include "common/error.hpp"

namespace svc::dsp {

namespace {

double bessel_i0(double x) {
  double sum = 1.0, term = 1.0;
  const double hx = 0.5 * x;
  for (int m = 1; m < 64; ++m) {
    term *= (hx / m) * (hx / m);
    sum += term;
    if (term < sum * 1e-17) break;
  }
  return sum;
}

// Kaiser-windowed lowpass, cutoff in Nyquist units, unity DC gain.
std::vector<double> design_lowpass(int order, double beta, double cutoff) {
  const int taps = order + 1;
  const double mid = order / 2.0;
  std::vector<double> h(taps);
  const double i0b = bessel_i0(beta);
  for (int n = 0; n < taps; ++n) {
    double t = (n - mid) / mid;
    double w = bessel_i0(beta * std::sqrt(std::max(0.0, 1.0 - t * t))) / i0b;
    double x = cutoff * (n - mid);
    double s = x == 0.0 ? 1.0 : std::sin(M_PI * x) / (M_PI * x);
    h[n] = cutoff * s * w;
  }
  double sum = 0.0;
  for (double v : h) sum += v;
  for (double& v : h) v /= sum;
  return h;
}

// Correlation in "same" mode: out[n] = sum_j f[j] x[n + j - center].
void correlate_same(const double* x, size_t len, const std::vector<double>& f,
                    double* out) {
  const int taps = int(f.size());
  const int c = (taps - 1) / 2;
  for (size_t n = 0; n < len; ++n) {
    double acc = 0.0;
    for (int j = 0; j < taps; ++j) {
      int64_t src = int64_t(n) + j - c;
      if (src >= 0 && src < int64_t(len)) acc += f[j] * x[src];
    }
    out[n] = acc;
  }
}

AudioBuffer make_chirp(size_t len, int sample_rate) {
  AudioBuffer sig;
  sig.sample_rate = sample_rate;
  sig.samples.resize(len);
  const double f0 = 20.0, f1 = 0.48 * sample_rate;
  for (size_t n = 0; n < len; ++n) {
    double t = double(n) / sample_rate;
    double dur = double(len) / sample_rate;
    double phase = 2.0 * M_PI * (f0 * t + (f1 - f0) * t * t / (2.0 * dur));
    sig.samples[n] = float(0.8 * std::sin(phase));
  }
  return sig;
}

}  // namespace

void PqmfBank::build_filters(int order, double kaiser_beta, double cutoff) {
  cutoff_ = cutoff;
  prototype_ = design_lowpass(order, kaiser_beta, cutoff);
  const int taps = order + 1;
  const int S = num_streams_;
  analysis_.assign(S, std::vector<double>(taps));
  synthesis_.assign(S, std::vector<double>(taps));
  for (int k = 0; k < S; ++k) {
    const double sign = (k % 2 == 0) ? 1.0 : -1.0;
    for (int n = 0; n < taps; ++n) {
      double arg = (2.0 * k + 1.0) * (M_PI / (2.0 * S)) * (n - order / 2.0);
      analysis_[k][n] = 2.0 * prototype_[n] * std::cos(arg + sign * M_PI / 4.0);
      synthesis_[k][n] = 2.0 * prototype_[n] * std::cos(arg - sign * M_PI / 4.0);
    }
  }
}

PqmfBank::PqmfBank(int num_streams, int order, double kaiser_beta)
    : num_streams_(num_streams) {
  if (num_streams < 1) raise(ErrorKind::InvalidConfig, "pqmf: num_streams must be >= 1");
  if (num_streams == 1) {
    prototype_ = {1.0};
    analysis_ = {{1.0}};
    synthesis_ = {{1.0}};
    cutoff_ = 1.0;
    delay_ = 0;
    return;
  }

  auto chirp = make_chirp(4096, kDefaultSampleRate);
  auto trial = [&](double cutoff) {
    build_filters(order, kaiser_beta, cutoff);
    return pqmf_roundtrip_error_db(*this, chirp);
  };

  // coarse-to-fine search around the nominal 1/(2S) band edge
  double best_cut = 1.0 / (2.0 * num_streams);
  double lo = best_cut * 0.6, hi = best_cut * 1.8;
  double best_err = 1e9;
  for (int pass = 0; pass < 3; ++pass) {
    const int steps = 13;
    double cur_best = best_cut;
    for (int i = 0; i < steps; ++i) {
      double c = lo + (hi - lo) * i / double(steps - 1);
      double err = trial(c);
      if (err < best_err) {
        best_err = err;
        cur_best = c;
      }
    }
    best_cut = cur_best;
    double span = (hi - lo) / double(steps - 1);
    lo = best_cut - span;
    hi = best_cut + span;
  }
  build_filters(order, kaiser_beta, best_cut);
  delay_ = 0;
}

SubbandSignals pqmf_analyze(const AudioBuffer& audio, const PqmfBank& bank) {
  const int S = bank.num_streams();
  const size_t len = audio.samples.size();
  const size_t padded = (len + S - 1) / S * S;
  std::vector<double> x(padded, 0.0);
  for (size_t i = 0; i < len; ++i) x[i] = audio.samples[i];

  SubbandSignals out;
  out.num_streams = S;
  out.stream_len = padded / S;
  out.values.resize(size_t(S) * out.stream_len);
  if (S == 1) {
    for (size_t i = 0; i < padded; ++i) out.values[i] = float(x[i]);
    return out;
  }

  std::vector<double> filtered(padded);
  for (int k = 0; k < S; ++k) {
    correlate_same(x.data(), padded, bank.analysis_filter(k), filtered.data());
    float* dst = out.stream(k);
    for (size_t m = 0; m < out.stream_len; ++m) dst[m] = float(filtered[m * S]);
  }
  return out;
}

AudioBuffer pqmf_synthesize(const SubbandSignals& streams, const PqmfBank& bank) {
  if (streams.num_streams != bank.num_streams())
    raise(ErrorKind::InvalidInput, "pqmf: stream count does not match bank");
  const int S = bank.num_streams();
  const size_t out_len = streams.stream_len * S;

  AudioBuffer out;
  out.sample_rate = kDefaultSampleRate;
  out.samples.assign(out_len, 0.0f);
  if (S == 1) {
    for (size_t i = 0; i < out_len; ++i) out.samples[i] = streams.values[i];
    return out;
  }

  std::vector<double> up(out_len);
  std::vector<double> acc(out_len, 0.0);
  std::vector<double> y(out_len);
  for (int k = 0; k < S; ++k) {
    std::fill(up.begin(), up.end(), 0.0);
    const float* src = streams.stream(k);
    for (size_t m = 0; m < streams.stream_len; ++m) up[m * S] = double(S) * src[m];
    correlate_same(up.data(), out_len, bank.synthesis_filter(k), y.data());
    for (size_t n = 0; n < out_len; ++n) acc[n] += y[n];
  }
  for (size_t n = 0; n < out_len; ++n) out.samples[n] = float(acc[n]);
  return out;
}

double pqmf_roundtrip_error_db(const PqmfBank& bank, const AudioBuffer& test_signal) {
  auto rebuilt = pqmf_synthesize(pqmf_analyze(test_signal, bank), bank);
  const int margin = bank.taps() + 1;
  const size_t len = test_signal.samples.size();
  if (len < size_t(4 * margin)) raise(ErrorKind::InvalidInput, "pqmf: test signal too short");
  double num = 0.0, den = 0.0;
  for (size_t n = margin; n + margin < len; ++n) {
    double d = double(test_signal.samples[n]) - double(rebuilt.samples[n + bank.roundtrip_delay()]);
    num += d * d;
    den += double(test_signal.samples[n]) * double(test_signal.samples[n]);
  }
  return 10.0 * std::log10(std::max(num, 1e-300) / den);
}

}  // namespace svc::dsp
