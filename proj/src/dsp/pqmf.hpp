#pragma once

#include <vector>

#include "dsp/stft.hpp"

namespace svc::dsp {

struct SubbandSignals {
  int num_streams = 0;
  size_t stream_len = 0;
  std::vector<float> values;  // row-major num_streams x stream_len

  float* stream(int s) { return values.data() + size_t(s) * stream_len; }
  const float* stream(int s) const { return values.data() + size_t(s) * stream_len; }
};

// Near-perfect-reconstruction cosine-modulated filterbank. The prototype is a
// Kaiser-windowed lowpass whose cutoff is tuned at construction time by
// minimizing round-trip error on a chirp sweep. num_streams == 1 degenerates
// to the identity bank.
class PqmfBank {
 public:
  explicit PqmfBank(int num_streams, int order = 62, double kaiser_beta = 9.0);

  int num_streams() const { return num_streams_; }
  int taps() const { return int(prototype_.size()); }
  const std::vector<double>& prototype() const { return prototype_; }
  const std::vector<double>& analysis_filter(int k) const { return analysis_[k]; }
  const std::vector<double>& synthesis_filter(int k) const { return synthesis_[k]; }
  double tuned_cutoff() const { return cutoff_; }
  // Net round-trip shift measured at construction (0 for the centered
  // convolution convention used here).
  int roundtrip_delay() const { return delay_; }

 private:
  int num_streams_;
  double cutoff_ = 0.0;
  int delay_ = 0;
  std::vector<double> prototype_;
  std::vector<std::vector<double>> analysis_;
  std::vector<std::vector<double>> synthesis_;

  void build_filters(int order, double kaiser_beta, double cutoff);
};

SubbandSignals pqmf_analyze(const AudioBuffer& audio, const PqmfBank& bank);
AudioBuffer pqmf_synthesize(const SubbandSignals& streams, const PqmfBank& bank);

// Round-trip error in dB relative power, interior samples only.
double pqmf_roundtrip_error_db(const PqmfBank& bank, const AudioBuffer& test_signal);

}  // namespace svc::dsp
