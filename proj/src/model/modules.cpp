#include "model/modules.hpp"

namespace svc::model {

using nn::Shape;

void register_conv(nn::ParamStore& store, const std::string& prefix, int c_out, int c_in,
                   int kernel, nn::Pcg32& rng, bool zero_init) {
  if (zero_init) {
    store.add(prefix + ".w", Shape::cube(c_out, c_in, kernel));
    store.add(prefix + ".b", Shape::vec(c_out));
  } else {
    store.add_kaiming(prefix + ".w", Shape::cube(c_out, c_in, kernel), c_in * kernel, rng);
    store.add(prefix + ".b", Shape::vec(c_out));
  }
}

void register_tconv(nn::ParamStore& store, const std::string& prefix, int c_in, int c_out,
                    int kernel, nn::Pcg32& rng) {
  store.add_kaiming(prefix + ".w", Shape::cube(c_in, c_out, kernel), c_in * kernel, rng);
  store.add(prefix + ".b", Shape::vec(c_out));
}

void register_wavenet(nn::ParamStore& store, const WavenetSpec& spec, nn::Pcg32& rng) {
  const int h = spec.hidden;
  for (int l = 0; l < spec.layers; ++l) {
    const std::string lp = spec.prefix + ".l" + std::to_string(l);
    register_conv(store, lp + ".gate", 2 * h, h, spec.kernel, rng);
    if (spec.cond_dim > 0) register_conv(store, lp + ".cond", 2 * h, spec.cond_dim, 1, rng);
    const int rs_out = (l == spec.layers - 1) ? h : 2 * h;  // last layer: skip only
    register_conv(store, lp + ".rs", rs_out, h, 1, rng);
  }
}

void register_resblock(nn::ParamStore& store, const std::string& prefix, int channels,
                       nn::Pcg32& rng) {
  register_conv(store, prefix + ".c0", channels, channels, 3, rng);
  register_conv(store, prefix + ".c1", channels, channels, 3, rng);
}

}  // namespace svc::model
