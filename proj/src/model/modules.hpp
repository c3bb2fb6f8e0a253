#pragma once

#include <string>
#include <unordered_map>
#include <vector>

#include "nn/param_store.hpp"
#include "nn/tensor.hpp"

namespace svc::model {

// Binds parameters to a tape by name, trainable or frozen, caching so each
// parameter becomes exactly one node per graph. The double instantiation
// (used by the Jacobian/likelihood checks) always binds frozen copies.
template <class S>
struct GraphCtxT {
  GraphCtxT(nn::Tape<S>& tape, nn::ParamStore& params, nn::ParamBinder* b = nullptr)
      : tp(tape), store(params), binder(b) {}

  nn::Tape<S>& tp;
  nn::ParamStore& store;
  nn::ParamBinder* binder = nullptr;  // float-only; null -> frozen constants

  int p(const std::string& name) {
    auto it = cache_.find(name);
    if (it != cache_.end()) return it->second;
    auto& param = store.get(name);
    int id;
    if constexpr (std::is_same_v<S, float>) {
      id = binder ? binder->bind(param) : tp.constant(param.shape, param.value.data());
    } else {
      std::vector<S> widened(param.value.begin(), param.value.end());
      id = tp.constant(param.shape, widened.data());
    }
    cache_.emplace(name, id);
    return id;
  }

 private:
  std::unordered_map<std::string, int> cache_;
};

using GraphCtx = GraphCtxT<float>;

// ---- registration helpers ----

void register_conv(nn::ParamStore& store, const std::string& prefix, int c_out, int c_in,
                   int kernel, nn::Pcg32& rng, bool zero_init = false);
void register_tconv(nn::ParamStore& store, const std::string& prefix, int c_in, int c_out,
                    int kernel, nn::Pcg32& rng);

// Gated residual conv stack with optional 1x1 condition injection.
struct WavenetSpec {
  std::string prefix;
  int hidden = 192;
  int layers = 8;
  int kernel = 5;
  int cond_dim = 0;  // 0 = unconditioned
};

void register_wavenet(nn::ParamStore& store, const WavenetSpec& spec, nn::Pcg32& rng);

void register_resblock(nn::ParamStore& store, const std::string& prefix, int channels,
                       nn::Pcg32& rng);

// ---- graph builders ----

template <class S>
int conv(GraphCtxT<S>& ctx, const std::string& prefix, int x, nn::ConvSpec cs = {}) {
  return ctx.tp.conv1d(x, ctx.p(prefix + ".w"), ctx.p(prefix + ".b"), cs);
}

template <class S>
int tconv(GraphCtxT<S>& ctx, const std::string& prefix, int x, int stride, int pad) {
  return ctx.tp.tconv1d(x, ctx.p(prefix + ".w"), ctx.p(prefix + ".b"), stride, pad);
}

// x: (hidden, T); cond: (cond_dim, T) node or -1. Returns the skip sum.
template <class S>
int build_wavenet(GraphCtxT<S>& ctx, const WavenetSpec& spec, int x, int cond) {
  auto& tp = ctx.tp;
  const int h = spec.hidden;
  const int pad = (spec.kernel - 1) / 2;
  int skip_sum = -1;
  for (int l = 0; l < spec.layers; ++l) {
    const std::string lp = spec.prefix + ".l" + std::to_string(l);
    int a = conv(ctx, lp + ".gate", x, nn::ConvSpec{1, pad, 1});
    if (spec.cond_dim > 0 && cond >= 0)
      a = tp.add(a, conv(ctx, lp + ".cond", cond, nn::ConvSpec{1, 0, 1}));
    auto [ta, sa] = tp.split_rows(a, h);
    int z = tp.mul(tp.tanh_op(ta), tp.sigmoid_op(sa));
    int rs = conv(ctx, lp + ".rs", z, nn::ConvSpec{1, 0, 1});
    if (l == spec.layers - 1) {
      skip_sum = skip_sum < 0 ? rs : tp.add(skip_sum, rs);
    } else {
      auto [res, skip] = tp.split_rows(rs, h);
      x = tp.add(x, res);
      skip_sum = skip_sum < 0 ? skip : tp.add(skip_sum, skip);
    }
  }
  return skip_sum;
}

// Two dilated convs (1, 3) with residual connections, leaky_relu(0.1) front.
template <class S>
int build_resblock(GraphCtxT<S>& ctx, const std::string& prefix, int x, int /*channels*/) {
  auto& tp = ctx.tp;
  int h = conv(ctx, prefix + ".c0", tp.leaky_relu(x, S(0.1)), nn::ConvSpec{1, 1, 1});
  x = tp.add(x, h);
  h = conv(ctx, prefix + ".c1", tp.leaky_relu(x, S(0.1)), nn::ConvSpec{1, 3, 3});
  return tp.add(x, h);
}

// Reverses the channel order of a (C,T) tensor.
template <class S>
int flip_rows(nn::Tape<S>& tp, int x) {
  const int C = tp.shape(x).rows(), T = tp.shape(x).cols();
  auto idx = std::make_shared<std::vector<int64_t>>(size_t(C) * T);
  for (int c = 0; c < C; ++c)
    for (int t = 0; t < T; ++t)
      (*idx)[size_t(c) * T + t] = int64_t(C - 1 - c) * T + t;
  return tp.take(x, idx, nn::Shape::mat(C, T));
}

}  // namespace svc::model
