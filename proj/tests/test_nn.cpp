#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstring>
#include <filesystem>

#include "common/error.hpp"
#include "nn/adam.hpp"
#include "nn/gradcheck.hpp"
#include "nn/param_store.hpp"
#include "nn/serialize.hpp"
#include "nn/tensor.hpp"

using namespace svc;
using nn::ConvSpec;
using nn::Shape;
using nn::Tape;

TEST_CASE("conv1d length formulas") {
  Tape<float> tp;
  std::vector<float> x(3 * 10, 0.5f), w(4 * 3 * 3, 0.1f);
  int xi = tp.constant(Shape::mat(3, 10), x.data());
  int wi = tp.constant(Shape::cube(4, 3, 3), w.data());
  int y = tp.conv1d(xi, wi, -1, ConvSpec{1, 1, 1});
  CHECK(tp.shape(y) == Shape::mat(4, 10));

  std::vector<float> xt(2 * 4, 1.f), wt(2 * 3 * 8, 0.1f);
  int x2 = tp.constant(Shape::mat(2, 4), xt.data());
  int w2 = tp.constant(Shape::cube(2, 3, 8), wt.data());
  int y2 = tp.tconv1d(x2, w2, -1, 4, 2);
  CHECK(tp.shape(y2) == Shape::mat(3, 16));
}

TEST_CASE("conv1d against a hand computation") {
  Tape<double> tp;
  std::vector<double> x{1, 2, 3, 4};            // (1,4)
  std::vector<double> w{0.5, 1.0, -1.0};        // (1,1,3)
  int xi = tp.constant(Shape::mat(1, 4), x.data());
  int wi = tp.constant(Shape::cube(1, 1, 3), w.data());
  int y = tp.conv1d(xi, wi, -1, ConvSpec{1, 1, 1});
  // y[t] = 0.5*x[t-1] + 1.0*x[t] - 1.0*x[t+1], zero padded
  const double* yv = tp.val(y);
  CHECK(yv[0] == doctest::Approx(1.0 - 2.0));
  CHECK(yv[1] == doctest::Approx(0.5 + 2.0 - 3.0));
  CHECK(yv[2] == doctest::Approx(1.0 + 3.0 - 4.0));
  CHECK(yv[3] == doctest::Approx(1.5 + 4.0));
}

TEST_CASE("elementwise basics") {
  Tape<float> tp;
  float z = 0.0f;
  int a = tp.constant(Shape::scalar(), &z);
  CHECK(tp.scalar_value(tp.tanh_op(a)) == 0.0f);
  CHECK(tp.scalar_value(tp.sigmoid_op(a)) == 0.5f);
  CHECK(tp.scalar_value(tp.exp_op(a)) == 1.0f);
}

TEST_CASE("backward: linear loss gives the data as gradient") {
  Tape<float> tp;
  std::vector<float> w{0.3f, -0.2f, 0.9f}, x{1.f, 2.f, 3.f};
  int wi = tp.leaf(Shape::vec(3), w.data());
  int xi = tp.constant(Shape::vec(3), x.data());
  int loss = tp.sum_all(tp.mul(wi, xi));
  tp.backward(loss);
  const float* g = tp.grad(wi);
  CHECK(g[0] == 1.f);
  CHECK(g[1] == 2.f);
  CHECK(g[2] == 3.f);
}

TEST_CASE("backward: non-participating leaf has zero gradient") {
  Tape<float> tp;
  std::vector<float> w{1.f, 1.f}, u{2.f, 2.f};
  int wi = tp.leaf(Shape::vec(2), w.data());
  int ui = tp.leaf(Shape::vec(2), u.data());
  int loss = tp.sum_all(ui);
  tp.backward(loss);
  CHECK(tp.grad(wi)[0] == 0.f);
  CHECK(tp.grad(wi)[1] == 0.f);
}

TEST_CASE("backward rejects non-scalar loss") {
  Tape<float> tp;
  std::vector<float> v{1.f, 2.f};
  int a = tp.leaf(Shape::vec(2), v.data());
  CHECK_THROWS_AS(tp.backward(a), Error);
}

TEST_CASE("non-finite op results raise NumericalError naming the op") {
  Tape<float> tp;
  float neg = -1.0f;
  int a = tp.constant(Shape::scalar(), &neg);
  try {
    tp.log_op(a);
    FAIL("expected NumericalError");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::NumericalError);
    CHECK(std::string(e.what()).find("log") != std::string::npos);
  }
}

TEST_CASE("shape mismatches raise ShapeError") {
  Tape<float> tp;
  std::vector<float> a(6, 1.f), b(8, 1.f);
  int ai = tp.constant(Shape::mat(2, 3), a.data());
  int bi = tp.constant(Shape::mat(2, 4), b.data());
  try {
    tp.add(ai, bi);
    FAIL("expected ShapeError");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::ShapeError);
  }
}

TEST_CASE("adam: zero gradients leave parameters unchanged") {
  nn::ParamStore store;
  nn::Pcg32 rng(1);
  auto& p = store.add_kaiming("w", Shape::vec(16), 16, rng);
  auto before = p.value;
  nn::Adam opt(store, nn::AdamConfig{});
  p.grad_ready = true;  // grads are zero-filled
  opt.step();
  CHECK(std::memcmp(before.data(), p.value.data(), 16 * sizeof(float)) == 0);
}

TEST_CASE("adam: constant gradient moves parameters against its sign") {
  nn::ParamStore store;
  auto& p = store.add("w", Shape::vec(4));
  nn::Adam opt(store, nn::AdamConfig{});
  for (int step = 0; step < 50; ++step) {
    std::fill(p.grad.begin(), p.grad.end(), 0.5f);
    p.grad_ready = true;
    opt.step();
  }
  for (float v : p.value) CHECK(v < 0.0f);
}

TEST_CASE("adam: missing gradient raises OptimizerError") {
  nn::ParamStore store;
  store.add("w", Shape::vec(4));
  nn::Adam opt(store, nn::AdamConfig{});
  CHECK_THROWS_AS(opt.step(), Error);
}

TEST_CASE("adam: learning-rate schedule switches at the decay step") {
  nn::ParamStore store;
  store.add("w", Shape::vec(1));
  nn::AdamConfig cfg;
  cfg.decay_step = 2;
  nn::Adam opt(store, cfg);
  CHECK(opt.current_lr() == 1e-4f);
  for (int i = 0; i < 2; ++i) {
    store.get("w").grad_ready = true;
    opt.step();
  }
  CHECK(opt.current_lr() == 5e-5f);
}

TEST_CASE("graph evaluation is deterministic") {
  auto run = [] {
    Tape<float> tp;
    nn::Pcg32 rng(77);
    std::vector<float> x(3 * 20), w(5 * 3 * 5);
    for (auto& v : x) v = float(rng.normal());
    for (auto& v : w) v = float(rng.normal() * 0.1);
    int xi = tp.leaf(Shape::mat(3, 20), x.data());
    int wi = tp.leaf(Shape::cube(5, 3, 5), w.data());
    int y = tp.tanh_op(tp.conv1d(xi, wi, -1, ConvSpec{1, 2, 1}));
    int loss = tp.mean_all(tp.mul(y, y));
    tp.backward(loss);
    return std::make_pair(tp.scalar_value(loss),
                          std::vector<float>(tp.grad(wi), tp.grad(wi) + w.size()));
  };
  auto [l1, g1] = run();
  auto [l2, g2] = run();
  CHECK(std::memcmp(&l1, &l2, sizeof(float)) == 0);
  CHECK(std::memcmp(g1.data(), g2.data(), g1.size() * sizeof(float)) == 0);
}

TEST_CASE("gradcheck: every registered op class passes at 1e-4") {
  auto report = nn::run_gradcheck(nn::default_gradcheck_cases(), 0);
  for (const auto& e : report.entries) {
    INFO(e.name, " max_rel_err=", e.max_rel_err);
    CHECK(e.pass);
  }
  CHECK(report.all_pass);
}

TEST_CASE("gradcheck: corrupted conv gradient is reported as failing") {
  nn::GradcheckCase corrupt{
      "conv1d_corrupted",
      {Shape::mat(3, 10), Shape::cube(4, 3, 3), Shape::vec(4)},
      [](Tape<double>& tp, const std::vector<int>& in) {
        return tp.conv1d(in[0], in[1], in[2], ConvSpec{1, 1, 1});
      },
      nullptr,
      [](std::vector<std::vector<double>>& analytic) {
        for (auto& g : analytic[1]) g *= 1.02;  // broken weight gradient
      }};
  auto report = nn::run_gradcheck({corrupt}, 0);
  CHECK_FALSE(report.all_pass);
  CHECK_FALSE(report.entries[0].pass);
}

TEST_CASE("gradcheck report is identical across runs with the same seed") {
  auto r1 = nn::run_gradcheck(nn::default_gradcheck_cases(), 123);
  auto r2 = nn::run_gradcheck(nn::default_gradcheck_cases(), 123);
  REQUIRE(r1.entries.size() == r2.entries.size());
  for (size_t i = 0; i < r1.entries.size(); ++i) {
    CHECK(r1.entries[i].name == r2.entries[i].name);
    CHECK(r1.entries[i].max_rel_err == r2.entries[i].max_rel_err);
  }
}

TEST_CASE("named tensor container round trip") {
  namespace fs = std::filesystem;
  auto path = (fs::temp_directory_path() / "svc_ckpt_test.rasv").string();
  std::vector<nn::NamedTensor> tensors;
  tensors.push_back({"a.weight", Shape::mat(2, 3), {1, 2, 3, 4, 5, 6}});
  tensors.push_back({"b", Shape::vec(2), {0.5f, -0.5f}});
  nn::write_rasv(path, 1234, tensors);
  auto [step, loaded] = nn::read_rasv(path);
  CHECK(step == 1234);
  REQUIRE(loaded.size() == 2);
  CHECK(loaded[0].name == "a.weight");
  CHECK(loaded[0].shape == Shape::mat(2, 3));
  CHECK(std::memcmp(loaded[0].values.data(), tensors[0].values.data(), 6 * 4) == 0);
  CHECK(loaded[1].values[1] == -0.5f);
  fs::remove(path);
}
