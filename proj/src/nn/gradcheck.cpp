#include "nn/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <sstream>

namespace svc::nn {

namespace {

void default_init(std::vector<std::vector<double>>& vals, Pcg32& rng) {
  for (auto& v : vals)
    for (auto& x : v) x = rng.uniform(-1.0, 1.0);
}

// magnitudes in [0.3, 1.2] with random sign: keeps inputs away from the
// kinks/singularities of abs, leaky_relu, div, atan2
void away_from_zero(std::vector<std::vector<double>>& vals, Pcg32& rng) {
  for (auto& v : vals)
    for (auto& x : v) x = (rng.uniform() < 0.5 ? -1.0 : 1.0) * rng.uniform(0.3, 1.2);
}

void positive_init(std::vector<std::vector<double>>& vals, Pcg32& rng) {
  for (auto& v : vals)
    for (auto& x : v) x = rng.uniform(0.3, 2.0);
}

std::shared_ptr<std::vector<int64_t>> fixed_take_table() {
  // mixes in-range reads, a repeat, and a -1 (zero fill)
  auto idx = std::make_shared<std::vector<int64_t>>(
      std::vector<int64_t>{0, 3, 5, 5, 2, -1, 7, 1, 4, 6, 0, 7});
  return idx;
}

std::shared_ptr<std::vector<int64_t>> fixed_scatter_table() {
  // several collisions, one dropped element
  auto idx = std::make_shared<std::vector<int64_t>>(
      std::vector<int64_t>{0, 1, 1, 4, 3, -1, 2, 4, 0, 5, 6, 2});
  return idx;
}

}  // namespace

std::vector<GradcheckCase> default_gradcheck_cases() {
  std::vector<GradcheckCase> cases;
  auto add = [&](GradcheckCase c) { cases.push_back(std::move(c)); };

  add({"add", {Shape::mat(3, 5), Shape::mat(3, 5)},
       [](Tape<double>& tp, const std::vector<int>& in) { return tp.add(in[0], in[1]); },
       nullptr, nullptr});
  add({"add_broadcast_col", {Shape::mat(3, 5), Shape::mat(3, 1)},
       [](Tape<double>& tp, const std::vector<int>& in) { return tp.add(in[0], in[1]); },
       nullptr, nullptr});
  add({"add_scalar", {Shape::mat(3, 4)},
       [](Tape<double>& tp, const std::vector<int>& in) { return tp.add_scalar(in[0], 0.37); },
       nullptr, nullptr});
  add({"mul", {Shape::mat(3, 5), Shape::mat(3, 5)},
       [](Tape<double>& tp, const std::vector<int>& in) { return tp.mul(in[0], in[1]); },
       nullptr, nullptr});
  add({"mul_broadcast_col", {Shape::mat(3, 5), Shape::mat(3, 1)},
       [](Tape<double>& tp, const std::vector<int>& in) { return tp.mul(in[0], in[1]); },
       nullptr, nullptr});
  add({"mul_broadcast_scalar", {Shape::mat(3, 5), Shape::scalar()},
       [](Tape<double>& tp, const std::vector<int>& in) { return tp.mul(in[0], in[1]); },
       nullptr, nullptr});
  add({"div", {Shape::mat(3, 5), Shape::mat(3, 5)},
       [](Tape<double>& tp, const std::vector<int>& in) { return tp.div(in[0], in[1]); },
       away_from_zero, nullptr});
  add({"scale", {Shape::mat(2, 6)},
       [](Tape<double>& tp, const std::vector<int>& in) { return tp.scale(in[0], -1.7); },
       nullptr, nullptr});
  add({"tanh", {Shape::mat(2, 7)},
       [](Tape<double>& tp, const std::vector<int>& in) { return tp.tanh_op(in[0]); },
       nullptr, nullptr});
  add({"sigmoid", {Shape::mat(2, 7)},
       [](Tape<double>& tp, const std::vector<int>& in) { return tp.sigmoid_op(in[0]); },
       nullptr, nullptr});
  add({"leaky_relu", {Shape::mat(2, 9)},
       [](Tape<double>& tp, const std::vector<int>& in) { return tp.leaky_relu(in[0], 0.1); },
       away_from_zero, nullptr});
  add({"exp", {Shape::mat(2, 7)},
       [](Tape<double>& tp, const std::vector<int>& in) { return tp.exp_op(in[0]); },
       nullptr, nullptr});
  add({"log", {Shape::mat(2, 7)},
       [](Tape<double>& tp, const std::vector<int>& in) { return tp.log_op(in[0]); },
       positive_init, nullptr});
  add({"sin", {Shape::mat(2, 7)},
       [](Tape<double>& tp, const std::vector<int>& in) { return tp.sin_op(in[0]); },
       nullptr, nullptr});
  add({"cos", {Shape::mat(2, 7)},
       [](Tape<double>& tp, const std::vector<int>& in) { return tp.cos_op(in[0]); },
       nullptr, nullptr});
  add({"sqrt", {Shape::mat(2, 7)},
       [](Tape<double>& tp, const std::vector<int>& in) { return tp.sqrt_op(in[0]); },
       positive_init, nullptr});
  add({"abs", {Shape::mat(2, 9)},
       [](Tape<double>& tp, const std::vector<int>& in) { return tp.abs_op(in[0]); },
       away_from_zero, nullptr});
  add({"atan2", {Shape::mat(2, 6), Shape::mat(2, 6)},
       [](Tape<double>& tp, const std::vector<int>& in) { return tp.atan2_op(in[0], in[1]); },
       away_from_zero, nullptr});
  add({"clamp", {Shape::mat(2, 8)},
       [](Tape<double>& tp, const std::vector<int>& in) { return tp.clamp(in[0], -2.0, 2.0); },
       away_from_zero, nullptr});
  add({"matmul", {Shape::mat(3, 4), Shape::mat(4, 5)},
       [](Tape<double>& tp, const std::vector<int>& in) { return tp.matmul(in[0], in[1]); },
       nullptr, nullptr});
  add({"conv1d", {Shape::mat(3, 10), Shape::cube(4, 3, 3), Shape::vec(4)},
       [](Tape<double>& tp, const std::vector<int>& in) {
         return tp.conv1d(in[0], in[1], in[2], ConvSpec{1, 1, 1});
       },
       nullptr, nullptr});
  add({"conv1d_strided", {Shape::mat(3, 12), Shape::cube(4, 3, 4), Shape::vec(4)},
       [](Tape<double>& tp, const std::vector<int>& in) {
         return tp.conv1d(in[0], in[1], in[2], ConvSpec{2, 1, 1});
       },
       nullptr, nullptr});
  add({"conv1d_dilated", {Shape::mat(2, 12), Shape::cube(3, 2, 3)},
       [](Tape<double>& tp, const std::vector<int>& in) {
         return tp.conv1d(in[0], in[1], -1, ConvSpec{1, 2, 2});
       },
       nullptr, nullptr});
  add({"transposed_conv1d", {Shape::mat(3, 6), Shape::cube(3, 4, 4), Shape::vec(4)},
       [](Tape<double>& tp, const std::vector<int>& in) {
         return tp.tconv1d(in[0], in[1], in[2], 1, 1);
       },
       nullptr, nullptr});
  add({"transposed_conv1d_strided", {Shape::mat(2, 5), Shape::cube(2, 3, 8), Shape::vec(3)},
       [](Tape<double>& tp, const std::vector<int>& in) {
         return tp.tconv1d(in[0], in[1], in[2], 4, 2);
       },
       nullptr, nullptr});
  add({"layer_norm", {Shape::mat(5, 4), Shape::vec(5), Shape::vec(5)},
       [](Tape<double>& tp, const std::vector<int>& in) {
         return tp.layer_norm(in[0], in[1], in[2]);
       },
       nullptr, nullptr});
  add({"concat", {Shape::mat(2, 5), Shape::mat(3, 5)},
       [](Tape<double>& tp, const std::vector<int>& in) {
         return tp.concat_rows({in[0], in[1]});
       },
       nullptr, nullptr});
  add({"slice", {Shape::mat(6, 4)},
       [](Tape<double>& tp, const std::vector<int>& in) { return tp.slice_rows(in[0], 1, 4); },
       nullptr, nullptr});
  add({"sum", {Shape::mat(3, 5)},
       [](Tape<double>& tp, const std::vector<int>& in) { return tp.sum_all(in[0]); },
       nullptr, nullptr});
  add({"mean", {Shape::mat(3, 5)},
       [](Tape<double>& tp, const std::vector<int>& in) { return tp.mean_all(in[0]); },
       nullptr, nullptr});
  add({"row_mean", {Shape::mat(3, 6)},
       [](Tape<double>& tp, const std::vector<int>& in) { return tp.row_mean(in[0]); },
       nullptr, nullptr});
  add({"broadcast_cols", {Shape::mat(4, 1)},
       [](Tape<double>& tp, const std::vector<int>& in) { return tp.broadcast_cols(in[0], 6); },
       nullptr, nullptr});
  add({"gather", {Shape::mat(5, 3)},
       [](Tape<double>& tp, const std::vector<int>& in) {
         auto idx = std::make_shared<std::vector<int>>(std::vector<int>{0, 2, 4, 1, 2});
         return tp.gather_cols(in[0], idx);
       },
       nullptr, nullptr});
  add({"take", {Shape::mat(2, 4)},
       [](Tape<double>& tp, const std::vector<int>& in) {
         return tp.take(in[0], fixed_take_table(), Shape::mat(3, 4));
       },
       nullptr, nullptr});
  add({"overlap_add", {Shape::mat(3, 4)},
       [](Tape<double>& tp, const std::vector<int>& in) {
         return tp.overlap_add(in[0], fixed_scatter_table(), 7);
       },
       nullptr, nullptr});

  return cases;
}

namespace {

double eval_loss(const GradcheckCase& c, const std::vector<std::vector<double>>& vals,
                 const std::vector<double>& reduce_w) {
  Tape<double> tp;
  std::vector<int> ids;
  for (size_t i = 0; i < c.input_shapes.size(); ++i)
    ids.push_back(tp.constant(c.input_shapes[i], vals[i].data()));
  int out = c.build(tp, ids);
  int w = tp.constant(tp.shape(out), reduce_w.data());
  return tp.scalar_value(tp.sum_all(tp.mul(out, w)));
}

}  // namespace

GradcheckReport run_gradcheck(const std::vector<GradcheckCase>& cases, uint64_t seed,
                              double tolerance, double fd_step) {
  GradcheckReport report;
  report.tolerance = tolerance;
  report.all_pass = true;

  for (const auto& c : cases) {
    Pcg32 rng(seed ^ std::hash<std::string>{}(c.name));
    std::vector<std::vector<double>> vals(c.input_shapes.size());
    for (size_t i = 0; i < vals.size(); ++i) vals[i].resize(c.input_shapes[i].numel());
    (c.init ? c.init : default_init)(vals, rng);

    // analytic gradients
    Tape<double> tp;
    std::vector<int> ids;
    for (size_t i = 0; i < vals.size(); ++i)
      ids.push_back(tp.leaf(c.input_shapes[i], vals[i].data()));
    int out = c.build(tp, ids);
    std::vector<double> reduce_w(tp.shape(out).numel());
    for (auto& w : reduce_w) w = rng.uniform(-1.0, 1.0);
    int wv = tp.constant(tp.shape(out), reduce_w.data());
    tp.backward(tp.sum_all(tp.mul(out, wv)));

    std::vector<std::vector<double>> analytic(vals.size());
    for (size_t i = 0; i < vals.size(); ++i)
      analytic[i].assign(tp.grad(ids[i]), tp.grad(ids[i]) + vals[i].size());
    if (c.tamper_analytic) c.tamper_analytic(analytic);

    // central finite differences
    double max_rel = 0.0;
    for (size_t i = 0; i < vals.size(); ++i) {
      for (size_t j = 0; j < vals[i].size(); ++j) {
        const double keep = vals[i][j];
        vals[i][j] = keep + fd_step;
        double lp = eval_loss(c, vals, reduce_w);
        vals[i][j] = keep - fd_step;
        double lm = eval_loss(c, vals, reduce_w);
        vals[i][j] = keep;
        double fd = (lp - lm) / (2.0 * fd_step);
        double denom = std::max({std::fabs(fd), std::fabs(analytic[i][j]), 1e-3});
        double rel = std::fabs(fd - analytic[i][j]) / denom;
        max_rel = std::max(max_rel, rel);
      }
    }

    GradcheckEntry entry{c.name, max_rel, max_rel < tolerance};
    report.all_pass = report.all_pass && entry.pass;
    report.entries.push_back(entry);
  }
  return report;
}

std::string GradcheckReport::to_text() const {
  std::ostringstream os;
  for (const auto& e : entries) {
    os << (e.pass ? "pass" : "FAIL") << "  " << e.name << "  max_rel_err=" << e.max_rel_err
       << "\n";
  }
  os << (all_pass ? "all op classes pass" : "FAILURES present") << " (tolerance "
     << tolerance << ")\n";
  return os.str();
}

}  // namespace svc::nn
