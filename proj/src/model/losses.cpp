#include <cmath>

#include "common/error.hpp"
#include "model/model.hpp"

namespace svc::model {

using nn::Shape;

int gaussian_logprob_sum(nn::Tape<float>& tp, int x, int mu, int log_sigma) {
  const double n = double(tp.shape(x).numel());
  int d = tp.add(x, tp.scale(mu, -1.0f));
  int e = tp.mul(d, tp.exp_op(tp.scale(log_sigma, -1.0f)));
  int sq = tp.sum_all(tp.mul(e, e));
  int penalty = tp.add(tp.sum_all(log_sigma), tp.scale(sq, 0.5f));
  int half_log_2pi = tp.constant_fill(Shape::scalar(), float(0.5 * n * std::log(2.0 * M_PI)));
  return tp.scale(tp.add(penalty, half_log_2pi), -1.0f);
}

int build_kl(nn::Tape<float>& tp, const GaussianIds& q, int z, const GaussianIds& p,
             int z_p, int logdet, double denom) {
  int log_q = gaussian_logprob_sum(tp, z, q.mu, q.log_sigma);
  int log_p = tp.add(gaussian_logprob_sum(tp, z_p, p.mu, p.log_sigma), logdet);
  return tp.scale(tp.add(log_q, tp.scale(log_p, -1.0f)), float(1.0 / denom));
}

int l1_loss(nn::Tape<float>& tp, int a, int b) {
  if (!(tp.shape(a) == tp.shape(b)))
    raise(ErrorKind::ShapeError, "l1_loss: shape mismatch " + tp.shape(a).str() + " vs " +
                                     tp.shape(b).str());
  return tp.mean_all(tp.abs_op(tp.add(a, tp.scale(b, -1.0f))));
}

int adversarial_g_loss(nn::Tape<float>& tp, const DiscIds& fake) {
  int total = -1;
  for (int score : fake.scores) {
    int d = tp.add_scalar(score, -1.0f);
    int term = tp.mean_all(tp.mul(d, d));
    total = total < 0 ? term : tp.add(total, term);
  }
  return total;
}

int discriminator_loss(nn::Tape<float>& tp, const DiscIds& real, const DiscIds& fake) {
  int total = -1;
  for (size_t i = 0; i < real.scores.size(); ++i) {
    int dr = tp.add_scalar(real.scores[i], -1.0f);
    int real_term = tp.mean_all(tp.mul(dr, dr));
    int fake_term = tp.mean_all(tp.mul(fake.scores[i], fake.scores[i]));
    int term = tp.add(real_term, fake_term);
    total = total < 0 ? term : tp.add(total, term);
  }
  return total;
}

int feature_matching_loss(nn::Tape<float>& tp, const DiscIds& real, const DiscIds& fake) {
  if (real.features.size() != fake.features.size())
    raise(ErrorKind::ShapeError, "feature matching: layer count mismatch");
  int total = -1;
  for (size_t i = 0; i < real.features.size(); ++i) {
    int term = l1_loss(tp, real.features[i], fake.features[i]);
    total = total < 0 ? term : tp.add(total, term);
  }
  return total;
}

}  // namespace svc::model
