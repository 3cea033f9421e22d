#include "crossfire/attack.hpp"

#include <algorithm>
#include <cassert>
#include <string>

namespace crossfire {

namespace {

double sign(double x) { return static_cast<double>((x > 0.0) - (x < 0.0)); }

Vector initial_delta(const AttackConfig& cfg, const MediaTensor& v) {
  const Index n = v.data().size();
  if (std::holds_alternative<ZeroInit>(cfg.delta0)) return Vector::Zero(n);
  Rng rng(std::get<UniformInBallInit>(cfg.delta0).seed);
  Vector delta(n);
  for (Index i = 0; i < n; ++i) {
    const double d = rng.uniform(-cfg.alpha, cfg.alpha);
    delta(i) = std::clamp(d, v.shape().lower() - v[i], v.shape().upper() - v[i]);
  }
  return delta;
}

// Cosine between the (normalized) target and the embedding of v_adv.
double alignment_to(const Vector& target, const Encoder& e, const MediaTensor& v_adv) {
  return inner(l2_normalize(target), l2_normalize(embed(e, v_adv)));
}

}  // namespace

std::string_view to_string(Variant v) {
  switch (v) {
    case Variant::CrossFire: return "crossfire";
    case Variant::CrossFireUnnormalized: return "crossfire_unnormalized";
    case Variant::DirectCrossModal: return "direct_cross_modal";
  }
  return "unknown";
}

Variant parse_variant(std::string_view name) {
  for (Variant v : {Variant::CrossFire, Variant::CrossFireUnnormalized, Variant::DirectCrossModal}) {
    if (to_string(v) == name) return v;
  }
  throw Error(ErrorCode::InvalidArgument, "unknown variant '" + std::string(name) + "'");
}

void AttackConfig::validate() const {
  if (!(alpha >= 0.0)) throw Error(ErrorCode::InvalidArgument, "alpha must be >= 0");
  if (!(lambda > 0.0)) throw Error(ErrorCode::InvalidArgument, "lambda must be > 0");
  if (max_iter < 1) throw Error(ErrorCode::InvalidArgument, "max_iter must be >= 1");
}

LossAndGrad normalized_loss_and_grad(const NormalizedVector& target_hat, const Encoder& e,
                                     const Eigen::Ref<const Vector>& v_adv) {
  if (target_hat.size() != e.out_dim()) {
    throw Error(ErrorCode::DimMismatch, "target dim " + std::to_string(target_hat.size()) +
                                            " vs encoder out_dim " + std::to_string(e.out_dim()));
  }
  const Vector z = e.forward(v_adv);
  const double norm = z.norm();
  const NormalizedVector z_hat = l2_normalize(z);
  const Vector& t = target_hat.data();

  LossAndGrad out;
  out.loss = (t - z_hat.data()).squaredNorm();
  // d/dz of z/||z|| is (I - z_hat z_hat^T) / ||z||, applied to 2 (z_hat - t).
  const Vector dz = (-2.0 / norm) * (t - t.dot(z_hat.data()) * z_hat.data());
  out.grad = e.vjp(v_adv, dz);
  return out;
}

LossAndGrad unnormalized_loss_and_grad(const Vector& target, const Encoder& e,
                                       const Eigen::Ref<const Vector>& v_adv) {
  if (target.size() != e.out_dim()) {
    throw Error(ErrorCode::DimMismatch, "target dim " + std::to_string(target.size()) +
                                            " vs encoder out_dim " + std::to_string(e.out_dim()));
  }
  const Vector diff = e.forward(v_adv) - target;
  LossAndGrad out;
  out.loss = diff.squaredNorm();
  out.grad = e.vjp(v_adv, 2.0 * diff);
  return out;
}

LossAndGrad adm_loss_and_grad(const Vector& target, const Encoder& e, const MediaTensor& v_adv,
                              Variant variant) {
  if (v_adv.shape() != e.in_shape()) {
    throw Error(ErrorCode::ShapeMismatch, "encoder expects " + to_string(e.in_shape()) +
                                              ", got " + to_string(v_adv.shape()));
  }
  if (variant == Variant::CrossFireUnnormalized) {
    return unnormalized_loss_and_grad(target, e, v_adv.data());
  }
  return normalized_loss_and_grad(l2_normalize(target), e, v_adv.data());
}

Vector pgd_step(const Vector& delta, const Vector& grad, double lambda, double alpha,
                const MediaTensor& v) {
  if (delta.size() != grad.size() || delta.size() != v.data().size()) {
    throw Error(ErrorCode::ShapeMismatch, "pgd_step operands disagree in size");
  }
  const double lo = v.shape().lower();
  const double hi = v.shape().upper();
  Vector next(delta.size());
  for (Index i = 0; i < delta.size(); ++i) {
    const double stepped = std::clamp(delta(i) - lambda * sign(grad(i)), -alpha, alpha);
    next(i) = std::clamp(stepped, lo - v[i], hi - v[i]);
  }
  return next;
}

AttackResult run_attack(const Encoder& e, const Vector& target_embedding, const MediaTensor& v,
                        const AttackConfig& cfg) {
  cfg.validate();
  if (v.shape() != e.in_shape()) {
    throw Error(ErrorCode::ShapeMismatch, "encoder expects " + to_string(e.in_shape()) +
                                              ", got " + to_string(v.shape()));
  }
  if (target_embedding.size() != e.out_dim()) {
    throw Error(ErrorCode::DimMismatch, "target embedding dim " +
                                            std::to_string(target_embedding.size()) +
                                            " vs encoder out_dim " + std::to_string(e.out_dim()));
  }

  const bool normalized = cfg.variant != Variant::CrossFireUnnormalized;
  std::optional<NormalizedVector> target_hat;
  if (normalized) target_hat = l2_normalize(target_embedding);

  AttackTrace trace;
  trace.loss.reserve(static_cast<std::size_t>(cfg.max_iter));
  Vector delta = initial_delta(cfg, v);
  Vector v_adv(v.data().size());

  for (int iter = 0; iter < cfg.max_iter; ++iter) {
    v_adv = v.data() + delta;
    assert(delta.cwiseAbs().maxCoeff() <= cfg.alpha);
    const LossAndGrad lg = normalized ? normalized_loss_and_grad(*target_hat, e, v_adv)
                                      : unnormalized_loss_and_grad(target_embedding, e, v_adv);
    trace.loss.push_back(lg.loss);
    ++trace.iterations_run;
    if (cfg.early_stop_loss && lg.loss <= *cfg.early_stop_loss) {
      trace.stopped_early = true;
      break;
    }
    delta = pgd_step(delta, lg.grad, cfg.lambda, cfg.alpha, v);
  }

  MediaTensor result = clamp_to_range(v.shape(), v.data() + delta, v.sample_rate());
  trace.final_alignment = alignment_to(target_embedding, e, result);
  return AttackResult{std::move(result), std::move(trace)};
}

AttackResult run_attack(const Encoder& e, const MediaTensor& t_v, const MediaTensor& v,
                        const AttackConfig& cfg) {
  if (cfg.variant == Variant::DirectCrossModal) {
    throw Error(ErrorCode::InvalidArgument, "direct_cross_modal needs a text target embedding");
  }
  return run_attack(e, embed(e, t_v), v, cfg);
}

}  // namespace crossfire
