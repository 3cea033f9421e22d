#pragma once

#include <optional>
#include <string_view>
#include <variant>
#include <vector>

#include "crossfire/encoders.hpp"

namespace crossfire {

enum class Variant {
  CrossFire,              // align normalized embeddings of t_v and v_adv
  CrossFireUnnormalized,  // same, without normalizing either embedding
  DirectCrossModal,       // align v_adv directly with the text embedding of t
};

std::string_view to_string(Variant v);
/// Accepts "crossfire", "crossfire_unnormalized", "direct_cross_modal".
Variant parse_variant(std::string_view name);

struct ZeroInit {};
/// Each coordinate of delta0 uniform in [-alpha, alpha], then range-projected.
struct UniformInBallInit {
  std::uint64_t seed = 0;
};
using DeltaInit = std::variant<ZeroInit, UniformInBallInit>;

struct AttackConfig {
  Variant variant = Variant::CrossFire;
  double alpha = 16.0 / 255.0;
  double lambda = 0.01;
  int max_iter = 3000;
  DeltaInit delta0 = ZeroInit{};
  std::optional<double> early_stop_loss;

  /// Throws InvalidArgument unless alpha >= 0, lambda > 0, max_iter >= 1.
  void validate() const;
};

/// Per-iteration record of one attack run.
struct AttackTrace {
  std::vector<double> loss;  // loss at the iterate evaluated in each iteration
  double final_alignment = 0.0;
  int iterations_run = 0;
  bool stopped_early = false;
};

struct LossAndGrad {
  double loss = 0.0;
  Vector grad;  // d loss / d media, flattened like the media
};

/// ||target_hat - normalize(f(v_adv))||^2 and its gradient with respect to v_adv.
LossAndGrad normalized_loss_and_grad(const NormalizedVector& target_hat, const Encoder& e,
                                     const Eigen::Ref<const Vector>& v_adv);

/// ||target - f(v_adv)||^2 and its gradient; nothing is normalized.
LossAndGrad unnormalized_loss_and_grad(const Vector& target, const Encoder& e,
                                       const Eigen::Ref<const Vector>& v_adv);

/// Dispatches on the variant. `target` is the raw target embedding: f(t_v) for
/// the two CrossFire variants, the text embedding for DirectCrossModal; it is
/// normalized here where the variant calls for it.
LossAndGrad adm_loss_and_grad(const Vector& target, const Encoder& e, const MediaTensor& v_adv,
                              Variant variant);

/// clamp(delta - lambda * sign(grad)) onto [-alpha, alpha] and then onto the
/// set where v + delta stays inside the media value range. sign(0) = 0.
Vector pgd_step(const Vector& delta, const Vector& grad, double lambda, double alpha,
                const MediaTensor& v);

struct AttackResult {
  MediaTensor v_adv;
  AttackTrace trace;
};

/// Sign-gradient PGD from delta0 for cfg.max_iter iterations (or until the
/// optional early-stop loss is reached). The target embedding is fixed for
/// the whole run.
AttackResult run_attack(const Encoder& e, const Vector& target_embedding, const MediaTensor& v,
                        const AttackConfig& cfg);

/// Convenience form for the CrossFire variants: the target is f(t_v).
AttackResult run_attack(const Encoder& e, const MediaTensor& t_v, const MediaTensor& v,
                        const AttackConfig& cfg);

}  // namespace crossfire
