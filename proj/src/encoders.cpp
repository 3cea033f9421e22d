#include "crossfire/encoders.hpp"

#include <cctype>
#include <charconv>
#include <cmath>

namespace crossfire {

namespace {

Matrix gaussian_matrix(Rng& rng, Index rows, Index cols, double stddev) {
  Matrix m(rows, cols);
  for (Index r = 0; r < rows; ++r) {
    for (Index c = 0; c < cols; ++c) m(r, c) = rng.gaussian(0.0, stddev);
  }
  return m;
}

Index parse_index(std::string_view field, std::string_view whole) {
  long long value = 0;
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc() || ptr != field.data() + field.size() || value < 1) {
    throw Error(ErrorCode::BadSpec, "bad positive integer '" + std::string(field) + "' in encoder spec '" +
                                        std::string(whole) + "'");
  }
  return static_cast<Index>(value);
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  for (;;) {
    const std::size_t end = s.find(sep, start);
    parts.push_back(s.substr(start, end == std::string_view::npos ? s.npos : end - start));
    if (end == std::string_view::npos) break;
    start = end + 1;
  }
  return parts;
}

std::vector<Index> patch_gather(const MediaShape& shape, Index patch) {
  const Index ph = shape.kind == MediaKind::Audio ? 1 : patch;
  const Index pw = patch;
  const Index gh = shape.height / ph;
  const Index gw = shape.width / pw;
  std::vector<Index> gather;
  gather.reserve(static_cast<std::size_t>(shape.size()));
  for (Index py = 0; py < gh; ++py) {
    for (Index px = 0; px < gw; ++px) {
      for (Index c = 0; c < shape.channels; ++c) {
        for (Index dy = 0; dy < ph; ++dy) {
          for (Index dx = 0; dx < pw; ++dx) {
            gather.push_back((c * shape.height + py * ph + dy) * shape.width + px * pw + dx);
          }
        }
      }
    }
  }
  return gather;
}

void validate_patch(const MediaShape& shape, Index patch) {
  if (patch < 1) throw Error(ErrorCode::BadSpec, "patch size must be positive");
  const bool fits = shape.kind == MediaKind::Audio
                        ? shape.width % patch == 0
                        : shape.height % patch == 0 && shape.width % patch == 0;
  if (!fits) {
    throw Error(ErrorCode::BadSpec,
                "patch " + std::to_string(patch) + " does not divide " + to_string(shape));
  }
}

Matrix gather_patches(const PatchConvParams& p, const Eigen::Ref<const Vector>& flat,
                      double center) {
  Matrix patches(p.patch_len, p.num_patches);
  for (Index k = 0; k < p.num_patches; ++k) {
    for (Index r = 0; r < p.patch_len; ++r) {
      patches(r, k) = flat(p.gather[static_cast<std::size_t>(k * p.patch_len + r)]) - center;
    }
  }
  return patches;
}

Matrix patch_activations(const PatchConvParams& p, const Eigen::Ref<const Vector>& flat,
                         double center) {
  Matrix z = p.w1 * gather_patches(p, flat, center);
  z.colwise() += p.b1;
  return z.array().tanh().matrix();
}

}  // namespace

EncoderSpec parse_encoder_spec(std::string_view text) {
  const auto parts = split(text, ':');
  const std::string_view kind = parts.front();
  if (kind == "identity" && parts.size() == 1) return IdentitySpec{};
  if (kind == "random_projection" && parts.size() == 2) {
    return RandomProjectionSpec{parse_index(parts[1], text)};
  }
  if (kind == "patch_conv" && parts.size() == 4) {
    return PatchConvSpec{parse_index(parts[1], text), parse_index(parts[2], text),
                         parse_index(parts[3], text)};
  }
  throw Error(ErrorCode::BadSpec, "unrecognized encoder spec '" + std::string(text) + "'");
}

std::string to_string(const EncoderSpec& spec) {
  struct Visitor {
    std::string operator()(const IdentitySpec&) const { return "identity"; }
    std::string operator()(const RandomProjectionSpec& s) const {
      return "random_projection:" + std::to_string(s.out_dim);
    }
    std::string operator()(const PatchConvSpec& s) const {
      return "patch_conv:" + std::to_string(s.patch) + ":" + std::to_string(s.hidden) + ":" +
             std::to_string(s.out_dim);
    }
  };
  return std::visit(Visitor{}, spec);
}

Encoder make_encoder(const EncoderSpec& spec, const MediaShape& in_shape, std::uint64_t seed) {
  if (in_shape.size() < 1) throw Error(ErrorCode::BadSpec, "empty input shape");
  const Index in_dim = in_shape.size();
  Rng rng(seed);

  if (std::holds_alternative<IdentitySpec>(spec)) {
    if (in_dim < 2) throw Error(ErrorCode::BadSpec, "identity encoder needs out_dim >= 2");
    return Encoder(spec, in_shape, in_dim, seed, std::monostate{});
  }
  if (const auto* rp = std::get_if<RandomProjectionSpec>(&spec)) {
    if (rp->out_dim < 2) throw Error(ErrorCode::BadSpec, "random_projection out_dim must be >= 2");
    const double stddev = 1.0 / std::sqrt(static_cast<double>(in_dim));
    ProjectionParams params;
    params.weight = gaussian_matrix(rng, rp->out_dim, in_dim, stddev);
    params.bias = Vector::Zero(rp->out_dim);
    return Encoder(spec, in_shape, rp->out_dim, seed, std::move(params));
  }

  const auto& pc = std::get<PatchConvSpec>(spec);
  if (pc.hidden < 1) throw Error(ErrorCode::BadSpec, "patch_conv hidden must be positive");
  if (pc.out_dim < 2) throw Error(ErrorCode::BadSpec, "patch_conv out_dim must be >= 2");
  validate_patch(in_shape, pc.patch);

  PatchConvParams params;
  params.patch_len =
      in_shape.channels * pc.patch * (in_shape.kind == MediaKind::Audio ? 1 : pc.patch);
  params.num_patches = in_dim / params.patch_len;
  params.gather = patch_gather(in_shape, pc.patch);
  const double s1 = 1.0 / std::sqrt(static_cast<double>(params.patch_len));
  const double s2 = 1.0 / std::sqrt(static_cast<double>(pc.hidden));
  params.w1 = gaussian_matrix(rng, pc.hidden, params.patch_len, s1);
  params.b1 = Vector::Zero(pc.hidden);
  params.w2 = gaussian_matrix(rng, pc.out_dim, pc.hidden, s2);
  params.b2 = Vector::Zero(pc.out_dim);
  return Encoder(spec, in_shape, pc.out_dim, seed, std::move(params));
}

Encoder Encoder::from_projection(const MediaShape& in_shape, Matrix weight, Vector bias) {
  if (weight.cols() != in_shape.size() || bias.size() != weight.rows() || weight.rows() < 2) {
    throw Error(ErrorCode::BadSpec, "projection parameters do not match input shape");
  }
  const Index out_dim = weight.rows();
  return Encoder(RandomProjectionSpec{out_dim}, in_shape, out_dim, 0,
                 ProjectionParams{std::move(weight), std::move(bias)});
}

Encoder Encoder::from_patch_conv(const MediaShape& in_shape, Index patch, Matrix w1, Vector b1,
                                 Matrix w2, Vector b2) {
  validate_patch(in_shape, patch);
  PatchConvParams params;
  params.patch_len = in_shape.channels * patch * (in_shape.kind == MediaKind::Audio ? 1 : patch);
  params.num_patches = in_shape.size() / params.patch_len;
  params.gather = patch_gather(in_shape, patch);
  if (w1.cols() != params.patch_len || b1.size() != w1.rows() || w2.cols() != w1.rows() ||
      b2.size() != w2.rows() || w2.rows() < 2) {
    throw Error(ErrorCode::BadSpec, "patch_conv parameters do not match input shape");
  }
  const Index hidden = w1.rows();
  const Index out_dim = w2.rows();
  params.w1 = std::move(w1);
  params.b1 = std::move(b1);
  params.w2 = std::move(w2);
  params.b2 = std::move(b2);
  return Encoder(PatchConvSpec{patch, hidden, out_dim}, in_shape, out_dim, 0, std::move(params));
}

void Encoder::check_input(Index size) const {
  if (size != in_shape_.size()) {
    throw Error(ErrorCode::ShapeMismatch, "encoder expects " + std::to_string(in_shape_.size()) +
                                              " inputs, got " + std::to_string(size));
  }
}

Vector Encoder::forward(const Eigen::Ref<const Vector>& flat) const {
  check_input(flat.size());
  const double center = input_center();
  if (std::holds_alternative<std::monostate>(params_)) return flat;
  if (const auto* p = std::get_if<ProjectionParams>(&params_)) {
    return (p->weight * (flat.array() - center).matrix() + p->bias).array().tanh().matrix();
  }
  const auto& p = std::get<PatchConvParams>(params_);
  const Vector pooled = patch_activations(p, flat, center).rowwise().mean();
  return p.w2 * pooled + p.b2;
}

Vector Encoder::vjp(const Eigen::Ref<const Vector>& flat,
                    const Eigen::Ref<const Vector>& cotangent) const {
  check_input(flat.size());
  const double center = input_center();
  if (cotangent.size() != out_dim_) {
    throw Error(ErrorCode::ShapeMismatch, "cotangent has dim " +
                                              std::to_string(cotangent.size()) + ", expected " +
                                              std::to_string(out_dim_));
  }
  if (std::holds_alternative<std::monostate>(params_)) return cotangent;
  if (const auto* p = std::get_if<ProjectionParams>(&params_)) {
    const Vector y = (p->weight * (flat.array() - center).matrix() + p->bias).array().tanh().matrix();
    const Vector gz = cotangent.cwiseProduct((1.0 - y.array().square()).matrix());
    return p->weight.transpose() * gz;
  }

  const auto& p = std::get<PatchConvParams>(params_);
  const Matrix h = patch_activations(p, flat, center);
  const Vector g_pooled = p.w2.transpose() * cotangent / static_cast<double>(p.num_patches);
  // dL/dz for each patch column: g_pooled scaled by tanh' = 1 - h^2
  const Matrix gz = ((1.0 - h.array().square()).colwise() * g_pooled.array()).matrix();
  const Matrix gp = p.w1.transpose() * gz;

  Vector grad(flat.size());
  for (Index k = 0; k < p.num_patches; ++k) {
    for (Index r = 0; r < p.patch_len; ++r) {
      grad(p.gather[static_cast<std::size_t>(k * p.patch_len + r)]) = gp(r, k);
    }
  }
  return grad;
}

Vector embed(const Encoder& e, const MediaTensor& v) {
  if (v.shape() != e.in_shape()) {
    throw Error(ErrorCode::ShapeMismatch, "encoder expects " + to_string(e.in_shape()) +
                                              ", got " + to_string(v.shape()));
  }
  return e.forward(v.data());
}

Vector embed_vjp(const Encoder& e, const MediaTensor& v, const Vector& cotangent) {
  if (v.shape() != e.in_shape()) {
    throw Error(ErrorCode::ShapeMismatch, "encoder expects " + to_string(e.in_shape()) +
                                              ", got " + to_string(v.shape()));
  }
  return e.vjp(v.data(), cotangent);
}

double lipschitz_bound(const Encoder& e) {
  const auto spectral = [](const Matrix& m) {
    return Eigen::JacobiSVD<Matrix>(m).singularValues()(0);
  };
  if (std::holds_alternative<std::monostate>(e.params())) return 1.0;
  if (const auto* p = std::get_if<ProjectionParams>(&e.params())) return spectral(p->weight);
  // Mean pooling of n patch features: ||d pooled|| <= ||W1|| / sqrt(n) * ||d x||.
  const auto& p = std::get<PatchConvParams>(e.params());
  return spectral(p.w2) * spectral(p.w1) / std::sqrt(static_cast<double>(p.num_patches));
}

TextEncoder::TextEncoder(Index vocab_size, Index out_dim, std::uint64_t seed) {
  if (vocab_size < 1) throw Error(ErrorCode::BadSpec, "vocab_size must be positive");
  if (out_dim < 2) throw Error(ErrorCode::BadSpec, "text encoder out_dim must be >= 2");
  Rng rng(seed);
  projection_ = gaussian_matrix(rng, vocab_size, out_dim, 1.0 / std::sqrt(static_cast<double>(vocab_size)));
}

std::vector<std::string> tokenize(std::string_view s) {
  std::vector<std::string> tokens;
  std::string current;
  for (char ch : s) {
    if (std::isspace(static_cast<unsigned char>(ch))) {
      if (!current.empty()) tokens.push_back(std::move(current));
      current.clear();
    } else {
      current.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(ch))));
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

Vector embed_text(const TextEncoder& te, std::string_view s) {
  const auto tokens = tokenize(s);
  if (tokens.empty()) throw Error(ErrorCode::EmptyText, "text has no tokens");
  Vector counts = Vector::Zero(te.vocab_size());
  for (const auto& token : tokens) {
    counts(static_cast<Index>(fnv1a(token) % static_cast<std::uint64_t>(te.vocab_size()))) += 1.0;
  }
  return (te.projection().transpose() * counts).array().tanh().matrix();
}

}  // namespace crossfire
