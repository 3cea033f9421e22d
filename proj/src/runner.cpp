#include "crossfire/runner.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numbers>
#include <optional>
#include <thread>

#include <spdlog/spdlog.h>
#include <json.hpp>

namespace crossfire {

namespace {

// Shared, read-only state for one sweep.
struct SweepContext {
  const RunConfig& cfg;
  Encoder attacker;
  Encoder evaluator;
  TextEncoder text_encoder;
  MediaTensor t_v;
  std::vector<NormalizedVector> prototypes;
  std::size_t target_label;
  Vector crossfire_target;  // f_attacker(t_v)
  Vector text_target;       // text embedding of the targeted input
};

// Downstream encoders resize whatever they receive to their input size.
MediaTensor fit_to_encoder(const MediaTensor& media, const Encoder& e) {
  if (media.shape() == e.in_shape()) return media;
  if (media.kind() == MediaKind::Image && media.shape().channels == e.in_shape().channels) {
    return resize_to(media, e.in_shape().height, e.in_shape().width);
  }
  throw Error(ErrorCode::ShapeMismatch, "cannot feed " + to_string(media.shape()) +
                                            " to an encoder expecting " + to_string(e.in_shape()));
}

std::vector<SampleResult> process_sample(const SweepContext& ctx, const CorpusSample& sample,
                                         const std::filesystem::path* media_dir) {
  const RunConfig& cfg = ctx.cfg;
  const std::uint64_t seed = sample_seed(cfg.global_seed, sample.id);
  const double before = alignment(ctx.evaluator, ctx.t_v, sample.media);

  std::vector<SampleResult> out;
  for (Variant variant : cfg.variants) {
    for (double alpha : cfg.alphas) {
      AttackConfig attack;
      attack.variant = variant;
      attack.alpha = alpha;
      attack.lambda = cfg.lambda;
      attack.max_iter = cfg.max_iter;
      attack.early_stop_loss = cfg.early_stop_loss;
      if (const auto* u = std::get_if<UniformInBallInit>(&cfg.delta0)) {
        attack.delta0 = UniformInBallInit{mix_seed(u->seed, seed)};
      }
      const Vector& target =
          variant == Variant::DirectCrossModal ? ctx.text_target : ctx.crossfire_target;
      const AttackResult attacked = run_attack(ctx.attacker, target, sample.media, attack);
      spdlog::debug("{} {} alpha={} final_alignment={} iterations={}", sample.id,
                    to_string(variant), alpha, attacked.trace.final_alignment,
                    attacked.trace.iterations_run);

      if (media_dir) {
        const std::string ext = sample.media.kind() == MediaKind::Image ? ".ppm" : ".wav";
        save_media(attacked.v_adv, *media_dir / (perturbed_stem(sample.id, variant, alpha) + ext));
      }

      for (const DefenseSpec& defense : cfg.defenses) {
        const DefenseOutcome defended = apply_defense(attacked.v_adv, defense, seed);
        const MediaTensor seen = fit_to_encoder(defended.media, ctx.evaluator);
        SampleResult r;
        r.dataset = cfg.dataset;
        r.sample_id = sample.id;
        r.variant = variant;
        r.alpha = alpha;
        r.defense = to_string(defense);
        r.defense_applied = defended.applied;
        r.alignment_before = before;
        r.alignment_after = alignment(ctx.evaluator, ctx.t_v, seen);
        r.predicted_label = zero_shot_classify(ctx.evaluator, seen, ctx.prototypes);
        r.asr_hit = r.predicted_label == ctx.target_label;
        r.iterations = attacked.trace.iterations_run;
        out.push_back(std::move(r));
      }
    }
  }
  return out;
}

std::string errors_json(const std::vector<SampleError>& errors) {
  nlohmann::ordered_json j = nlohmann::ordered_json::array();
  for (const auto& e : errors) j.push_back({{"sample_id", e.sample_id}, {"error", e.message}});
  return j.dump(2) + "\n";
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  write_file(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

}  // namespace

std::uint64_t sample_seed(std::uint64_t global_seed, const std::string& sample_id) {
  return mix_seed(global_seed, fnv1a(sample_id));
}

std::string perturbed_stem(const std::string& sample_id, Variant variant, double alpha) {
  return sample_id + "_" + std::string(to_string(variant)) + "_" + format_number(alpha);
}

MediaTensor synthetic_sample(const MediaShape& shape, std::uint64_t seed) {
  Rng rng(seed);
  if (shape.kind == MediaKind::Image) {
    const MediaShape coarse_shape = MediaShape::image(shape.channels, 4, 4);
    Vector coarse(coarse_shape.size());
    for (Index i = 0; i < coarse.size(); ++i) coarse(i) = rng.uniform(0.15, 0.85);
    const MediaTensor smooth =
        resize_to(MediaTensor(coarse_shape, std::move(coarse)), shape.height, shape.width);
    Vector data = smooth.data();
    for (Index i = 0; i < data.size(); ++i) data(i) += rng.gaussian(0.0, 0.03);
    return clamp_to_range(shape, std::move(data));
  }

  Vector data = Vector::Zero(shape.size());
  for (int k = 0; k < 4; ++k) {
    const double freq = rng.uniform(100.0, 3000.0);
    const double amp = rng.uniform(0.2, 1.0);
    const double phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
    const double step = 2.0 * std::numbers::pi * freq / MediaTensor::kDefaultSampleRate;
    for (Index i = 0; i < data.size(); ++i) data(i) += amp * std::sin(step * i + phase);
  }
  for (Index i = 0; i < data.size(); ++i) data(i) += rng.gaussian(0.0, 0.05);
  const double peak = data.cwiseAbs().maxCoeff();
  if (peak > 0.0) data *= 0.8 / peak;
  return clamp_to_range(shape, std::move(data));
}

std::vector<CorpusSample> load_corpus(const RunConfig& cfg) {
  std::vector<CorpusSample> samples;
  if (const auto* synth = std::get_if<SyntheticCorpus>(&cfg.corpus)) {
    const std::string prefix = synth->shape.kind == MediaKind::Image ? "img" : "aud";
    for (std::size_t i = 0; i < synth->n; ++i) {
      char id[32];
      std::snprintf(id, sizeof(id), "%s%03zu", prefix.c_str(), i);
      samples.push_back({id, synthetic_sample(synth->shape, mix_seed(synth->seed, i))});
    }
    return samples;
  }
  const auto& dir = std::get<DirectoryCorpus>(cfg.corpus).path;
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.is_regular_file()) files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  for (const auto& file : files) {
    MediaTensor media = load_media(MediaPath::probe(file));
    if (media.shape() != cfg.input_shape) {
      throw Error(ErrorCode::ShapeMismatch, file.string() + " is " + to_string(media.shape()));
    }
    samples.push_back({file.stem().string(), std::move(media)});
  }
  return samples;
}

RunOutcome run(const RunConfig& cfg, const RunOptions& options) {
  const Encoder attacker = make_encoder(cfg.attacker.spec, cfg.input_shape, cfg.attacker.seed);
  const Encoder evaluator = make_encoder(cfg.evaluator.spec, cfg.input_shape, cfg.evaluator.seed);
  TextEncoder text_encoder(cfg.text_encoder.vocab_size, attacker.out_dim(), cfg.text_encoder.seed);
  MediaTensor t_v = transform_target(cfg.transform, cfg.target, cfg.input_shape);
  auto prototypes = label_prototypes(cfg.transform, cfg.labels, evaluator);
  const auto target_label = find_label(cfg.labels, cfg.target);
  if (!target_label) {
    throw Error(ErrorCode::UnmappedLabel, "target '" + cfg.target.key() + "' matches no label");
  }
  Vector crossfire_target = embed(attacker, t_v);
  Vector text_target = embed_text(text_encoder, cfg.target.text);
  const SweepContext ctx{cfg,
                         attacker,
                         evaluator,
                         std::move(text_encoder),
                         std::move(t_v),
                         std::move(prototypes),
                         *target_label,
                         std::move(crossfire_target),
                         std::move(text_target)};

  const std::vector<CorpusSample> corpus = load_corpus(cfg);
  spdlog::info("{}: {} samples, {} variants, {} alphas, {} defense pipelines, {} mode",
               cfg.dataset, corpus.size(), cfg.variants.size(), cfg.alphas.size(),
               cfg.defenses.size(), cfg.white_box() ? "white-box" : "black-box");

  std::optional<std::filesystem::path> media_dir;
  if (options.write_outputs) {
    std::filesystem::create_directories(cfg.output_dir);
    if (cfg.write_media) media_dir = cfg.output_dir;
  }

  std::vector<std::vector<SampleResult>> slots(corpus.size());
  std::vector<std::optional<std::string>> failures(corpus.size());
  std::atomic<std::size_t> next{0};
  const auto worker = [&] {
    for (std::size_t i = next++; i < corpus.size(); i = next++) {
      try {
        slots[i] = process_sample(ctx, corpus[i], media_dir ? &*media_dir : nullptr);
      } catch (const std::exception& e) {
        failures[i] = e.what();
        spdlog::error("{}: {}", corpus[i].id, e.what());
      }
    }
  };

  const unsigned jobs = std::max(1u, std::min<unsigned>(options.jobs, static_cast<unsigned>(corpus.size())));
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned j = 0; j < jobs; ++j) pool.emplace_back(worker);
  }

  RunOutcome outcome;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    if (failures[i]) {
      outcome.errors.push_back({corpus[i].id, *failures[i]});
    } else {
      outcome.results.insert(outcome.results.end(), slots[i].begin(), slots[i].end());
    }
  }
  if (!outcome.results.empty()) outcome.report = build_sweep_report(outcome.results);
  outcome.exit_code = outcome.errors.empty() ? 0 : 2;

  if (options.write_outputs) {
    write_text(cfg.output_dir / "report.csv", outcome.report.to_csv());
    write_text(cfg.output_dir / "report.json", outcome.report.to_json());
    write_text(cfg.output_dir / "samples.csv", samples_csv(outcome.results));
    if (!outcome.errors.empty()) write_text(cfg.output_dir / "errors.json", errors_json(outcome.errors));
  }
  return outcome;
}

std::string samples_csv(const std::vector<SampleResult>& results) {
  std::string out =
      "dataset,sample_id,variant,alpha,defense,defense_applied,alignment_before,alignment_after,"
      "predicted_label,asr_hit,iterations\n";
  for (const auto& r : results) {
    out += r.dataset + "," + r.sample_id + "," + std::string(to_string(r.variant)) + "," +
           format_number(r.alpha) + "," + r.defense + "," + r.defense_applied + "," +
           format_number(r.alignment_before) + "," + format_number(r.alignment_after) + "," +
           std::to_string(r.predicted_label) + "," + (r.asr_hit ? "1" : "0") + "," +
           std::to_string(r.iterations) + "\n";
  }
  return out;
}

}  // namespace crossfire
