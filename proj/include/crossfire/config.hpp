#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "crossfire/attack.hpp"
#include "crossfire/defenses.hpp"
#include "crossfire/transforms.hpp"

namespace crossfire {

struct SyntheticCorpus {
  std::size_t n = 0;
  std::uint64_t seed = 0;
  MediaShape shape;
};

/// Every PPM/WAV file in the directory (by magic bytes), sorted by file name.
struct DirectoryCorpus {
  std::filesystem::path path;
};

using CorpusSpec = std::variant<SyntheticCorpus, DirectoryCorpus>;

struct EncoderChoice {
  EncoderSpec spec = PatchConvSpec{};
  std::uint64_t seed = 1;
  friend bool operator==(const EncoderChoice&, const EncoderChoice&) = default;
};

struct TextEncoderChoice {
  Index vocab_size = 4096;
  std::uint64_t seed = 3;
};

struct RunConfig {
  std::string dataset;
  CorpusSpec corpus;
  MediaShape input_shape;
  EncoderChoice attacker;
  EncoderChoice evaluator;
  TextEncoderChoice text_encoder;
  TargetedInput target;
  TransformProvider transform = ProceduralProvider{};
  std::vector<TargetedInput> labels;
  std::vector<Variant> variants;
  std::vector<double> alphas;
  double lambda = 0.01;
  int max_iter = 3000;
  DeltaInit delta0 = ZeroInit{};
  std::optional<double> early_stop_loss;
  /// Always starts with the empty ("none") pipeline.
  std::vector<DefenseSpec> defenses;
  std::filesystem::path output_dir;
  std::uint64_t global_seed = 0;
  bool write_media = true;

  bool white_box() const { return attacker == evaluator; }
};

/// Parses a JSON run config; relative paths resolve against `base_dir`.
/// Unknown keys, wrong types and out-of-range values raise SchemaViolation
/// naming the offending field path; missing files raise MissingFile.
RunConfig parse_config_text(std::string_view json_text, const std::filesystem::path& base_dir);
RunConfig parse_config(const std::filesystem::path& path);

/// Alpha grid used when a config omits "alphas".
std::vector<double> default_alphas(MediaKind kind);

}  // namespace crossfire
