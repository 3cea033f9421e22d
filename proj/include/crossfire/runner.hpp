#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "crossfire/config.hpp"
#include "crossfire/eval.hpp"

namespace crossfire {

struct CorpusSample {
  std::string id;
  MediaTensor media;
};

/// Loads or synthesizes the corpus in a deterministic order.
std::vector<CorpusSample> load_corpus(const RunConfig& cfg);

/// A smooth seeded image (bilinear upsampled coarse grid plus mild noise) or a
/// seeded sum of sinusoids with noise for audio.
MediaTensor synthetic_sample(const MediaShape& shape, std::uint64_t seed);

/// Seed for everything sample-specific, independent of scheduling.
std::uint64_t sample_seed(std::uint64_t global_seed, const std::string& sample_id);

struct SampleError {
  std::string sample_id;
  std::string message;
};

struct RunOptions {
  unsigned jobs = 1;
  /// Write report.csv, report.json, samples.csv and media under cfg.output_dir.
  bool write_outputs = true;
};

struct RunOutcome {
  std::vector<SampleResult> results;  // sample order, then variant, alpha, defense
  std::vector<SampleError> errors;
  SweepReport report;
  int exit_code = 0;  // 0 ok, 2 partial failure
};

/// Attacks every sample for every variant and alpha with the attacker
/// encoder, then evaluates each configured defense pipeline with the
/// evaluator encoder. Output is identical for any number of jobs.
RunOutcome run(const RunConfig& cfg, const RunOptions& options = {});

/// File name stem for a perturbed sample: <sample>_<variant>_<alpha>.
std::string perturbed_stem(const std::string& sample_id, Variant variant, double alpha);

/// Per-sample result table (one row per SampleResult).
std::string samples_csv(const std::vector<SampleResult>& results);

}  // namespace crossfire
