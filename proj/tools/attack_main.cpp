#include <cstdlib>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "crossfire/gradcheck.hpp"
#include "crossfire/runner.hpp"

namespace {

void configure_logging() {
  auto logger = spdlog::stderr_color_mt("attack");
  spdlog::set_default_logger(logger);
  spdlog::set_level(spdlog::level::info);
  if (const char* level = std::getenv("ATTACK_LOG")) {
    const std::string name(level);
    if (name == "error") {
      spdlog::set_level(spdlog::level::err);
    } else if (name == "debug") {
      spdlog::set_level(spdlog::level::debug);
    } else if (name != "info") {
      spdlog::warn("ATTACK_LOG={} not recognized; using info", name);
    }
  }
}

int run_command(const std::string& config_path, unsigned jobs, const std::string& out_dir) {
  crossfire::RunConfig cfg;
  try {
    cfg = crossfire::parse_config(config_path);
  } catch (const crossfire::Error& e) {
    spdlog::error("config: {}", e.what());
    return 1;
  }
  if (!out_dir.empty()) cfg.output_dir = out_dir;
  try {
    const crossfire::RunOutcome outcome = crossfire::run(cfg, {jobs, true});
    spdlog::info("wrote {} report rows to {}", outcome.report.rows.size(), cfg.output_dir.string());
    if (!outcome.errors.empty()) {
      spdlog::error("{} sample(s) failed; see errors.json", outcome.errors.size());
    }
    return outcome.exit_code;
  } catch (const crossfire::Error& e) {
    spdlog::error("{}", e.what());
    return 1;
  }
}

int gradcheck_command(const std::string& spec_text, std::uint64_t seed, const std::string& modality,
                      int cases) {
  try {
    const auto spec = crossfire::parse_encoder_spec(spec_text);
    const auto shape = modality == "audio" ? crossfire::MediaShape::audio(4096)
                                           : crossfire::MediaShape::image(3, 32, 32);
    const crossfire::Encoder encoder = crossfire::make_encoder(spec, shape, seed);
    const auto report = crossfire::check_encoder_gradient(encoder, cases, seed);
    const bool ok = report.max_rel_error < 1e-4;
    std::cout << crossfire::to_string(spec) << " seed=" << seed << " input="
              << crossfire::to_string(shape) << " cases=" << report.cases
              << " probes=" << report.probes << " max_rel_error=" << report.max_rel_error << " "
              << (ok ? "PASS" : "FAIL") << "\n";
    return ok ? 0 : 2;
  } catch (const crossfire::Error& e) {
    spdlog::error("{}", e.what());
    return 1;
  }
}

int defend_command(const std::string& input, const std::string& defense_text, std::string output,
                   std::uint64_t seed) {
  try {
    const auto spec = crossfire::parse_defense_spec(defense_text);
    const auto media = crossfire::load_media(crossfire::MediaPath::probe(input));
    const auto outcome = crossfire::apply_defense(media, spec, seed);
    if (output.empty()) {
      const std::filesystem::path in(input);
      const std::string ext = media.kind() == crossfire::MediaKind::Image ? ".ppm" : ".wav";
      output = (in.parent_path() / (in.stem().string() + "_defended" + ext)).string();
    }
    crossfire::save_media(outcome.media, output);
    std::cout << outcome.applied << " -> " << output << "\n";
    return 0;
  } catch (const crossfire::Error& e) {
    spdlog::error("{}", e.what());
    return 1;
  }
}

}  // namespace

int main(int argc, char** argv) {
  configure_logging();
  CLI::App app{"Embedding-alignment adversarial attacks, metrics and defenses"};
  app.require_subcommand(1);

  std::string config_path;
  unsigned jobs = 1;
  std::string out_dir;
  auto* run = app.add_subcommand("run", "Run an attack/evaluation sweep from a JSON config");
  run->add_option("--config", config_path, "Run config (JSON)")->required()->check(CLI::ExistingFile);
  run->add_option("--jobs", jobs, "Worker threads")->check(CLI::Range(1u, 1024u));
  run->add_option("--out", out_dir, "Override the config's output directory");

  std::string encoder_spec;
  std::uint64_t seed = 0;
  std::string modality = "image";
  int cases = 100;
  auto* grad = app.add_subcommand("gradcheck", "Check an encoder's VJP against finite differences");
  grad->add_option("--encoder", encoder_spec, "identity | random_projection:D | patch_conv:P:H:D")
      ->required();
  grad->add_option("--seed", seed, "Encoder seed")->required();
  grad->add_option("--modality", modality, "image (3x32x32) or audio (4096)")
      ->check(CLI::IsMember({"image", "audio"}));
  grad->add_option("--cases", cases, "Seeded cases")->check(CLI::Range(1, 100000));

  std::string input;
  std::string defense;
  std::string output;
  std::uint64_t defend_seed = 0;
  auto* defend = app.add_subcommand("defend", "Apply a defense pipeline to a PPM or WAV file");
  defend->add_option("--input", input, "Media file")->required()->check(CLI::ExistingFile);
  defend->add_option("--defense", defense, "e.g. jpeg:75, rotate:uniform:5, upsample_x2+denoise:3")
      ->required();
  defend->add_option("--output", output, "Output file");
  defend->add_option("--seed", defend_seed, "Seed for drawn parameters");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  if (*run) return run_command(config_path, jobs, out_dir);
  if (*grad) return gradcheck_command(encoder_spec, seed, modality, cases);
  return defend_command(input, defense, output, defend_seed);
}
