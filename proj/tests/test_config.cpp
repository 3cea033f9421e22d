#include <doctest.h>

#include <filesystem>
#include <string>

#include "crossfire/config.hpp"

using namespace crossfire;
namespace fs = std::filesystem;

namespace {

const std::string kMinimal = R"({
  "corpus": {"synthetic": {"n": 2, "seed": 3, "kind": "image", "shape": [3, 32, 32]}},
  "encoder_attacker": {"spec": "patch_conv:16:64:64", "seed": 1},
  "target": {"text": "A huge tiger", "elements": ["tiger"]}
})";

std::string with(const std::string& extra) {
  std::string s = kMinimal;
  s.insert(s.rfind('}'), "," + extra);
  return s;
}

std::string violation_of(const std::string& text) {
  try {
    (void)parse_config_text(text, "/base");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::SchemaViolation);
    return e.what();
  }
  FAIL("expected SchemaViolation");
  return {};
}

}  // namespace

TEST_CASE("minimal config gets the defaults") {
  const RunConfig cfg = parse_config_text(kMinimal, "/base");
  CHECK(cfg.lambda == 0.01);
  CHECK(cfg.max_iter == 3000);
  CHECK(cfg.dataset == "synthetic_image");
  CHECK(cfg.input_shape == MediaShape::image(3, 32, 32));
  CHECK(cfg.white_box());
  CHECK(cfg.variants.size() == 3);
  CHECK(cfg.alphas == default_alphas(MediaKind::Image));
  CHECK(cfg.alphas.back() == 32.0 / 255.0);
  REQUIRE(cfg.defenses.size() == 1);
  CHECK(cfg.defenses[0].empty());
  CHECK(cfg.labels.size() == 10);
  CHECK(cfg.output_dir == fs::path("/base/out"));
  CHECK(std::holds_alternative<ZeroInit>(cfg.delta0));
  CHECK(!cfg.early_stop_loss);
  CHECK(cfg.write_media);
  CHECK(default_alphas(MediaKind::Audio) == std::vector<double>{0, 0.005, 0.01, 0.05, 0.1, 0.5});
}

TEST_CASE("full config") {
  const RunConfig cfg = parse_config_text(with(R"(
    "dataset": "bb", "encoder_evaluator": {"spec": "patch_conv:16:64:64", "seed": 2},
    "variants": ["crossfire"], "alphas": [0, 0.0625], "lambda": 0.02, "max_iter": 10,
    "delta0": {"uniform_in_ball": {"seed": 4}}, "early_stop_loss": 0.1,
    "defenses": ["rotate:uniform:5", "jpeg:50+denoise:3"], "output_dir": "runs/x",
    "global_seed": 9, "write_media": false, "text_encoder": {"vocab_size": 128, "seed": 8})"),
                                          "/base");
  CHECK(cfg.dataset == "bb");
  CHECK(!cfg.white_box());
  CHECK(cfg.evaluator.seed == 2);
  CHECK(cfg.alphas == std::vector<double>{0, 0.0625});
  CHECK(cfg.max_iter == 10);
  CHECK(std::get<UniformInBallInit>(cfg.delta0).seed == 4);
  CHECK(*cfg.early_stop_loss == 0.1);
  REQUIRE(cfg.defenses.size() == 3);
  CHECK(to_string(cfg.defenses[2]) == "jpeg:50+denoise:3");
  CHECK(cfg.output_dir == fs::path("/base/runs/x"));
  CHECK(cfg.global_seed == 9);
  CHECK(!cfg.write_media);
  CHECK(cfg.text_encoder.vocab_size == 128);
}

TEST_CASE("schema violations name the field") {
  CHECK(violation_of(with(R"("epsilon": 0.1)")).find("epsilon") != std::string::npos);
  CHECK(violation_of(with(R"("alphas": [-0.1])")).find("$.alphas[0]") != std::string::npos);
  CHECK(violation_of(with(R"("lambda": 0)")).find("$.lambda") != std::string::npos);
  CHECK(violation_of(with(R"("max_iter": 1.5)")).find("$.max_iter") != std::string::npos);
  CHECK(violation_of(with(R"("variants": ["pgd"])")).find("$.variants[0]") != std::string::npos);
  CHECK(violation_of(with(R"("defenses": ["blur"])")).find("$.defenses[0]") != std::string::npos);
  CHECK(violation_of(with(R"("labels": "multi")")).find("$.target") != std::string::npos);
  CHECK(violation_of("{not json").find("$") != std::string::npos);
  CHECK(violation_of(R"({"corpus": {"synthetic": {"n": 1, "kind": "image", "shape": [3, 32, 32]}},
                        "encoder_attacker": {"spec": "patch_conv:5:8:8"},
                        "target": {"text": "t", "elements": ["tiger"]}})")
            .find("$.encoder_attacker") != std::string::npos);
  CHECK(violation_of(R"({"corpus": {"synthetic": {"n": 1, "kind": "audio", "shape": [64]}},
                        "encoder_attacker": {"spec": "patch_conv:16:8:8"},
                        "target": {"text": "t", "elements": ["tiger"]}, "defenses": ["upsample_x2"]})")
            .find("$.defenses[0]") != std::string::npos);
  CHECK(violation_of(R"({"corpus": {"synthetic": {"n": 1, "kind": "image", "shape": [3, 32, 32], "extra": 1}},
                        "encoder_attacker": {"spec": "identity"},
                        "target": {"text": "t", "elements": ["tiger"]}})")
            .find("$.corpus.synthetic") != std::string::npos);
}

TEST_CASE("missing files") {
  const std::string dir_cfg = R"({"corpus": {"directory": {"path": "nope"}},
    "encoder_attacker": {"spec": "identity"}, "target": {"text": "t", "elements": ["tiger"]}})";
  try {
    (void)parse_config_text(dir_cfg, fs::temp_directory_path());
    FAIL("expected MissingFile");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::MissingFile);
  }
  try {
    (void)parse_config(fs::temp_directory_path() / "crossfire_no_such_config.json");
    FAIL("expected MissingFile");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::MissingFile);
  }
}

TEST_CASE("committed scenario configs parse") {
  for (const char* name : {"scenario_image.json", "scenario_audio.json", "scenario_blackbox.json"}) {
    INFO(name);
    const RunConfig cfg = parse_config(fs::path(CROSSFIRE_FIXTURES_DIR) / name);
    CHECK(cfg.max_iter == 300);
  }
}
