#include "crossfire/config.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include <json.hpp>

namespace crossfire {

namespace {

using nlohmann::json;

[[noreturn]] void violation(const std::string& path, const std::string& what) {
  throw Error(ErrorCode::SchemaViolation, path + ": " + what);
}

// Strict view over a JSON object: every key must be consumed or declared.
class Fields {
 public:
  Fields(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) violation(path_, "expected an object");
  }

  void allow(std::initializer_list<std::string_view> keys) const {
    for (const auto& [key, value] : j_.items()) {
      if (std::find(keys.begin(), keys.end(), key) == keys.end()) {
        violation(child(key), "unknown key \"" + key + "\"");
      }
    }
  }

  bool has(const std::string& key) const { return j_.contains(key) && !j_.at(key).is_null(); }

  const json& required(const std::string& key) const {
    if (!j_.contains(key)) violation(child(key), "missing required key");
    return j_.at(key);
  }

  std::string child(const std::string& key) const { return path_ + "." + key; }

  std::string string(const std::string& key) const {
    const json& v = required(key);
    if (!v.is_string()) violation(child(key), "expected a string");
    return v.get<std::string>();
  }

  double number(const std::string& key) const {
    const json& v = required(key);
    if (!v.is_number()) violation(child(key), "expected a number");
    return v.get<double>();
  }

  std::int64_t integer(const std::string& key) const {
    const json& v = required(key);
    if (!v.is_number_integer()) violation(child(key), "expected an integer");
    return v.get<std::int64_t>();
  }

  std::uint64_t seed(const std::string& key) const {
    const std::int64_t v = integer(key);
    if (v < 0) violation(child(key), "seed must be non-negative");
    return static_cast<std::uint64_t>(v);
  }

  bool boolean(const std::string& key) const {
    const json& v = required(key);
    if (!v.is_boolean()) violation(child(key), "expected a boolean");
    return v.get<bool>();
  }

 private:
  const json& j_;
  std::string path_;
};

// Objects of the form {"<tag>": {...}} select one alternative.
std::pair<std::string, const json*> tagged(const json& j, const std::string& path) {
  if (!j.is_object() || j.size() != 1) violation(path, "expected an object with exactly one key");
  const auto it = j.begin();
  return {it.key(), &it.value()};
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  const std::filesystem::path path(p);
  return path.is_absolute() ? path : base / path;
}

MediaShape parse_shape(const Fields& f, const std::string& key, const std::string& kind) {
  const json& v = f.required(key);
  const std::string path = f.child(key);
  if (!v.is_array()) violation(path, "expected an array of positive integers");
  std::vector<Index> dims;
  for (const auto& d : v) {
    if (!d.is_number_integer() || d.get<std::int64_t>() < 1) {
      violation(path, "expected an array of positive integers");
    }
    dims.push_back(static_cast<Index>(d.get<std::int64_t>()));
  }
  try {
    if (kind == "image" && dims.size() == 3) return MediaShape::image(dims[0], dims[1], dims[2]);
    if (kind == "audio" && dims.size() == 1) return MediaShape::audio(dims[0]);
  } catch (const Error& e) {
    violation(path, e.what());
  }
  violation(path, "image shape is [C,H,W] with C in {1,3}; audio shape is [N]");
}

EncoderChoice parse_encoder(const json& j, const std::string& path) {
  Fields f(j, path);
  f.allow({"spec", "seed"});
  EncoderChoice choice;
  try {
    choice.spec = parse_encoder_spec(f.string("spec"));
  } catch (const Error& e) {
    violation(f.child("spec"), e.what());
  }
  choice.seed = f.has("seed") ? f.seed("seed") : 1;
  return choice;
}

TargetedInput parse_target(const json& j, const std::string& path) {
  Fields f(j, path);
  f.allow({"text", "elements"});
  const std::string text = f.string("text");
  const json& elements = f.required("elements");
  if (!elements.is_array()) violation(f.child("elements"), "expected an array of strings");
  std::vector<std::string> items;
  for (const auto& e : elements) {
    if (!e.is_string()) violation(f.child("elements"), "expected an array of strings");
    items.push_back(e.get<std::string>());
  }
  try {
    return TargetedInput::make(text, std::move(items));
  } catch (const Error& e) {
    violation(f.child("elements"), e.what());
  }
}

MediaShape directory_shape(const std::filesystem::path& dir, const std::string& path) {
  if (!std::filesystem::is_directory(dir)) {
    throw Error(ErrorCode::MissingFile, path + ": corpus directory " + dir.string() + " not found");
  }
  std::optional<MediaShape> shape;
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.is_regular_file()) files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  for (const auto& file : files) {
    MediaTensor t = [&] {
      try {
        return load_media(MediaPath::probe(file));
      } catch (const Error& e) {
        violation(path, file.string() + ": " + e.what());
      }
    }();
    if (shape && *shape != t.shape()) {
      violation(path, file.string() + " is " + to_string(t.shape()) + " but the corpus is " +
                          to_string(*shape));
    }
    shape = t.shape();
  }
  if (!shape) violation(path, "corpus directory " + dir.string() + " holds no media files");
  return *shape;
}

}  // namespace

std::vector<double> default_alphas(MediaKind kind) {
  if (kind == MediaKind::Image) {
    return {0.0, 1.0 / 255.0, 4.0 / 255.0, 8.0 / 255.0, 16.0 / 255.0, 32.0 / 255.0};
  }
  return {0.0, 0.005, 0.01, 0.05, 0.1, 0.5};
}

RunConfig parse_config_text(std::string_view json_text, const std::filesystem::path& base_dir) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    violation("$", std::string("invalid JSON: ") + e.what());
  }
  Fields top(root, "$");
  top.allow({"dataset", "corpus", "encoder_attacker", "encoder_evaluator", "text_encoder",
             "target", "transform", "labels", "variants", "alphas", "lambda", "max_iter",
             "delta0", "early_stop_loss", "defenses", "output_dir", "global_seed",
             "write_media"});

  RunConfig cfg;

  {
    const auto [tag, body] = tagged(top.required("corpus"), "$.corpus");
    const std::string path = "$.corpus." + tag;
    if (tag == "synthetic") {
      Fields f(*body, path);
      f.allow({"n", "seed", "kind", "shape"});
      const std::int64_t n = f.integer("n");
      if (n < 1) violation(f.child("n"), "must be >= 1");
      const std::string kind = f.string("kind");
      if (kind != "image" && kind != "audio") violation(f.child("kind"), "expected image or audio");
      SyntheticCorpus corpus{static_cast<std::size_t>(n), f.has("seed") ? f.seed("seed") : 0,
                             parse_shape(f, "shape", kind)};
      cfg.input_shape = corpus.shape;
      cfg.corpus = corpus;
      cfg.dataset = "synthetic_" + kind;
    } else if (tag == "directory") {
      Fields f(*body, path);
      f.allow({"path"});
      const auto dir = resolve(base_dir, f.string("path"));
      cfg.input_shape = directory_shape(dir, f.child("path"));
      cfg.corpus = DirectoryCorpus{dir};
      cfg.dataset = dir.filename().string();
    } else {
      violation("$.corpus", "unknown corpus kind \"" + tag + "\"");
    }
  }
  if (top.has("dataset")) cfg.dataset = top.string("dataset");
  if (cfg.dataset.empty() || cfg.dataset.find(',') != std::string::npos) {
    violation("$.dataset", "must be non-empty and free of commas");
  }

  cfg.attacker = parse_encoder(top.required("encoder_attacker"), "$.encoder_attacker");
  cfg.evaluator = top.has("encoder_evaluator")
                      ? parse_encoder(top.required("encoder_evaluator"), "$.encoder_evaluator")
                      : cfg.attacker;

  if (top.has("text_encoder")) {
    Fields f(top.required("text_encoder"), "$.text_encoder");
    f.allow({"vocab_size", "seed"});
    if (f.has("vocab_size")) {
      const std::int64_t v = f.integer("vocab_size");
      if (v < 1) violation(f.child("vocab_size"), "must be >= 1");
      cfg.text_encoder.vocab_size = static_cast<Index>(v);
    }
    if (f.has("seed")) cfg.text_encoder.seed = f.seed("seed");
  }

  cfg.target = parse_target(top.required("target"), "$.target");

  if (top.has("transform")) {
    const auto [tag, body] = tagged(top.required("transform"), "$.transform");
    const std::string path = "$.transform." + tag;
    if (tag == "procedural") {
      Fields f(*body, path);
      f.allow({"seed"});
      cfg.transform = ProceduralProvider{f.has("seed") ? f.seed("seed") : 7};
    } else if (tag == "file_based") {
      if (!body->is_object()) violation(path, "expected an object of label -> path");
      FileBasedProvider provider;
      for (const auto& [label, value] : body->items()) {
        if (!value.is_string()) violation(path + "." + label, "expected a path string");
        const auto file = resolve(base_dir, value.get<std::string>());
        if (!std::filesystem::exists(file)) {
          throw Error(ErrorCode::MissingFile, path + "." + label + ": " + file.string());
        }
        provider.files.emplace(label, file);
      }
      cfg.transform = std::move(provider);
    } else {
      violation("$.transform", "unknown transform \"" + tag + "\"");
    }
  }

  if (top.has("labels")) {
    const json& labels = top.required("labels");
    if (labels.is_string()) {
      const auto name = labels.get<std::string>();
      if (name == "single") {
        cfg.labels = single_element_labels();
      } else if (name == "multi") {
        cfg.labels = multi_element_labels();
      } else {
        violation("$.labels", "expected \"single\", \"multi\" or an array of labels");
      }
    } else if (labels.is_array() && !labels.empty()) {
      for (std::size_t i = 0; i < labels.size(); ++i) {
        cfg.labels.push_back(parse_target(labels[i], "$.labels[" + std::to_string(i) + "]"));
      }
    } else {
      violation("$.labels", "expected \"single\", \"multi\" or a non-empty array of labels");
    }
  } else {
    cfg.labels = cfg.target.elements.size() == 1 ? single_element_labels() : multi_element_labels();
  }
  std::set<std::string> label_texts;
  for (const auto& l : cfg.labels) {
    if (!label_texts.insert(l.text).second) violation("$.labels", "duplicate label \"" + l.text + "\"");
  }
  if (!find_label(cfg.labels, cfg.target)) {
    violation("$.target", "no label shares the target's elements \"" + cfg.target.key() + "\"");
  }

  if (top.has("variants")) {
    const json& v = top.required("variants");
    if (!v.is_array() || v.empty()) violation("$.variants", "expected a non-empty array");
    for (std::size_t i = 0; i < v.size(); ++i) {
      const std::string path = "$.variants[" + std::to_string(i) + "]";
      if (!v[i].is_string()) violation(path, "expected a string");
      try {
        const Variant parsed = parse_variant(v[i].get<std::string>());
        if (std::find(cfg.variants.begin(), cfg.variants.end(), parsed) != cfg.variants.end()) {
          violation(path, "duplicate variant");
        }
        cfg.variants.push_back(parsed);
      } catch (const Error& e) {
        if (e.code() == ErrorCode::SchemaViolation) throw;
        violation(path, e.what());
      }
    }
  } else {
    cfg.variants = {Variant::CrossFire, Variant::CrossFireUnnormalized, Variant::DirectCrossModal};
  }

  if (top.has("alphas")) {
    const json& a = top.required("alphas");
    if (!a.is_array() || a.empty()) violation("$.alphas", "expected a non-empty array");
    for (std::size_t i = 0; i < a.size(); ++i) {
      const std::string path = "$.alphas[" + std::to_string(i) + "]";
      if (!a[i].is_number()) violation(path, "expected a number");
      const double alpha = a[i].get<double>();
      if (!(alpha >= 0.0) || !std::isfinite(alpha)) violation(path, "alpha must be finite and >= 0");
      if (std::find(cfg.alphas.begin(), cfg.alphas.end(), alpha) != cfg.alphas.end()) {
        violation(path, "duplicate alpha");
      }
      cfg.alphas.push_back(alpha);
    }
  } else {
    cfg.alphas = default_alphas(cfg.input_shape.kind);
  }

  if (top.has("lambda")) {
    cfg.lambda = top.number("lambda");
    if (!(cfg.lambda > 0.0) || !std::isfinite(cfg.lambda)) violation("$.lambda", "must be > 0");
  }
  if (top.has("max_iter")) {
    const std::int64_t m = top.integer("max_iter");
    if (m < 1 || m > 100'000'000) violation("$.max_iter", "must be in [1, 1e8]");
    cfg.max_iter = static_cast<int>(m);
  }

  if (top.has("delta0")) {
    const json& d = top.required("delta0");
    if (d.is_string() && d.get<std::string>() == "zeros") {
      cfg.delta0 = ZeroInit{};
    } else {
      const auto [tag, body] = tagged(d, "$.delta0");
      if (tag != "uniform_in_ball") violation("$.delta0", "expected \"zeros\" or {\"uniform_in_ball\": {...}}");
      Fields f(*body, "$.delta0.uniform_in_ball");
      f.allow({"seed"});
      cfg.delta0 = UniformInBallInit{f.has("seed") ? f.seed("seed") : 0};
    }
  }

  if (top.has("early_stop_loss")) {
    cfg.early_stop_loss = top.number("early_stop_loss");
    if (!(*cfg.early_stop_loss >= 0.0)) violation("$.early_stop_loss", "must be >= 0");
  }

  cfg.defenses.push_back(DefenseSpec{});
  if (top.has("defenses")) {
    const json& d = top.required("defenses");
    if (!d.is_array()) violation("$.defenses", "expected an array of defense strings");
    for (std::size_t i = 0; i < d.size(); ++i) {
      const std::string path = "$.defenses[" + std::to_string(i) + "]";
      if (!d[i].is_string()) violation(path, "expected a string");
      DefenseSpec spec;
      try {
        spec = parse_defense_spec(d[i].get<std::string>());
      } catch (const Error& e) {
        violation(path, e.what());
      }
      if (std::find(cfg.defenses.begin(), cfg.defenses.end(), spec) != cfg.defenses.end()) {
        violation(path, "duplicate defense pipeline");
      }
      const bool image_only = std::any_of(spec.steps.begin(), spec.steps.end(), [](const auto& s) {
        return !std::holds_alternative<SmoothDenoise>(s);
      });
      if (image_only && cfg.input_shape.kind == MediaKind::Audio) {
        violation(path, "only denoise applies to audio");
      }
      cfg.defenses.push_back(std::move(spec));
    }
  }

  cfg.output_dir = resolve(base_dir, top.has("output_dir") ? top.string("output_dir") : "out");
  if (top.has("global_seed")) cfg.global_seed = top.seed("global_seed");
  if (top.has("write_media")) cfg.write_media = top.boolean("write_media");

  // Encoders must accept the corpus shape; surface a bad spec as a config error.
  try {
    (void)make_encoder(cfg.attacker.spec, cfg.input_shape, cfg.attacker.seed);
  } catch (const Error& e) {
    violation("$.encoder_attacker", e.what());
  }
  try {
    (void)make_encoder(cfg.evaluator.spec, cfg.input_shape, cfg.evaluator.seed);
  } catch (const Error& e) {
    violation("$.encoder_evaluator", e.what());
  }
  return cfg;
}

RunConfig parse_config(const std::filesystem::path& path) {
  const auto bytes = read_file(path);
  return parse_config_text(std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()),
                           path.parent_path().empty() ? std::filesystem::path(".") : path.parent_path());
}

}  // namespace crossfire
