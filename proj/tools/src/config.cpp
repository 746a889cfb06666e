#include "aamsupcon_cli/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "aamsupcon/errors.hpp"

namespace aamsupcon::cli {

namespace {

namespace pt = boost::property_tree;

[[noreturn]] void fail(const std::string& section, const std::string& key, const std::string& why) {
  throw Error(ErrorCode::kConfigError, "[" + section + "] " + key + ": " + why);
}

std::string trim(std::string s) {
  const auto first = s.find_first_not_of(" \t");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> items;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) items.push_back(trim(item));
  if (items.size() == 1 && items[0].empty()) items.clear();
  return items;
}

template <typename T>
bool parse_number(const std::string& text, T& out) {
  if (text.empty() || text[0] == '+') return false;
  if constexpr (std::is_unsigned_v<T>) {
    if (text[0] == '-') return false;
  }
  const char* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, out);
  return ec == std::errc() && ptr == end;
}

class Reader {
 public:
  explicit Reader(const pt::ptree& root) : root_(root) {}

  std::optional<std::string> raw(const std::string& section, const std::string& key) {
    seen_.insert(section + "." + key);
    const auto sec = root_.get_child_optional(section);
    if (!sec) return std::nullopt;
    const auto value = sec->get_optional<std::string>(key);
    if (!value) return std::nullopt;
    return trim(*value);
  }

  template <typename T>
  void number(const std::string& section, const std::string& key, T& out) {
    const auto text = raw(section, key);
    if (!text) return;
    T value{};
    if (!parse_number(*text, value)) {
      fail(section, key, std::string("expected ") +
                             (std::is_floating_point_v<T> ? "a number" : "a non-negative integer") +
                             ", got '" + *text + "'");
    }
    if constexpr (std::is_floating_point_v<T>) {
      if (!std::isfinite(value)) fail(section, key, "must be finite");
    }
    out = value;
  }

  void flag(const std::string& section, const std::string& key, bool& out) {
    const auto text = raw(section, key);
    if (!text) return;
    if (*text == "true" || *text == "1" || *text == "yes") out = true;
    else if (*text == "false" || *text == "0" || *text == "no") out = false;
    else fail(section, key, "expected true or false, got '" + *text + "'");
  }

  template <typename T>
  void list(const std::string& section, const std::string& key, std::vector<T>& out) {
    const auto text = raw(section, key);
    if (!text) return;
    std::vector<T> values;
    for (const std::string& item : split_list(*text)) {
      T v{};
      if (!parse_number(item, v)) fail(section, key, "'" + item + "' is not a non-negative integer");
      values.push_back(v);
    }
    out = std::move(values);
  }

  template <typename Fn>
  void choice(const std::string& section, const std::string& key, Fn&& parse) {
    const auto text = raw(section, key);
    if (!text) return;
    try {
      parse(*text);
    } catch (const Error&) {
      fail(section, key, "unrecognized value '" + *text + "'");
    }
  }

  void reject_unknown() const {
    for (const auto& [section, body] : root_) {
      if (body.empty() && !body.data().empty()) fail("<top>", section, "keys must live inside a [section]");
      bool known_section = false;
      for (const auto& s : seen_) known_section = known_section || s.rfind(section + ".", 0) == 0;
      if (!known_section) fail(section, "*", "unknown section");
      for (const auto& [key, value] : body) {
        if (!seen_.contains(section + "." + key)) fail(section, key, "unknown key");
      }
    }
  }

 private:
  const pt::ptree& root_;
  std::set<std::string> seen_;
};

void check(bool ok, const std::string& section, const std::string& key, const std::string& why) {
  if (!ok) fail(section, key, why);
}

void validate(const Config& c) {
  check(c.data.num_speakers >= 2, "data", "num_speakers", "must be >= 2");
  check(c.data.utterances_per_speaker >= 2, "data", "utterances_per_speaker", "must be >= 2");
  check(c.data.feature_dim >= 2, "data", "feature_dim", "must be >= 2");
  check(c.data.spread >= 0.0, "data", "spread", "must be >= 0");

  for (std::size_t w : c.train.dims.encoder_hidden) check(w >= 1, "model", "encoder_hidden", "widths must be >= 1");
  check(c.train.dims.projection_hidden >= 1, "model", "projection_hidden", "must be >= 1");
  check(c.train.dims.output >= 2, "model", "output", "must be >= 2");

  check(c.train.temperature > 0.0, "loss", "temperature", "must be > 0");
  check(c.train.margin >= 0.0 && c.train.margin < std::numbers::pi / 2, "loss", "margin", "must lie in [0, pi/2)");
  check(c.train.scale > 0.0, "loss", "scale", "must be > 0");
  check(c.train.loss.supcon_weight >= 0.0, "loss", "lambda", "must be >= 0");

  check(c.train.learning_rate >= 0.0, "train", "learning_rate", "must be >= 0");
  check(c.train.momentum >= 0.0 && c.train.momentum < 1.0, "train", "momentum", "must lie in [0, 1)");
  check(c.train.batch_speakers >= 1, "train", "batch_speakers", "must be >= 1");
  check(c.train.views_per_speaker >= 1, "train", "views_per_speaker", "must be >= 1");
  check(c.train.augment.noise_stddev >= 0.0, "augment", "noise_stddev", "must be >= 0");

  check(c.eval.holdout_per_speaker == 0 || c.eval.holdout_per_speaker >= 2, "eval", "holdout_per_speaker",
        "must be 0 (evaluate on the training utterances) or >= 2");
  check(c.eval.trials_per_speaker >= 1, "eval", "trials_per_speaker", "must be >= 1");
  check(c.eval.dcf.p_target > 0.0 && c.eval.dcf.p_target < 1.0, "eval", "p_target", "must lie in (0, 1)");
  check(c.eval.dcf.c_miss > 0.0, "eval", "c_miss", "must be > 0");
  check(c.eval.dcf.c_fa > 0.0, "eval", "c_fa", "must be > 0");

  check(c.gradcheck.batches >= 1, "gradcheck", "batches", "must be >= 1");
  check(c.gradcheck.step > 0.0, "gradcheck", "step", "must be > 0");
  check(c.gradcheck.tolerance > 0.0, "gradcheck", "tolerance", "must be > 0");
  check(c.gradcheck.model_tolerance > 0.0, "gradcheck", "model_tolerance", "must be > 0");

  check(!c.sweep.sizes.empty(), "sweep", "sizes", "must list at least one batch size");
  for (std::size_t s : c.sweep.sizes) check(s >= 1, "sweep", "sizes", "sizes must be >= 1");
  check(!c.sweep.seeds.empty(), "sweep", "seeds", "must list at least one seed");
}

}  // namespace

Config parse_config(std::istream& is) {
  pt::ptree root;
  try {
    pt::read_ini(is, root);
  } catch (const pt::ini_parser_error& e) {
    throw Error(ErrorCode::kConfigError, "line " + std::to_string(e.line()) + ": " + e.message());
  }

  Config c;
  Reader r(root);

  r.number("data", "num_speakers", c.data.num_speakers);
  r.number("data", "utterances_per_speaker", c.data.utterances_per_speaker);
  r.number("data", "feature_dim", c.data.feature_dim);
  r.number("data", "spread", c.data.spread);
  r.number("data", "seed", c.data.seed);

  r.list("model", "encoder_hidden", c.train.dims.encoder_hidden);
  r.number("model", "projection_hidden", c.train.dims.projection_hidden);
  r.number("model", "output", c.train.dims.output);
  r.choice("model", "head_input", [&](const std::string& v) { c.train.dims.head_input = parse_head_input(v); });

  r.choice("loss", "kind", [&](const std::string& v) { c.train.loss.kind = parse_loss_kind(v); });
  r.number("loss", "temperature", c.train.temperature);
  r.number("loss", "margin", c.train.margin);
  r.number("loss", "scale", c.train.scale);
  r.number("loss", "lambda", c.train.loss.supcon_weight);
  r.choice("loss", "convention", [&](const std::string& v) { c.train.loss.convention = parse_convention(v); });

  r.number("train", "learning_rate", c.train.learning_rate);
  r.number("train", "momentum", c.train.momentum);
  r.number("train", "steps", c.train.steps);
  r.number("train", "batch_speakers", c.train.batch_speakers);
  r.number("train", "views_per_speaker", c.train.views_per_speaker);
  r.number("train", "seed", c.train.seed);
  r.flag("train", "resample_batches", c.train.resample_batches);

  r.number("augment", "noise_stddev", c.train.augment.noise_stddev);
  std::size_t mask_max = 0;
  if (r.raw("augment", "mask_max")) {
    r.number("augment", "mask_max", mask_max);
    c.train.augment.mask_max = mask_max;
  }

  r.number("eval", "holdout_per_speaker", c.eval.holdout_per_speaker);
  r.number("eval", "trials_per_speaker", c.eval.trials_per_speaker);
  r.number("eval", "seed", c.eval.seed);
  r.number("eval", "p_target", c.eval.dcf.p_target);
  r.number("eval", "c_miss", c.eval.dcf.c_miss);
  r.number("eval", "c_fa", c.eval.dcf.c_fa);
  r.choice("eval", "space", [&](const std::string& v) {
    if (v == "projection") c.eval.space = EmbeddingSpace::kProjection;
    else if (v == "encoder") c.eval.space = EmbeddingSpace::kEncoder;
    else throw Error(ErrorCode::kConfigError, v);
  });

  r.number("gradcheck", "batches", c.gradcheck.batches);
  r.number("gradcheck", "step", c.gradcheck.step);
  r.number("gradcheck", "tolerance", c.gradcheck.tolerance);
  r.number("gradcheck", "model_tolerance", c.gradcheck.model_tolerance);
  r.number("gradcheck", "seed", c.gradcheck.seed);

  r.list("sweep", "sizes", c.sweep.sizes);
  r.list("sweep", "seeds", c.sweep.seeds);

  r.reject_unknown();
  validate(c);
  return c;
}

Config load_config(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw Error(ErrorCode::kIoError, "cannot open config " + path.string());
  return parse_config(is);
}

void override_seed(Config& config, std::uint64_t seed) {
  config.data.seed = seed;
  config.train.seed = seed;
  config.eval.seed = seed;
  config.gradcheck.seed = seed;
  config.sweep.seeds = {seed};
}

nlohmann::ordered_json config_to_json(const Config& c) {
  using nlohmann::ordered_json;
  ordered_json j;
  j["data"] = {{"num_speakers", c.data.num_speakers},
               {"utterances_per_speaker", c.data.utterances_per_speaker},
               {"feature_dim", c.data.feature_dim},
               {"spread", c.data.spread},
               {"seed", c.data.seed}};
  j["model"] = {{"encoder_hidden", c.train.dims.encoder_hidden},
                {"projection_hidden", c.train.dims.projection_hidden},
                {"output", c.train.dims.output},
                {"head_input", head_input_name(c.train.dims.head_input)}};
  j["loss"] = {{"kind", loss_kind_name(c.train.loss.kind)},
               {"temperature", c.train.temperature},
               {"margin", c.train.margin},
               {"scale", c.train.scale},
               {"lambda", c.train.loss.supcon_weight},
               {"convention", convention_name(c.train.loss.convention)}};
  j["train"] = {{"learning_rate", c.train.learning_rate},
                {"momentum", c.train.momentum},
                {"steps", c.train.steps},
                {"batch_speakers", c.train.batch_speakers},
                {"views_per_speaker", c.train.views_per_speaker},
                {"seed", c.train.seed},
                {"resample_batches", c.train.resample_batches}};
  j["augment"] = {{"noise_stddev", c.train.augment.noise_stddev}};
  if (c.train.augment.mask_max) j["augment"]["mask_max"] = *c.train.augment.mask_max;
  else j["augment"]["mask_max"] = nullptr;
  j["eval"] = {{"holdout_per_speaker", c.eval.holdout_per_speaker},
               {"trials_per_speaker", c.eval.trials_per_speaker},
               {"seed", c.eval.seed},
               {"p_target", c.eval.dcf.p_target},
               {"c_miss", c.eval.dcf.c_miss},
               {"c_fa", c.eval.dcf.c_fa},
               {"space", c.eval.space == EmbeddingSpace::kProjection ? "projection" : "encoder"}};
  j["gradcheck"] = {{"batches", c.gradcheck.batches},
                    {"step", c.gradcheck.step},
                    {"tolerance", c.gradcheck.tolerance},
                    {"model_tolerance", c.gradcheck.model_tolerance},
                    {"seed", c.gradcheck.seed}};
  j["sweep"] = {{"sizes", c.sweep.sizes}, {"seeds", c.sweep.seeds}};
  return j;
}

}  // namespace aamsupcon::cli
