#include "aamsupcon_cli/cli.hpp"

#include <algorithm>
#include <array>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>

#include <openssl/evp.h>

#include "CLI11.hpp"
#include "aamsupcon/eval.hpp"
#include "aamsupcon/geometry.hpp"
#include "aamsupcon/losses.hpp"
#include "aamsupcon/model.hpp"
#include "aamsupcon/synthdata.hpp"
#include "aamsupcon/training.hpp"
#include "aamsupcon_cli/config.hpp"

#ifndef AAMSUPCON_VERSION
#define AAMSUPCON_VERSION "0.0.0"
#endif

namespace aamsupcon::cli {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

// Reference row of the batch-size study at full scale (CN-Celeb, ECAPA-TDNN).
constexpr std::size_t kAnchorBatch = 128;
constexpr double kAnchorEerPercent = 13.64;
constexpr double kAnchorMinDcf = 0.71;

struct Options {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out_dir;
  std::string dataset;
  std::string checkpoint;
  std::vector<std::size_t> sizes;
  bool corrupt_gradient = false;
};

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error(ErrorCode::kIoError, "cannot open " + path.string() + " for writing");
  os << text;
  if (!os) throw Error(ErrorCode::kIoError, "failed writing " + path.string());
}

fs::path prepare_out_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw Error(ErrorCode::kIoError, "cannot create output directory " + dir);
  return fs::path(dir);
}

class Manifest {
 public:
  Manifest(std::string command, const Config& config, std::uint64_t seed) {
    body_["command"] = std::move(command);
    body_["version"] = AAMSUPCON_VERSION;
    body_["seed"] = seed;
    body_["config"] = config_to_json(config);
    body_["inputs"] = ordered_json::array();
    body_["outputs"] = ordered_json::array();
    body_["untracked_outputs"] = ordered_json::array();
    body_["metrics"] = ordered_json::object();
  }

  void input(const std::string& role, const std::string& path) {
    body_["inputs"].push_back({{"role", role}, {"path", path}, {"sha256", sha256_file(path)}});
  }
  void output(const fs::path& dir, const std::string& name) {
    body_["outputs"].push_back({{"path", name}, {"sha256", sha256_file(dir / name)}});
  }
  // Written alongside but excluded from checksums because it holds wall-clock time.
  void untracked(const std::string& name) { body_["untracked_outputs"].push_back(name); }
  ordered_json& metrics() { return body_["metrics"]; }

  void write(const fs::path& dir) const { write_text(dir / "manifest.json", body_.dump(2) + "\n"); }

 private:
  ordered_json body_;
};

NetworkDims dims_for(const TrainConfig& train, const LoadedDataset& data) {
  NetworkDims dims = train.dims;
  dims.input = data.spec.feature_dim;
  Label max_label = 0;
  for (const Sample& s : data.samples) max_label = std::max(max_label, s.speaker_id);
  dims.classes = data.samples.empty() ? data.spec.num_speakers : max_label + 1;
  return dims;
}

std::pair<std::vector<Sample>, std::vector<Sample>> split_for(const Config& config,
                                                              const std::vector<Sample>& samples) {
  if (config.eval.holdout_per_speaker == 0) return {samples, samples};
  return split_holdout(samples, config.eval.holdout_per_speaker);
}

struct Metrics {
  OperatingPoint eer;
  OperatingPoint dcf;
  std::size_t num_target = 0;
  std::size_t num_nontarget = 0;
};

Metrics evaluate_params(const Config& config, const NetworkParams& params, const std::vector<Sample>& eval_set,
                        std::uint64_t seed, std::vector<Trial>* trials_out = nullptr,
                        ScoredTrials* scored_out = nullptr) {
  const std::vector<Trial> trials = build_trials(eval_set, config.eval.trials_per_speaker, seed);
  const ScoredTrials scored = score_trials(params, eval_set, trials, config.eval.space);
  Metrics m{eer(scored), min_dcf(scored, config.eval.dcf), scored.num_target(), scored.num_nontarget()};
  if (trials_out) *trials_out = trials;
  if (scored_out) *scored_out = scored;
  return m;
}

ordered_json metrics_json(const Metrics& m, const DcfParams& dcf) {
  return {{"eer_percent", 100.0 * m.eer.value},
          {"min_dcf", m.dcf.value},
          {"threshold", m.eer.threshold},
          {"min_dcf_threshold", m.dcf.threshold},
          {"p_target", dcf.p_target},
          {"num_target", m.num_target},
          {"num_nontarget", m.num_nontarget}};
}

// ---------------------------------------------------------------------------

int cmd_generate(const Config& config, const Options& opt, std::ostream& out) {
  const Dataset data = generate(config.data);
  const fs::path dir = prepare_out_dir(opt.out_dir);
  save_dataset(dir / "dataset.txt", data.spec, data.samples);

  Manifest manifest("generate", config, config.data.seed);
  manifest.output(dir, "dataset.txt");
  manifest.metrics() = {{"num_samples", data.samples.size()}, {"num_speakers", data.spec.num_speakers}};
  manifest.write(dir);
  out << "generated " << data.samples.size() << " samples (" << data.spec.num_speakers << " speakers x "
      << data.spec.utterances_per_speaker << " utterances, d=" << data.spec.feature_dim << ") -> "
      << (dir / "dataset.txt").string() << "\n";
  return kExitOk;
}

int cmd_train(Config config, const Options& opt, std::ostream& out) {
  const LoadedDataset data = load_dataset(opt.dataset);
  config.train.dims = dims_for(config.train, data);
  const auto [train_set, held_out] = split_for(config, data.samples);
  config.train.validate();

  TrainResult result = train(config.train, train_set);
  const fs::path dir = prepare_out_dir(opt.out_dir);
  save_checkpoint(dir / "checkpoint.bin", result.params);
  result.log.checkpoint = "checkpoint.bin";
  save_run_log(dir / "run_log.tsv", result.log);
  save_timing(dir / "timing.tsv", result.log);

  const std::size_t every = std::max<std::size_t>(1, config.train.steps / 10);
  for (const StepRecord& s : result.log.steps) {
    if (s.step % every == 0 || s.step + 1 == config.train.steps) {
      out << "step " << s.step << "  loss " << fixed(s.loss, 6) << "  grad_norm " << fixed(s.grad_norm, 4) << "\n";
    }
  }

  Manifest manifest("train", config, config.train.seed);
  manifest.input("dataset", opt.dataset);
  manifest.output(dir, "checkpoint.bin");
  manifest.output(dir, "run_log.tsv");
  manifest.untracked("timing.tsv");
  ordered_json& m = manifest.metrics();
  m["steps"] = result.log.steps.size();
  m["train_samples"] = train_set.size();
  m["parameters"] = parameter_count(result.params);
  if (!result.log.steps.empty()) {
    m["initial_loss"] = result.log.steps.front().loss;
    m["final_loss"] = result.log.steps.back().loss;
  }
  manifest.write(dir);
  out << "checkpoint -> " << (dir / "checkpoint.bin").string() << "\n";
  return kExitOk;
}

int cmd_evaluate(const Config& config, const Options& opt, std::ostream& out) {
  const NetworkParams params = load_checkpoint(opt.checkpoint);
  const LoadedDataset data = load_dataset(opt.dataset);
  if (params.dims.input != data.spec.feature_dim) {
    throw Error(ErrorCode::kShapeMismatch, "checkpoint expects " + std::to_string(params.dims.input) +
                                               " features, dataset has " + std::to_string(data.spec.feature_dim));
  }
  const auto eval_set = split_for(config, data.samples).second;

  std::vector<Trial> trials;
  ScoredTrials scored;
  const Metrics m = evaluate_params(config, params, eval_set, config.eval.seed, &trials, &scored);

  const fs::path dir = prepare_out_dir(opt.out_dir);
  {
    std::ostringstream ts, ss;
    write_trials(ts, trials);
    write_scores(ss, trials, scored);
    write_text(dir / "trials.txt", ts.str());
    write_text(dir / "scores.txt", ss.str());
  }
  const ordered_json report = metrics_json(m, config.eval.dcf);
  write_text(dir / "report.json", report.dump(2) + "\n");

  Manifest manifest("evaluate", config, config.eval.seed);
  manifest.input("checkpoint", opt.checkpoint);
  manifest.input("dataset", opt.dataset);
  manifest.output(dir, "trials.txt");
  manifest.output(dir, "scores.txt");
  manifest.output(dir, "report.json");
  manifest.metrics() = report;
  manifest.write(dir);

  out << "EER     " << fixed(100.0 * m.eer.value, 3) << " %  (threshold " << fixed(m.eer.threshold, 4) << ")\n"
      << "minDCF  " << fixed(m.dcf.value, 4) << "    (p_target " << config.eval.dcf.p_target << ")\n"
      << "trials  " << m.num_target << " target / " << m.num_nontarget << " non-target\n";
  return kExitOk;
}

// Random batch: N cycles through {4, 8, 16}, d through {4, 16},
// C through {2, 5}. Labels come in pairs and at least two classes appear.
LossInputs random_loss_inputs(std::size_t index, Rng& rng) {
  static constexpr std::array<std::size_t, 3> kN{4, 8, 16};
  static constexpr std::array<std::size_t, 2> kD{4, 16};
  static constexpr std::array<std::size_t, 2> kC{2, 5};
  const std::size_t n = kN[index % 3], d = kD[(index / 3) % 2], classes = kC[(index / 6) % 2];

  std::normal_distribution<double> gauss;
  auto unit_rows = [&](std::size_t rows) {
    Matrix m(rows, d);
    for (std::size_t r = 0; r < rows; ++r) {
      std::vector<double> v(d);
      for (double& x : v) x = gauss(rng);
      const UnitVector u = normalize(v);
      std::copy(u.components().begin(), u.components().end(), m.row(r).begin());
    }
    return m;
  };

  LossInputs in;
  in.embeddings = unit_rows(n);
  in.class_weights = unit_rows(classes);
  std::uniform_int_distribution<Label> pick(0, classes - 1);
  for (std::size_t k = 0; k < n / 2; ++k) {
    const Label y = k < 2 ? k : pick(rng);
    in.labels.push_back(y);
    in.labels.push_back(y);
  }
  std::shuffle(in.labels.begin(), in.labels.end(), rng);
  return in;
}

int cmd_gradcheck(const Config& config, const Options& opt, std::ostream& out) {
  const GradCheckSettings& gc = config.gradcheck;
  GradCheckOptions options;
  options.step = gc.step;
  if (opt.corrupt_gradient) {
    options.corrupt = [](LossOutput& o) { o.grad_embeddings(0, 0) += 1.0; };
  }

  bool passed = true;
  ordered_json losses = ordered_json::array();
  out << "loss        max_rel_err   mean_rel_err  result\n";
  for (LossKind kind : {LossKind::kSoftmax, LossKind::kArcFace, LossKind::kSupCon, LossKind::kAamSupCon}) {
    Rng rng(gc.seed);
    double worst = 0.0, mean = 0.0;
    std::size_t runs = 0;
    for (std::size_t b = 0; b < gc.batches; ++b) {
      LossInputs in = random_loss_inputs(b, rng);
      in.temperature = config.train.temperature;
      in.margin = config.train.margin;
      in.scale = config.train.scale;
      for (DenominatorConvention conv : {DenominatorConvention::kAllNonAnchor, DenominatorConvention::kStrictNegatives}) {
        if (conv == DenominatorConvention::kStrictNegatives &&
            (kind == LossKind::kSoftmax || kind == LossKind::kArcFace)) {
          continue;
        }
        const GradCheckReport r = grad_check({kind, config.train.loss.supcon_weight, conv}, in, options);
        worst = std::max(worst, r.max_relative_error);
        mean += r.mean_relative_error;
        ++runs;
      }
    }
    mean /= static_cast<double>(runs);
    const bool ok = worst < gc.tolerance;
    passed = passed && ok;
    losses.push_back({{"loss", loss_kind_name(kind)},
                      {"batches", gc.batches},
                      {"max_relative_error", worst},
                      {"mean_relative_error", mean},
                      {"passed", ok}});
    char line[128];
    std::snprintf(line, sizeof line, "%-10s  %.3e     %.3e     %s\n", std::string(loss_kind_name(kind)).c_str(),
                  worst, mean, ok ? "PASS" : "FAIL");
    out << line;
  }

  // End to end through a small network (d_in = 10, N = 8).
  ordered_json model = ordered_json::array();
  NetworkDims dims;
  dims.input = 10;
  dims.encoder_hidden = {12, 9};
  dims.projection_hidden = 11;
  dims.output = 6;
  dims.classes = 4;
  for (HeadInput head : {HeadInput::kProjection, HeadInput::kEncoder}) {
    for (LossKind kind : {LossKind::kSoftmax, LossKind::kArcFace, LossKind::kSupCon, LossKind::kAamSupCon}) {
      TrainConfig tc = config.train;
      tc.loss.kind = kind;
      tc.dims = dims;
      tc.dims.head_input = head;
      NetworkParams params = init_params(tc.dims, gc.seed);
      for (DenseLayer& layer : params.encoder) std::fill(layer.bias.begin(), layer.bias.end(), 0.05);
      Rng rng(gc.seed + 1);
      std::normal_distribution<double> gauss;
      std::vector<Sample> samples;
      for (Label y : {0, 0, 1, 1, 2, 2, 3, 3}) {
        std::vector<double> f(dims.input);
        for (double& v : f) v = gauss(rng);
        samples.push_back({std::move(f), y, ViewTag::kOriginal});
      }
      GradCheckOptions model_options;
      model_options.step = gc.step;
      const GradCheckReport r = model_grad_check(tc, params, batch_from_samples(std::move(samples)), model_options);
      const bool ok = r.max_relative_error < gc.model_tolerance;
      passed = passed && ok;
      model.push_back({{"loss", loss_kind_name(kind)},
                       {"head_input", head_input_name(head)},
                       {"parameters", r.components},
                       {"max_relative_error", r.max_relative_error},
                       {"passed", ok}});
      char line[160];
      std::snprintf(line, sizeof line, "end-to-end %-10s head=%-10s  %.3e  %s\n",
                    std::string(loss_kind_name(kind)).c_str(), std::string(head_input_name(head)).c_str(),
                    r.max_relative_error, ok ? "PASS" : "FAIL");
      out << line;
    }
  }

  const ordered_json report = {{"step", gc.step},
                               {"tolerance", gc.tolerance},
                               {"model_tolerance", gc.model_tolerance},
                               {"relative_error_floor", options.denominator_floor},
                               {"losses", losses},
                               {"model", model},
                               {"passed", passed}};
  const fs::path dir = prepare_out_dir(opt.out_dir);
  write_text(dir / "gradcheck.json", report.dump(2) + "\n");
  Manifest manifest("gradcheck", config, gc.seed);
  manifest.output(dir, "gradcheck.json");
  manifest.metrics() = {{"passed", passed}};
  manifest.write(dir);

  if (!passed) {
    throw Error(ErrorCode::kToleranceExceeded, "gradient check exceeded tolerance (see gradcheck.json)");
  }
  return kExitOk;
}

int cmd_sweep(Config config, const Options& opt, std::ostream& out) {
  if (!opt.sizes.empty()) config.sweep.sizes = opt.sizes;
  for (std::size_t s : config.sweep.sizes) {
    if (s < 1 || s > config.data.num_speakers) {
      throw Error(ErrorCode::kConfigError, "[sweep] sizes: " + std::to_string(s) + " speakers per batch needs 1.." +
                                               std::to_string(config.data.num_speakers));
    }
  }
  const std::size_t train_utts = config.data.utterances_per_speaker - config.eval.holdout_per_speaker;
  if (config.eval.holdout_per_speaker > 0 && config.data.utterances_per_speaker < config.eval.holdout_per_speaker + 2) {
    throw Error(ErrorCode::kConfigError, "[eval] holdout_per_speaker: leaves fewer than 2 training utterances");
  }
  if (config.train.views_per_speaker > train_utts && config.eval.holdout_per_speaker > 0) {
    throw Error(ErrorCode::kConfigError, "[train] views_per_speaker: exceeds training utterances per speaker");
  }

  struct Row {
    std::size_t size;
    std::vector<double> eers, dcfs;
    double mean_eer = 0.0, mean_dcf = 0.0;
  };
  std::vector<Row> rows;
  for (std::size_t size : config.sweep.sizes) {
    Row row{size, {}, {}};
    for (std::uint64_t seed : config.sweep.seeds) {
      DatasetSpec spec = config.data;
      spec.seed = seed;
      const Dataset data = generate(spec);
      const auto [train_set, eval_set] = split_for(config, data.samples);
      TrainConfig tc = config.train;
      tc.loss.kind = LossKind::kSupCon;
      tc.batch_speakers = size;
      tc.seed = seed;
      tc.dims.input = spec.feature_dim;
      tc.dims.classes = spec.num_speakers;
      const TrainResult r = train(tc, train_set);
      const Metrics m = evaluate_params(config, r.params, eval_set, seed);
      row.eers.push_back(100.0 * m.eer.value);
      row.dcfs.push_back(m.dcf.value);
    }
    for (double e : row.eers) row.mean_eer += e / static_cast<double>(row.eers.size());
    for (double d : row.dcfs) row.mean_dcf += d / static_cast<double>(row.dcfs.size());
    rows.push_back(std::move(row));
  }

  const std::size_t views = config.train.views_per_speaker;
  std::ostringstream table;
  table << "batch_speakers\tbatch_size\teer_percent\tmin_dcf\n";
  ordered_json jrows = ordered_json::array();
  out << "batch_speakers  batch_size  EER(%)    minDCF\n";
  for (const Row& r : rows) {
    const std::size_t batch_size = 2 * r.size * views;
    char line[128];
    std::snprintf(line, sizeof line, "%-14zu  %-10zu  %-8.3f  %.4f\n", r.size, batch_size, r.mean_eer, r.mean_dcf);
    out << line;
    char tsv[128];
    std::snprintf(tsv, sizeof tsv, "%zu\t%zu\t%.17g\t%.17g\n", r.size, batch_size, r.mean_eer, r.mean_dcf);
    table << tsv;
    jrows.push_back({{"batch_speakers", r.size},
                     {"batch_size", batch_size},
                     {"eer_percent", r.mean_eer},
                     {"min_dcf", r.mean_dcf},
                     {"eer_percent_per_seed", r.eers},
                     {"min_dcf_per_seed", r.dcfs}});
  }
  const std::string footer = "reference (full scale, not reproducible here): batch " + std::to_string(kAnchorBatch) +
                             " -> EER " + fixed(kAnchorEerPercent, 2) + " %, minDCF " + fixed(kAnchorMinDcf, 2);
  out << footer << "\n";

  const ordered_json report = {
      {"loss", loss_kind_name(LossKind::kSupCon)},
      {"steps", config.train.steps},
      {"seeds", config.sweep.seeds},
      {"rows", jrows},
      {"reference", {{"batch_size", kAnchorBatch}, {"eer_percent", kAnchorEerPercent}, {"min_dcf", kAnchorMinDcf},
                     {"note", "full-scale reference value; not reproducible at this scale"}}}};
  const fs::path dir = prepare_out_dir(opt.out_dir);
  write_text(dir / "sweep.tsv", table.str());
  write_text(dir / "sweep.json", report.dump(2) + "\n");

  Manifest manifest("sweep-batch", config, config.sweep.seeds.front());
  manifest.output(dir, "sweep.tsv");
  manifest.output(dir, "sweep.json");
  manifest.metrics() = {{"rows", jrows}};
  manifest.write(dir);
  return kExitOk;
}

}  // namespace

ExitCode exit_code_for(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::kConfigError:
    case ErrorCode::kInvalidSpec:
    case ErrorCode::kInvalidInput:
    case ErrorCode::kInvalidMargin:
    case ErrorCode::kInvalidScale:
    case ErrorCode::kInvalidTemperature:
    case ErrorCode::kInvalidDims:
    case ErrorCode::kInsufficientSpeakers:
    case ErrorCode::kInsufficientUtterances:
    case ErrorCode::kShapeMismatch:
    case ErrorCode::kBatchTooSmall:
    case ErrorCode::kAnchorWithoutPositive:
      return kExitConfig;
    case ErrorCode::kIoError:
    case ErrorCode::kFormatError:
    case ErrorCode::kCheckpointError:
      return kExitIo;
    default:
      return kExitNumerical;
  }
}

std::string sha256_file(const fs::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error(ErrorCode::kIoError, "cannot read " + path.string());
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr);
  std::array<char, 1 << 16> buf;
  while (is.read(buf.data(), buf.size()) || is.gcount() > 0) {
    EVP_DigestUpdate(ctx, buf.data(), static_cast<std::size_t>(is.gcount()));
  }
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx, digest, &len);
  EVP_MD_CTX_free(ctx);
  static constexpr char kHex[] = "0123456789abcdef";
  std::string hex;
  for (unsigned int k = 0; k < len; ++k) {
    hex += kHex[digest[k] >> 4];
    hex += kHex[digest[k] & 0xF];
  }
  return hex;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Train and evaluate speaker embeddings with an additive angular margin contrastive loss",
               "aamsupcon"};
  app.require_subcommand(1);
  Options opt;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--config", opt.config_path, "INI configuration file (defaults apply when omitted)")
        ->check(CLI::ExistingFile);
    sub->add_option("--seed", opt.seed, "Override every seed in the configuration");
    sub->add_option("--out", opt.out_dir, "Output directory")->required();
  };

  CLI::App* gen = app.add_subcommand("generate", "Generate a synthetic speaker dataset");
  common(gen);
  CLI::App* tr = app.add_subcommand("train", "Train a model and write checkpoint, run log and manifest");
  common(tr);
  tr->add_option("--dataset", opt.dataset, "Dataset file from `generate`")->required();
  CLI::App* ev = app.add_subcommand("evaluate", "Score verification trials and report EER and minDCF");
  common(ev);
  ev->add_option("--dataset", opt.dataset, "Dataset file")->required();
  ev->add_option("--checkpoint", opt.checkpoint, "Checkpoint from `train`")->required();
  CLI::App* gc = app.add_subcommand("gradcheck", "Check analytic gradients against finite differences");
  common(gc);
  gc->add_flag("--corrupt-gradient", opt.corrupt_gradient)->group("");
  CLI::App* sw = app.add_subcommand("sweep-batch", "Train and evaluate the contrastive loss at several batch sizes");
  common(sw);
  sw->add_option("--sizes", opt.sizes, "Speakers per batch, comma separated")->delimiter(',');

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    Config config = opt.config_path.empty() ? Config{} : load_config(opt.config_path);
    if (opt.seed) override_seed(config, *opt.seed);
    if (gen->parsed()) return cmd_generate(config, opt, out);
    if (tr->parsed()) return cmd_train(config, opt, out);
    if (ev->parsed()) return cmd_evaluate(config, opt, out);
    if (gc->parsed()) return cmd_gradcheck(config, opt, out);
    return cmd_sweep(config, opt, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return exit_code_for(e.code());
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitNumerical;
  }
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  std::vector<const char*> argv{"aamsupcon"};
  for (const std::string& a : args) argv.push_back(a.c_str());
  return run(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace aamsupcon::cli
