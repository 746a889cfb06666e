#include "aamsupcon/training.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>

#include "aamsupcon/errors.hpp"
#include "aamsupcon/geometry.hpp"

namespace aamsupcon {

namespace {

// Separate stream from parameter initialization, which consumes config.seed.
constexpr std::uint64_t kBatchStreamSalt = 0x9E3779B97F4A7C15ULL;

std::string real(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void require(bool ok, ErrorCode code, const std::string& field, const std::string& why) {
  if (!ok) throw Error(code, field + " " + why);
}

}  // namespace

void TrainConfig::validate() const {
  require(temperature > 0.0, ErrorCode::kInvalidTemperature, "temperature", "must be > 0");
  require(scale > 0.0, ErrorCode::kInvalidScale, "scale", "must be > 0");
  validate_margin(margin);
  require(learning_rate >= 0.0, ErrorCode::kInvalidInput, "learning_rate", "must be >= 0");
  require(momentum >= 0.0 && momentum < 1.0, ErrorCode::kInvalidInput, "momentum", "must lie in [0, 1)");
  require(batch_speakers >= 1, ErrorCode::kInvalidInput, "batch_speakers", "must be >= 1");
  require(views_per_speaker >= 1, ErrorCode::kInvalidInput, "views_per_speaker", "must be >= 1");
  require(std::isfinite(loss.supcon_weight) && loss.supcon_weight >= 0.0, ErrorCode::kInvalidInput,
          "supcon_weight", "must be finite and >= 0");
  require(augment.noise_stddev >= 0.0, ErrorCode::kInvalidInput, "noise_stddev", "must be >= 0");
  dims.validate();
}

LossOutput loss_on_batch(const TrainConfig& config, const NetworkParams& params,
                         const MultiviewBatch& batch) {
  return compute_gradients(config, params, batch).loss;
}

BatchGradient compute_gradients(const TrainConfig& config, const NetworkParams& params,
                                const MultiviewBatch& batch) {
  const ForwardTrace trace = forward(params, batch);
  const bool head_on_encoder = params.dims.head_input == HeadInput::kEncoder;

  LossInputs in;
  in.labels = batch.labels;
  in.temperature = config.temperature;
  in.margin = config.margin;
  in.scale = config.scale;
  in.class_weights = normalized_class_weights(params);
  const IndexSets sets = build_index_sets(in.labels, config.loss.convention);

  BatchGradient out;
  Matrix grad_head;
  if (head_on_encoder && uses_class_weights(config.loss.kind)) {
    // The margin head reads h/|h|, the contrastive term reads z.
    LossSpec head = config.loss;
    head.kind = config.loss.kind == LossKind::kSoftmax ? LossKind::kSoftmax : LossKind::kArcFace;
    in.embeddings = trace.encoder_embeddings;
    LossOutput head_out = evaluate_loss(head, in, sets);
    grad_head = std::move(head_out.grad_embeddings);

    out.loss.value = head_out.value;
    out.loss.grad_class_weights = std::move(head_out.grad_class_weights);
    out.loss.grad_embeddings = Matrix(trace.embeddings.rows(), trace.embeddings.cols());
    if (config.loss.kind == LossKind::kAamSupCon) {
      LossInputs con = in;
      con.embeddings = trace.embeddings;
      con.class_weights = Matrix();
      LossOutput c = supcon_loss(con, sets);
      out.loss.value += config.loss.supcon_weight * c.value;
      for (std::size_t k = 0; k < c.grad_embeddings.size(); ++k) {
        out.loss.grad_embeddings.values()[k] = config.loss.supcon_weight * c.grad_embeddings.values()[k];
      }
    }
  } else {
    in.embeddings = trace.embeddings;
    if (head_on_encoder) in.class_weights = Matrix();  // contrastive loss only
    out.loss = evaluate_loss(config.loss, in, sets);
    if (out.loss.grad_class_weights.empty()) {
      out.loss.grad_class_weights = Matrix(params.class_weights.rows(), params.class_weights.cols());
    }
  }

  out.grads = backward(params, trace, out.loss.grad_embeddings, grad_head.empty() ? nullptr : &grad_head);
  out.grads.class_weights = class_weight_gradient(params.class_weights, out.loss.grad_class_weights);
  return out;
}

namespace {

bool all_finite(const NetworkParams& params) {
  bool ok = true;
  for_each_tensor(params, [&](std::span<const double> t) {
    for (double v : t) ok = ok && std::isfinite(v);
  });
  return ok;
}

}  // namespace

double gradient_norm(const NetworkParams& grads) {
  double acc = 0.0;
  for_each_tensor(grads, [&](std::span<const double> t) { acc += squared_norm(t); });
  return std::sqrt(acc);
}

GradCheckReport model_grad_check(const TrainConfig& config, const NetworkParams& params,
                                 const MultiviewBatch& batch, const GradCheckOptions& options) {
  const BatchGradient analytic = compute_gradients(config, params, batch);
  std::vector<double> grads;
  for_each_tensor(analytic.grads, [&](std::span<const double> t) { grads.insert(grads.end(), t.begin(), t.end()); });

  NetworkParams probe = params;
  std::vector<double*> slots;
  for_each_tensor(probe, [&](std::span<double> t) {
    for (double& v : t) slots.push_back(&v);
  });

  GradCheckReport report;
  const double h = options.step;
  double sum = 0.0;
  for (std::size_t k = 0; k < slots.size(); ++k) {
    const double saved = *slots[k];
    *slots[k] = saved + h;
    const double up = loss_on_batch(config, probe, batch).value;
    *slots[k] = saved - h;
    const double down = loss_on_batch(config, probe, batch).value;
    *slots[k] = saved;
    const double numeric = (up - down) / (2.0 * h);
    const double rel = relative_error(grads[k], numeric, options.denominator_floor);
    report.max_relative_error = std::max(report.max_relative_error, rel);
    report.max_absolute_error = std::max(report.max_absolute_error, std::abs(grads[k] - numeric));
    sum += rel;
  }
  report.components = slots.size();
  report.mean_relative_error = slots.empty() ? 0.0 : sum / static_cast<double>(slots.size());
  return report;
}

TrainResult train(const TrainConfig& config, const std::vector<Sample>& dataset,
                  std::optional<NetworkParams> initial) {
  config.validate();
  TrainResult result;
  result.params = initial ? std::move(*initial) : init_params(config.dims, config.seed);
  if (!(result.params.dims == config.dims)) {
    throw Error(ErrorCode::kInvalidDims, "initial parameters do not match the configured dims");
  }
  result.log.config = config;
  if (config.steps == 0) return result;

  Rng rng(config.seed ^ kBatchStreamSalt);
  NetworkParams velocity = zeros_like(result.params);
  MultiviewBatch batch;

  using Clock = std::chrono::steady_clock;
  const auto start = Clock::now();
  for (std::size_t step = 0; step < config.steps; ++step) {
    if (step == 0 || config.resample_batches) {
      batch = build_batch(dataset, config.batch_speakers, config.views_per_speaker, config.augment, rng);
    }
    if (!all_finite(result.params)) {
      throw Error(ErrorCode::kDivergenceDetected, "non-finite parameters at step " + std::to_string(step));
    }
    BatchGradient g = compute_gradients(config, result.params, batch);
    const double norm = gradient_norm(g.grads);
    if (!std::isfinite(g.loss.value) || !std::isfinite(norm)) {
      throw Error(ErrorCode::kDivergenceDetected,
                  "non-finite loss or gradient at step " + std::to_string(step));
    }
    result.log.steps.push_back(
        {step, g.loss.value, norm, std::chrono::duration<double>(Clock::now() - start).count()});

    std::vector<std::span<double>> v_tensors;
    for_each_tensor(velocity, [&](std::span<double> t) { v_tensors.push_back(t); });
    std::vector<std::span<const double>> g_tensors;
    for_each_tensor(std::as_const(g.grads), [&](std::span<const double> t) { g_tensors.push_back(t); });
    std::size_t idx = 0;
    for_each_tensor(result.params, [&](std::span<double> p) {
      auto v = v_tensors[idx];
      auto gr = g_tensors[idx];
      for (std::size_t k = 0; k < p.size(); ++k) {
        v[k] = config.momentum * v[k] + gr[k];
        p[k] -= config.learning_rate * v[k];
      }
      ++idx;
    });
    if (config.learning_rate > 0.0) {
      for (std::size_t r = 0; r < result.params.class_weights.rows(); ++r) {
        normalize_in_place(result.params.class_weights.row(r));
      }
    }
  }
  return result;
}

void write_run_log(std::ostream& os, const RunLog& log) {
  os << "step\tloss\tgrad_norm\n";
  for (const auto& r : log.steps) os << r.step << '\t' << real(r.loss) << '\t' << real(r.grad_norm) << '\n';
}

void save_run_log(const std::filesystem::path& path, const RunLog& log) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error(ErrorCode::kIoError, "cannot open " + path.string() + " for writing");
  write_run_log(os, log);
}

void save_timing(const std::filesystem::path& path, const RunLog& log) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error(ErrorCode::kIoError, "cannot open " + path.string() + " for writing");
  os << "step\twall_seconds\n";
  for (const auto& r : log.steps) os << r.step << '\t' << real(r.wall_seconds) << '\n';
}

}  // namespace aamsupcon
