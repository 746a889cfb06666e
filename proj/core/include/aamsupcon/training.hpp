#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "aamsupcon/batching.hpp"
#include "aamsupcon/losses.hpp"
#include "aamsupcon/model.hpp"

namespace aamsupcon {

struct TrainConfig {
  LossSpec loss;  // kind, supcon weight (lambda), denominator convention
  double temperature = kDefaultTemperature;
  double margin = kDefaultMargin;
  double scale = kDefaultScale;
  double learning_rate = 0.01;
  double momentum = 0.9;
  std::size_t steps = 500;
  std::size_t batch_speakers = 8;
  std::size_t views_per_speaker = 2;
  std::uint64_t seed = 1;
  NetworkDims dims;
  AugmentPolicy augment;
  /// When false the batch drawn at step 0 is reused for every step.
  bool resample_batches = true;

  /// Throws InvalidInput (or InvalidMargin / InvalidScale / ...) naming the field.
  void validate() const;
};

struct StepRecord {
  std::size_t step = 0;
  double loss = 0.0;
  double grad_norm = 0.0;
  double wall_seconds = 0.0;  // not part of the reproducible log file
};

struct RunLog {
  TrainConfig config;
  std::vector<StepRecord> steps;
  std::string checkpoint;  // path of the final checkpoint, if one was written
};

struct TrainResult {
  NetworkParams params;
  RunLog log;
};

/// Loss on the forward embeddings of `batch`, with class weights
/// row-normalized first. Gradients are w.r.t. z and the normalized weights.
LossOutput loss_on_batch(const TrainConfig& config, const NetworkParams& params,
                         const MultiviewBatch& batch);

struct BatchGradient {
  LossOutput loss;
  NetworkParams grads;  // every tensor, class weights included
};

/// Loss and full parameter gradient through network, normalization and head.
BatchGradient compute_gradients(const TrainConfig& config, const NetworkParams& params,
                                const MultiviewBatch& batch);

/// SGD with momentum: v <- mu v + g, p <- p - lr v, then class-weight rows are
/// projected back onto the sphere. Throws DivergenceDetected on a non-finite
/// loss. Starts from init_params(config.dims, config.seed) unless `initial`
/// is provided.
TrainResult train(const TrainConfig& config, const std::vector<Sample>& dataset,
                  std::optional<NetworkParams> initial = std::nullopt);

double gradient_norm(const NetworkParams& grads);

/// Compares compute_gradients against central differences of loss_on_batch
/// over every network parameter (class weights included).
GradCheckReport model_grad_check(const TrainConfig& config, const NetworkParams& params,
                                 const MultiviewBatch& batch, const GradCheckOptions& options = {});

/// Tab-separated, one record per step: step, loss, grad_norm (17 significant
/// digits). Wall time is excluded so reruns are byte-identical.
void write_run_log(std::ostream& os, const RunLog& log);
void save_run_log(const std::filesystem::path& path, const RunLog& log);
/// step, wall_seconds.
void save_timing(const std::filesystem::path& path, const RunLog& log);

}  // namespace aamsupcon
