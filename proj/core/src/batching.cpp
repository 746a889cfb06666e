#include "aamsupcon/batching.hpp"

#include <algorithm>
#include <map>
#include <string>

#include "aamsupcon/errors.hpp"

namespace aamsupcon {

std::string_view view_tag_name(ViewTag tag) noexcept {
  return tag == ViewTag::kOriginal ? "original" : "augmented";
}

std::size_t AugmentPolicy::effective_mask_max(std::size_t feature_dim) const noexcept {
  return std::min(mask_max.value_or(feature_dim / 8), feature_dim);
}

Matrix MultiviewBatch::features() const {
  Matrix x(samples.size(), feature_dim());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    std::copy(samples[i].features.begin(), samples[i].features.end(), x.row(i).begin());
  }
  return x;
}

Sample augment(const Sample& x, const AugmentPolicy& policy, Rng& rng) {
  if (x.view_tag != ViewTag::kOriginal) {
    throw Error(ErrorCode::kAlreadyAugmented, "augment() expects an original sample");
  }
  Sample out = x;
  out.view_tag = ViewTag::kAugmented;
  const std::size_t dim = out.features.size();

  if (policy.noise_stddev > 0.0) {
    std::normal_distribution<double> noise(0.0, policy.noise_stddev);
    for (double& f : out.features) f += noise(rng);
  }

  std::size_t len = 0;
  if (policy.forced_mask_length) {
    len = std::min(*policy.forced_mask_length, dim);
  } else {
    const std::size_t hi = policy.effective_mask_max(dim);
    if (hi > 0) len = std::uniform_int_distribution<std::size_t>(0, hi)(rng);
  }
  if (len > 0) {
    const std::size_t start = std::uniform_int_distribution<std::size_t>(0, dim - len)(rng);
    std::fill_n(out.features.begin() + static_cast<std::ptrdiff_t>(start), len, 0.0);
  }
  return out;
}

MultiviewBatch build_batch(const std::vector<Sample>& dataset, std::size_t batch_speakers,
                           std::size_t views_per_speaker, const AugmentPolicy& policy, Rng& rng) {
  if (batch_speakers == 0 || views_per_speaker == 0) {
    throw Error(ErrorCode::kInvalidInput, "batch_speakers and views_per_speaker must be positive");
  }
  // Ordered map so speaker order (and hence the RNG stream) is deterministic.
  std::map<Label, std::vector<std::size_t>> by_speaker;
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    if (dataset[i].view_tag == ViewTag::kOriginal) by_speaker[dataset[i].speaker_id].push_back(i);
  }
  if (by_speaker.size() < batch_speakers) {
    throw Error(ErrorCode::kInsufficientSpeakers,
                "requested " + std::to_string(batch_speakers) + " speakers per batch, dataset has " +
                    std::to_string(by_speaker.size()));
  }
  std::vector<Label> speakers;
  for (const auto& [id, utts] : by_speaker) {
    if (utts.size() < views_per_speaker) {
      throw Error(ErrorCode::kInsufficientUtterances,
                  "speaker " + std::to_string(id) + " has " + std::to_string(utts.size()) +
                      " utterances, need " + std::to_string(views_per_speaker));
    }
    speakers.push_back(id);
  }

  std::shuffle(speakers.begin(), speakers.end(), rng);
  speakers.resize(batch_speakers);

  MultiviewBatch batch;
  batch.originals = batch_speakers * views_per_speaker;
  batch.samples.reserve(2 * batch.originals);
  for (Label id : speakers) {
    std::vector<std::size_t> utts = by_speaker[id];
    std::shuffle(utts.begin(), utts.end(), rng);
    for (std::size_t v = 0; v < views_per_speaker; ++v) batch.samples.push_back(dataset[utts[v]]);
  }
  for (std::size_t k = 0; k < batch.originals; ++k) {
    batch.samples.push_back(augment(batch.samples[k], policy, rng));
  }
  batch.labels.reserve(batch.samples.size());
  for (const auto& s : batch.samples) batch.labels.push_back(s.speaker_id);
  return batch;
}

MultiviewBatch batch_from_samples(std::vector<Sample> samples) {
  MultiviewBatch batch;
  batch.originals = samples.size();
  batch.samples = std::move(samples);
  for (const auto& s : batch.samples) batch.labels.push_back(s.speaker_id);
  return batch;
}

}  // namespace aamsupcon
