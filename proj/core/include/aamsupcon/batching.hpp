#pragma once

#include <cstddef>
#include <optional>
#include <random>
#include <string_view>
#include <vector>

#include "aamsupcon/losses.hpp"
#include "aamsupcon/matrix.hpp"

namespace aamsupcon {

using Rng = std::mt19937_64;

enum class ViewTag { kOriginal, kAugmented };

std::string_view view_tag_name(ViewTag tag) noexcept;

struct Sample {
  std::vector<double> features;
  Label speaker_id = 0;
  ViewTag view_tag = ViewTag::kOriginal;

  friend bool operator==(const Sample&, const Sample&) = default;
};

/// Feature-space augmentation: Gaussian noise followed by zeroing a random
/// contiguous run of coordinates.
struct AugmentPolicy {
  double noise_stddev = 0.1;
  /// Upper bound on the masked run length; unset means features / 8.
  std::optional<std::size_t> mask_max;
  /// Test hook: always mask exactly this many coordinates.
  std::optional<std::size_t> forced_mask_length;

  std::size_t effective_mask_max(std::size_t feature_dim) const noexcept;
};

/// B originals followed by their B augmentations; samples[k + B] is the view
/// of samples[k].
struct MultiviewBatch {
  std::vector<Sample> samples;
  std::vector<Label> labels;
  std::size_t originals = 0;

  std::size_t size() const noexcept { return samples.size(); }
  std::size_t feature_dim() const noexcept {
    return samples.empty() ? 0 : samples.front().features.size();
  }
  Matrix features() const;
};

/// Throws AlreadyAugmented when x is not an original.
Sample augment(const Sample& x, const AugmentPolicy& policy, Rng& rng);

/// Draws batch_speakers distinct speakers and views_per_speaker distinct
/// utterances of each, all without replacement, then appends one
/// augmentation per original.
MultiviewBatch build_batch(const std::vector<Sample>& dataset, std::size_t batch_speakers,
                           std::size_t views_per_speaker, const AugmentPolicy& policy, Rng& rng);

/// Wraps an arbitrary list of samples (no augmentation) as a batch.
MultiviewBatch batch_from_samples(std::vector<Sample> samples);

}  // namespace aamsupcon
