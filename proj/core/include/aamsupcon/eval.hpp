#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <vector>

#include "aamsupcon/batching.hpp"
#include "aamsupcon/model.hpp"

namespace aamsupcon {

struct Trial {
  std::size_t enroll = 0;
  std::size_t test = 0;
  bool is_target = false;
  friend bool operator==(const Trial&, const Trial&) = default;
};

struct ScoredTrials {
  std::vector<double> scores;
  std::vector<bool> is_target;

  std::size_t num_target() const noexcept;
  std::size_t num_nontarget() const noexcept;
  /// Equal lengths, finite scores, at least one trial of each class and at
  /// least two distinct score values; throws DegenerateTrials otherwise.
  void validate() const;
};

struct DcfParams {
  double p_target = 0.01;
  double c_miss = 1.0;
  double c_fa = 1.0;
  void validate() const;
};

/// Per speaker (ascending id): trials_per_speaker same-speaker pairs, then
/// trials_per_speaker pairs against other speakers, drawn without
/// replacement until the pool is exhausted.
std::vector<Trial> build_trials(const std::vector<Sample>& dataset, std::size_t trials_per_speaker,
                                std::uint64_t seed);

enum class EmbeddingSpace { kProjection, kEncoder };

/// One forward pass over the whole dataset; rows are unit vectors.
Matrix embed_dataset(const NetworkParams& params, const std::vector<Sample>& dataset,
                     EmbeddingSpace space = EmbeddingSpace::kProjection);

/// Cosine of the two cached embeddings per trial. Throws IndexOutOfRange.
ScoredTrials score_trials(const Matrix& embeddings, const std::vector<Trial>& trials);
ScoredTrials score_trials(const NetworkParams& params, const std::vector<Sample>& dataset,
                          const std::vector<Trial>& trials,
                          EmbeddingSpace space = EmbeddingSpace::kProjection);

struct OperatingPoint {
  double value = 0.0;      // EER in [0, 1] or normalized minDCF
  double threshold = 0.0;  // trials with score >= threshold are accepted
};

/// Equal error rate. The ROC points are taken at every distinct score (accept
/// score >= t) plus t = +inf; the first point with FRR >= FAR and its
/// predecessor are linearly interpolated on FRR - FAR.
OperatingPoint eer(const ScoredTrials& scored);

/// min_t [c_miss P_miss(t) p + c_fa P_fa(t) (1 - p)] / min(c_miss p, c_fa (1 - p))
/// over t in {-inf, distinct scores, +inf}.
OperatingPoint min_dcf(const ScoredTrials& scored, const DcfParams& params = {});

// Trial list: "enroll test 0|1" per line. Score file: the same plus the score
// with 17 significant digits.
void write_trials(std::ostream& os, const std::vector<Trial>& trials);
std::vector<Trial> read_trials(std::istream& is);
void write_scores(std::ostream& os, const std::vector<Trial>& trials, const ScoredTrials& scored);
std::pair<std::vector<Trial>, ScoredTrials> read_scores(std::istream& is);

}  // namespace aamsupcon
