#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <vector>

#include "aamsupcon/batching.hpp"
#include "aamsupcon/geometry.hpp"

namespace aamsupcon {

struct SpeakerModel {
  UnitVector centroid;
  double spread = 0.0;
};

struct DatasetSpec {
  std::size_t num_speakers = 16;
  std::size_t utterances_per_speaker = 20;
  std::size_t feature_dim = 40;
  double spread = 0.2;
  std::uint64_t seed = 1;

  /// Throws InvalidSpec naming the offending field.
  void validate() const;
  friend bool operator==(const DatasetSpec&, const DatasetSpec&) = default;
};

struct Dataset {
  DatasetSpec spec;
  std::vector<Sample> samples;  // speaker-major; samples[k].speaker_id == k / utterances
  std::vector<SpeakerModel> speakers;
};

/// Centroids uniform on the unit sphere; each utterance is
/// normalize(centroid + spread * N(0, I)). With spread == 0 every utterance is
/// a copy of its centroid.
Dataset generate(const DatasetSpec& spec);

/// Splits each speaker's utterances: the last holdout_per_speaker go to the
/// second result. Order within each part is preserved.
std::pair<std::vector<Sample>, std::vector<Sample>> split_holdout(const std::vector<Sample>& samples,
                                                                  std::size_t holdout_per_speaker);

// Text dump: one header line
//   # aamsupcon-dataset v1 num_speakers=.. utterances_per_speaker=.. feature_dim=.. spread=.. seed=..
// followed by one line per sample: speaker_id view_tag f_0 ... f_{d-1}
// Reals are written with 17 significant digits, which round-trips doubles.
void write_dataset(std::ostream& os, const DatasetSpec& spec, const std::vector<Sample>& samples);
void save_dataset(const std::filesystem::path& path, const DatasetSpec& spec,
                  const std::vector<Sample>& samples);

struct LoadedDataset {
  DatasetSpec spec;
  std::vector<Sample> samples;
};
LoadedDataset read_dataset(std::istream& is);
LoadedDataset load_dataset(const std::filesystem::path& path);

}  // namespace aamsupcon
