#include <gtest/gtest.h>

#include <set>
#include <sstream>

#include "aamsupcon/errors.hpp"
#include "aamsupcon/geometry.hpp"
#include "aamsupcon/synthdata.hpp"

using namespace aamsupcon;

namespace {

double mean_within_cosine(double spread) {
  DatasetSpec spec;
  spec.num_speakers = 10;
  spec.utterances_per_speaker = 100;
  spec.spread = spread;
  spec.seed = 17;
  const Dataset data = generate(spec);
  double total = 0.0;
  for (const Sample& s : data.samples) {
    total += cosine(s.features, data.speakers[s.speaker_id].centroid.components());
  }
  return total / static_cast<double>(data.samples.size());
}

}  // namespace

TEST(Generate, CountsAndLabels) {
  DatasetSpec spec;
  spec.num_speakers = 16;
  spec.utterances_per_speaker = 20;
  const Dataset data = generate(spec);
  EXPECT_EQ(data.samples.size(), 320u);
  std::set<Label> labels;
  for (std::size_t k = 0; k < data.samples.size(); ++k) {
    labels.insert(data.samples[k].speaker_id);
    EXPECT_EQ(data.samples[k].speaker_id, k / 20);
    EXPECT_EQ(data.samples[k].features.size(), 40u);
  }
  EXPECT_EQ(labels.size(), 16u);
  EXPECT_EQ(data.speakers.size(), 16u);
}

TEST(Generate, ZeroSpreadCopiesCentroid) {
  DatasetSpec spec;
  spec.spread = 0.0;
  spec.num_speakers = 4;
  spec.utterances_per_speaker = 3;
  const Dataset data = generate(spec);
  for (const Sample& s : data.samples) {
    const auto& c = data.speakers[s.speaker_id].centroid.components();
    EXPECT_TRUE(std::equal(c.begin(), c.end(), s.features.begin(), s.features.end()));
  }
}

TEST(Generate, CentroidsAndUtterancesAreUnit) {
  const Dataset data = generate({});
  for (const auto& sp : data.speakers) EXPECT_NEAR(squared_norm(sp.centroid.components()), 1.0, 1e-12);
  for (const auto& s : data.samples) EXPECT_NEAR(squared_norm(s.features), 1.0, 1e-12);
}

TEST(Generate, SameSeedSameData) {
  DatasetSpec spec;
  const Dataset a = generate(spec);
  const Dataset b = generate(spec);
  EXPECT_EQ(a.samples, b.samples);
  spec.seed = 2;
  EXPECT_NE(generate(spec).samples, a.samples);
}

TEST(Generate, NearestCentroidIsAlmostPerfectAtLowSpread) {
  DatasetSpec spec;
  spec.spread = 0.05;
  spec.feature_dim = 40;
  spec.num_speakers = 16;
  const Dataset data = generate(spec);
  std::size_t correct = 0;
  for (const Sample& s : data.samples) {
    std::size_t best = 0;
    double best_dist = 1e300;
    for (std::size_t k = 0; k < data.speakers.size(); ++k) {
      double d = 0.0;
      const auto& c = data.speakers[k].centroid.components();
      for (std::size_t j = 0; j < c.size(); ++j) d += (s.features[j] - c[j]) * (s.features[j] - c[j]);
      if (d < best_dist) {
        best_dist = d;
        best = k;
      }
    }
    correct += best == s.speaker_id;
  }
  EXPECT_GT(static_cast<double>(correct) / data.samples.size(), 0.99);
}

TEST(Generate, WithinSpeakerCosineFallsWithSpread) {
  const double a = mean_within_cosine(0.05);
  const double b = mean_within_cosine(0.2);
  const double c = mean_within_cosine(0.5);
  EXPECT_GT(a, b);
  EXPECT_GT(b, c);
}

TEST(DatasetSpecValidate, NamesField) {
  DatasetSpec spec;
  spec.num_speakers = 1;
  try {
    spec.validate();
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInvalidSpec);
    EXPECT_NE(std::string(e.what()).find("num_speakers"), std::string::npos);
  }
  spec = {};
  spec.utterances_per_speaker = 1;
  EXPECT_THROW(generate(spec), Error);
  spec = {};
  spec.spread = -0.1;
  EXPECT_THROW(spec.validate(), Error);
}

TEST(SplitHoldout, LastUtterancesHeldOut) {
  DatasetSpec spec;
  spec.num_speakers = 3;
  spec.utterances_per_speaker = 6;
  const Dataset data = generate(spec);
  const auto [train, held] = split_holdout(data.samples, 2);
  EXPECT_EQ(train.size(), 12u);
  EXPECT_EQ(held.size(), 6u);
  EXPECT_EQ(held[0], data.samples[4]);
  EXPECT_EQ(train[4], data.samples[6]);
  EXPECT_THROW(split_holdout(data.samples, 5), Error);
}

TEST(DatasetIo, RoundTripIsExact) {
  DatasetSpec spec;
  spec.num_speakers = 3;
  spec.utterances_per_speaker = 4;
  spec.feature_dim = 7;
  spec.spread = 0.3;
  spec.seed = 12345;
  const Dataset data = generate(spec);
  std::stringstream ss;
  write_dataset(ss, spec, data.samples);
  const std::string text = ss.str();
  const LoadedDataset back = read_dataset(ss);
  EXPECT_EQ(back.spec, spec);
  EXPECT_EQ(back.samples, data.samples);

  std::stringstream again;
  write_dataset(again, back.spec, back.samples);
  EXPECT_EQ(again.str(), text);
}

TEST(DatasetIo, RejectsMalformed) {
  std::istringstream bad_header("hello\n");
  EXPECT_THROW(read_dataset(bad_header), Error);
  std::istringstream short_row(
      "# aamsupcon-dataset v1 num_speakers=2 utterances_per_speaker=2 feature_dim=3 spread=0.1 seed=1\n"
      "0 original 1 2\n");
  EXPECT_THROW(read_dataset(short_row), Error);
}
