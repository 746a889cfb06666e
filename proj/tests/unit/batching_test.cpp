#include <gtest/gtest.h>

#include <map>

#include "aamsupcon/batching.hpp"
#include "aamsupcon/errors.hpp"
#include "aamsupcon/losses.hpp"
#include "aamsupcon/synthdata.hpp"

using namespace aamsupcon;

namespace {

Sample make_sample(Label id, std::vector<double> features) {
  return Sample{std::move(features), id, ViewTag::kOriginal};
}

std::vector<Sample> toy_dataset(std::size_t speakers, std::size_t utterances) {
  DatasetSpec spec;
  spec.num_speakers = speakers;
  spec.utterances_per_speaker = utterances;
  spec.feature_dim = 16;
  return generate(spec).samples;
}

}  // namespace

TEST(Augment, ZeroPolicyIsIdentity) {
  const Sample x = make_sample(3, {0.5, -1.0, 2.0, 0.25});
  AugmentPolicy policy;
  policy.noise_stddev = 0.0;
  policy.mask_max = 0;
  Rng rng(1);
  const Sample y = augment(x, policy, rng);
  EXPECT_EQ(y.features, x.features);
  EXPECT_EQ(y.speaker_id, 3u);
  EXPECT_EQ(y.view_tag, ViewTag::kAugmented);
}

TEST(Augment, FullMaskZeroesEverything) {
  const Sample x = make_sample(7, {1.0, 2.0, 3.0, 4.0, 5.0});
  AugmentPolicy policy;
  policy.mask_max = 5;
  policy.forced_mask_length = 5;
  Rng rng(2);
  const Sample y = augment(x, policy, rng);
  for (double v : y.features) EXPECT_EQ(v, 0.0);
  EXPECT_EQ(y.speaker_id, 7u);
  EXPECT_EQ(y.features.size(), 5u);
}

TEST(Augment, DeterministicPerSeed) {
  const Sample x = make_sample(1, std::vector<double>(32, 0.3));
  AugmentPolicy policy;
  Rng a(99), b(99), c(100);
  const Sample ya = augment(x, policy, a);
  const Sample yb = augment(x, policy, b);
  const Sample yc = augment(x, policy, c);
  EXPECT_EQ(ya, yb);
  EXPECT_NE(ya, yc);
}

TEST(Augment, MaskIsContiguousAndBounded) {
  const Sample x = make_sample(0, std::vector<double>(40, 1.0));
  AugmentPolicy policy;
  policy.noise_stddev = 0.0;
  EXPECT_EQ(policy.effective_mask_max(40), 5u);
  Rng rng(4);
  for (int trial = 0; trial < 200; ++trial) {
    const Sample y = augment(x, policy, rng);
    std::size_t first = y.features.size(), last = 0, zeros = 0;
    for (std::size_t k = 0; k < y.features.size(); ++k) {
      if (y.features[k] == 0.0) {
        first = std::min(first, k);
        last = k;
        ++zeros;
      }
    }
    EXPECT_LE(zeros, 5u);
    if (zeros > 0) EXPECT_EQ(last - first + 1, zeros);
  }
}

TEST(Augment, RejectsAugmentedInput) {
  Sample x = make_sample(0, {1.0, 2.0});
  x.view_tag = ViewTag::kAugmented;
  Rng rng(1);
  try {
    augment(x, {}, rng);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kAlreadyAugmented);
  }
}

TEST(BuildBatch, CountsAndAlignment) {
  const auto data = toy_dataset(6, 5);
  Rng rng(3);
  const MultiviewBatch batch = build_batch(data, 4, 2, {}, rng);
  ASSERT_EQ(batch.size(), 16u);
  EXPECT_EQ(batch.originals, 8u);
  std::map<Label, int> counts;
  for (Label y : batch.labels) ++counts[y];
  EXPECT_EQ(counts.size(), 4u);
  for (const auto& [label, count] : counts) EXPECT_EQ(count, 4) << label;
  for (std::size_t k = 0; k < batch.originals; ++k) {
    EXPECT_EQ(batch.samples[k].speaker_id, batch.samples[k + 8].speaker_id);
    EXPECT_EQ(batch.samples[k].view_tag, ViewTag::kOriginal);
    EXPECT_EQ(batch.samples[k + 8].view_tag, ViewTag::kAugmented);
    EXPECT_EQ(batch.labels[k], batch.samples[k].speaker_id);
  }
}

TEST(BuildBatch, OriginalsDrawnWithoutReplacement) {
  const auto data = toy_dataset(4, 3);
  Rng rng(8);
  for (int trial = 0; trial < 50; ++trial) {
    const MultiviewBatch batch = build_batch(data, 4, 3, {}, rng);
    for (std::size_t a = 0; a < batch.originals; ++a) {
      for (std::size_t b = a + 1; b < batch.originals; ++b) {
        EXPECT_NE(batch.samples[a].features, batch.samples[b].features);
      }
    }
  }
}

TEST(BuildBatch, InsufficientSpeakersAndUtterances) {
  const auto data = toy_dataset(3, 2);
  Rng rng(1);
  try {
    build_batch(data, 4, 1, {}, rng);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInsufficientSpeakers);
  }
  try {
    build_batch(data, 2, 3, {}, rng);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInsufficientUtterances);
  }
}

TEST(BuildBatch, EveryAnchorHasAPositive) {
  const auto data = toy_dataset(8, 4);
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    Rng rng(seed);
    const MultiviewBatch batch = build_batch(data, 1 + seed % 8, 1 + seed % 4, {}, rng);
    for (auto conv : {DenominatorConvention::kAllNonAnchor, DenominatorConvention::kStrictNegatives}) {
      if (conv == DenominatorConvention::kStrictNegatives && seed % 8 == 0) continue;
      const IndexSets sets = build_index_sets(batch.labels, conv);
      for (const auto& p : sets.positives) EXPECT_GE(p.size(), 1u);
    }
  }
}

TEST(BuildBatch, SeedDeterminism) {
  const auto data = toy_dataset(8, 4);
  Rng a(5), b(5), c(6);
  const MultiviewBatch ba = build_batch(data, 4, 2, {}, a);
  const MultiviewBatch bb = build_batch(data, 4, 2, {}, b);
  const MultiviewBatch bc = build_batch(data, 4, 2, {}, c);
  EXPECT_EQ(ba.samples, bb.samples);
  EXPECT_EQ(ba.features(), bb.features());
  EXPECT_NE(ba.features(), bc.features());
}

TEST(BatchFromSamples, KeepsOrder) {
  std::vector<Sample> s{make_sample(2, {1.0}), make_sample(0, {2.0})};
  const MultiviewBatch b = batch_from_samples(s);
  EXPECT_EQ(b.labels, (std::vector<Label>{2, 0}));
  EXPECT_EQ(b.features()(1, 0), 2.0);
}
