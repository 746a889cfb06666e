#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>
#include <vector>

#include "aamsupcon/errors.hpp"
#include "aamsupcon/losses.hpp"
#include "aamsupcon/parallel.hpp"
#include "oracles.hpp"

using namespace aamsupcon;

namespace {

Matrix rows_from_angles(std::initializer_list<double> degrees) {
  Matrix m(degrees.size(), 2);
  std::size_t r = 0;
  for (double deg : degrees) {
    const double rad = deg * std::numbers::pi / 180.0;
    m(r, 0) = std::cos(rad);
    m(r, 1) = std::sin(rad);
    ++r;
  }
  return m;
}

Matrix basis_rows(std::size_t d, std::initializer_list<std::size_t> axes) {
  Matrix m(axes.size(), d);
  std::size_t r = 0;
  for (std::size_t a : axes) m(r++, a) = 1.0;
  return m;
}

double max_abs_diff(const Matrix& a, const Matrix& b) {
  double worst = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) worst = std::max(worst, std::abs(a.values()[k] - b.values()[k]));
  return worst;
}

}  // namespace

TEST(IndexSets, AllNonAnchor) {
  const std::vector<Label> labels{0, 0, 1, 1};
  const IndexSets s = build_index_sets(labels, DenominatorConvention::kAllNonAnchor);
  EXPECT_EQ(s.positives[0], (std::vector<std::size_t>{1}));
  EXPECT_EQ(s.candidates[0], (std::vector<std::size_t>{1, 2, 3}));
  EXPECT_EQ(s.positives[3], (std::vector<std::size_t>{2}));
  EXPECT_EQ(s.candidates[3], (std::vector<std::size_t>{0, 1, 2}));
}

TEST(IndexSets, StrictNegatives) {
  const std::vector<Label> labels{0, 0, 1, 1};
  const IndexSets s = build_index_sets(labels, DenominatorConvention::kStrictNegatives);
  EXPECT_EQ(s.positives[0], (std::vector<std::size_t>{1}));
  EXPECT_EQ(s.candidates[0], (std::vector<std::size_t>{2, 3}));
}

TEST(IndexSets, Errors) {
  const std::vector<Label> lonely{0, 1};
  try {
    build_index_sets(lonely, DenominatorConvention::kAllNonAnchor);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kAnchorWithoutPositive);
  }
  const std::vector<Label> one{0};
  try {
    build_index_sets(one, DenominatorConvention::kAllNonAnchor);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kBatchTooSmall);
  }
}

TEST(IndexSets, AnchorExcludedAndPositivesInsideCandidates) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    const auto labels = oracle::random_paired_labels(12, 4, rng);
    const IndexSets s = build_index_sets(labels, DenominatorConvention::kAllNonAnchor);
    for (std::size_t i = 0; i < labels.size(); ++i) {
      EXPECT_EQ(std::count(s.positives[i].begin(), s.positives[i].end(), i), 0);
      EXPECT_EQ(std::count(s.candidates[i].begin(), s.candidates[i].end(), i), 0);
      EXPECT_TRUE(std::includes(s.candidates[i].begin(), s.candidates[i].end(), s.positives[i].begin(),
                                s.positives[i].end()));
    }
  }
}

TEST(SupCon, TwoIdenticalEmbeddingsGiveZero) {
  LossInputs in;
  in.embeddings = rows_from_angles({30.0, 30.0});
  in.labels = {0, 0};
  const IndexSets s = build_index_sets(in.labels, DenominatorConvention::kAllNonAnchor);
  EXPECT_EQ(supcon_loss(in, s).value, 0.0);
}

TEST(SupCon, FourPointCircleMatchesOracle) {
  LossInputs in;
  in.embeddings = rows_from_angles({0.0, 10.0, 170.0, 180.0});
  in.labels = {0, 0, 1, 1};
  in.temperature = 0.07;

  const double all = supcon_loss(in, build_index_sets(in.labels, DenominatorConvention::kAllNonAnchor)).value;
  const double strict =
      supcon_loss(in, build_index_sets(in.labels, DenominatorConvention::kStrictNegatives)).value;

  EXPECT_NEAR(all, oracle::supcon(in.embeddings, in.labels, 0.07, false), 1e-10);
  EXPECT_NEAR(strict, oracle::supcon(in.embeddings, in.labels, 0.07, true), 1e-10);
  // 40-digit evaluations of the same sums.
  EXPECT_NEAR(all, 5.6773212995703241e-12, 1e-14);
  EXPECT_NEAR(strict, -109.23554967729264486, 1e-10);
}

TEST(SupCon, MatchesOracleOnRandomBatches) {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 30; ++trial) {
    LossInputs in = oracle::random_inputs(10, 6, 3, rng);
    for (auto conv : {DenominatorConvention::kAllNonAnchor, DenominatorConvention::kStrictNegatives}) {
      if (conv == DenominatorConvention::kStrictNegatives &&
          std::all_of(in.labels.begin(), in.labels.end(), [&](Label y) { return y == in.labels[0]; })) {
        continue;
      }
      const double v = supcon_loss(in, build_index_sets(in.labels, conv)).value;
      EXPECT_NEAR(v, oracle::supcon(in.embeddings, in.labels, in.temperature,
                                    conv == DenominatorConvention::kStrictNegatives),
                  1e-10);
    }
  }
}

TEST(SupCon, ClassWeightGradientIsZero) {
  std::mt19937_64 rng(2);
  LossInputs in = oracle::random_inputs(6, 4, 3, rng);
  const auto out = supcon_loss(in, build_index_sets(in.labels, DenominatorConvention::kAllNonAnchor));
  EXPECT_TRUE(out.grad_class_weights.same_shape(in.class_weights));
  for (double g : out.grad_class_weights.values()) EXPECT_EQ(g, 0.0);
}

TEST(SupCon, ApproachesZeroAsClassesSeparate) {
  // Two classes, each a tight cluster; shrink the within-class angle and push
  // the clusters toward antipodes.
  double prev = std::numeric_limits<double>::infinity();
  for (double spread : {40.0, 20.0, 10.0, 5.0, 1.0, 0.0}) {
    LossInputs in;
    in.embeddings = rows_from_angles({0.0, spread, 180.0, 180.0 + spread});
    in.labels = {0, 0, 1, 1};
    const double v = supcon_loss(in, build_index_sets(in.labels, DenominatorConvention::kAllNonAnchor)).value;
    EXPECT_GE(v, 0.0);
    EXPECT_LT(v, prev);
    prev = v;
  }
  EXPECT_LT(prev, 1e-11);
}

TEST(SupCon, AppendingNegativeNeverDecreasesAnchorTerms) {
  // Anchor term: log-sum-exp over A(i) minus the mean positive logit.
  auto anchor_term = [](const LossInputs& x, const IndexSets& s, std::size_t i) {
    std::vector<double> logits;
    for (std::size_t a : s.candidates[i]) logits.push_back(dot(x.embeddings.row(i), x.embeddings.row(a)) / x.temperature);
    double pos = 0.0;
    for (std::size_t p : s.positives[i]) pos += dot(x.embeddings.row(i), x.embeddings.row(p)) / x.temperature;
    return log_sum_exp(logits) - pos / static_cast<double>(s.positives[i].size());
  };

  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 40; ++trial) {
    for (auto conv : {DenominatorConvention::kAllNonAnchor, DenominatorConvention::kStrictNegatives}) {
      LossInputs in = oracle::random_inputs(6, 5, 2, rng);
      in.class_weights = Matrix();
      if (std::all_of(in.labels.begin(), in.labels.end(), [&](Label y) { return y == in.labels[0]; })) continue;
      const auto sets = build_index_sets(in.labels, conv);

      // Append a two-sample class unseen so far: a new negative for every original anchor.
      LossInputs bigger = in;
      const Matrix extra = oracle::random_unit_rows(2, 5, rng);
      bigger.embeddings = Matrix(in.embeddings.rows() + 2, 5);
      auto& v = bigger.embeddings.values();
      std::copy(in.embeddings.values().begin(), in.embeddings.values().end(), v.begin());
      std::copy(extra.values().begin(), extra.values().end(), v.end() - static_cast<long>(extra.size()));
      bigger.labels.push_back(99);
      bigger.labels.push_back(99);
      const auto bigger_sets = build_index_sets(bigger.labels, conv);

      for (std::size_t i = 0; i < in.embeddings.rows(); ++i) {
        EXPECT_GT(anchor_term(bigger, bigger_sets, i), anchor_term(in, sets, i));
      }
      // Same decomposition reproduces the library total.
      double total = 0.0;
      for (std::size_t i = 0; i < in.embeddings.rows(); ++i) total += anchor_term(in, sets, i);
      EXPECT_NEAR(total, supcon_loss(in, sets).value, 1e-10);
    }
  }
}

TEST(ArcFace, ZeroMarginEqualsSoftmax) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    LossInputs in = oracle::random_inputs(8, 6, 4, rng);
    in.margin = 0.0;
    const auto a = arcface_loss(in);
    const auto s = softmax_loss(in);
    EXPECT_NEAR(a.value, s.value, 1e-12);
    EXPECT_LE(max_abs_diff(a.grad_embeddings, s.grad_embeddings), 1e-12);
    EXPECT_LE(max_abs_diff(a.grad_class_weights, s.grad_class_weights), 1e-12);
  }
}

TEST(ArcFace, SingleSampleClosedForm) {
  LossInputs in;
  in.embeddings = rows_from_angles({0.0});
  in.class_weights = rows_from_angles({0.0, 90.0});
  in.labels = {0};
  in.scale = 1.0;
  in.margin = 0.2;
  const double target = std::cos(0.2);
  const double expected = -std::log(std::exp(target) / (std::exp(target) + std::exp(0.0)));
  EXPECT_NEAR(arcface_loss(in).value, expected, 1e-14);
  EXPECT_NEAR(arcface_loss(in).value, 0.31866179113104297827, 1e-14);
}

TEST(ArcFace, MatchesOracle) {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 20; ++trial) {
    LossInputs in = oracle::random_inputs(7, 5, 3, rng);
    in.scale = 10.0;
    for (double m : {0.0, 0.2, 0.5}) {
      in.margin = m;
      EXPECT_NEAR(arcface_loss(in).value, oracle::arcface(in.embeddings, in.labels, in.class_weights, in.scale, m), 1e-10);
    }
  }
}

TEST(ArcFace, NonDecreasingInMargin) {
  std::mt19937_64 rng(13);
  int checked = 0;
  for (int trial = 0; trial < 100; ++trial) {
    LossInputs in = oracle::random_inputs(8, 4, 3, rng);
    bool room = true;
    for (std::size_t i = 0; i < 8; ++i) {
      room &= std::acos(dot(in.embeddings.row(i), in.class_weights.row(in.labels[i]))) + 0.3 < std::numbers::pi;
    }
    if (!room) continue;
    ++checked;
    double prev = -1.0;
    for (double m : {0.0, 0.1, 0.2, 0.3}) {
      in.margin = m;
      const double v = arcface_loss(in).value;
      EXPECT_GE(v, prev);
      prev = v;
    }
  }
  EXPECT_GT(checked, 50);
}

TEST(ArcFace, RejectsBadHyperparameters) {
  std::mt19937_64 rng(1);
  LossInputs in = oracle::random_inputs(4, 3, 2, rng);
  in.margin = 2.0;
  try {
    arcface_loss(in);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInvalidMargin);
  }
  in.margin = 0.2;
  in.scale = 0.0;
  try {
    arcface_loss(in);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInvalidScale);
  }
}

TEST(Softmax, UniformLogitsGiveLogC) {
  LossInputs in;
  in.embeddings = basis_rows(4, {0});
  in.class_weights = basis_rows(4, {1, 2, 3});
  in.labels = {2};
  EXPECT_NEAR(softmax_loss(in).value, std::log(3.0), 1e-15);
}

TEST(Softmax, ThreeClassArithmetic) {
  LossInputs in;
  in.embeddings = basis_rows(3, {0});
  in.class_weights = basis_rows(3, {0, 1, 2});
  in.labels = {0};
  in.scale = 1.0;
  EXPECT_NEAR(softmax_loss(in).value, 0.5514447139320511, 1e-12);
  EXPECT_NEAR(softmax_loss(in).value, -std::log(std::exp(1.0) / (std::exp(1.0) + 2.0)), 1e-15);
}

TEST(Softmax, StableAtLargeScale) {
  std::mt19937_64 rng(4);
  LossInputs in = oracle::random_inputs(6, 4, 3, rng);
  in.scale = 1000.0;  // naive exp overflows
  const auto out = softmax_loss(in);
  EXPECT_TRUE(std::isfinite(out.value));
  for (double g : out.grad_embeddings.values()) EXPECT_TRUE(std::isfinite(g));
}

TEST(AamSupCon, DecomposesIntoArcFacePlusSupCon) {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 20; ++trial) {
    LossInputs in = oracle::random_inputs(8, 5, 3, rng);
    const auto sets = build_index_sets(in.labels, DenominatorConvention::kAllNonAnchor);
    for (double lambda : {1.0, 0.5, 0.0}) {
      const auto total = aamsupcon_loss(in, sets, lambda);
      const auto arc = arcface_loss(in);
      const auto con = supcon_loss(in, sets);
      EXPECT_NEAR(total.value, arc.value + lambda * con.value, 1e-12);
      for (std::size_t k = 0; k < total.grad_embeddings.size(); ++k) {
        EXPECT_NEAR(total.grad_embeddings.values()[k],
                    arc.grad_embeddings.values()[k] + lambda * con.grad_embeddings.values()[k], 1e-12);
      }
      EXPECT_EQ(total.grad_class_weights, arc.grad_class_weights);
      if (lambda == 0.0) {
        EXPECT_EQ(total.value, arc.value);
        EXPECT_EQ(total.grad_embeddings, arc.grad_embeddings);
      }
    }
  }
}

TEST(Losses, PermutationEquivariance) {
  std::mt19937_64 rng(41);
  for (LossKind kind : {LossKind::kSoftmax, LossKind::kArcFace, LossKind::kSupCon, LossKind::kAamSupCon}) {
    LossInputs in = oracle::random_inputs(9, 4, 3, rng);
    std::vector<std::size_t> perm(9);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    LossInputs permuted = in;
    for (std::size_t r = 0; r < 9; ++r) {
      std::copy(in.embeddings.row(perm[r]).begin(), in.embeddings.row(perm[r]).end(), permuted.embeddings.row(r).begin());
      permuted.labels[r] = in.labels[perm[r]];
    }
    LossSpec spec{kind};
    const auto a = evaluate_loss(spec, in, build_index_sets(in.labels, spec.convention));
    const auto b = evaluate_loss(spec, permuted, build_index_sets(permuted.labels, spec.convention));
    EXPECT_NEAR(a.value, b.value, 1e-12) << loss_kind_name(kind);
    for (std::size_t r = 0; r < 9; ++r) {
      for (std::size_t d = 0; d < 4; ++d) {
        EXPECT_NEAR(b.grad_embeddings(r, d), a.grad_embeddings(perm[r], d), 1e-12);
      }
    }
  }
}

TEST(Losses, InputValidation) {
  std::mt19937_64 rng(6);
  LossInputs in = oracle::random_inputs(4, 3, 2, rng);
  in.embeddings(0, 0) += 0.1;
  EXPECT_THROW(softmax_loss(in), Error);
  in = oracle::random_inputs(4, 3, 2, rng);
  in.labels[0] = 7;
  EXPECT_THROW(softmax_loss(in), Error);
  in = oracle::random_inputs(4, 3, 2, rng);
  in.temperature = 0.0;
  try {
    supcon_loss(in, build_index_sets(in.labels, DenominatorConvention::kAllNonAnchor));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInvalidTemperature);
  }
}

TEST(Losses, ThreadCountDoesNotChangeBits) {
  std::mt19937_64 rng(77);
  LossInputs in = oracle::random_inputs(32, 16, 5, rng);
  const auto sets = build_index_sets(in.labels, DenominatorConvention::kAllNonAnchor);
  const std::size_t saved = thread_count();
  set_thread_count(1);
  const auto one = aamsupcon_loss(in, sets);
  set_thread_count(4);
  const auto four = aamsupcon_loss(in, sets);
  set_thread_count(saved);
  EXPECT_EQ(one.value, four.value);
  EXPECT_EQ(one.grad_embeddings, four.grad_embeddings);
  EXPECT_EQ(one.grad_class_weights, four.grad_class_weights);
}

TEST(Losses, KindNamesRoundTrip) {
  for (LossKind k : {LossKind::kSoftmax, LossKind::kArcFace, LossKind::kSupCon, LossKind::kAamSupCon}) {
    EXPECT_EQ(parse_loss_kind(loss_kind_name(k)), k);
  }
  EXPECT_EQ(parse_loss_kind("AAMSUPCON"), LossKind::kAamSupCon);
  EXPECT_THROW(parse_loss_kind("triplet"), Error);
}

// ---------------------------------------------------------------------------

TEST(GradCheck, SupConSmallBatch) {
  std::mt19937_64 rng(101);
  LossInputs in = oracle::random_inputs(4, 3, 2, rng);
  const auto r = grad_check({LossKind::kSupCon}, in, {.step = 1e-6});
  EXPECT_LT(r.max_relative_error, 1e-5);
  EXPECT_EQ(r.components, 4u * 3u);
}

TEST(GradCheck, ArcFaceAwayFromPoles) {
  std::mt19937_64 rng(102);
  LossInputs in = oracle::random_inputs(6, 4, 3, rng);
  for (std::size_t i = 0; i < 6; ++i) {
    for (std::size_t j = 0; j < 3; ++j) ASSERT_LT(std::abs(dot(in.embeddings.row(i), in.class_weights.row(j))), 0.999);
  }
  const auto r = grad_check({LossKind::kArcFace}, in);
  EXPECT_LT(r.max_relative_error, 1e-5);
  EXPECT_EQ(r.components, 6u * 4u + 3u * 4u);
}

TEST(GradCheck, AllKindsBothConventions) {
  std::mt19937_64 rng(103);
  for (auto conv : {DenominatorConvention::kAllNonAnchor, DenominatorConvention::kStrictNegatives}) {
    for (LossKind kind : {LossKind::kSoftmax, LossKind::kArcFace, LossKind::kSupCon, LossKind::kAamSupCon}) {
      LossInputs in = oracle::random_inputs(6, 4, 3, rng);
      while (std::all_of(in.labels.begin(), in.labels.end(), [&](Label y) { return y == in.labels[0]; })) {
        in = oracle::random_inputs(6, 4, 3, rng);
      }
      const auto r = grad_check({kind, 1.0, conv}, in);
      EXPECT_LT(r.max_relative_error, 1e-5) << loss_kind_name(kind) << " " << convention_name(conv);
    }
  }
}

TEST(GradCheck, CorruptedGradientIsCaught) {
  std::mt19937_64 rng(104);
  LossInputs in = oracle::random_inputs(6, 4, 3, rng);
  GradCheckOptions opts;
  opts.corrupt = [](LossOutput& out) { out.grad_embeddings(2, 1) += 0.5; };
  EXPECT_GT(grad_check({LossKind::kAamSupCon}, in, opts).max_relative_error, 1e-2);
}

TEST(GradCheck, SymmetricBatchHasSymmetricGradients) {
  LossInputs in;
  in.embeddings = Matrix(4, 3);
  for (std::size_t r = 0; r < 4; ++r) in.embeddings(r, 0) = 1.0;
  in.labels = {0, 0, 1, 1};
  in.class_weights = Matrix(2, 3);
  in.class_weights(0, 1) = 1.0;
  in.class_weights(1, 1) = 1.0;
  for (LossKind kind : {LossKind::kSoftmax, LossKind::kArcFace, LossKind::kSupCon, LossKind::kAamSupCon}) {
    const LossSpec spec{kind};
    const auto out = evaluate_loss(spec, in, build_index_sets(in.labels, spec.convention));
    for (std::size_t r = 1; r < 4; ++r) {
      for (std::size_t d = 0; d < 3; ++d) EXPECT_EQ(out.grad_embeddings(r, d), out.grad_embeddings(0, d));
    }
    for (std::size_t d = 0; d < 3; ++d) {
      EXPECT_EQ(out.grad_class_weights(0, d), out.grad_class_weights(1, d));
    }
  }
}

TEST(GradCheck, RejectsNonPositiveStep) {
  std::mt19937_64 rng(105);
  LossInputs in = oracle::random_inputs(4, 3, 2, rng);
  EXPECT_THROW(grad_check({LossKind::kSupCon}, in, {.step = 0.0}), Error);
}
