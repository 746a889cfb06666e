#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string_view>
#include <vector>

#include "aamsupcon/matrix.hpp"

namespace aamsupcon {

inline constexpr double kDefaultTemperature = 0.07;
inline constexpr double kDefaultMargin = 0.2;
inline constexpr double kDefaultScale = 30.0;

using Label = std::size_t;

enum class LossKind { kSoftmax, kArcFace, kSupCon, kAamSupCon };

std::string_view loss_kind_name(LossKind kind) noexcept;
/// Accepts "softmax", "arcface", "supcon", "aamsupcon" (case-insensitive).
LossKind parse_loss_kind(std::string_view name);

/// Which indices enter the contrastive denominator for an anchor.
///  - kAllNonAnchor: every j != i (positives included).
///  - kStrictNegatives: only j with a different label.
enum class DenominatorConvention { kAllNonAnchor, kStrictNegatives };

std::string_view convention_name(DenominatorConvention c) noexcept;
DenominatorConvention parse_convention(std::string_view name);

struct LossInputs {
  Matrix embeddings;     // N x d, unit rows
  std::vector<Label> labels;
  Matrix class_weights;  // C x d, unit rows; may be empty for the contrastive loss alone
  double temperature = kDefaultTemperature;
  double margin = kDefaultMargin;
  double scale = kDefaultScale;

  /// Checks shapes, unit norms, label range and hyperparameter ranges.
  void validate() const;
};

struct LossOutput {
  double value = 0.0;
  Matrix grad_embeddings;     // dL/dz, raw Euclidean gradient
  Matrix grad_class_weights;  // dL/dW; zero for the contrastive loss
};

struct IndexSets {
  std::vector<std::vector<std::size_t>> positives;   // P(i), ascending
  std::vector<std::vector<std::size_t>> candidates;  // A(i), ascending
};

/// Throws BatchTooSmall for fewer than two labels and AnchorWithoutPositive
/// when some label occurs once.
IndexSets build_index_sets(std::span<const Label> labels, DenominatorConvention convention);

/// Supervised contrastive loss, summed over anchors:
///   sum_i -1/|P(i)| sum_{p in P(i)} log( exp(z_i.z_p/t) / sum_{a in A(i)} exp(z_i.z_a/t) )
LossOutput supcon_loss(const LossInputs& inputs, const IndexSets& sets);

/// Additive angular margin softmax, averaged over samples. The target logit is
/// s * margin_logit(z_i . W_y, m); every other logit is s * z_i . W_j.
LossOutput arcface_loss(const LossInputs& inputs);

/// Cross-entropy over logits s * z W^T, averaged over samples.
LossOutput softmax_loss(const LossInputs& inputs);

/// arcface_loss + supcon_weight * supcon_loss, values and gradients alike.
LossOutput aamsupcon_loss(const LossInputs& inputs, const IndexSets& sets,
                          double supcon_weight = 1.0);

struct LossSpec {
  LossKind kind = LossKind::kAamSupCon;
  double supcon_weight = 1.0;
  DenominatorConvention convention = DenominatorConvention::kAllNonAnchor;
};

enum class InputCheck { kValidate, kSkip };

/// Single dispatch point for all four losses. kSkip bypasses the unit-norm
/// checks, which finite differencing has to perturb away from.
LossOutput evaluate_loss(const LossSpec& spec, const LossInputs& inputs, const IndexSets& sets,
                         InputCheck check = InputCheck::kValidate);

bool uses_class_weights(LossKind kind) noexcept;

double log_sum_exp(std::span<const double> xs) noexcept;

// ---------------------------------------------------------------------------
// Finite-difference gradient verification.

struct GradCheckOptions {
  double step = 1e-6;
  /// Relative error is |a - n| / max(|a|, |n|, floor). The floor keeps
  /// components whose true gradient is ~0 from dividing roundoff by roundoff.
  double denominator_floor = 1e-2;
  /// Test hook: mutates the analytic gradient before comparison.
  std::function<void(LossOutput&)> corrupt;
};

struct GradCheckReport {
  double max_relative_error = 0.0;
  double mean_relative_error = 0.0;
  double max_absolute_error = 0.0;
  std::size_t components = 0;
};

double relative_error(double analytic, double numeric, double floor) noexcept;

/// Compares the analytic gradient of the selected loss against central differences
/// over every embedding entry and, for losses with class weights, every class
/// weight entry. The loss is treated as a function of the raw matrices.
GradCheckReport grad_check(const LossSpec& spec, const LossInputs& inputs,
                           const GradCheckOptions& options = {});

}  // namespace aamsupcon
