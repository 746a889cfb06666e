#include "aamsupcon/losses.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <string>

#include "aamsupcon/errors.hpp"
#include "aamsupcon/geometry.hpp"
#include "aamsupcon/parallel.hpp"

namespace aamsupcon {

namespace {

std::string lowercase(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

void check_unit_rows(const Matrix& m, const char* what) {
  for (std::size_t r = 0; r < m.rows(); ++r) {
    const double norm = std::sqrt(squared_norm(m.row(r)));
    if (std::abs(norm - 1.0) > kUnitNormTolerance) {
      throw Error(ErrorCode::kInvalidInput, std::string(what) + " row " + std::to_string(r) +
                                                " has norm " + std::to_string(norm));
    }
  }
}

void check_class_weights(const LossInputs& in) {
  if (in.class_weights.rows() == 0) {
    throw Error(ErrorCode::kInvalidInput, "this loss requires class weights");
  }
  if (!(in.scale > 0.0)) {
    throw Error(ErrorCode::kInvalidScale, "scale must be > 0, got " + std::to_string(in.scale));
  }
}

void check_sets(const LossInputs& in, const IndexSets& sets) {
  const std::size_t n = in.embeddings.rows();
  if (sets.positives.size() != n || sets.candidates.size() != n) {
    throw Error(ErrorCode::kShapeMismatch, "index sets were built for a different batch size");
  }
}

LossOutput zero_output(const LossInputs& in) {
  LossOutput out;
  out.grad_embeddings = Matrix(in.embeddings.rows(), in.embeddings.cols());
  out.grad_class_weights = Matrix(in.class_weights.rows(), in.class_weights.cols());
  return out;
}

LossOutput supcon_unchecked(const LossInputs& in, const IndexSets& sets) {
  const std::size_t n = in.embeddings.rows();
  const Matrix& z = in.embeddings;
  const double inv_t = 1.0 / in.temperature;

  // coeff(i, j) = dL / d(z_i . z_j / t) for the term owned by anchor i.
  Matrix coeff(n, n);
  std::vector<double> terms(n);
  parallel_for(n, [&](std::size_t i) {
    const auto& cand = sets.candidates[i];
    const auto& pos = sets.positives[i];
    std::vector<double> logits(cand.size());
    for (std::size_t k = 0; k < cand.size(); ++k) logits[k] = dot(z.row(i), z.row(cand[k])) * inv_t;
    const double lse = log_sum_exp(logits);
    for (std::size_t k = 0; k < cand.size(); ++k) coeff(i, cand[k]) += std::exp(logits[k] - lse);

    const double inv_p = 1.0 / static_cast<double>(pos.size());
    double pos_sum = 0.0;
    for (std::size_t p : pos) {
      pos_sum += dot(z.row(i), z.row(p)) * inv_t;
      coeff(i, p) -= inv_p;
    }
    terms[i] = lse - inv_p * pos_sum;
  });

  LossOutput out = zero_output(in);
  for (double t : terms) out.value += t;

  parallel_for(n, [&](std::size_t k) {
    auto g = out.grad_embeddings.row(k);
    for (std::size_t j = 0; j < n; ++j) {
      const double c = (coeff(k, j) + coeff(j, k)) * inv_t;
      if (c == 0.0) continue;
      const auto zj = z.row(j);
      for (std::size_t d = 0; d < g.size(); ++d) g[d] += c * zj[d];
    }
  });
  return out;
}

// Shared by arcface (margin > 0 possible) and the plain softmax path so the
// two only differ in how the target logit is formed.
template <typename TargetLogit, typename TargetSlope>
LossOutput margin_softmax_unchecked(const LossInputs& in, TargetLogit target_logit,
                                    TargetSlope target_slope) {
  const std::size_t n = in.embeddings.rows();
  const std::size_t classes = in.class_weights.rows();
  const double s = in.scale;
  const double inv_n = 1.0 / static_cast<double>(n);
  const Matrix cosines = multiply_transposed(in.embeddings, in.class_weights);

  // dcos(i, j) = dL / d(z_i . W_j)
  Matrix dcos(n, classes);
  std::vector<double> terms(n);
  parallel_for(n, [&](std::size_t i) {
    const Label y = in.labels[i];
    std::vector<double> logits(classes);
    for (std::size_t j = 0; j < classes; ++j) logits[j] = s * cosines(i, j);
    logits[y] = s * target_logit(cosines(i, y));
    const double lse = log_sum_exp(logits);
    terms[i] = lse - logits[y];
    for (std::size_t j = 0; j < classes; ++j) {
      const double p = std::exp(logits[j] - lse);
      dcos(i, j) = (p - (j == y ? 1.0 : 0.0)) * inv_n * s;
    }
    dcos(i, y) *= target_slope(cosines(i, y));
  });

  LossOutput out = zero_output(in);
  for (double t : terms) out.value += t;
  out.value *= inv_n;

  parallel_for(n, [&](std::size_t i) {
    auto g = out.grad_embeddings.row(i);
    for (std::size_t j = 0; j < classes; ++j) {
      const auto w = in.class_weights.row(j);
      for (std::size_t d = 0; d < g.size(); ++d) g[d] += dcos(i, j) * w[d];
    }
  });
  parallel_for(classes, [&](std::size_t j) {
    auto g = out.grad_class_weights.row(j);
    for (std::size_t i = 0; i < n; ++i) {
      const auto z = in.embeddings.row(i);
      for (std::size_t d = 0; d < g.size(); ++d) g[d] += dcos(i, j) * z[d];
    }
  });
  return out;
}

LossOutput arcface_unchecked(const LossInputs& in) {
  const double m = in.margin;
  return margin_softmax_unchecked(
      in, [m](double c) { return margin_logit(c, m); },
      [m](double c) { return margin_logit_derivative(c, m); });
}

LossOutput softmax_unchecked(const LossInputs& in) {
  return margin_softmax_unchecked(
      in, [](double c) { return c; }, [](double) { return 1.0; });
}

LossOutput combine(LossOutput arc, const LossOutput& con, double weight) {
  arc.value += weight * con.value;
  auto& g = arc.grad_embeddings.values();
  const auto& gc = con.grad_embeddings.values();
  for (std::size_t k = 0; k < g.size(); ++k) g[k] += weight * gc[k];
  return arc;
}

LossOutput dispatch(const LossSpec& spec, const LossInputs& in, const IndexSets& sets) {
  switch (spec.kind) {
    case LossKind::kSoftmax: return softmax_unchecked(in);
    case LossKind::kArcFace: return arcface_unchecked(in);
    case LossKind::kSupCon: return supcon_unchecked(in, sets);
    case LossKind::kAamSupCon:
      return combine(arcface_unchecked(in), supcon_unchecked(in, sets), spec.supcon_weight);
  }
  throw Error(ErrorCode::kInvalidInput, "unknown loss kind");
}

}  // namespace

std::string_view loss_kind_name(LossKind kind) noexcept {
  switch (kind) {
    case LossKind::kSoftmax: return "softmax";
    case LossKind::kArcFace: return "arcface";
    case LossKind::kSupCon: return "supcon";
    case LossKind::kAamSupCon: return "aamsupcon";
  }
  return "unknown";
}

LossKind parse_loss_kind(std::string_view name) {
  const std::string n = lowercase(name);
  if (n == "softmax") return LossKind::kSoftmax;
  if (n == "arcface") return LossKind::kArcFace;
  if (n == "supcon") return LossKind::kSupCon;
  if (n == "aamsupcon") return LossKind::kAamSupCon;
  throw Error(ErrorCode::kInvalidInput, "unknown loss kind '" + std::string(name) + "'");
}

std::string_view convention_name(DenominatorConvention c) noexcept {
  return c == DenominatorConvention::kAllNonAnchor ? "all_non_anchor" : "strict_negatives";
}

DenominatorConvention parse_convention(std::string_view name) {
  const std::string n = lowercase(name);
  if (n == "all_non_anchor") return DenominatorConvention::kAllNonAnchor;
  if (n == "strict_negatives") return DenominatorConvention::kStrictNegatives;
  throw Error(ErrorCode::kInvalidInput, "unknown denominator convention '" + std::string(name) + "'");
}

bool uses_class_weights(LossKind kind) noexcept { return kind != LossKind::kSupCon; }

double log_sum_exp(std::span<const double> xs) noexcept {
  if (xs.empty()) return -std::numeric_limits<double>::infinity();
  const double hi = *std::max_element(xs.begin(), xs.end());
  if (!std::isfinite(hi)) return hi;
  double acc = 0.0;
  for (double x : xs) acc += std::exp(x - hi);
  return hi + std::log(acc);
}

void LossInputs::validate() const {
  const std::size_t n = embeddings.rows();
  if (labels.size() != n) {
    throw Error(ErrorCode::kShapeMismatch, std::to_string(labels.size()) + " labels for " +
                                               std::to_string(n) + " embeddings");
  }
  if (embeddings.cols() < 2) throw Error(ErrorCode::kInvalidInput, "embedding dimension must be >= 2");
  if (!(temperature > 0.0)) {
    throw Error(ErrorCode::kInvalidTemperature,
                "temperature must be > 0, got " + std::to_string(temperature));
  }
  if (!(scale > 0.0)) {
    throw Error(ErrorCode::kInvalidScale, "scale must be > 0, got " + std::to_string(scale));
  }
  validate_margin(margin);
  check_unit_rows(embeddings, "embedding");
  if (class_weights.rows() > 0) {
    if (class_weights.cols() != embeddings.cols()) {
      throw Error(ErrorCode::kDimensionMismatch, "class weights have dimension " +
                                                     std::to_string(class_weights.cols()) +
                                                     ", embeddings " +
                                                     std::to_string(embeddings.cols()));
    }
    check_unit_rows(class_weights, "class weight");
    for (Label y : labels) {
      if (y >= class_weights.rows()) {
        throw Error(ErrorCode::kInvalidInput, "label " + std::to_string(y) + " >= class count " +
                                                  std::to_string(class_weights.rows()));
      }
    }
  }
}

IndexSets build_index_sets(std::span<const Label> labels, DenominatorConvention convention) {
  const std::size_t n = labels.size();
  if (n < 2) throw Error(ErrorCode::kBatchTooSmall, "need at least 2 samples, got " + std::to_string(n));
  IndexSets sets;
  sets.positives.resize(n);
  sets.candidates.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      const bool same = labels[j] == labels[i];
      if (same) sets.positives[i].push_back(j);
      if (convention == DenominatorConvention::kAllNonAnchor || !same) sets.candidates[i].push_back(j);
    }
    if (sets.positives[i].empty()) {
      throw Error(ErrorCode::kAnchorWithoutPositive,
                  "anchor " + std::to_string(i) + " (label " + std::to_string(labels[i]) +
                      ") has no positive in the batch");
    }
    if (sets.candidates[i].empty()) {
      throw Error(ErrorCode::kInvalidInput,
                  "anchor " + std::to_string(i) + " has an empty contrastive denominator");
    }
  }
  return sets;
}

LossOutput supcon_loss(const LossInputs& inputs, const IndexSets& sets) {
  inputs.validate();
  check_sets(inputs, sets);
  return supcon_unchecked(inputs, sets);
}

LossOutput arcface_loss(const LossInputs& inputs) {
  inputs.validate();
  check_class_weights(inputs);
  return arcface_unchecked(inputs);
}

LossOutput softmax_loss(const LossInputs& inputs) {
  inputs.validate();
  check_class_weights(inputs);
  return softmax_unchecked(inputs);
}

LossOutput aamsupcon_loss(const LossInputs& inputs, const IndexSets& sets, double supcon_weight) {
  inputs.validate();
  check_class_weights(inputs);
  check_sets(inputs, sets);
  return combine(arcface_unchecked(inputs), supcon_unchecked(inputs, sets), supcon_weight);
}

LossOutput evaluate_loss(const LossSpec& spec, const LossInputs& inputs, const IndexSets& sets,
                         InputCheck check) {
  if (check == InputCheck::kValidate) inputs.validate();
  if (uses_class_weights(spec.kind)) check_class_weights(inputs);
  if (spec.kind != LossKind::kSoftmax && spec.kind != LossKind::kArcFace) check_sets(inputs, sets);
  return dispatch(spec, inputs, sets);
}

double relative_error(double analytic, double numeric, double floor) noexcept {
  const double denom = std::max({std::abs(analytic), std::abs(numeric), floor});
  return std::abs(analytic - numeric) / denom;
}

GradCheckReport grad_check(const LossSpec& spec, const LossInputs& inputs,
                           const GradCheckOptions& options) {
  if (!(options.step > 0.0)) throw Error(ErrorCode::kInvalidInput, "finite-difference step must be > 0");
  const IndexSets sets = build_index_sets(inputs.labels, spec.convention);
  LossOutput analytic = evaluate_loss(spec, inputs, sets);
  if (options.corrupt) options.corrupt(analytic);

  LossInputs probe = inputs;
  GradCheckReport report;
  double sum = 0.0;
  const double h = options.step;

  auto sweep = [&](Matrix& target, const Matrix& grad) {
    auto& values = target.values();
    for (std::size_t k = 0; k < values.size(); ++k) {
      const double original = values[k];
      values[k] = original + h;
      const double plus = evaluate_loss(spec, probe, sets, InputCheck::kSkip).value;
      values[k] = original - h;
      const double minus = evaluate_loss(spec, probe, sets, InputCheck::kSkip).value;
      values[k] = original;
      const double numeric = (plus - minus) / (2.0 * h);
      const double a = grad.values()[k];
      const double rel = relative_error(a, numeric, options.denominator_floor);
      report.max_relative_error = std::max(report.max_relative_error, rel);
      report.max_absolute_error = std::max(report.max_absolute_error, std::abs(a - numeric));
      sum += rel;
      ++report.components;
    }
  };
  sweep(probe.embeddings, analytic.grad_embeddings);
  if (uses_class_weights(spec.kind)) sweep(probe.class_weights, analytic.grad_class_weights);
  if (report.components > 0) report.mean_relative_error = sum / static_cast<double>(report.components);
  return report;
}

}  // namespace aamsupcon
