#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

#include "aamsupcon/batching.hpp"
#include "aamsupcon/matrix.hpp"

namespace aamsupcon {

/// Which representation the class-weight (margin softmax) head reads:
/// the projection output z or the encoder output h, each L2-normalized.
enum class HeadInput { kProjection, kEncoder };

std::string_view head_input_name(HeadInput h) noexcept;
HeadInput parse_head_input(std::string_view name);

struct NetworkDims {
  std::size_t input = 40;
  std::vector<std::size_t> encoder_hidden{64, 64};
  std::size_t projection_hidden = 128;
  std::size_t output = 128;
  std::size_t classes = 16;
  HeadInput head_input = HeadInput::kProjection;

  /// Width of h; equals `input` when the encoder has no layers.
  std::size_t encoder_output() const noexcept;
  std::size_t head_dim() const noexcept;
  /// Throws InvalidDims.
  void validate() const;
  friend bool operator==(const NetworkDims&, const NetworkDims&) = default;
};

struct DenseLayer {
  Matrix weight;  // out x in
  std::vector<double> bias;
  friend bool operator==(const DenseLayer&, const DenseLayer&) = default;
};

/// Encoder f (relu MLP with biases), projection g(h) = W2 relu(W1 h) without
/// biases, and the class-weight matrix used by the margin softmax head.
/// The same struct holds gradients.
struct NetworkParams {
  NetworkDims dims;
  std::uint64_t seed = 0;
  std::vector<DenseLayer> encoder;
  Matrix proj_w1;        // projection_hidden x encoder_output
  Matrix proj_w2;        // output x projection_hidden
  Matrix class_weights;  // classes x head_dim

  friend bool operator==(const NetworkParams&, const NetworkParams&) = default;
};

/// Visits every parameter tensor in a fixed order: encoder weight/bias pairs,
/// proj_w1, proj_w2, class_weights.
void for_each_tensor(NetworkParams& params, const std::function<void(std::span<double>)>& fn);
void for_each_tensor(const NetworkParams& params,
                     const std::function<void(std::span<const double>)>& fn);

/// Zero-valued params with the same shapes.
NetworkParams zeros_like(const NetworkParams& params);
std::size_t parameter_count(const NetworkParams& params);

/// He-normal weights (variance 2 / fan_in), zero biases, unit class weights.
NetworkParams init_params(const NetworkDims& dims, std::uint64_t seed);

struct ForwardTrace {
  Matrix input;
  std::vector<Matrix> encoder_pre;   // per layer, before relu
  std::vector<Matrix> encoder_post;  // per layer, after relu
  Matrix proj_pre;                   // W1 h
  Matrix proj_post;                  // relu(W1 h)
  Matrix projection;                 // u = W2 relu(W1 h)
  std::vector<double> projection_norms;
  Matrix embeddings;                 // z = u / |u|
  /// Only filled when the head reads h.
  std::vector<double> encoder_norms;
  Matrix encoder_embeddings;
  std::uint64_t params_fingerprint = 0;

  const Matrix& encoder_output() const noexcept {
    return encoder_post.empty() ? input : encoder_post.back();
  }
};

/// Throws ShapeMismatch for a wrong feature width and ZeroVector when a
/// projection (or, with the encoder head, an encoder output) is all zero.
ForwardTrace forward(const NetworkParams& params, const Matrix& features);
ForwardTrace forward(const NetworkParams& params, const MultiviewBatch& batch);

/// Normalized encoder outputs h / |h| for every row. Throws ZeroVector.
Matrix normalized_encoder_output(const ForwardTrace& trace);

/// Gradients of a scalar loss for every parameter except class_weights (left
/// zero; see class_weight_gradient) given dL/dz and, when the head reads h,
/// dL/d(h/|h|). Throws TraceMismatch if trace did not come from params.
NetworkParams backward(const NetworkParams& params, const ForwardTrace& trace,
                       const Matrix& grad_embeddings,
                       const Matrix* grad_encoder_embeddings = nullptr);

/// Row-wise L2 normalization of the class weights, as fed to the losses.
Matrix normalized_class_weights(const NetworkParams& params);

/// Chains dL/d(normalized W) through the row normalization to the raw weights.
Matrix class_weight_gradient(const Matrix& raw_weights, const Matrix& grad_normalized);

/// dL/du for z = u / norm: (g - z (z . g)) / norm.
std::vector<double> normalize_backward(std::span<const double> unit, double norm,
                                       std::span<const double> grad_unit);

std::uint64_t fingerprint(const NetworkParams& params);

// Checkpoint container, little-endian:
//   char[8]  magic "AAMSCKPT"
//   u32      format version (1)
//   u32      head input (0 = projection, 1 = encoder)
//   u64      seed
//   u64      input, u64 encoder layer count L, u64 x L widths,
//   u64      projection_hidden, u64 output, u64 classes
//   tensors in for_each_tensor order, each: u64 rows, u64 cols, f64 x rows*cols
// Biases are stored as 1 x n tensors.
inline constexpr char kCheckpointMagic[8] = {'A', 'A', 'M', 'S', 'C', 'K', 'P', 'T'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

void write_checkpoint(std::ostream& os, const NetworkParams& params);
NetworkParams read_checkpoint(std::istream& is);
void save_checkpoint(const std::filesystem::path& path, const NetworkParams& params);
NetworkParams load_checkpoint(const std::filesystem::path& path);

}  // namespace aamsupcon
