#include "aamsupcon/model.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <random>
#include <string>

#include "aamsupcon/errors.hpp"
#include "aamsupcon/geometry.hpp"
#include "aamsupcon/parallel.hpp"

static_assert(std::endian::native == std::endian::little,
              "checkpoint I/O assumes a little-endian host");

namespace aamsupcon {

namespace {

// pre = in * W^T + b, post = relu(pre)
void dense_relu(const Matrix& in, const Matrix& weight, const std::vector<double>* bias,
                Matrix& pre, Matrix& post) {
  pre = multiply_transposed(in, weight);
  if (bias != nullptr) {
    for (std::size_t n = 0; n < pre.rows(); ++n) {
      auto r = pre.row(n);
      for (std::size_t o = 0; o < r.size(); ++o) r[o] += (*bias)[o];
    }
  }
  post = pre;
  for (double& v : post.values()) v = std::max(v, 0.0);
}

// grad_weight += g^T x ; returns g * W
Matrix dense_backward(const Matrix& g, const Matrix& x, const Matrix& weight, Matrix& grad_weight) {
  parallel_for(weight.rows(), [&](std::size_t o) {
    auto gw = grad_weight.row(o);
    for (std::size_t n = 0; n < g.rows(); ++n) {
      const double go = g(n, o);
      if (go == 0.0) continue;
      const auto xr = x.row(n);
      for (std::size_t i = 0; i < gw.size(); ++i) gw[i] += go * xr[i];
    }
  });
  Matrix gx(g.rows(), weight.cols());
  parallel_for(g.rows(), [&](std::size_t n) {
    auto out = gx.row(n);
    for (std::size_t o = 0; o < weight.rows(); ++o) {
      const double go = g(n, o);
      if (go == 0.0) continue;
      const auto w = weight.row(o);
      for (std::size_t i = 0; i < out.size(); ++i) out[i] += go * w[i];
    }
  });
  return gx;
}

void relu_backward(Matrix& g, const Matrix& pre) {
  auto& gv = g.values();
  const auto& pv = pre.values();
  for (std::size_t k = 0; k < gv.size(); ++k) {
    if (!(pv[k] > 0.0)) gv[k] = 0.0;
  }
}

Matrix normalize_rows(const Matrix& m, std::vector<double>& norms) {
  Matrix out = m;
  norms.resize(m.rows());
  for (std::size_t r = 0; r < m.rows(); ++r) norms[r] = normalize_in_place(out.row(r));
  return out;
}

Matrix normalize_rows_backward(const Matrix& unit, const std::vector<double>& norms,
                               const Matrix& grad_unit) {
  Matrix out(unit.rows(), unit.cols());
  for (std::size_t r = 0; r < unit.rows(); ++r) {
    const auto g = normalize_backward(unit.row(r), norms[r], grad_unit.row(r));
    std::copy(g.begin(), g.end(), out.row(r).begin());
  }
  return out;
}

template <typename Params, typename Fn>
void visit_tensors(Params& p, Fn&& fn) {
  for (auto& layer : p.encoder) {
    fn(std::span(layer.weight.values()));
    fn(std::span(layer.bias));
  }
  fn(std::span(p.proj_w1.values()));
  fn(std::span(p.proj_w2.values()));
  fn(std::span(p.class_weights.values()));
}

void fail_dims(const std::string& msg) { throw Error(ErrorCode::kInvalidDims, msg); }

// Binary helpers.
template <typename T>
void put(std::ostream& os, T v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <typename T>
T get(std::istream& is) {
  T v{};
  if (!is.read(reinterpret_cast<char*>(&v), sizeof v)) {
    throw Error(ErrorCode::kCheckpointError, "truncated checkpoint");
  }
  return v;
}

void put_tensor(std::ostream& os, std::size_t rows, std::size_t cols, std::span<const double> v) {
  put<std::uint64_t>(os, rows);
  put<std::uint64_t>(os, cols);
  os.write(reinterpret_cast<const char*>(v.data()), static_cast<std::streamsize>(v.size_bytes()));
}

void get_tensor(std::istream& is, std::size_t rows, std::size_t cols, std::span<double> v) {
  const auto r = get<std::uint64_t>(is);
  const auto c = get<std::uint64_t>(is);
  if (r != rows || c != cols) {
    throw Error(ErrorCode::kCheckpointError, "tensor shape " + std::to_string(r) + "x" +
                                                 std::to_string(c) + " does not match dims " +
                                                 std::to_string(rows) + "x" + std::to_string(cols));
  }
  if (!is.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(v.size_bytes()))) {
    throw Error(ErrorCode::kCheckpointError, "truncated checkpoint");
  }
}

NetworkParams allocate(const NetworkDims& dims) {
  NetworkParams p;
  p.dims = dims;
  std::size_t fan_in = dims.input;
  for (std::size_t width : dims.encoder_hidden) {
    p.encoder.push_back({Matrix(width, fan_in), std::vector<double>(width, 0.0)});
    fan_in = width;
  }
  p.proj_w1 = Matrix(dims.projection_hidden, fan_in);
  p.proj_w2 = Matrix(dims.output, dims.projection_hidden);
  p.class_weights = Matrix(dims.classes, dims.head_dim());
  return p;
}

}  // namespace

std::string_view head_input_name(HeadInput h) noexcept {
  return h == HeadInput::kProjection ? "projection" : "encoder";
}

HeadInput parse_head_input(std::string_view name) {
  if (name == "projection" || name == "z") return HeadInput::kProjection;
  if (name == "encoder" || name == "h") return HeadInput::kEncoder;
  throw Error(ErrorCode::kInvalidInput, "unknown head input '" + std::string(name) + "'");
}

std::size_t NetworkDims::encoder_output() const noexcept {
  return encoder_hidden.empty() ? input : encoder_hidden.back();
}

std::size_t NetworkDims::head_dim() const noexcept {
  return head_input == HeadInput::kProjection ? output : encoder_output();
}

void NetworkDims::validate() const {
  if (input == 0) fail_dims("input width must be positive");
  for (std::size_t k = 0; k < encoder_hidden.size(); ++k) {
    if (encoder_hidden[k] == 0) fail_dims("encoder layer " + std::to_string(k) + " has width 0");
  }
  if (projection_hidden == 0) fail_dims("projection_hidden must be positive");
  if (output < 2) fail_dims("output width must be >= 2");
  if (classes == 0) fail_dims("classes must be positive");
  if (head_dim() < 2) fail_dims("class-weight head needs dimension >= 2");
}

void for_each_tensor(NetworkParams& params, const std::function<void(std::span<double>)>& fn) {
  visit_tensors(params, fn);
}

void for_each_tensor(const NetworkParams& params,
                     const std::function<void(std::span<const double>)>& fn) {
  visit_tensors(params, [&](auto span) { fn(std::span<const double>(span)); });
}

NetworkParams zeros_like(const NetworkParams& params) {
  NetworkParams z = allocate(params.dims);
  z.seed = params.seed;
  return z;
}

std::size_t parameter_count(const NetworkParams& params) {
  std::size_t n = 0;
  for_each_tensor(params, [&](std::span<const double> t) { n += t.size(); });
  return n;
}

NetworkParams init_params(const NetworkDims& dims, std::uint64_t seed) {
  dims.validate();
  NetworkParams p = allocate(dims);
  p.seed = seed;
  Rng rng(seed);
  auto he = [&](Matrix& w) {
    std::normal_distribution<double> dist(0.0, std::sqrt(2.0 / static_cast<double>(w.cols())));
    for (double& v : w.values()) v = dist(rng);
  };
  for (auto& layer : p.encoder) he(layer.weight);
  he(p.proj_w1);
  he(p.proj_w2);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (double& v : p.class_weights.values()) v = gauss(rng);
  for (std::size_t r = 0; r < p.class_weights.rows(); ++r) normalize_in_place(p.class_weights.row(r));
  return p;
}

std::uint64_t fingerprint(const NetworkParams& params) {
  // FNV-1a over the raw bytes of every tensor.
  std::uint64_t h = 1469598103934665603ULL;
  for_each_tensor(params, [&](std::span<const double> t) {
    for (double v : t) {
      std::uint64_t bits = 0;
      std::memcpy(&bits, &v, sizeof bits);
      for (int b = 0; b < 8; ++b) {
        h ^= (bits >> (8 * b)) & 0xFFu;
        h *= 1099511628211ULL;
      }
    }
  });
  return h;
}

ForwardTrace forward(const NetworkParams& params, const Matrix& features) {
  if (features.cols() != params.dims.input) {
    throw Error(ErrorCode::kShapeMismatch, "features have width " + std::to_string(features.cols()) +
                                               ", network expects " +
                                               std::to_string(params.dims.input));
  }
  ForwardTrace t;
  t.input = features;
  t.encoder_pre.resize(params.encoder.size());
  t.encoder_post.resize(params.encoder.size());
  for (std::size_t l = 0; l < params.encoder.size(); ++l) {
    const Matrix& in = l == 0 ? t.input : t.encoder_post[l - 1];
    dense_relu(in, params.encoder[l].weight, &params.encoder[l].bias, t.encoder_pre[l],
               t.encoder_post[l]);
  }
  dense_relu(t.encoder_output(), params.proj_w1, nullptr, t.proj_pre, t.proj_post);
  t.projection = multiply_transposed(t.proj_post, params.proj_w2);
  t.embeddings = normalize_rows(t.projection, t.projection_norms);
  if (params.dims.head_input == HeadInput::kEncoder) {
    t.encoder_embeddings = normalize_rows(t.encoder_output(), t.encoder_norms);
  }
  t.params_fingerprint = fingerprint(params);
  return t;
}

ForwardTrace forward(const NetworkParams& params, const MultiviewBatch& batch) {
  return forward(params, batch.features());
}

Matrix normalized_encoder_output(const ForwardTrace& trace) {
  if (!trace.encoder_embeddings.empty()) return trace.encoder_embeddings;
  std::vector<double> norms;
  return normalize_rows(trace.encoder_output(), norms);
}

std::vector<double> normalize_backward(std::span<const double> unit, double norm,
                                       std::span<const double> grad_unit) {
  const double radial = dot(unit, grad_unit);
  std::vector<double> out(unit.size());
  for (std::size_t i = 0; i < unit.size(); ++i) out[i] = (grad_unit[i] - unit[i] * radial) / norm;
  return out;
}

NetworkParams backward(const NetworkParams& params, const ForwardTrace& trace,
                       const Matrix& grad_embeddings, const Matrix* grad_encoder_embeddings) {
  if (trace.params_fingerprint != fingerprint(params) ||
      trace.encoder_pre.size() != params.encoder.size()) {
    throw Error(ErrorCode::kTraceMismatch, "trace was not produced by these parameters");
  }
  if (!grad_embeddings.same_shape(trace.embeddings)) {
    throw Error(ErrorCode::kTraceMismatch, "upstream gradient shape differs from the embeddings");
  }
  NetworkParams grads = zeros_like(params);

  Matrix g_u = normalize_rows_backward(trace.embeddings, trace.projection_norms, grad_embeddings);
  Matrix g_a = dense_backward(g_u, trace.proj_post, params.proj_w2, grads.proj_w2);
  relu_backward(g_a, trace.proj_pre);
  Matrix g_h = dense_backward(g_a, trace.encoder_output(), params.proj_w1, grads.proj_w1);

  if (grad_encoder_embeddings != nullptr) {
    if (trace.encoder_embeddings.empty() || !grad_encoder_embeddings->same_shape(trace.encoder_embeddings)) {
      throw Error(ErrorCode::kTraceMismatch, "no normalized encoder output in trace for this gradient");
    }
    const Matrix extra = normalize_rows_backward(trace.encoder_embeddings, trace.encoder_norms,
                                                 *grad_encoder_embeddings);
    for (std::size_t k = 0; k < g_h.size(); ++k) g_h.values()[k] += extra.values()[k];
  }

  for (std::size_t l = params.encoder.size(); l-- > 0;) {
    relu_backward(g_h, trace.encoder_pre[l]);
    auto& gb = grads.encoder[l].bias;
    for (std::size_t n = 0; n < g_h.rows(); ++n) {
      const auto r = g_h.row(n);
      for (std::size_t o = 0; o < r.size(); ++o) gb[o] += r[o];
    }
    const Matrix& in = l == 0 ? trace.input : trace.encoder_post[l - 1];
    g_h = dense_backward(g_h, in, params.encoder[l].weight, grads.encoder[l].weight);
  }
  return grads;
}

Matrix normalized_class_weights(const NetworkParams& params) {
  std::vector<double> norms;
  return normalize_rows(params.class_weights, norms);
}

Matrix class_weight_gradient(const Matrix& raw_weights, const Matrix& grad_normalized) {
  if (!raw_weights.same_shape(grad_normalized)) {
    throw Error(ErrorCode::kShapeMismatch, "class-weight gradient shape mismatch");
  }
  std::vector<double> norms;
  const Matrix unit = normalize_rows(raw_weights, norms);
  return normalize_rows_backward(unit, norms, grad_normalized);
}

void write_checkpoint(std::ostream& os, const NetworkParams& params) {
  os.write(kCheckpointMagic, sizeof kCheckpointMagic);
  put<std::uint32_t>(os, kCheckpointVersion);
  put<std::uint32_t>(os, params.dims.head_input == HeadInput::kProjection ? 0u : 1u);
  put<std::uint64_t>(os, params.seed);
  put<std::uint64_t>(os, params.dims.input);
  put<std::uint64_t>(os, params.dims.encoder_hidden.size());
  for (std::size_t w : params.dims.encoder_hidden) put<std::uint64_t>(os, w);
  put<std::uint64_t>(os, params.dims.projection_hidden);
  put<std::uint64_t>(os, params.dims.output);
  put<std::uint64_t>(os, params.dims.classes);
  for (const auto& layer : params.encoder) {
    put_tensor(os, layer.weight.rows(), layer.weight.cols(), layer.weight.values());
    put_tensor(os, 1, layer.bias.size(), layer.bias);
  }
  put_tensor(os, params.proj_w1.rows(), params.proj_w1.cols(), params.proj_w1.values());
  put_tensor(os, params.proj_w2.rows(), params.proj_w2.cols(), params.proj_w2.values());
  put_tensor(os, params.class_weights.rows(), params.class_weights.cols(),
             params.class_weights.values());
}

NetworkParams read_checkpoint(std::istream& is) {
  char magic[8];
  if (!is.read(magic, sizeof magic) || std::memcmp(magic, kCheckpointMagic, sizeof magic) != 0) {
    throw Error(ErrorCode::kCheckpointError, "bad checkpoint magic");
  }
  const auto version = get<std::uint32_t>(is);
  if (version != kCheckpointVersion) {
    throw Error(ErrorCode::kCheckpointError, "unsupported checkpoint version " + std::to_string(version));
  }
  const auto head = get<std::uint32_t>(is);
  if (head > 1) throw Error(ErrorCode::kCheckpointError, "bad head-input flag");

  NetworkDims dims;
  dims.head_input = head == 0 ? HeadInput::kProjection : HeadInput::kEncoder;
  const auto seed = get<std::uint64_t>(is);
  dims.input = get<std::uint64_t>(is);
  const auto layers = get<std::uint64_t>(is);
  if (layers > 1024) throw Error(ErrorCode::kCheckpointError, "implausible encoder depth");
  dims.encoder_hidden.clear();
  for (std::uint64_t k = 0; k < layers; ++k) dims.encoder_hidden.push_back(get<std::uint64_t>(is));
  dims.projection_hidden = get<std::uint64_t>(is);
  dims.output = get<std::uint64_t>(is);
  dims.classes = get<std::uint64_t>(is);
  try {
    dims.validate();
  } catch (const Error& e) {
    throw Error(ErrorCode::kCheckpointError, e.what());
  }

  NetworkParams p = allocate(dims);
  p.seed = seed;
  for (auto& layer : p.encoder) {
    get_tensor(is, layer.weight.rows(), layer.weight.cols(), layer.weight.values());
    get_tensor(is, 1, layer.bias.size(), layer.bias);
  }
  get_tensor(is, p.proj_w1.rows(), p.proj_w1.cols(), p.proj_w1.values());
  get_tensor(is, p.proj_w2.rows(), p.proj_w2.cols(), p.proj_w2.values());
  get_tensor(is, p.class_weights.rows(), p.class_weights.cols(), p.class_weights.values());
  if (is.peek() != std::char_traits<char>::eof()) {
    throw Error(ErrorCode::kCheckpointError, "trailing bytes after checkpoint");
  }
  return p;
}

void save_checkpoint(const std::filesystem::path& path, const NetworkParams& params) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error(ErrorCode::kIoError, "cannot open " + path.string() + " for writing");
  write_checkpoint(os, params);
  if (!os) throw Error(ErrorCode::kIoError, "write failed for " + path.string());
}

NetworkParams load_checkpoint(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error(ErrorCode::kIoError, "cannot open " + path.string());
  return read_checkpoint(is);
}

}  // namespace aamsupcon
