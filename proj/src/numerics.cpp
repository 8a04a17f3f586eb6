#include "caps/numerics.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <istream>
#include <numeric>
#include <ostream>
#include <stdexcept>

#include "caps/error.hpp"
#include "caps/kernels.hpp"

namespace caps::num {

namespace {

std::string vec_shape(std::size_t n) { return "[" + std::to_string(n) + "]"; }

void require(bool ok, const char* op, const std::string& lhs, const std::string& rhs) {
  if (!ok) throw ShapeError(std::string(op) + ": shape mismatch " + lhs + " vs " + rhs);
}

}  // namespace

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> values)
    : rows_(rows), cols_(cols), data_(std::move(values)) {
  require(data_.size() == rows * cols, "Matrix", shape(), vec_shape(data_.size()));
}

std::string Matrix::shape() const {
  return "[" + std::to_string(rows_) + "x" + std::to_string(cols_) + "]";
}

Matrix matmul(const Matrix& a, const Matrix& b) {
  require(a.cols() == b.rows(), "matmul", a.shape(), b.shape());
  Matrix c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      for (std::size_t j = 0; j < b.cols(); ++j) c(i, j) += aik * b(k, j);
    }
  }
  return c;
}

void matvec_add(const Matrix& a, std::span<const double> x, std::span<double> y) {
  require(a.cols() == x.size() && a.rows() == y.size(), "matvec", a.shape(),
          vec_shape(x.size()) + "->" + vec_shape(y.size()));
  kernels::parallel::matvec_add(a.data(), a.rows(), a.cols(), x, y);
}

void matvec_t_add(const Matrix& a, std::span<const double> x, std::span<double> y) {
  require(a.rows() == x.size() && a.cols() == y.size(), "matvec_t", a.shape(),
          vec_shape(x.size()) + "->" + vec_shape(y.size()));
  kernels::parallel::matvec_t_add(a.data(), a.rows(), a.cols(), x, y);
}

void outer_add(Matrix& a, std::span<const double> u, std::span<const double> v, double scale) {
  require(a.rows() == u.size() && a.cols() == v.size(), "outer", a.shape(),
          vec_shape(u.size()) + "x" + vec_shape(v.size()));
  kernels::parallel::outer_add(a.data(), a.rows(), a.cols(), u, v, scale);
}

Vector add(std::span<const double> a, std::span<const double> b) {
  require(a.size() == b.size(), "add", vec_shape(a.size()), vec_shape(b.size()));
  Vector out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] + b[i];
  return out;
}

Vector hadamard(std::span<const double> a, std::span<const double> b) {
  require(a.size() == b.size(), "hadamard", vec_shape(a.size()), vec_shape(b.size()));
  Vector out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] * b[i];
  return out;
}

Vector tanh(std::span<const double> x) {
  Vector out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = std::tanh(x[i]);
  return out;
}

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

Vector sigmoid(std::span<const double> x) {
  Vector out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = sigmoid(x[i]);
  return out;
}

Vector softmax(std::span<const double> logits) {
  Vector out(logits.size());
  if (logits.empty()) return out;
  const double mx = *std::max_element(logits.begin(), logits.end());
  double sum = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    out[i] = std::exp(logits[i] - mx);
    sum += out[i];
  }
  for (double& v : out) v /= sum;
  return out;
}

double cross_entropy(std::span<const double> logits, std::size_t target) {
  if (target >= logits.size()) throw std::out_of_range("cross_entropy: target out of range");
  const double mx = *std::max_element(logits.begin(), logits.end());
  double sum = 0.0;
  for (double z : logits) sum += std::exp(z - mx);
  return -(logits[target] - mx - std::log(sum));
}

// ---------------------------------------------------------------------------

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t index) {
  // splitmix64 finalizer over the combined words
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

Rng Rng::stream(std::uint64_t seed, std::uint64_t index) { return Rng(mix_seed(seed, index)); }

std::size_t Rng::categorical(std::span<const double> weights) {
  const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  if (!(total > 0.0)) throw std::invalid_argument("categorical: weights sum to zero");
  const double u = uniform() * total;
  double acc = 0.0;
  std::size_t last_positive = 0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (weights[i] <= 0.0) continue;
    acc += weights[i];
    last_positive = i;
    if (u < acc) return i;
  }
  return last_positive;
}

// ---------------------------------------------------------------------------

std::size_t ParamSet::add(std::string name, std::size_t rows, std::size_t cols) {
  blocks_.push_back({std::move(name), Matrix(rows, cols)});
  return blocks_.size() - 1;
}

std::size_t ParamSet::num_values() const {
  std::size_t n = 0;
  for (const auto& b : blocks_) n += b.value.size();
  return n;
}

std::size_t ParamSet::find(const std::string& name) const {
  for (std::size_t i = 0; i < blocks_.size(); ++i) {
    if (blocks_[i].name == name) return i;
  }
  throw std::out_of_range("no parameter block named '" + name + "'");
}

ParamSet ParamSet::zeros_like() const {
  ParamSet out;
  for (const auto& b : blocks_) out.add(b.name, b.value.rows(), b.value.cols());
  return out;
}

void ParamSet::set_zero() {
  for (auto& b : blocks_) b.value.fill(0.0);
}

double ParamSet::global_norm() const {
  double sq = 0.0;
  for (const auto& b : blocks_) {
    for (double v : b.value.data()) sq += v * v;
  }
  return std::sqrt(sq);
}

void ParamSet::check_finite(const char* what) const {
  for (const auto& b : blocks_) {
    for (double v : b.value.data()) {
      if (!std::isfinite(v)) {
        throw NumericalError(std::string("non-finite ") + what + " in parameter block '" +
                             b.name + "'");
      }
    }
  }
}

bool ParamSet::same_layout(const ParamSet& other) const {
  if (blocks_.size() != other.blocks_.size()) return false;
  for (std::size_t i = 0; i < blocks_.size(); ++i) {
    if (blocks_[i].name != other.blocks_[i].name ||
        blocks_[i].value.rows() != other.blocks_[i].value.rows() ||
        blocks_[i].value.cols() != other.blocks_[i].value.cols()) {
      return false;
    }
  }
  return true;
}

void xavier_uniform(Matrix& m, Rng& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(m.rows() + m.cols()));
  for (double& v : m.data()) v = rng.uniform(-limit, limit);
}

// ---------------------------------------------------------------------------

void SgdConfig::validate() const {
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) {
    throw std::invalid_argument("learning rate must be >= 0");
  }
  if (!(clip > 0.0)) throw std::invalid_argument("clip threshold must be > 0");
  if (batch_size <= 0) throw std::invalid_argument("batch size must be > 0");
  if (epochs <= 0) throw std::invalid_argument("epochs must be > 0");
}

double clip_global_norm(ParamSet& grads, double threshold) {
  const double norm = grads.global_norm();
  if (norm > threshold * (1.0 + 1e-12)) {
    const double scale = threshold / norm;
    for (auto& b : grads.blocks()) {
      for (double& v : b.value.data()) v *= scale;
    }
  }
  return norm;
}

void clip_elementwise(ParamSet& grads, double threshold) {
  for (auto& b : grads.blocks()) {
    for (double& v : b.value.data()) v = std::clamp(v, -threshold, threshold);
  }
}

void clip_gradients(ParamSet& grads, const SgdConfig& config) {
  grads.check_finite("gradient");
  if (config.clip_mode == ClipMode::global_norm) {
    clip_global_norm(grads, config.clip);
  } else {
    clip_elementwise(grads, config.clip);
  }
}

void sgd_step(ParamSet& params, ParamSet& grads, const SgdConfig& config) {
  if (!params.same_layout(grads)) throw ShapeError("sgd_step: gradient layout differs from params");
  clip_gradients(grads, config);
  for (std::size_t b = 0; b < params.num_blocks(); ++b) {
    auto p = params[b].data();
    const auto g = grads[b].data();
    for (std::size_t i = 0; i < p.size(); ++i) p[i] -= config.learning_rate * g[i];
  }
}

Adam::Adam(const ParamSet& layout, double beta1, double beta2, double epsilon)
    : m_(layout.zeros_like()), v_(layout.zeros_like()), beta1_(beta1), beta2_(beta2),
      epsilon_(epsilon) {}

void Adam::step(ParamSet& params, ParamSet& grads, const SgdConfig& config) {
  if (!params.same_layout(grads) || !params.same_layout(m_)) {
    throw ShapeError("Adam::step: gradient layout differs from params");
  }
  clip_gradients(grads, config);
  ++t_;
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  for (std::size_t b = 0; b < params.num_blocks(); ++b) {
    auto p = params[b].data();
    auto m = m_[b].data();
    auto v = v_[b].data();
    const auto g = grads[b].data();
    for (std::size_t i = 0; i < p.size(); ++i) {
      m[i] = beta1_ * m[i] + (1.0 - beta1_) * g[i];
      v[i] = beta2_ * v[i] + (1.0 - beta2_) * g[i] * g[i];
      p[i] -= config.learning_rate * (m[i] / c1) / (std::sqrt(v[i] / c2) + epsilon_);
    }
  }
}

// ---------------------------------------------------------------------------

GradCheckResult grad_check(const std::function<double(const ParamSet&)>& loss, ParamSet params,
                           const ParamSet& analytic, double eps,
                           std::size_t max_coords_per_block, std::uint64_t seed) {
  if (!(eps >= 1e-7 && eps <= 1e-3)) throw std::invalid_argument("grad_check: eps out of range");
  if (!params.same_layout(analytic)) throw ShapeError("grad_check: gradient layout differs");
  Rng rng(seed);
  GradCheckResult result;
  for (std::size_t b = 0; b < params.num_blocks(); ++b) {
    auto values = params[b].data();
    std::vector<std::size_t> coords(values.size());
    std::iota(coords.begin(), coords.end(), std::size_t{0});
    if (max_coords_per_block > 0 && coords.size() > max_coords_per_block) {
      rng.shuffle(coords.begin(), coords.end());
      coords.resize(max_coords_per_block);
    }
    double block_max = 0.0;
    for (std::size_t i : coords) {
      const double saved = values[i];
      values[i] = saved + eps;
      const double up = loss(params);
      values[i] = saved - eps;
      const double down = loss(params);
      values[i] = saved;
      const double numeric = (up - down) / (2.0 * eps);
      const double a = analytic[b].data()[i];
      const double denom = std::max({std::abs(a), std::abs(numeric), 1e-8});
      block_max = std::max(block_max, std::abs(a - numeric) / denom);
    }
    result.per_block.emplace_back(params.name(b), block_max);
    result.max_relative_error = std::max(result.max_relative_error, block_max);
  }
  return result;
}

// ---------------------------------------------------------------------------

namespace {

constexpr char kMagic[8] = {'C', 'A', 'P', 'S', 'P', 'R', 'M', '1'};
constexpr std::uint32_t kVersion = 1;

template <class T>
void write_le(std::ostream& out, T value) {
  static_assert(std::is_trivially_copyable_v<T>);
  unsigned char bytes[sizeof(T)];
  std::memcpy(bytes, &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
  out.write(reinterpret_cast<const char*>(bytes), sizeof(T));
}

template <class T>
T read_le(std::istream& in) {
  unsigned char bytes[sizeof(T)];
  if (!in.read(reinterpret_cast<char*>(bytes), sizeof(T))) {
    throw DataError("parameter snapshot truncated");
  }
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
  T value;
  std::memcpy(&value, bytes, sizeof(T));
  return value;
}

}  // namespace

void save_params(std::ostream& out, const ParamSet& params) {
  out.write(kMagic, sizeof kMagic);
  write_le<std::uint32_t>(out, kVersion);
  write_le<std::uint32_t>(out, static_cast<std::uint32_t>(params.num_blocks()));
  for (const auto& b : params.blocks()) {
    write_le<std::uint32_t>(out, static_cast<std::uint32_t>(b.name.size()));
    out.write(b.name.data(), static_cast<std::streamsize>(b.name.size()));
    write_le<std::uint64_t>(out, b.value.rows());
    write_le<std::uint64_t>(out, b.value.cols());
  }
  for (const auto& b : params.blocks()) {
    for (double v : b.value.data()) write_le<double>(out, v);
  }
}

ParamSet load_params(std::istream& in) {
  char magic[8];
  if (!in.read(magic, sizeof magic) || std::memcmp(magic, kMagic, sizeof kMagic) != 0) {
    throw DataError("not a parameter snapshot (bad magic)");
  }
  if (read_le<std::uint32_t>(in) != kVersion) throw DataError("unsupported snapshot version");
  const auto count = read_le<std::uint32_t>(in);
  ParamSet params;
  for (std::uint32_t i = 0; i < count; ++i) {
    const auto len = read_le<std::uint32_t>(in);
    if (len > 4096) throw DataError("parameter snapshot: implausible block name length");
    std::string name(len, '\0');
    if (!in.read(name.data(), len)) throw DataError("parameter snapshot truncated");
    const auto rows = read_le<std::uint64_t>(in);
    const auto cols = read_le<std::uint64_t>(in);
    if (rows > (1u << 28) || cols > (1u << 28) || rows * cols > (1ull << 32)) {
      throw DataError("parameter snapshot: implausible block shape");
    }
    params.add(std::move(name), rows, cols);
  }
  for (auto& b : params.blocks()) {
    for (double& v : b.value.data()) v = read_le<double>(in);
  }
  return params;
}

}  // namespace caps::num
