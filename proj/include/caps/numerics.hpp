#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace caps::num {

using Vector = std::vector<double>;

// Row-major dense matrix of 64-bit reals.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> values);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }
  std::string shape() const;

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }
  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

  void fill(double v) { std::fill(data_.begin(), data_.end(), v); }

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

// Shape-checked primitives. Mismatches throw caps::ShapeError naming both shapes.
Matrix matmul(const Matrix& a, const Matrix& b);
void matvec_add(const Matrix& a, std::span<const double> x, std::span<double> y);    // y += A x
void matvec_t_add(const Matrix& a, std::span<const double> x, std::span<double> y);  // y += A^T x
void outer_add(Matrix& a, std::span<const double> u, std::span<const double> v,
               double scale = 1.0);                                                // A += s u v^T
Vector add(std::span<const double> a, std::span<const double> b);
Vector hadamard(std::span<const double> a, std::span<const double> b);
Vector tanh(std::span<const double> x);
Vector sigmoid(std::span<const double> x);
double sigmoid(double x);

// Max-subtracted softmax.
Vector softmax(std::span<const double> logits);
// -log softmax(logits)[target], computed stably.
double cross_entropy(std::span<const double> logits, std::size_t target);

// ---------------------------------------------------------------------------

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  // Independent stream for (seed, index), e.g. one per generated candidate.
  static Rng stream(std::uint64_t seed, std::uint64_t index);

  double uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(engine_); }
  double uniform(double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(engine_);
  }
  double normal() { return std::normal_distribution<double>(0.0, 1.0)(engine_); }
  std::size_t index(std::size_t n) {
    return std::uniform_int_distribution<std::size_t>(0, n - 1)(engine_);
  }
  // Draw from a categorical distribution given (not necessarily normalized)
  // non-negative weights.
  std::size_t categorical(std::span<const double> weights);

  template <class It>
  void shuffle(It first, It last) {
    std::shuffle(first, last, engine_);
  }

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
};

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t index);

// ---------------------------------------------------------------------------

struct ParamBlock {
  std::string name;
  Matrix value;
};

// Named parameter blocks of one model. Gradients use the same layout.
class ParamSet {
 public:
  std::size_t add(std::string name, std::size_t rows, std::size_t cols);

  Matrix& operator[](std::size_t i) { return blocks_[i].value; }
  const Matrix& operator[](std::size_t i) const { return blocks_[i].value; }
  const std::string& name(std::size_t i) const { return blocks_[i].name; }
  std::size_t num_blocks() const { return blocks_.size(); }
  std::size_t num_values() const;
  std::vector<ParamBlock>& blocks() { return blocks_; }
  const std::vector<ParamBlock>& blocks() const { return blocks_; }

  // Index of the block, or throws std::out_of_range.
  std::size_t find(const std::string& name) const;
  ParamSet zeros_like() const;
  void set_zero();
  double global_norm() const;
  // Throws NumericalError naming the first block holding NaN/Inf.
  void check_finite(const char* what) const;
  bool same_layout(const ParamSet& other) const;

  friend bool operator==(const ParamSet& a, const ParamSet& b) {
    if (a.blocks_.size() != b.blocks_.size()) return false;
    for (std::size_t i = 0; i < a.blocks_.size(); ++i) {
      if (a.blocks_[i].name != b.blocks_[i].name || !(a.blocks_[i].value == b.blocks_[i].value)) {
        return false;
      }
    }
    return true;
  }

 private:
  std::vector<ParamBlock> blocks_;
};

// Glorot/Xavier uniform in +-sqrt(6 / (fan_in + fan_out)).
void xavier_uniform(Matrix& m, Rng& rng);

// ---------------------------------------------------------------------------

enum class ClipMode { global_norm, elementwise };
enum class OptimizerKind { sgd, adam };

struct SgdConfig {
  double learning_rate = 0.002;
  double clip = 5.0;
  int batch_size = 50;
  int epochs = 100;
  ClipMode clip_mode = ClipMode::global_norm;
  OptimizerKind optimizer = OptimizerKind::adam;

  void validate() const;
};

// Rescales grads so their global L2 norm is at most `threshold`. Returns the
// norm before clipping.
double clip_global_norm(ParamSet& grads, double threshold);
void clip_elementwise(ParamSet& grads, double threshold);
void clip_gradients(ParamSet& grads, const SgdConfig& config);

// Clips, then params -= lr * grads. NaN/Inf grads throw NumericalError naming
// the parameter block.
void sgd_step(ParamSet& params, ParamSet& grads, const SgdConfig& config);

class Adam {
 public:
  explicit Adam(const ParamSet& layout, double beta1 = 0.9, double beta2 = 0.999,
                double epsilon = 1e-8);
  // Clips like sgd_step, then applies a bias-corrected Adam update.
  void step(ParamSet& params, ParamSet& grads, const SgdConfig& config);

 private:
  ParamSet m_, v_;
  double beta1_, beta2_, epsilon_;
  std::int64_t t_ = 0;
};

// ---------------------------------------------------------------------------

struct GradCheckResult {
  double max_relative_error = 0.0;
  std::vector<std::pair<std::string, double>> per_block;
};

// Central differences against an analytic gradient. Checks every coordinate
// of blocks with at most `max_coords_per_block` values, otherwise a seeded
// random sample of that many. Error per coordinate is
// |a - n| / max(|a|, |n|, 1e-8).
GradCheckResult grad_check(const std::function<double(const ParamSet&)>& loss, ParamSet params,
                           const ParamSet& analytic, double eps = 1e-5,
                           std::size_t max_coords_per_block = 200, std::uint64_t seed = 1);

// ---------------------------------------------------------------------------
// Binary snapshot: magic "CAPSPRM1", u32 version, u32 block count, then per
// block u32 name length, name bytes, u64 rows, u64 cols; followed by every
// block's values as little-endian IEEE-754 doubles in block order.

void save_params(std::ostream& out, const ParamSet& params);
ParamSet load_params(std::istream& in);

}  // namespace caps::num
