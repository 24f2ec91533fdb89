#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace musem {

using Vec = std::vector<double>;
// true marks a real token, false marks padding.
using Mask = std::vector<bool>;

/// Dense row-major matrix of doubles.
struct Mat {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> values;

  Mat() = default;
  Mat(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), values(r * c, fill) {}

  double& operator()(std::size_t r, std::size_t c) { return values[r * cols + c]; }
  double operator()(std::size_t r, std::size_t c) const { return values[r * cols + c]; }

  std::span<double> row(std::size_t r) { return {values.data() + r * cols, cols}; }
  std::span<const double> row(std::size_t r) const { return {values.data() + r * cols, cols}; }

  std::size_t size() const { return values.size(); }
  bool same_shape(const Mat& other) const { return rows == other.rows && cols == other.cols; }
  void fill(double v) { std::fill(values.begin(), values.end(), v); }

  bool operator==(const Mat&) const = default;
};

/// A trainable tensor together with its gradient accumulator.
struct ParamTensor {
  std::string name;
  Mat value;
  Mat grad;

  ParamTensor() = default;
  ParamTensor(std::string tensor_name, std::size_t rows, std::size_t cols)
      : name(std::move(tensor_name)), value(rows, cols), grad(rows, cols) {}

  void zero_grad() { grad.fill(0.0); }
};

// Linear algebra helpers. All of them throw ShapeError on mismatched sizes.
double dot(std::span<const double> a, std::span<const double> b);
Vec matvec(const Mat& w, std::span<const double> x);                // w x
Vec matvec_transposed(const Mat& w, std::span<const double> y);     // w^T y
void add_outer(Mat& acc, std::span<const double> y, std::span<const double> x, double scale = 1.0);
void axpy(double alpha, std::span<const double> x, std::span<double> y);  // y += alpha x
Vec concat(std::span<const double> a, std::span<const double> b);
Vec add(std::span<const double> a, std::span<const double> b);
bool all_finite(std::span<const double> v);

/// Masked softmax. Masked positions come out exactly 0; the unmasked maximum
/// is subtracted before exponentiation. Throws DomainError("empty softmax
/// support") when every position is masked.
Vec softmax(std::span<const double> scores, const Mask& mask);
Vec softmax(std::span<const double> scores);

/// Backward pass of softmax: given p = softmax(z) and dL/dp, returns dL/dz.
Vec softmax_backward(std::span<const double> probs, std::span<const double> grad_probs);

double sigmoid(double x);
double relu(double x);
Vec sigmoid(std::span<const double> x);
Vec tanh(std::span<const double> x);
Vec relu(std::span<const double> x);
Mat sigmoid(const Mat& x);
Mat tanh(const Mat& x);
Mat relu(const Mat& x);

/// Seeded generator with platform-independent derived distributions
/// (the std:: distributions are implementation-defined).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }
  double uniform();  // [0, 1)
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  std::size_t below(std::size_t n);  // [0, n)

  template <typename T>
  void shuffle(std::vector<T>& items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      std::swap(items[i - 1], items[below(i)]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

/// Per-entry multipliers for inverted dropout: 0 with probability rate,
/// 1/(1-rate) otherwise. Throws InputError unless 0 <= rate < 1.
Vec dropout_scales(std::size_t n, double rate, Rng& rng);

Vec dropout(std::span<const double> v, double rate, Rng& rng, bool training);

struct GradCheckEntry {
  std::string name;
  std::size_t count = 0;
  double max_abs_error = 0.0;
  double max_rel_error = 0.0;
  bool passed = true;
};

struct GradCheckReport {
  double step = 0.0;
  double tolerance = 0.0;
  std::vector<GradCheckEntry> entries;

  bool passed() const;
  double max_rel_error() const;
};

// Gradients smaller than this are compared on an absolute scale.
inline constexpr double kGradCheckFloor = 1e-6;

/// Compares the analytic gradients already stored in each tensor's `grad`
/// against central differences of `loss`. Parameter values are restored
/// after every probe.
GradCheckReport grad_check(const std::function<double()>& loss, std::span<ParamTensor* const> params,
                           double step, double tolerance);

}  // namespace musem
