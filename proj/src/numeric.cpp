#include "musem/numeric.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "musem/error.hpp"

namespace musem {

namespace {

void require_same(std::size_t a, std::size_t b, const char* what) {
  if (a != b) {
    throw ShapeError(std::string(what) + ": size mismatch (" + std::to_string(a) + " vs " + std::to_string(b) +
                     ")");
  }
}

template <typename F>
Vec map(std::span<const double> x, F f) {
  Vec out(x.size());
  std::transform(x.begin(), x.end(), out.begin(), f);
  return out;
}

template <typename F>
Mat map(const Mat& x, F f) {
  Mat out(x.rows, x.cols);
  std::transform(x.values.begin(), x.values.end(), out.values.begin(), f);
  return out;
}

}  // namespace

double dot(std::span<const double> a, std::span<const double> b) {
  require_same(a.size(), b.size(), "dot");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

Vec matvec(const Mat& w, std::span<const double> x) {
  require_same(w.cols, x.size(), "matvec");
  Vec out(w.rows);
  for (std::size_t r = 0; r < w.rows; ++r) out[r] = dot(w.row(r), x);
  return out;
}

Vec matvec_transposed(const Mat& w, std::span<const double> y) {
  require_same(w.rows, y.size(), "matvec_transposed");
  Vec out(w.cols, 0.0);
  for (std::size_t r = 0; r < w.rows; ++r) axpy(y[r], w.row(r), out);
  return out;
}

void add_outer(Mat& acc, std::span<const double> y, std::span<const double> x, double scale) {
  require_same(acc.rows, y.size(), "add_outer rows");
  require_same(acc.cols, x.size(), "add_outer cols");
  for (std::size_t r = 0; r < acc.rows; ++r) axpy(scale * y[r], x, acc.row(r));
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  require_same(x.size(), y.size(), "axpy");
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

Vec concat(std::span<const double> a, std::span<const double> b) {
  Vec out(a.begin(), a.end());
  out.insert(out.end(), b.begin(), b.end());
  return out;
}

Vec add(std::span<const double> a, std::span<const double> b) {
  require_same(a.size(), b.size(), "add");
  Vec out(a.begin(), a.end());
  axpy(1.0, b, out);
  return out;
}

bool all_finite(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

Vec softmax(std::span<const double> scores, const Mask& mask) {
  require_same(scores.size(), mask.size(), "softmax mask");
  double top = -std::numeric_limits<double>::infinity();
  bool any = false;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (mask[i]) {
      top = any ? std::max(top, scores[i]) : scores[i];
      any = true;
    }
  }
  if (!any) throw DomainError("empty softmax support");

  Vec out(scores.size(), 0.0);
  double total = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (mask[i]) {
      out[i] = std::exp(scores[i] - top);
      total += out[i];
    }
  }
  for (auto& p : out) p /= total;
  return out;
}

Vec softmax(std::span<const double> scores) { return softmax(scores, Mask(scores.size(), true)); }

Vec softmax_backward(std::span<const double> probs, std::span<const double> grad_probs) {
  require_same(probs.size(), grad_probs.size(), "softmax_backward");
  const double inner = dot(probs, grad_probs);
  Vec out(probs.size());
  for (std::size_t i = 0; i < probs.size(); ++i) out[i] = probs[i] * (grad_probs[i] - inner);
  return out;
}

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

// NaN passes through so that a blown-up forward pass still surfaces in the loss.
double relu(double x) { return x < 0.0 ? 0.0 : x; }

Vec sigmoid(std::span<const double> x) { return map(x, [](double v) { return sigmoid(v); }); }
Vec tanh(std::span<const double> x) { return map(x, [](double v) { return std::tanh(v); }); }
Vec relu(std::span<const double> x) { return map(x, [](double v) { return relu(v); }); }
Mat sigmoid(const Mat& x) { return map(x, [](double v) { return sigmoid(v); }); }
Mat tanh(const Mat& x) { return map(x, [](double v) { return std::tanh(v); }); }
Mat relu(const Mat& x) { return map(x, [](double v) { return relu(v); }); }

double Rng::uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

std::size_t Rng::below(std::size_t n) {
  if (n == 0) throw InputError("Rng::below: empty range");
  const std::uint64_t bound = static_cast<std::uint64_t>(n);
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % bound;
  std::uint64_t draw = engine_();
  while (draw >= limit) draw = engine_();
  return static_cast<std::size_t>(draw % bound);
}

Vec dropout_scales(std::size_t n, double rate, Rng& rng) {
  if (!(rate >= 0.0 && rate < 1.0)) {
    throw InputError("dropout rate must lie in [0, 1), got " + std::to_string(rate));
  }
  Vec scales(n, 1.0);
  if (rate == 0.0) return scales;
  const double keep = 1.0 / (1.0 - rate);
  for (auto& s : scales) s = rng.uniform() < rate ? 0.0 : keep;
  return scales;
}

Vec dropout(std::span<const double> v, double rate, Rng& rng, bool training) {
  if (!(rate >= 0.0 && rate < 1.0)) {
    throw InputError("dropout rate must lie in [0, 1), got " + std::to_string(rate));
  }
  Vec out(v.begin(), v.end());
  if (!training) return out;
  const Vec scales = dropout_scales(v.size(), rate, rng);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= scales[i];
  return out;
}

bool GradCheckReport::passed() const {
  return std::all_of(entries.begin(), entries.end(), [](const GradCheckEntry& e) { return e.passed; });
}

double GradCheckReport::max_rel_error() const {
  double worst = 0.0;
  for (const auto& e : entries) worst = std::max(worst, e.max_rel_error);
  return worst;
}

GradCheckReport grad_check(const std::function<double()>& loss, std::span<ParamTensor* const> params,
                           double step, double tolerance) {
  if (!(step > 0.0)) throw InputError("grad_check: step must be positive");
  GradCheckReport report{step, tolerance, {}};
  for (ParamTensor* tensor : params) {
    GradCheckEntry entry{tensor->name, tensor->value.size(), 0.0, 0.0, true};
    for (std::size_t i = 0; i < tensor->value.size(); ++i) {
      double& slot = tensor->value.values[i];
      const double original = slot;
      slot = original + step;
      const double up = loss();
      slot = original - step;
      const double down = loss();
      slot = original;
      if (!std::isfinite(up) || !std::isfinite(down)) {
        throw DomainError("grad_check: non-finite loss while probing " + tensor->name + "[" +
                          std::to_string(i) + "]");
      }
      const double numeric = (up - down) / (2.0 * step);
      const double analytic = tensor->grad.values[i];
      const double abs_err = std::abs(analytic - numeric);
      const double rel_err = abs_err / std::max({std::abs(analytic), std::abs(numeric), kGradCheckFloor});
      entry.max_abs_error = std::max(entry.max_abs_error, abs_err);
      entry.max_rel_error = std::max(entry.max_rel_error, rel_err);
    }
    entry.passed = entry.max_rel_error < tolerance;
    report.entries.push_back(std::move(entry));
  }
  return report;
}

}  // namespace musem
