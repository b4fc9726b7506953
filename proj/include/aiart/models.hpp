#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "aiart/matrix.hpp"

namespace aiart {

enum class Task { binary, multiclass };

std::string to_string(Task task);
Task parse_task(std::string_view text);

/// Number of classes implied by a label vector; throws DegenerateLabels when
/// fewer than two distinct labels are present and InvalidInput on negative
/// labels or non-{0,1} binary labels.
std::size_t check_labels(std::span<const int> y, Task task);

// ---------------------------------------------------------------------------
// Logistic regression

struct LRConfig {
  double c = 1.0;          // inverse regularization weight
  int max_iter = 100;
  double tolerance = 1e-4; // on the preconditioned gradient, max-norm
};

/// Objective (1/2)||W||^2 + c * sum_i loss_i with unpenalized intercepts.
/// Binary uses one logit and the logistic loss; multiclass uses one logit per
/// class and the multinomial cross-entropy. Parameters are laid out as the
/// logit-major weight block followed by the intercepts.
class LogisticObjective {
 public:
  LogisticObjective(const Matrix& x, std::span<const int> y, std::size_t logits, double c);

  std::size_t parameter_count() const { return logits_ * (x_.cols() + 1); }
  std::size_t logits() const { return logits_; }
  double value(std::span<const double> params) const;
  double value_and_gradient(std::span<const double> params, std::span<double> gradient) const;
  /// Per-parameter upper bound on the Hessian diagonal.
  std::vector<double> curvature_bound() const;

 private:
  const Matrix& x_;
  std::span<const int> y_;
  std::size_t logits_;
  double c_;
};

struct LRModel {
  std::size_t num_classes = 2;
  Matrix weights;               // logits x features (1 row for binary)
  std::vector<double> biases;   // one per logit
  std::vector<double> objective_trace;
  int iterations = 0;
  bool converged = false;

  std::size_t width() const { return weights.cols(); }
};

/// Deterministic full-batch gradient descent with a diagonal preconditioner and
/// Armijo backtracking. Throws DegenerateLabels for single-class targets.
LRModel train_lr(const Matrix& x, std::span<const int> y, const LRConfig& config, Task task);

struct LRPrediction {
  std::vector<int> labels;
  Matrix probabilities;  // rows x num_classes
};

/// Label = argmax probability, ties to the lowest class index.
LRPrediction predict_lr(const LRModel& model, const Matrix& x);

// ---------------------------------------------------------------------------
// Support vector machine

enum class Kernel { linear, rbf };

std::string to_string(Kernel kernel);
Kernel parse_kernel(std::string_view text);

/// Numeric gamma, or "scale" = 1 / (d * Var(X)) and "auto" = 1 / d where d is
/// the training width and Var is taken over every entry of X.
struct Gamma {
  enum class Kind { value, scale, automatic };
  Kind kind = Kind::scale;
  double value = 0.0;

  static Gamma parse(std::string_view text);
  std::string str() const;
  double resolve(const Matrix& x) const;
  friend bool operator==(const Gamma&, const Gamma&) = default;
};

struct SVMConfig {
  double c = 1.0;
  Kernel kernel = Kernel::rbf;
  Gamma gamma{};
  double tolerance = 1e-3;
  int max_passes = 10;  // budget of 10 * max(n, 10000) pair updates per pass
};

double kernel_value(Kernel kernel, double gamma, std::span<const double> a, std::span<const double> b);

struct SmoResult {
  std::vector<double> alpha;
  double bias = 0.0;  // f(x) = sum_i alpha_i y_i K(x_i, x) + bias
  bool converged = false;
  std::size_t iterations = 0;
};

/// Dual SMO with second-order working-set selection. Labels are -1/+1.
/// Stops when the maximal KKT violation gap drops below `tolerance`.
SmoResult solve_smo(const Matrix& x, std::span<const int> signs, Kernel kernel, double gamma, double c,
                    double tolerance, std::size_t max_updates);

struct BinarySvm {
  int positive = 1;  // label chosen when f(x) > 0
  int negative = 0;
  Matrix support_vectors;
  std::vector<double> dual_coef;  // alpha_i * y_i
  double bias = 0.0;
  bool converged = true;

  double decision(Kernel kernel, double gamma, std::span<const double> row) const;
};

struct SVMModel {
  Kernel kernel = Kernel::rbf;
  double gamma = 1.0;  // resolved value
  std::size_t num_classes = 2;
  std::size_t width = 0;
  std::vector<BinarySvm> machines;  // one (binary) or K(K-1)/2 one-vs-one
};

SVMModel train_svm(const Matrix& x, std::span<const int> y, const SVMConfig& config, Task task);

/// Binary: sign of the decision function. Multiclass: one-vs-one vote with
/// ties going to the lowest class index.
std::vector<int> predict_svm(const SVMModel& model, const Matrix& x);
/// Per-row decision value of the first machine (binary models).
std::vector<double> svm_decision_values(const SVMModel& model, const Matrix& x);

}  // namespace aiart
