#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>
#include <string>
#include <string_view>

namespace fgr {

template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

using Vec = VectorX<double>;
using Mat = MatrixX<double>;

template <typename Derived>
bool all_finite(const Eigen::DenseBase<Derived>& x) {
  return x.allFinite();
}

template <typename Derived>
typename Derived::Scalar log_sum_exp(const Eigen::MatrixBase<Derived>& logits) {
  using std::exp;
  using std::log;
  const auto m = logits.maxCoeff();
  return m + log((logits.array() - m).exp().sum());
}

/// Max-subtracted softmax. Throws on empty or non-finite input.
template <typename Derived>
VectorX<typename Derived::Scalar> softmax(const Eigen::MatrixBase<Derived>& logits) {
  if (logits.size() == 0) throw std::invalid_argument("softmax: empty logits");
  if (!logits.allFinite()) throw std::invalid_argument("softmax: non-finite logits");
  VectorX<typename Derived::Scalar> p = (logits.array() - logits.maxCoeff()).exp().matrix();
  p /= p.sum();
  return p;
}

/// -log softmax(logits)[target], evaluated through log-sum-exp.
template <typename Derived>
typename Derived::Scalar cross_entropy(const Eigen::MatrixBase<Derived>& logits, Eigen::Index target) {
  if (target < 0 || target >= logits.size())
    throw std::out_of_range("cross_entropy: target " + std::to_string(target) + " outside [0, " +
                            std::to_string(logits.size()) + ")");
  if (!logits.allFinite()) throw std::invalid_argument("cross_entropy: non-finite logits");
  const auto loss = log_sum_exp(logits) - logits(target);
  // log-sum-exp >= max >= logits(target) up to rounding
  return loss < 0 ? typename Derived::Scalar(0) : loss;
}

/// d CE / d logits = softmax(logits) - onehot(target).
template <typename Derived>
VectorX<typename Derived::Scalar> cross_entropy_grad(const Eigen::MatrixBase<Derived>& logits,
                                                     Eigen::Index target) {
  if (target < 0 || target >= logits.size()) throw std::out_of_range("cross_entropy_grad: target out of range");
  auto g = softmax(logits);
  g(target) -= 1;
  return g;
}

template <typename DW, typename Db, typename Dx>
VectorX<typename DW::Scalar> linear_forward(const Eigen::MatrixBase<DW>& W, const Eigen::MatrixBase<Db>& b,
                                            const Eigen::MatrixBase<Dx>& x) {
  if (W.cols() != x.size() || W.rows() != b.size())
    throw std::invalid_argument("linear_forward: shape mismatch W(" + std::to_string(W.rows()) + "x" +
                                std::to_string(W.cols()) + "), b(" + std::to_string(b.size()) + "), x(" +
                                std::to_string(x.size()) + ")");
  return W * x + b;
}

template <typename Scalar>
struct LinearGrads {
  MatrixX<Scalar> dW;
  VectorX<Scalar> db;
  VectorX<Scalar> dx;
};

/// Gradients of a scalar loss through y = Wx + b given dL/dy.
template <typename DW, typename Dx, typename Dy>
LinearGrads<typename DW::Scalar> linear_backward(const Eigen::MatrixBase<DW>& W, const Eigen::MatrixBase<Dx>& x,
                                                 const Eigen::MatrixBase<Dy>& dy) {
  if (W.cols() != x.size() || W.rows() != dy.size())
    throw std::invalid_argument("linear_backward: shape mismatch");
  return {dy * x.transpose(), dy, W.transpose() * dy};
}

/// p <- p - lr * g. Rejects non-finite gradients naming the parameter.
template <typename DP, typename DG>
void sgd_step(Eigen::MatrixBase<DP>& param, const Eigen::MatrixBase<DG>& grad, double lr,
              std::string_view name = "param") {
  if (param.rows() != grad.rows() || param.cols() != grad.cols())
    throw std::invalid_argument("sgd_step: shape mismatch for " + std::string(name));
  if (!(lr >= 0) || !std::isfinite(lr)) throw std::invalid_argument("sgd_step: learning rate must be >= 0");
  if (!grad.allFinite()) throw std::domain_error("sgd_step: non-finite gradient for " + std::string(name));
  param -= lr * grad;
}

/// |a - b| / max(|a|, |b|, floor).
template <typename Scalar>
Scalar relative_error(Scalar a, Scalar b, Scalar floor = Scalar(1e-12)) {
  using std::abs;
  using std::max;
  return abs(a - b) / max({abs(a), abs(b), floor});
}

}  // namespace fgr
