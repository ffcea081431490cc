#pragma once

#include "arl/model.hpp"

#include <cmath>
#include <cstdint>

namespace arl {

struct AdamSettings {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct AdamState {
  Matrix mE, vE, mC, vC;
  std::int64_t t = 0;

  static AdamState for_params(const ModelParams& p) {
    return {Matrix::Zero(p.E.rows(), p.E.cols()), Matrix::Zero(p.E.rows(), p.E.cols()),
            Matrix::Zero(p.C.rows(), p.C.cols()), Matrix::Zero(p.C.rows(), p.C.cols()), 0};
  }
};

// One bias-corrected Adam step on a dense parameter; t is the 1-based step.
inline void adam_update(Matrix& param, const Matrix& grad, Matrix& m, Matrix& v, std::int64_t t,
                        const AdamSettings& s) {
  m = s.beta1 * m + (1.0 - s.beta1) * grad;
  v = s.beta2 * v + (1.0 - s.beta2) * grad.cwiseProduct(grad);
  const double c1 = 1.0 - std::pow(s.beta1, static_cast<double>(t));
  const double c2 = 1.0 - std::pow(s.beta2, static_cast<double>(t));
  param.array() -= s.learning_rate * (m.array() / c1) / ((v.array() / c2).sqrt() + s.eps);
}

// Same as adam_update with a gradient that is zero outside grad.index.
inline void adam_update(Matrix& param, const SparseColumns& grad, Matrix& m, Matrix& v, std::int64_t t,
                        const AdamSettings& s) {
  m *= s.beta1;
  v *= s.beta2;
  for (std::size_t k = 0; k < grad.index.size(); ++k) {
    const auto g = grad.values.col(static_cast<Eigen::Index>(k));
    m.col(grad.index[k]) += (1.0 - s.beta1) * g;
    v.col(grad.index[k]) += (1.0 - s.beta2) * g.cwiseProduct(g);
  }
  const double c1 = 1.0 - std::pow(s.beta1, static_cast<double>(t));
  const double c2 = 1.0 - std::pow(s.beta2, static_cast<double>(t));
  param.array() -= s.learning_rate * (m.array() / c1) / ((v.array() / c2).sqrt() + s.eps);
}

}  // namespace arl
