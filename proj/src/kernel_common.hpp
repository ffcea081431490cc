#pragma once

// Shared helpers for the batch kernels. Internal to the library.

#include "arl/kernels.hpp"

#include <string>

namespace arl::detail {

// Maps word id -> column of WordPerturbation::delta, or -1.
class WordDeltaLookup {
 public:
  WordDeltaLookup(const WordPerturbation* pert, int vocab_size) : pert_(pert) {
    if (pert_ == nullptr) return;
    slot_.assign(static_cast<std::size_t>(vocab_size), -1);
    for (std::size_t k = 0; k < pert_->words.size(); ++k) {
      slot_.at(static_cast<std::size_t>(pert_->words[k])) = static_cast<int>(k);
    }
  }

  // Mean of (E + delta) columns over the tokens.
  Vector mean(const Matrix& E, std::span<const int> tokens) const {
    Vector d = mean_pool(E, tokens);
    if (pert_ == nullptr) return d;
    const double inv = 1.0 / static_cast<double>(tokens.size());
    for (int t : tokens) {
      const int s = slot_[static_cast<std::size_t>(t)];
      if (s >= 0) d.noalias() += pert_->delta.col(s) * inv;
    }
    return d;
  }

 private:
  const WordPerturbation* pert_;
  std::vector<int> slot_;
};

struct CosineGrad {
  double value = 0.0;
  Vector grad_a;  // d cos / d a
  Vector grad_b;  // d cos / d b
};

inline CosineGrad cosine_with_grad(const Vector& a, const Vector& b) {
  CosineGrad out;
  const double na = a.norm();
  const double nb = b.norm();
  if (na < kNormFloor || nb < kNormFloor) {
    out.grad_a = Vector::Zero(a.size());
    out.grad_b = Vector::Zero(b.size());
    return out;
  }
  const double inv = 1.0 / (na * nb);
  out.value = a.dot(b) * inv;
  out.grad_a = b * inv - a * (out.value / (na * na));
  out.grad_b = a * inv - b * (out.value / (nb * nb));
  return out;
}

inline void softmax_inplace(Vector& s) {
  s.array() -= s.maxCoeff();
  s = s.array().exp();
  s /= s.sum();
}

inline std::string doc_label(const EncodedDocument& d) { return "document " + std::to_string(d.id); }

}  // namespace arl::detail
