#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace arl {

// Column-major: column w of E is the embedding of word w, column m of C is
// the embedding of cluster m.
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Invalid input, malformed files, configuration errors.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A non-finite objective or gradient during training.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace arl
