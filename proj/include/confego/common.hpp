// Copyright 2026 The confego Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef CONFEGO_COMMON_HPP_
#define CONFEGO_COMMON_HPP_

#include <Eigen/Dense>

#include <functional>
#include <iostream>
#include <stdexcept>
#include <string>
#include <utility>

namespace confego {

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

// Bad arguments: dimension mismatches, malformed configuration, unknown names.
class InputError : public std::invalid_argument {
 public:
  explicit InputError(const std::string& what) : std::invalid_argument(what) {}
};

// Factorization or conditioning failures that survive jitter escalation.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

using WarningHandler = std::function<void(const std::string&)>;

namespace detail {
inline WarningHandler& warning_handler() {
  static WarningHandler handler = [](const std::string& message) {
    std::cerr << "confego: warning: " << message << '\n';
  };
  return handler;
}
}  // namespace detail

// Not synchronized; install the handler before starting worker threads.
inline void set_warning_handler(WarningHandler handler) { detail::warning_handler() = std::move(handler); }

inline void warn(const std::string& message) {
  if (detail::warning_handler()) detail::warning_handler()(message);
}

inline double positive_part(double v) { return v > 0.0 ? v : 0.0; }

}  // namespace confego

#endif  // CONFEGO_COMMON_HPP_
