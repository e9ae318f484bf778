// Copyright (c) 2026 The retrodict developers.
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

#pragma once

#include <sstream>
#include <stdexcept>
#include <string>

namespace retrodict {

/// Base class for everything thrown by this library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid input: operators, devices, bases or files that fail validation.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Numerical machinery misbehaved: a failed eigensolve, a trace of
/// positive-semidefinite operators coming out substantially negative, or two
/// supposedly equivalent computation paths disagreeing.
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// File-level problems: unreadable input, malformed syntax, schema violations.
class IoError : public Error {
 public:
  using Error::Error;
};

namespace detail {
inline std::string fmt_real(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}
}  // namespace detail

class InvalidMatrix : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class NotHermitian : public ValidationError {
 public:
  explicit NotHermitian(double defect)
      : ValidationError("matrix is not Hermitian: max entry defect " +
                        detail::fmt_real(defect)),
        defect_(defect) {}
  double defect() const noexcept { return defect_; }

 private:
  double defect_;
};

class NotUnitary : public ValidationError {
 public:
  explicit NotUnitary(double defect)
      : ValidationError("matrix is not unitary: max entry defect " +
                        detail::fmt_real(defect)),
        defect_(defect) {}
  double defect() const noexcept { return defect_; }

 private:
  double defect_;
};

class NotPsd : public ValidationError {
 public:
  NotPsd(std::string label, double min_eigenvalue)
      : ValidationError("operator \"" + label +
                        "\" is not positive semidefinite: smallest eigenvalue " +
                        detail::fmt_real(min_eigenvalue)),
        label_(std::move(label)),
        min_eigenvalue_(min_eigenvalue) {}
  const std::string& label() const noexcept { return label_; }
  double min_eigenvalue() const noexcept { return min_eigenvalue_; }

 private:
  std::string label_;
  double min_eigenvalue_;
};

class DimensionMismatch : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class EmptyDevice : public ValidationError {
 public:
  EmptyDevice() : ValidationError("device has no operators") {}
};

class ZeroTotal : public ValidationError {
 public:
  ZeroTotal() : ValidationError("device operator sum has zero trace") {}
};

class DuplicateLabel : public ValidationError {
 public:
  explicit DuplicateLabel(const std::string& label)
      : ValidationError("duplicate label \"" + label + "\"") {}
};

class ReservedLabel : public ValidationError {
 public:
  explicit ReservedLabel(const std::string& label)
      : ValidationError("label \"" + label +
                        "\" is reserved for the null measurement outcome") {}
};

class UnknownLabel : public ValidationError {
 public:
  explicit UnknownLabel(const std::string& label)
      : ValidationError("no operator labeled \"" + label + "\"") {}
};

class WrongRole : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class ZeroTraceOperator : public ValidationError {
 public:
  explicit ZeroTraceOperator(const std::string& label)
      : ValidationError("operator \"" + label +
                        "\" has zero trace; no state can be derived from it") {}
};

class BiasedDevice : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class DegeneratePair : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class DegenerateScenario : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class EmptyKeptSet : public ValidationError {
 public:
  EmptyKeptSet()
      : ValidationError("every sampled event carried the null outcome; "
                        "nothing to tabulate") {}
};

class EigenFailure : public NumericalError {
 public:
  EigenFailure() : NumericalError("Hermitian eigensolver did not converge") {}
};

class InternalNumericalError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class CrossCheckFailure : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class SyntaxError : public IoError {
 public:
  using IoError::IoError;
};

class SchemaError : public IoError {
 public:
  SchemaError(std::string field, const std::string& message)
      : IoError("field \"" + field + "\": " + message), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

class FileError : public IoError {
 public:
  using IoError::IoError;
};

}  // namespace retrodict
