// Copyright 2026 The surfdice Authors.
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

#ifndef SURFDICE_ERROR_HPP
#define SURFDICE_ERROR_HPP

#include <stdexcept>
#include <string>
#include <string_view>

namespace surfdice {

enum class ErrorCode {
  ShapeMismatch,
  SpacingMismatch,
  InvalidArgument,
  InvalidSparseLabels,
  NegativeTolerance,
  MissingOrgan,
  EmptySampleSet,
  BadMagic,
  UnsupportedDatatype,
  NonBinaryMask,
  TruncatedFile,
  IoFailure,
  Schema,
  Parse,
};

inline std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::ShapeMismatch: return "shape-mismatch";
    case ErrorCode::SpacingMismatch: return "spacing-mismatch";
    case ErrorCode::InvalidArgument: return "invalid-argument";
    case ErrorCode::InvalidSparseLabels: return "invalid-sparse-labels";
    case ErrorCode::NegativeTolerance: return "negative-tolerance";
    case ErrorCode::MissingOrgan: return "missing-organ";
    case ErrorCode::EmptySampleSet: return "empty-sample-set";
    case ErrorCode::BadMagic: return "bad-magic";
    case ErrorCode::UnsupportedDatatype: return "unsupported-datatype";
    case ErrorCode::NonBinaryMask: return "non-binary-mask";
    case ErrorCode::TruncatedFile: return "truncated-file";
    case ErrorCode::IoFailure: return "io-failure";
    case ErrorCode::Schema: return "schema";
    case ErrorCode::Parse: return "parse";
  }
  return "unknown";
}

/// Every failure raised by the library. what() is "<code-name>: <detail>".
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& detail)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + detail),
        code_(code),
        detail_(detail) {}

  ErrorCode code() const noexcept { return code_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorCode code_;
  std::string detail_;
};

}  // namespace surfdice

#endif  // SURFDICE_ERROR_HPP
