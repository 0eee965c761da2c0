// Copyright 2026 The qcrb Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <stdexcept>
#include <string>

namespace qcrb {

enum class ErrorKind {
  kDimensionMismatch,
  kNotHermitian,
  kNotPositiveSemidefinite,
  kTraceDeviationTooLarge,
  kNonFinite,
  kInvalidArgument,
  kMissingMoment,
  kDegenerateGram,
  kZeroFisherInformation,
  kImaginaryResidue,
  kSchema,
};

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kDimensionMismatch: return "DimensionMismatch";
    case ErrorKind::kNotHermitian: return "NotHermitian";
    case ErrorKind::kNotPositiveSemidefinite: return "NotPositiveSemidefinite";
    case ErrorKind::kTraceDeviationTooLarge: return "TraceDeviationTooLarge";
    case ErrorKind::kNonFinite: return "NonFinite";
    case ErrorKind::kInvalidArgument: return "InvalidArgument";
    case ErrorKind::kMissingMoment: return "MissingMoment";
    case ErrorKind::kDegenerateGram: return "DegenerateGram";
    case ErrorKind::kZeroFisherInformation: return "ZeroFisherInformation";
    case ErrorKind::kImaginaryResidue: return "ImaginaryResidue";
    case ErrorKind::kSchema: return "SchemaError";
  }
  return "Unknown";
}

/// Base of every exception thrown by the library. `kind()` lets front ends
/// map failures onto exit codes without string matching.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind), message_(what) {}

  ErrorKind kind() const noexcept { return kind_; }

  /// what() without the kind prefix.
  const std::string& message() const noexcept { return message_; }

  /// True for failures caused by the numbers rather than by the input layout.
  bool is_numerical() const noexcept {
    return kind_ == ErrorKind::kDegenerateGram || kind_ == ErrorKind::kZeroFisherInformation ||
           kind_ == ErrorKind::kImaginaryResidue || kind_ == ErrorKind::kNonFinite;
  }

 private:
  ErrorKind kind_;
  std::string message_;
};

#define QCRB_DEFINE_ERROR(Name, Kind)                                  \
  class Name : public Error {                                          \
   public:                                                             \
    explicit Name(const std::string& what) : Error(Kind, what) {}      \
  };

QCRB_DEFINE_ERROR(DimensionMismatch, ErrorKind::kDimensionMismatch)
QCRB_DEFINE_ERROR(NotHermitian, ErrorKind::kNotHermitian)
QCRB_DEFINE_ERROR(NotPositiveSemidefinite, ErrorKind::kNotPositiveSemidefinite)
QCRB_DEFINE_ERROR(TraceDeviationTooLarge, ErrorKind::kTraceDeviationTooLarge)
QCRB_DEFINE_ERROR(NonFinite, ErrorKind::kNonFinite)
QCRB_DEFINE_ERROR(InvalidArgument, ErrorKind::kInvalidArgument)
QCRB_DEFINE_ERROR(MissingMoment, ErrorKind::kMissingMoment)
QCRB_DEFINE_ERROR(DegenerateGram, ErrorKind::kDegenerateGram)
QCRB_DEFINE_ERROR(ZeroFisherInformation, ErrorKind::kZeroFisherInformation)
QCRB_DEFINE_ERROR(ImaginaryResidue, ErrorKind::kImaginaryResidue)

#undef QCRB_DEFINE_ERROR

/// Schema violation in a problem document. `path` is a JSON pointer to the
/// offending field.
class SchemaError : public Error {
 public:
  SchemaError(std::string path, const std::string& reason)
      : Error(ErrorKind::kSchema, (path.empty() ? std::string("/") : path) + ": " + reason),
        path_(std::move(path)),
        reason_(reason) {}

  const std::string& path() const noexcept { return path_; }
  const std::string& reason() const noexcept { return reason_; }

 private:
  std::string path_;
  std::string reason_;
};

}  // namespace qcrb
