// Copyright 2026 The shadow-audit Authors
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

namespace shadowaudit {

enum class ErrorCode {
  ParseError,
  DuplicateUser,
  DanglingEdge,
  SelfLoop,
  DuplicateEdge,
  EmptyGraph,
  UnspecifiedGender,
  UnknownUser,
  InfeasibleConfig,
  InvalidConfig,
  DegenerateTraining,
  DimensionMismatch,
  DegenerateAgreement,
  ConstantX,
  InsufficientClasses,
  EmptyTrainingSet,
  JoinOrderMissing,
  IoError,
};

inline const char* error_code_name(ErrorCode c) {
  switch (c) {
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::DuplicateUser: return "DuplicateUser";
    case ErrorCode::DanglingEdge: return "DanglingEdge";
    case ErrorCode::SelfLoop: return "SelfLoop";
    case ErrorCode::DuplicateEdge: return "DuplicateEdge";
    case ErrorCode::EmptyGraph: return "EmptyGraph";
    case ErrorCode::UnspecifiedGender: return "UnspecifiedGender";
    case ErrorCode::UnknownUser: return "UnknownUser";
    case ErrorCode::InfeasibleConfig: return "InfeasibleConfig";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::DegenerateTraining: return "DegenerateTraining";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::DegenerateAgreement: return "DegenerateAgreement";
    case ErrorCode::ConstantX: return "ConstantX";
    case ErrorCode::InsufficientClasses: return "InsufficientClasses";
    case ErrorCode::EmptyTrainingSet: return "EmptyTrainingSet";
    case ErrorCode::JoinOrderMissing: return "JoinOrderMissing";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

/// Error type carried by every failure the library reports. The code is
/// stable and machine-readable; the message is for humans.
class AuditError : public std::runtime_error {
 public:
  AuditError(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
  throw AuditError(code, message);
}

}  // namespace shadowaudit
