// Copyright 2026 The databoost Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace databoost {

enum class ErrorCode {
    kIo,
    kEmptyDataset,
    kMalformedRow,
    kMissingField,
    kStratifyImpossible,
    kStarvedClassEmpty,
    kEmptyVocab,
    kEmptyCorpus,
    kEmptyClass,
    kUnknownClass,
    kInvalidArgument,
    kDivergence,
    kContextOverflow,
    kNonFinite,
    kBadCheckpoint,
    kMissingLexiconWord,
    kImpossiblePlan,
    kDegenerateTrainSet,
    kConfig,
};

std::string_view error_code_name(ErrorCode code);

/// Exception carrying a machine-readable code alongside the message.
class Error : public std::runtime_error {
  public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(std::string(error_code_name(code)) + ": " + message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

  private:
    ErrorCode code_;
};

}  // namespace databoost
