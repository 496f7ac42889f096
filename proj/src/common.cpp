// Copyright 2026 The databoost Authors
// SPDX-License-Identifier: Apache-2.0

#include "databoost/error.hpp"
#include "databoost/random.hpp"

#include <cmath>
#include <numbers>

namespace databoost {

std::string_view error_code_name(ErrorCode code) {
    switch (code) {
        case ErrorCode::kIo: return "IoError";
        case ErrorCode::kEmptyDataset: return "EmptyDataset";
        case ErrorCode::kMalformedRow: return "MalformedRow";
        case ErrorCode::kMissingField: return "MissingField";
        case ErrorCode::kStratifyImpossible: return "StratifyImpossible";
        case ErrorCode::kStarvedClassEmpty: return "StarvedClassEmpty";
        case ErrorCode::kEmptyVocab: return "EmptyVocab";
        case ErrorCode::kEmptyCorpus: return "EmptyCorpus";
        case ErrorCode::kEmptyClass: return "EmptyClass";
        case ErrorCode::kUnknownClass: return "UnknownClass";
        case ErrorCode::kInvalidArgument: return "InvalidArgument";
        case ErrorCode::kDivergence: return "Divergence";
        case ErrorCode::kContextOverflow: return "ContextOverflow";
        case ErrorCode::kNonFinite: return "NonFinite";
        case ErrorCode::kBadCheckpoint: return "BadCheckpoint";
        case ErrorCode::kMissingLexiconWord: return "MissingLexiconWord";
        case ErrorCode::kImpossiblePlan: return "ImpossiblePlan";
        case ErrorCode::kDegenerateTrainSet: return "DegenerateTrainSet";
        case ErrorCode::kConfig: return "ConfigError";
    }
    return "Unknown";
}

double Rng::normal() {
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::size_t Rng::categorical(std::span<const double> weights) {
    double total = 0.0;
    for (double w : weights) total += w;
    double r = uniform() * total;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        r -= weights[i];
        if (r < 0.0) return i;
    }
    // Rounding left r at or slightly above zero: return the last positive entry.
    for (std::size_t i = weights.size(); i > 0; --i) {
        if (weights[i - 1] > 0.0) return i - 1;
    }
    return 0;
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
    Rng r(seed ^ (stream * 0x9E3779B97F4A7C15ULL + 0x632BE59BD9B4E019ULL));
    r.next_u64();
    return r.next_u64();
}

}  // namespace databoost
