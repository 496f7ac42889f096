// Copyright 2026 The databoost Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "databoost/corpus.hpp"
#include "databoost/guide.hpp"
#include "databoost/lm.hpp"
#include "databoost/salience.hpp"

namespace databoost {

enum class DedupPolicy { kNone, kExactMatch };

struct BoostPlan {
    std::vector<std::string> classes;
    std::vector<std::size_t> targets;  // generated rows per class
    DedupPolicy dedup = DedupPolicy::kExactMatch;
    std::size_t max_attempts = 10;
    GuideConfig guide;
    std::uint64_t seed = 1;

    std::size_t total() const;
    /// Human-readable table: class, starved count, target, final count.
    std::string to_table(const Dataset& starved) const;
};

/// Per-class generation targets so that starved + generated has
/// full_train_size rows split by class_distribution (largest remainder).
/// Throws kImpossiblePlan when a class already exceeds its share and
/// kInvalidArgument on malformed inputs.
BoostPlan plan_boost(const Dataset& starved, std::size_t full_train_size, const std::vector<double>& class_distribution);

/// Class proportions of a dataset, indexed like its classes.
std::vector<double> class_distribution(const Dataset& ds);

struct BoostOptions {
    std::size_t jobs = 1;
    bool collect_diagnostics = false;
};

struct BoostResult {
    Dataset data;  // starved rows followed by generated rows, ordered by class then index
    bool partial = false;
    std::vector<std::string> warnings;
    std::vector<std::size_t> generated;  // per class
    std::size_t attempts = 0;
    std::string diagnostics;  // JSONL, when requested
};

/// Generates plan.targets rows per class with the guided decoder. Lexicon
/// entries must exist for every class with a nonzero target.
BoostResult boost(const Dataset& starved, const BoostPlan& plan, const LmModel& model, const Vocab& vocab,
                  const Lexicon& lexicon, const BoostOptions& options = {});

/// Token-level delete/swap augmentation of randomly drawn originals of the
/// same class, with the same size contract as boost().
Dataset naive_baseline_augment(const Dataset& starved, const BoostPlan& plan, const PreprocessConfig& cfg,
                               double p_delete, double p_swap, std::uint64_t seed);

}  // namespace databoost
