// Copyright 2026 The databoost Authors
// SPDX-License-Identifier: Apache-2.0

#include "databoost/augment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <mutex>
#include <thread>
#include <unordered_set>

#include "databoost/error.hpp"
#include "databoost/random.hpp"

namespace databoost {

std::size_t BoostPlan::total() const {
    std::size_t s = 0;
    for (auto t : targets) s += t;
    return s;
}

std::string BoostPlan::to_table(const Dataset& starved) const {
    const auto counts = starved.class_counts();
    std::string out = "class\tstarved\ttarget\tfinal\n";
    for (std::size_t c = 0; c < classes.size(); ++c) {
        const std::size_t have = c < counts.size() ? counts[c] : 0;
        out += classes[c] + "\t" + std::to_string(have) + "\t" + std::to_string(targets[c]) + "\t" +
               std::to_string(have + targets[c]) + "\n";
    }
    return out;
}

std::vector<double> class_distribution(const Dataset& ds) {
    if (ds.empty()) throw Error(ErrorCode::kEmptyDataset, "class distribution of an empty dataset");
    std::vector<double> out;
    for (auto n : ds.class_counts()) out.push_back(static_cast<double>(n) / static_cast<double>(ds.size()));
    return out;
}

BoostPlan plan_boost(const Dataset& starved, std::size_t full_train_size, const std::vector<double>& dist) {
    if (full_train_size < starved.size()) {
        throw Error(ErrorCode::kInvalidArgument, "full train size is smaller than the starved set");
    }
    if (dist.size() != starved.num_classes()) {
        throw Error(ErrorCode::kInvalidArgument, "class distribution has the wrong number of entries");
    }
    double total = 0.0;
    for (double d : dist) {
        if (!(d >= 0.0)) throw Error(ErrorCode::kInvalidArgument, "class distribution has a negative entry");
        total += d;
    }
    if (!(total > 0.0)) throw Error(ErrorCode::kInvalidArgument, "class distribution sums to zero");
    std::vector<double> quotas;
    for (double d : dist) quotas.push_back(d / total * static_cast<double>(full_train_size));
    const auto desired = largest_remainder(quotas);
    const auto have = starved.class_counts();
    BoostPlan plan;
    plan.classes = starved.classes();
    for (std::size_t c = 0; c < desired.size(); ++c) {
        if (have[c] > desired[c]) {
            throw Error(ErrorCode::kImpossiblePlan, "class '" + plan.classes[c] + "' already has " +
                                                        std::to_string(have[c]) + " rows but its share is " +
                                                        std::to_string(desired[c]));
        }
        plan.targets.push_back(desired[c] - have[c]);
    }
    return plan;
}

namespace {

struct ClassOutput {
    std::vector<LabeledExample> rows;
    std::vector<std::string> diagnostics;
    std::size_t attempts = 0;
    bool exhausted = false;
};

std::uint64_t attempt_seed(std::uint64_t plan_seed, std::size_t cls, std::size_t index, std::size_t attempt) {
    return derive_seed(derive_seed(derive_seed(plan_seed, cls), index), attempt);
}

// Sequential generation for one class; dedup among this class's rows.
ClassOutput generate_class(const BoostPlan& plan, std::size_t c, const LmModel& model, const Vocab& vocab,
                           const LexiconTarget& target, bool diagnostics) {
    ClassOutput out;
    std::unordered_set<std::string> seen;
    for (std::size_t i = 0; i < plan.targets[c]; ++i) {
        bool placed = false;
        for (std::size_t a = 0; a < plan.max_attempts && !placed; ++a) {
            ++out.attempts;
            Generation g = generate_conditional(model, vocab, target, plan.guide, attempt_seed(plan.seed, c, i, a));
            if (g.tokens.empty()) continue;
            if (plan.dedup == DedupPolicy::kExactMatch && !seen.insert(g.text).second) continue;
            const std::string id = plan.classes[c] + ":" + std::to_string(i);
            out.rows.push_back({g.text, plan.classes[c], Provenance::kBoosted, id});
            if (diagnostics) out.diagnostics.push_back(diagnostics_jsonl(g, id));
            placed = true;
        }
        if (!placed) {
            out.exhausted = true;
            break;
        }
    }
    return out;
}

}  // namespace

BoostResult boost(const Dataset& starved, const BoostPlan& plan, const LmModel& model, const Vocab& vocab,
                  const Lexicon& lexicon, const BoostOptions& options) {
    if (plan.classes != starved.classes() || plan.targets.size() != plan.classes.size()) {
        throw Error(ErrorCode::kInvalidArgument, "plan does not match the dataset's classes");
    }
    if (plan.max_attempts < 1) throw Error(ErrorCode::kInvalidArgument, "max_attempts must be >= 1");
    plan.guide.validate();
    std::vector<LexiconTarget> targets(plan.classes.size());
    for (std::size_t c = 0; c < plan.classes.size(); ++c) {
        if (plan.targets[c] == 0) continue;
        if (!lexicon.has_class(plan.classes[c])) {
            throw Error(ErrorCode::kUnknownClass, "no lexicon for class '" + plan.classes[c] + "'");
        }
        targets[c] = resolve_lexicon(lexicon, plan.classes[c], vocab, model.tok_emb);
    }

    std::vector<ClassOutput> outputs(plan.classes.size());
    std::atomic<std::size_t> next{0};
    std::mutex error_mutex;
    std::exception_ptr error;
    auto worker = [&] {
        for (std::size_t c = next++; c < plan.classes.size(); c = next++) {
            if (plan.targets[c] == 0) continue;
            try {
                outputs[c] = generate_class(plan, c, model, vocab, targets[c], options.collect_diagnostics);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!error) error = std::current_exception();
            }
        }
    };
    const std::size_t jobs = std::clamp<std::size_t>(options.jobs, 1, std::max<std::size_t>(1, plan.classes.size()));
    if (jobs == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (std::size_t j = 0; j < jobs; ++j) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    if (error) std::rethrow_exception(error);

    // Deterministic merge in (class, index) order. Generated rows must be
    // distinct across classes too; a cross-class collision is regenerated
    // with further attempt seeds.
    BoostResult result;
    std::vector<LabeledExample> rows = starved.examples();
    std::unordered_set<std::string> seen;
    result.generated.assign(plan.classes.size(), 0);
    for (std::size_t c = 0; c < plan.classes.size(); ++c) {
        auto& out = outputs[c];
        result.attempts += out.attempts;
        for (std::size_t i = 0; i < out.rows.size(); ++i) {
            auto& row = out.rows[i];
            if (plan.dedup == DedupPolicy::kExactMatch && seen.count(row.text)) {
                bool replaced = false;
                for (std::size_t a = plan.max_attempts; a < 2 * plan.max_attempts && !replaced; ++a) {
                    ++result.attempts;
                    Generation g = generate_conditional(model, vocab, targets[c], plan.guide,
                                                        attempt_seed(plan.seed, c, i, a));
                    if (g.tokens.empty() || seen.count(g.text)) continue;
                    bool local_dup = false;
                    for (const auto& other : out.rows) local_dup |= other.text == g.text;
                    if (local_dup) continue;
                    row.text = g.text;
                    if (options.collect_diagnostics) out.diagnostics[i] = diagnostics_jsonl(g, row.diag_ref);
                    replaced = true;
                }
                if (!replaced) {
                    out.exhausted = true;
                    continue;
                }
            }
            seen.insert(row.text);
            rows.push_back(row);
            ++result.generated[c];
            if (options.collect_diagnostics) result.diagnostics += out.diagnostics[i];
        }
        if (out.exhausted || result.generated[c] < plan.targets[c]) {
            result.partial = true;
            result.warnings.push_back("class '" + plan.classes[c] + "': attempts exhausted after " +
                                      std::to_string(result.generated[c]) + " of " +
                                      std::to_string(plan.targets[c]) + " rows");
        }
    }
    result.data = starved.with_examples(std::move(rows));
    return result;
}

Dataset naive_baseline_augment(const Dataset& starved, const BoostPlan& plan, const PreprocessConfig& cfg,
                               double p_delete, double p_swap, std::uint64_t seed) {
    if (plan.classes != starved.classes() || plan.targets.size() != plan.classes.size()) {
        throw Error(ErrorCode::kInvalidArgument, "plan does not match the dataset's classes");
    }
    const auto by_class = starved.indices_by_class();
    std::vector<LabeledExample> rows = starved.examples();
    for (std::size_t c = 0; c < plan.classes.size(); ++c) {
        if (plan.targets[c] == 0) continue;
        if (by_class[c].empty()) {
            throw Error(ErrorCode::kEmptyClass, "class '" + plan.classes[c] + "' has no rows to edit");
        }
        Rng rng(derive_seed(seed, c));
        for (std::size_t i = 0; i < plan.targets[c]; ++i) {
            const auto& src = starved.examples()[by_class[c][rng.below(by_class[c].size())]];
            auto toks = preprocess(src.text, cfg).value_or(std::vector<std::string>{});
            std::vector<std::string> kept;
            for (const auto& t : toks) {
                if (rng.uniform() >= p_delete) kept.push_back(t);
            }
            if (kept.empty() && !toks.empty()) kept.push_back(toks[rng.below(toks.size())]);
            for (std::size_t j = 0; j < kept.size(); ++j) {
                if (rng.uniform() < p_swap) std::swap(kept[j], kept[rng.below(kept.size())]);
            }
            rows.push_back({join_tokens(kept), plan.classes[c], Provenance::kBoosted,
                            "naive:" + plan.classes[c] + ":" + std::to_string(i)});
        }
    }
    return starved.with_examples(std::move(rows));
}

}  // namespace databoost
