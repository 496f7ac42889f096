// Copyright 2026 The databoost Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace databoost {

/// Flat key=value settings. Lines starting with '#' and blank lines are
/// ignored; whitespace around keys and values is trimmed.
using KeyValues = std::map<std::string, std::string>;

KeyValues parse_key_values(std::string_view text);
KeyValues load_key_values(const std::filesystem::path& path);
std::string format_key_values(const KeyValues& kv);

/// Typed reads over a KeyValues map that remember which keys were used and
/// collect every problem; finish() reports them all at once (ErrorCode::kConfig).
class ConfigReader {
  public:
    explicit ConfigReader(KeyValues kv) : kv_(std::move(kv)) {}

    double real(const std::string& key, double fallback);
    std::size_t count(const std::string& key, std::size_t fallback);
    std::uint64_t u64(const std::string& key, std::uint64_t fallback);
    std::string text(const std::string& key, const std::string& fallback);
    bool flag(const std::string& key, bool fallback);
    std::vector<double> reals(const std::string& key, const std::vector<double>& fallback);

    void error(std::string message) { errors_.push_back(std::move(message)); }
    const std::vector<std::string>& errors() const { return errors_; }
    /// Throws if any read failed, any error was recorded, or (when strict)
    /// any key was never read.
    void finish(bool strict = true);

  private:
    const std::string* find(const std::string& key);

    KeyValues kv_;
    std::set<std::string> used_;
    std::vector<std::string> errors_;
};

std::string format_real(double v);

}  // namespace databoost
