// Copyright 2026 The databoost Authors
// SPDX-License-Identifier: Apache-2.0

#include "databoost/config.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "databoost/error.hpp"

namespace databoost {

namespace {

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

}  // namespace

KeyValues parse_key_values(std::string_view text) {
    KeyValues kv;
    std::istringstream in{std::string(text)};
    std::string line;
    std::size_t line_no = 0;
    std::vector<std::string> problems;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string t = trim(line);
        if (t.empty() || t.front() == '#') continue;
        const auto eq = t.find('=');
        if (eq == std::string::npos) {
            problems.push_back("line " + std::to_string(line_no) + ": expected key=value");
            continue;
        }
        const std::string key = trim(std::string_view(t).substr(0, eq));
        if (key.empty()) {
            problems.push_back("line " + std::to_string(line_no) + ": empty key");
            continue;
        }
        kv[key] = trim(std::string_view(t).substr(eq + 1));
    }
    if (!problems.empty()) {
        std::string msg;
        for (const auto& p : problems) msg += (msg.empty() ? "" : "; ") + p;
        throw Error(ErrorCode::kConfig, msg);
    }
    return kv;
}

KeyValues load_key_values(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::kConfig, "cannot open config " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_key_values(ss.str());
}

std::string format_key_values(const KeyValues& kv) {
    std::string out;
    for (const auto& [k, v] : kv) out += k + "=" + v + "\n";
    return out;
}

std::string format_real(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

const std::string* ConfigReader::find(const std::string& key) {
    used_.insert(key);
    auto it = kv_.find(key);
    return it == kv_.end() ? nullptr : &it->second;
}

double ConfigReader::real(const std::string& key, double fallback) {
    const std::string* v = find(key);
    if (!v) return fallback;
    try {
        std::size_t pos = 0;
        const double d = std::stod(*v, &pos);
        if (pos != v->size()) throw std::invalid_argument("trailing");
        return d;
    } catch (const std::exception&) {
        error(key + ": expected a number, got '" + *v + "'");
        return fallback;
    }
}

std::uint64_t ConfigReader::u64(const std::string& key, std::uint64_t fallback) {
    const std::string* v = find(key);
    if (!v) return fallback;
    std::uint64_t out = 0;
    const auto res = std::from_chars(v->data(), v->data() + v->size(), out);
    if (res.ec != std::errc() || res.ptr != v->data() + v->size()) {
        error(key + ": expected a non-negative integer, got '" + *v + "'");
        return fallback;
    }
    return out;
}

std::size_t ConfigReader::count(const std::string& key, std::size_t fallback) {
    return static_cast<std::size_t>(u64(key, fallback));
}

std::string ConfigReader::text(const std::string& key, const std::string& fallback) {
    const std::string* v = find(key);
    return v ? *v : fallback;
}

bool ConfigReader::flag(const std::string& key, bool fallback) {
    const std::string* v = find(key);
    if (!v) return fallback;
    if (*v == "true" || *v == "1" || *v == "yes") return true;
    if (*v == "false" || *v == "0" || *v == "no") return false;
    error(key + ": expected true/false, got '" + *v + "'");
    return fallback;
}

std::vector<double> ConfigReader::reals(const std::string& key, const std::vector<double>& fallback) {
    const std::string* v = find(key);
    if (!v) return fallback;
    std::vector<double> out;
    std::stringstream ss(*v);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t pos = 0;
            const std::string t = trim(item);
            out.push_back(std::stod(t, &pos));
            if (pos != t.size()) throw std::invalid_argument("trailing");
        } catch (const std::exception&) {
            error(key + ": expected a comma-separated list of numbers, got '" + *v + "'");
            return fallback;
        }
    }
    return out;
}

void ConfigReader::finish(bool strict) {
    if (strict) {
        for (const auto& [k, v] : kv_) {
            if (!used_.count(k)) error("unknown key '" + k + "'");
        }
    }
    if (errors_.empty()) return;
    std::string msg;
    for (const auto& e : errors_) msg += (msg.empty() ? "" : "; ") + e;
    throw Error(ErrorCode::kConfig, msg);
}

}  // namespace databoost
