// SPDX-FileCopyrightText: (c) 2026 entro contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <string>

#include "entro/types.hpp"

namespace entro {

// Flat key = value configuration file: one pair per line, '#' comments,
// blank lines ignored. Callers read the keys they understand and then call
// finish(), which rejects anything left over by name.
class KeyValueConfig {
public:
    KeyValueConfig() = default;

    static KeyValueConfig load(const std::filesystem::path& path) {
        std::ifstream in(path);
        if (!in) throw config_error("cannot open config file " + path.string());
        KeyValueConfig cfg;
        cfg.path_ = path.string();
        std::string line;
        std::size_t lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            const std::string stripped = strip(line.substr(0, line.find('#')));
            if (stripped.empty()) continue;
            const auto eq = stripped.find('=');
            if (eq == std::string::npos)
                throw config_error(cfg.path_ + ":" + std::to_string(lineno) + ": expected key = value");
            const std::string key = strip(stripped.substr(0, eq));
            const std::string value = strip(stripped.substr(eq + 1));
            if (key.empty())
                throw config_error(cfg.path_ + ":" + std::to_string(lineno) + ": empty key");
            if (!cfg.values_.emplace(key, value).second)
                throw config_error(cfg.path_ + ":" + std::to_string(lineno) + ": duplicate key '" + key + "'");
        }
        return cfg;
    }

    bool has(const std::string& key) const { return values_.count(key) != 0; }

    // Mark a key as understood without reading it (a flag overrode it).
    void acknowledge(const std::string& key) { consumed_.insert(key); }

    std::string get_string(const std::string& key) {
        consumed_.insert(key);
        return values_.at(key);
    }

    double get_double(const std::string& key) {
        const std::string raw = get_string(key);
        try {
            std::size_t used = 0;
            const double v = std::stod(raw, &used);
            if (used != raw.size()) throw std::invalid_argument(raw);
            return v;
        } catch (const std::exception&) {
            throw config_error(path_ + ": key '" + key + "': '" + raw + "' is not a number");
        }
    }

    std::uint64_t get_uint(const std::string& key) {
        const std::string raw = get_string(key);
        try {
            std::size_t used = 0;
            const auto v = std::stoull(raw, &used);
            if (used != raw.size()) throw std::invalid_argument(raw);
            return v;
        } catch (const std::exception&) {
            throw config_error(path_ + ": key '" + key + "': '" + raw + "' is not a nonnegative integer");
        }
    }

    // Reject unknown keys with their names.
    void finish() const {
        std::string unknown;
        for (const auto& [key, value] : values_) {
            if (consumed_.count(key)) continue;
            if (!unknown.empty()) unknown += ", ";
            unknown += "'" + key + "'";
        }
        if (!unknown.empty()) throw config_error(path_ + ": unknown key(s) " + unknown);
    }

private:
    static std::string strip(std::string s) {
        const auto not_space = [](unsigned char c) { return !std::isspace(c); };
        s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
        s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
        return s;
    }

    std::string path_;
    std::map<std::string, std::string> values_;
    std::set<std::string> consumed_;
};

}  // namespace entro
