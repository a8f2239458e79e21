#pragma once

// Flat key = value run configuration with one [section] per command.
// Unknown sections and keys are rejected with line numbers; command-line
// overrides are applied as key=value (or section.key=value) strings.

#include <algorithm>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "rabiwall/common.hpp"

namespace rabiwall {

struct ConfigEntry {
    std::string value;
    int line = 0; // 0 for command-line overrides
};

struct ConfigFile {
    // section -> key -> entry
    std::map<std::string, std::map<std::string, ConfigEntry>> sections;
};

namespace detail {

inline std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

} // namespace detail

inline ConfigFile parse_config_text(const std::string& text) {
    ConfigFile cfg;
    std::istringstream in(text);
    std::string line, section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string t = detail::trim(line);
        if (t.empty() || t[0] == '#') continue;
        if (t.front() == '[') {
            if (t.back() != ']')
                throw ConfigError("line " + std::to_string(lineno) + ": unterminated section header");
            section = detail::trim(t.substr(1, t.size() - 2));
            if (section.empty())
                throw ConfigError("line " + std::to_string(lineno) + ": empty section name");
            cfg.sections[section]; // section may legitimately stay empty
            continue;
        }
        const auto eq = t.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
        if (section.empty())
            throw ConfigError("line " + std::to_string(lineno) + ": key outside any [section]");
        const std::string key = detail::trim(t.substr(0, eq));
        const std::string value = detail::trim(t.substr(eq + 1));
        if (key.empty())
            throw ConfigError("line " + std::to_string(lineno) + ": empty key");
        auto& sec = cfg.sections[section];
        if (sec.count(key))
            throw ConfigError("line " + std::to_string(lineno) + ": duplicate key '" + key +
                              "' in [" + section + "] (first at line " +
                              std::to_string(sec[key].line) + ")");
        sec[key] = {value, lineno};
    }
    return cfg;
}

inline ConfigFile parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str());
}

// Overrides look like "key=value" (applied to `default_section`) or
// "section.key=value".
inline void apply_overrides(ConfigFile& cfg, const std::vector<std::string>& sets,
                            const std::string& default_section) {
    for (const auto& s : sets) {
        const auto eq = s.find('=');
        if (eq == std::string::npos)
            throw ConfigError("override '" + s + "': expected key=value");
        std::string key = detail::trim(s.substr(0, eq));
        const std::string value = detail::trim(s.substr(eq + 1));
        std::string section = default_section;
        const auto dot = key.find('.');
        if (dot != std::string::npos) {
            section = key.substr(0, dot);
            key = key.substr(dot + 1);
        }
        if (key.empty()) throw ConfigError("override '" + s + "': empty key");
        cfg.sections[section][key] = {value, 0};
    }
}

// Typed access to one section; tracks which keys were consumed so that
// leftovers can be reported as config errors.
class SectionView {
public:
    SectionView(const ConfigFile& cfg, std::string section)
        : section_(std::move(section)) {
        const auto it = cfg.sections.find(section_);
        if (it != cfg.sections.end()) entries_ = &it->second;
    }

    bool has(const std::string& key) const { return entries_ && entries_->count(key); }

    std::string get_string(const std::string& key, const std::string& def) {
        consumed_.insert(key);
        if (!has(key)) return def;
        return entries_->at(key).value;
    }

    double get_double(const std::string& key, double def) {
        consumed_.insert(key);
        if (!has(key)) return def;
        return parse_double(key);
    }

    double require_double(const std::string& key) {
        consumed_.insert(key);
        if (!has(key))
            throw ConfigError("[" + section_ + "]: missing required key '" + key + "'");
        return parse_double(key);
    }

    long get_int(const std::string& key, long def) {
        consumed_.insert(key);
        if (!has(key)) return def;
        const auto& e = entries_->at(key);
        try {
            std::size_t pos = 0;
            const long v = std::stol(e.value, &pos);
            if (pos != e.value.size()) throw std::invalid_argument("");
            return v;
        } catch (...) {
            throw ConfigError("line " + std::to_string(e.line) + ": key '" + key +
                              "' is not an integer: '" + e.value + "'");
        }
    }

    std::vector<double> get_list(const std::string& key, std::vector<double> def) {
        consumed_.insert(key);
        if (!has(key)) return def;
        const auto& e = entries_->at(key);
        std::vector<double> out;
        std::istringstream ss(e.value);
        std::string tok;
        while (std::getline(ss, tok, ',')) {
            tok = detail::trim(tok);
            if (tok.empty()) continue;
            try {
                out.push_back(std::stod(tok));
            } catch (...) {
                throw ConfigError("line " + std::to_string(e.line) + ": bad number '" + tok +
                                  "' in list '" + key + "'");
            }
        }
        if (out.empty())
            throw ConfigError("line " + std::to_string(e.line) + ": empty list for key '" + key + "'");
        return out;
    }

    // must be called after all gets: rejects unknown keys
    void finish() const {
        if (!entries_) return;
        for (const auto& [key, e] : *entries_)
            if (!consumed_.count(key))
                throw ConfigError("line " + std::to_string(e.line) + ": unknown key '" + key +
                                  "' in section [" + section_ + "]");
    }

private:
    double parse_double(const std::string& key) const {
        const auto& e = entries_->at(key);
        try {
            std::size_t pos = 0;
            const double v = std::stod(e.value, &pos);
            if (pos != e.value.size()) throw std::invalid_argument("");
            return v;
        } catch (...) {
            throw ConfigError("line " + std::to_string(e.line) + ": key '" + key +
                              "' is not a number: '" + e.value + "'");
        }
    }

    std::string section_;
    const std::map<std::string, ConfigEntry>* entries_ = nullptr;
    std::set<std::string> consumed_;
};

// Reject sections that no command claims.
inline void check_known_sections(const ConfigFile& cfg, const std::set<std::string>& known) {
    for (const auto& [name, entries] : cfg.sections) {
        if (known.count(name)) continue;
        const int line = entries.empty() ? 0 : entries.begin()->second.line;
        throw ConfigError("line " + std::to_string(line) + ": unknown section [" + name + "]");
    }
}

} // namespace rabiwall
