#pragma once

#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>

#include "semiwave/errors.hpp"

// Flat sectioned key=value run configuration. No nesting, '#' comments,
// unknown sections/keys are rejected against the subcommand schema.

namespace semiwave::cli {

struct ConfigEntry {
    std::string value;
    int line = 0;
};

class RunConfig {
public:
    static RunConfig parse_string(const std::string& text, const std::string& origin = "<string>") {
        RunConfig cfg;
        cfg.origin_ = origin;
        std::istringstream in(text);
        std::string raw;
        std::string section;
        int lineno = 0;
        while (std::getline(in, raw)) {
            ++lineno;
            std::string line = strip(raw.substr(0, raw.find('#')));
            if (line.empty()) continue;
            if (line.front() == '[') {
                if (line.back() != ']')
                    throw ConfigError(origin + ":" + std::to_string(lineno) +
                                      ": unterminated section header");
                section = strip(line.substr(1, line.size() - 2));
                if (section.empty())
                    throw ConfigError(origin + ":" + std::to_string(lineno) +
                                      ": empty section name");
                cfg.sections_[section];
                continue;
            }
            const auto eq = line.find('=');
            if (eq == std::string::npos)
                throw ConfigError(origin + ":" + std::to_string(lineno) +
                                  ": expected key = value");
            const std::string key = strip(line.substr(0, eq));
            const std::string val = strip(line.substr(eq + 1));
            if (key.empty())
                throw ConfigError(origin + ":" + std::to_string(lineno) + ": empty key");
            if (section.empty())
                throw ConfigError(origin + ":" + std::to_string(lineno) +
                                  ": key outside any [section]");
            auto& sec = cfg.sections_[section];
            if (sec.count(key))
                throw ConfigError(origin + ":" + std::to_string(lineno) +
                                  ": duplicate key '" + key + "'");
            sec[key] = {val, lineno};
        }
        return cfg;
    }

    static RunConfig parse_file(const std::string& path) {
        std::ifstream f(path);
        if (!f) throw ConfigError("cannot open config file: " + path);
        std::ostringstream ss;
        ss << f.rdbuf();
        return parse_string(ss.str(), path);
    }

    bool has_section(const std::string& s) const { return sections_.count(s) != 0; }
    bool has(const std::string& s, const std::string& k) const {
        auto it = sections_.find(s);
        return it != sections_.end() && it->second.count(k) != 0;
    }

    std::string get_string(const std::string& s, const std::string& k) const {
        return entry(s, k).value;
    }
    std::string get_string(const std::string& s, const std::string& k,
                           const std::string& dflt) const {
        return has(s, k) ? entry(s, k).value : dflt;
    }

    double get_double(const std::string& s, const std::string& k) const {
        const auto& e = entry(s, k);
        try {
            std::size_t pos = 0;
            const double v = std::stod(e.value, &pos);
            if (pos != e.value.size()) throw std::invalid_argument("trailing junk");
            return v;
        } catch (const std::exception&) {
            throw ConfigError(origin_ + ":" + std::to_string(e.line) + ": key '" + k +
                              "' is not a number: '" + e.value + "'");
        }
    }
    double get_double(const std::string& s, const std::string& k, double dflt) const {
        return has(s, k) ? get_double(s, k) : dflt;
    }

    long get_int(const std::string& s, const std::string& k, long dflt) const {
        if (!has(s, k)) return dflt;
        const auto& e = entry(s, k);
        try {
            std::size_t pos = 0;
            const long v = std::stol(e.value, &pos);
            if (pos != e.value.size()) throw std::invalid_argument("trailing junk");
            return v;
        } catch (const std::exception&) {
            throw ConfigError(origin_ + ":" + std::to_string(e.line) + ": key '" + k +
                              "' is not an integer: '" + e.value + "'");
        }
    }

    bool get_bool(const std::string& s, const std::string& k, bool dflt) const {
        if (!has(s, k)) return dflt;
        const auto& e = entry(s, k);
        if (e.value == "true" || e.value == "1" || e.value == "yes") return true;
        if (e.value == "false" || e.value == "0" || e.value == "no") return false;
        throw ConfigError(origin_ + ":" + std::to_string(e.line) + ": key '" + k +
                          "' is not a boolean: '" + e.value + "'");
    }

    /// Rejects any section or key not present in the schema.
    void validate(const std::map<std::string, std::set<std::string>>& schema) const {
        for (const auto& [sec, entries] : sections_) {
            auto it = schema.find(sec);
            if (it == schema.end())
                throw ConfigError(origin_ + ": unknown section [" + sec + "]");
            for (const auto& [key, e] : entries) {
                if (!it->second.count(key))
                    throw ConfigError(origin_ + ":" + std::to_string(e.line) +
                                      ": unknown key '" + key + "' in [" + sec + "]");
            }
        }
    }

    const std::map<std::string, std::map<std::string, ConfigEntry>>& sections() const {
        return sections_;
    }
    /// Overrides (or inserts) a value; used by sweep to move along the axis.
    void set(const std::string& s, const std::string& k, const std::string& v) {
        sections_[s][k] = {v, 0};
    }
    void erase_section(const std::string& s) { sections_.erase(s); }

private:
    static std::string strip(const std::string& s) {
        const auto a = s.find_first_not_of(" \t\r\n");
        if (a == std::string::npos) return "";
        const auto b = s.find_last_not_of(" \t\r\n");
        return s.substr(a, b - a + 1);
    }
    const ConfigEntry& entry(const std::string& s, const std::string& k) const {
        auto it = sections_.find(s);
        if (it == sections_.end()) throw ConfigError("missing section [" + s + "]");
        auto jt = it->second.find(k);
        if (jt == it->second.end())
            throw ConfigError("missing key '" + k + "' in [" + s + "]");
        return jt->second;
    }

    std::string origin_;
    std::map<std::string, std::map<std::string, ConfigEntry>> sections_;
};

}  // namespace semiwave::cli
