#pragma once

// Flat key-value run configuration. The format is INI-like:
//
//     # comment
//     [system]
//     kind = boost
//     A_minus_row_1 = -0.033 0
//
// Section headers only namespace the keys that follow ("system.kind").
// Values are raw strings; typed access happens through the getters, which
// throw std::runtime_error with the offending key so the CLI can map any
// problem to a usage error. Matrices are spelled row by row with keys
// "<prefix>_row_1" .. "<prefix>_row_n".

#include <cctype>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "switchsurf/linalg.hpp"

namespace switchsurf {

namespace detail {

inline std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

}  // namespace detail

class Config {
  public:
    [[nodiscard]] static Config parse(std::istream& in, const std::string& origin) {
        Config cfg;
        cfg.origin_ = origin;
        std::string line;
        std::string section;
        std::size_t line_no = 0;
        while (std::getline(in, line)) {
            ++line_no;
            const std::size_t hash = line.find_first_of("#;");
            if (hash != std::string::npos) line.erase(hash);
            line = detail::trim(line);
            if (line.empty()) continue;
            if (line.front() == '[') {
                if (line.back() != ']')
                    throw std::runtime_error(cfg.where(line_no) + "unterminated section header");
                section = detail::trim(line.substr(1, line.size() - 2));
                if (section.empty())
                    throw std::runtime_error(cfg.where(line_no) + "empty section name");
                continue;
            }
            const std::size_t eq = line.find('=');
            if (eq == std::string::npos)
                throw std::runtime_error(cfg.where(line_no) + "expected key = value");
            std::string key = detail::trim(line.substr(0, eq));
            const std::string value = detail::trim(line.substr(eq + 1));
            if (key.empty()) throw std::runtime_error(cfg.where(line_no) + "empty key");
            if (!section.empty()) key = section + "." + key;
            if (!cfg.kv_.emplace(key, value).second)
                throw std::runtime_error(cfg.where(line_no) + "duplicate key '" + key + "'");
        }
        return cfg;
    }

    [[nodiscard]] static Config parse_file(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw std::runtime_error("cannot open config file '" + path + "'");
        return parse(in, path);
    }

    [[nodiscard]] static Config parse_string(const std::string& text,
                                             const std::string& origin = "<string>") {
        std::istringstream in(text);
        return parse(in, origin);
    }

    [[nodiscard]] bool has(const std::string& key) const {
        touched_.insert(key);
        return kv_.count(key) != 0;
    }

    [[nodiscard]] std::string get_string(const std::string& key) const {
        touched_.insert(key);
        const auto it = kv_.find(key);
        if (it == kv_.end()) throw std::runtime_error(missing(key));
        return it->second;
    }

    [[nodiscard]] std::string get_string(const std::string& key, const std::string& fallback) const {
        return has(key) ? get_string(key) : fallback;
    }

    [[nodiscard]] double get_double(const std::string& key) const {
        return parse_double(key, get_string(key));
    }
    [[nodiscard]] double get_double(const std::string& key, double fallback) const {
        return has(key) ? get_double(key) : fallback;
    }

    [[nodiscard]] std::size_t get_size(const std::string& key) const {
        const std::string v = get_string(key);
        char* end = nullptr;
        const unsigned long long u = std::strtoull(v.c_str(), &end, 10);
        if (end == v.c_str() || *end != '\0' || v.front() == '-')
            throw std::runtime_error(bad_value(key, v, "a nonnegative integer"));
        return static_cast<std::size_t>(u);
    }
    [[nodiscard]] std::size_t get_size(const std::string& key, std::size_t fallback) const {
        return has(key) ? get_size(key) : fallback;
    }

    [[nodiscard]] bool get_bool(const std::string& key, bool fallback) const {
        if (!has(key)) return fallback;
        const std::string v = get_string(key);
        if (v == "true" || v == "yes" || v == "1") return true;
        if (v == "false" || v == "no" || v == "0") return false;
        throw std::runtime_error(bad_value(key, v, "a boolean"));
    }

    [[nodiscard]] Vector get_vector(const std::string& key) const {
        const std::string v = get_string(key);
        std::istringstream in(v);
        Vector out;
        std::string tok;
        while (in >> tok) out.push_back(parse_double(key, tok));
        if (out.empty()) throw std::runtime_error(bad_value(key, v, "a list of numbers"));
        return out;
    }
    [[nodiscard]] Vector get_vector(const std::string& key, const Vector& fallback) const {
        return has(key) ? get_vector(key) : fallback;
    }

    /// Rows "<prefix>_row_1" .. consecutive; all rows must share one length.
    [[nodiscard]] Matrix get_matrix(const std::string& prefix) const {
        std::vector<Vector> rows;
        for (std::size_t r = 1;; ++r) {
            const std::string key = prefix + "_row_" + std::to_string(r);
            if (!has(key)) break;
            rows.push_back(get_vector(key));
        }
        if (rows.empty())
            throw std::runtime_error(missing(prefix + "_row_1"));
        Matrix m(rows.size(), rows.front().size());
        for (std::size_t r = 0; r < rows.size(); ++r) {
            if (rows[r].size() != m.cols())
                throw std::runtime_error(origin_ + ": rows of '" + prefix +
                                         "' have inconsistent lengths");
            for (std::size_t c = 0; c < m.cols(); ++c) m(r, c) = rows[r][c];
        }
        return m;
    }

    /// Keys present in the file but never queried; useful for typo warnings.
    [[nodiscard]] std::vector<std::string> unused_keys() const {
        std::vector<std::string> out;
        for (const auto& [key, value] : kv_)
            if (!touched_.count(key)) out.push_back(key);
        return out;
    }

    [[nodiscard]] const std::string& origin() const { return origin_; }

  private:
    [[nodiscard]] std::string where(std::size_t line_no) const {
        return origin_ + ":" + std::to_string(line_no) + ": ";
    }
    [[nodiscard]] std::string missing(const std::string& key) const {
        return origin_ + ": missing required key '" + key + "'";
    }
    [[nodiscard]] std::string bad_value(const std::string& key, const std::string& v,
                                        const char* expected) const {
        return origin_ + ": key '" + key + "' has value '" + v + "', expected " + expected;
    }
    [[nodiscard]] double parse_double(const std::string& key, const std::string& v) const {
        char* end = nullptr;
        const double d = std::strtod(v.c_str(), &end);
        if (end == v.c_str() || *end != '\0')
            throw std::runtime_error(bad_value(key, v, "a number"));
        return d;
    }

    std::map<std::string, std::string> kv_;
    mutable std::set<std::string> touched_;
    std::string origin_;
};

}  // namespace switchsurf
