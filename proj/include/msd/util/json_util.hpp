#pragma once

#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "msd/util/error.hpp"

namespace msd::util {

using json = nlohmann::json;

namespace detail {

// SAX consumer that only tracks object keys, so duplicate keys are rejected
// instead of silently keeping the last occurrence.
struct DupKeyChecker : nlohmann::json_sax<json> {
    std::vector<std::set<std::string>> scopes;
    std::string error;

    bool key(string_t& k) override {
        if (!scopes.back().insert(k).second) {
            error = "duplicate key \"" + k + "\"";
            return false;
        }
        return true;
    }
    bool start_object(std::size_t) override {
        scopes.emplace_back();
        return true;
    }
    bool end_object() override {
        scopes.pop_back();
        return true;
    }
    bool null() override { return true; }
    bool boolean(bool) override { return true; }
    bool number_integer(number_integer_t) override { return true; }
    bool number_unsigned(number_unsigned_t) override { return true; }
    bool number_float(number_float_t, const string_t&) override { return true; }
    bool string(string_t&) override { return true; }
    bool binary(binary_t&) override { return true; }
    bool start_array(std::size_t) override { return true; }
    bool end_array() override { return true; }
    bool parse_error(std::size_t pos, const std::string&, const nlohmann::detail::exception& ex) override {
        if (error.empty()) error = std::string(ex.what()) + " at byte " + std::to_string(pos);
        return false;
    }
};

} // namespace detail

inline json parse_json_strict(const std::string& text, const std::string& what) {
    detail::DupKeyChecker checker;
    checker.scopes.emplace_back();
    if (!json::sax_parse(text, &checker)) {
        throw ConfigError(what + ": " + (checker.error.empty() ? "parse error" : checker.error));
    }
    return json::parse(text);
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write " + path);
    out << content;
    if (!out) throw DataError("write failed for " + path);
}

inline json load_json_file(const std::string& path) {
    return parse_json_strict(read_file(path), path);
}

} // namespace msd::util
