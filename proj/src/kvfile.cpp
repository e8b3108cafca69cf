#include "shipnet/kvfile.hpp"

#include <cctype>
#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <set>

namespace shipnet {

namespace {

bool name_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.'; }

std::size_t skip_space(const std::string& s, std::size_t i) {
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    return i;
}

std::string rtrim(std::string s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.pop_back();
    return s;
}

}  // namespace

KvDocument parse_kv(std::istream& in) {
    KvDocument doc;
    std::string section;
    std::set<std::string> seen_keys;
    std::set<std::string> seen_sections;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        std::size_t i = skip_space(line, 0);
        if (i == line.size() || line[i] == '#' || line[i] == ';') continue;

        if (line[i] == '[') {
            const std::size_t start = i + 1;
            std::size_t j = start;
            while (j < line.size() && name_char(line[j])) ++j;
            if (j == start) throw ParseError("expected a section name", lineno, static_cast<int>(j) + 1);
            if (j >= line.size() || line[j] != ']') throw ParseError("expected ']'", lineno, static_cast<int>(j) + 1);
            std::size_t k = skip_space(line, j + 1);
            if (k < line.size() && line[k] != '#')
                throw ParseError("unexpected text after section header", lineno, static_cast<int>(k) + 1);
            section = line.substr(start, j - start);
            if (!seen_sections.insert(section).second)
                throw ParseError("duplicate section [" + section + "]", lineno, static_cast<int>(i) + 1);
            doc.sections.push_back({section, lineno});
            continue;
        }

        const std::size_t key_start = i;
        while (i < line.size() && name_char(line[i])) ++i;
        if (i == key_start) throw ParseError("expected a key", lineno, static_cast<int>(i) + 1);
        const std::string key = line.substr(key_start, i - key_start);
        i = skip_space(line, i);
        if (i >= line.size() || line[i] != '=') throw ParseError("expected '='", lineno, static_cast<int>(i) + 1);
        i = skip_space(line, i + 1);
        std::string value = line.substr(i);
        for (std::size_t c = 1; c < value.size(); ++c)
            if (value[c] == '#' && std::isspace(static_cast<unsigned char>(value[c - 1]))) {
                value.resize(c);
                break;
            }
        value = rtrim(value);
        if (value.empty() || value[0] == '#') throw ParseError("missing value for '" + key + "'", lineno, static_cast<int>(i) + 1);
        const std::string full = section + "/" + key;
        if (!seen_keys.insert(full).second)
            throw ParseError("duplicate key '" + key + "'", lineno, static_cast<int>(key_start) + 1);
        doc.entries.push_back({section, key, value, lineno, static_cast<int>(i) + 1});
    }
    return doc;
}

KvDocument parse_kv_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open '" + path.string() + "'");
    return parse_kv(in);
}

std::pair<std::string, int> split_indexed(const std::string& name) {
    const auto dot = name.rfind('.');
    if (dot == std::string::npos || dot + 1 == name.size()) return {name, -1};
    const std::string tail = name.substr(dot + 1);
    for (char c : tail)
        if (!std::isdigit(static_cast<unsigned char>(c))) return {name, -1};
    if (tail.size() > 3) return {name, -1};
    return {name.substr(0, dot), std::stoi(tail)};
}

double kv_number(const KvEntry& e) {
    errno = 0;
    char* end = nullptr;
    const double v = std::strtod(e.value.c_str(), &end);
    if (end == e.value.c_str() || *end != '\0' || errno == ERANGE || !std::isfinite(v))
        throw ParseError("'" + e.key + "' expects a number, got '" + e.value + "'", e.line, e.value_column);
    return v;
}

std::int64_t kv_integer(const KvEntry& e) {
    errno = 0;
    char* end = nullptr;
    const long long v = std::strtoll(e.value.c_str(), &end, 10);
    if (end == e.value.c_str() || *end != '\0' || errno == ERANGE)
        throw ParseError("'" + e.key + "' expects an integer, got '" + e.value + "'", e.line, e.value_column);
    return v;
}

bool kv_bool(const KvEntry& e) {
    if (e.value == "true" || e.value == "yes" || e.value == "1") return true;
    if (e.value == "false" || e.value == "no" || e.value == "0") return false;
    throw ParseError("'" + e.key + "' expects true or false, got '" + e.value + "'", e.line, e.value_column);
}

}  // namespace shipnet
