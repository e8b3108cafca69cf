#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "shipnet/common.hpp"

namespace shipnet {

// Line-oriented "key = value" files with [section] headers. '#' or ';'
// start a comment at the beginning of a line; " #" starts a trailing comment.
struct KvEntry {
    std::string section;  // "" before the first header
    std::string key;
    std::string value;
    int line = 0;
    int value_column = 0;
};

struct KvSection {
    std::string name;
    int line = 0;
};

struct KvDocument {
    std::vector<KvSection> sections;
    std::vector<KvEntry> entries;
};

// Throws ParseError with line/column.
KvDocument parse_kv(std::istream& in);
KvDocument parse_kv_file(const std::filesystem::path& path);

// Splits "port.3" into ("port", 3); index is -1 when there is no numeric suffix.
std::pair<std::string, int> split_indexed(const std::string& name);

// Strict conversions; throw ParseError pointing at the value.
double kv_number(const KvEntry& e);
std::int64_t kv_integer(const KvEntry& e);
bool kv_bool(const KvEntry& e);

}  // namespace shipnet
