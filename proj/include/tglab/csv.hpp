#pragma once

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "tglab/errors.hpp"

namespace tglab::csv {

/// 17 significant digits: round-trips any double exactly, keeping CSV
/// payloads bit-stable regression fixtures.
inline std::string format(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline std::string format(int v) { return std::to_string(v); }
inline std::string format(long long v) { return std::to_string(v); }
inline std::string format(std::uint64_t v) { return std::to_string(v); }
inline std::string format(const std::string& v) { return v; }
inline std::string format(const char* v) { return v; }

class Writer {
public:
    explicit Writer(std::vector<std::string> columns) : columns_(std::move(columns)) {
        for (std::size_t i = 0; i < columns_.size(); ++i) {
            if (i) out_ << ',';
            out_ << columns_[i];
        }
        out_ << '\n';
    }

    template <class... Ts>
    void row(const Ts&... values) {
        if (sizeof...(values) != columns_.size())
            throw ContractViolation("csv::Writer: wrong number of fields for row");
        std::size_t i = 0;
        ((out_ << format(values) << (++i == sizeof...(values) ? '\n' : ',')), ...);
    }

    std::string str() const { return out_.str(); }

private:
    std::vector<std::string> columns_;
    std::ostringstream out_;
};

struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;
};

inline Table parse(const std::string& text) {
    Table t;
    std::istringstream in(text);
    std::string line;
    bool header = true;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> fields;
        std::size_t pos = 0;
        while (true) {
            const std::size_t comma = line.find(',', pos);
            fields.push_back(line.substr(pos, comma == std::string::npos ? comma : comma - pos));
            if (comma == std::string::npos) break;
            pos = comma + 1;
        }
        if (header) {
            t.columns = std::move(fields);
            header = false;
        } else {
            t.rows.push_back(std::move(fields));
        }
    }
    return t;
}

inline int column_index(const Table& t, const std::string& name) {
    for (std::size_t i = 0; i < t.columns.size(); ++i)
        if (t.columns[i] == name) return static_cast<int>(i);
    throw ContractViolation("csv: no column named '" + name + "'");
}

/// FNV-1a 64-bit hash; platform-stable checksum for manifests.
inline std::uint64_t fnv1a64(const void* data, std::size_t size) {
    const auto* p = static_cast<const unsigned char*>(data);
    std::uint64_t hash = 0xcbf29ce484222325ULL;
    for (std::size_t i = 0; i < size; ++i) {
        hash ^= p[i];
        hash *= 0x100000001b3ULL;
    }
    return hash;
}

inline std::uint64_t fnv1a64(const std::string& s) { return fnv1a64(s.data(), s.size()); }

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write file: " + path);
    out << content;
}

} // namespace tglab::csv
