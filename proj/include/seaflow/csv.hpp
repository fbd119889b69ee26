#pragma once

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "seaflow/errors.hpp"

namespace seaflow {

struct CsvTable {
    std::string path;
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;  // data rows, header excluded

    // 1-based file line of data row i (header is line 1).
    static int line_of(size_t row_index) { return static_cast<int>(row_index) + 2; }
};

namespace csv_detail {

inline std::vector<std::string> split_line(const std::string& line, int line_no) {
    std::vector<std::string> out;
    std::string field;
    bool quoted = false;
    for (size_t i = 0; i < line.size(); ++i) {
        char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    field += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                field += c;
            }
        } else if (c == '"' && field.empty()) {
            quoted = true;
        } else if (c == ',') {
            out.push_back(field);
            field.clear();
        } else {
            field += c;
        }
    }
    if (quoted)
        throw SchemaMismatchError("unterminated quote", line_no, static_cast<int>(out.size()) + 1);
    out.push_back(field);
    return out;
}

}  // namespace csv_detail

inline CsvTable read_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    CsvTable t;
    t.path = path;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() && line_no > 1) continue;  // ignore trailing blank lines
        auto fields = csv_detail::split_line(line, line_no);
        if (line_no == 1)
            t.header = std::move(fields);
        else
            t.rows.push_back(std::move(fields));
    }
    if (t.header.empty()) throw SchemaMismatchError(path + ": empty file, header expected", 1, 1);
    return t;
}

// Headers must match the declared schema exactly, in order.
inline void require_schema(const CsvTable& t, const std::vector<std::string>& columns) {
    if (t.header.size() != columns.size())
        throw SchemaMismatchError(t.path + ": expected " + std::to_string(columns.size()) +
                                      " columns, found " + std::to_string(t.header.size()),
                                  1, static_cast<int>(t.header.size()) + 1);
    for (size_t i = 0; i < columns.size(); ++i) {
        if (t.header[i] != columns[i])
            throw SchemaMismatchError(t.path + ": column " + std::to_string(i + 1) +
                                          " must be '" + columns[i] + "', found '" + t.header[i] +
                                          "'",
                                      1, static_cast<int>(i) + 1);
    }
    for (size_t r = 0; r < t.rows.size(); ++r) {
        if (t.rows[r].size() != columns.size())
            throw SchemaMismatchError(t.path + ": row has " + std::to_string(t.rows[r].size()) +
                                          " fields, expected " + std::to_string(columns.size()),
                                      CsvTable::line_of(r), static_cast<int>(t.rows[r].size()) + 1);
    }
}

inline double parse_double(const std::string& s, int line, const std::string& what) {
    double v = 0.0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size())
        throw BadNumberError("line " + std::to_string(line) + ": bad " + what + " '" + s + "'",
                             line);
    return v;
}

inline long long parse_int(const std::string& s, int line, const std::string& what) {
    long long v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size())
        throw BadNumberError("line " + std::to_string(line) + ": bad " + what + " '" + s + "'",
                             line);
    return v;
}

// Shortest round-trip decimal form; keeps emitted CSVs byte-stable and
// re-parseable to the identical double.
inline std::string format_double(double v) {
    char buf[40];
    auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    (void)ec;
    return std::string(buf, p);
}

class CsvWriter {
public:
    CsvWriter(const std::string& path, const std::vector<std::string>& header) : out_(path) {
        if (!out_) throw IoError("cannot write " + path);
        write_row_strings(header);
    }

    void write_row_strings(const std::vector<std::string>& fields) {
        for (size_t i = 0; i < fields.size(); ++i) {
            if (i) out_ << ',';
            out_ << escape(fields[i]);
        }
        out_ << '\n';
    }

private:
    static std::string escape(const std::string& f) {
        if (f.find_first_of(",\"\n") == std::string::npos) return f;
        std::string q = "\"";
        for (char c : f) {
            if (c == '"') q += "\"\"";
            else q += c;
        }
        q += '"';
        return q;
    }

    std::ofstream out_;
};

}  // namespace seaflow
