// Serialization helpers shared by the CLI: RFC-4180-style CSV ('\n' line
// ends, header row, '.' decimal, 17 significant digits) and JSON with sorted
// keys. Both are byte-deterministic functions of their inputs.

#pragma once

#include <string>
#include <vector>

#include <json.hpp>

namespace fractlab::io {

using Json = nlohmann::json;

std::string format_double(double v); // %.17g, C locale

// Quotes fields containing commas, quotes or newlines; doubles inner quotes.
std::string csv_field(const std::string& raw);

class CsvTable {
public:
    explicit CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

    void row(std::vector<std::string> cells);

    static std::string num(double v) { return format_double(v); }
    static std::string num(int v) { return std::to_string(v); }
    static std::string num(long long v) { return std::to_string(v); }
    static std::string flag(bool v) { return v ? "true" : "false"; }

    std::string str() const;
    Json rows_json() const; // array of objects keyed by header

private:
    std::vector<std::string> header_;
    std::vector<std::vector<std::string>> rows_;
};

std::string json_str(const Json& j); // dump(2) + trailing newline

void write_text(const std::string& path, const std::string& content);

} // namespace fractlab::io
