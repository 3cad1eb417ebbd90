#include "fractlab/io.hpp"

#include <cstdio>
#include <fstream>

#include "fractlab/errors.hpp"

namespace fractlab::io {

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string csv_field(const std::string& raw) {
    if (raw.find_first_of(",\"\n\r") == std::string::npos) return raw;
    std::string out = "\"";
    for (char c : raw) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

void CsvTable::row(std::vector<std::string> cells) {
    if (cells.size() != header_.size())
        throw ContractError("csv row has " + std::to_string(cells.size()) + " cells, header has " +
                            std::to_string(header_.size()));
    rows_.push_back(std::move(cells));
}

std::string CsvTable::str() const {
    std::string out;
    const auto line = [&out](const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) out += ',';
            out += csv_field(cells[i]);
        }
        out += '\n';
    };
    line(header_);
    for (const auto& r : rows_) line(r);
    return out;
}

Json CsvTable::rows_json() const {
    Json arr = Json::array();
    for (const auto& r : rows_) {
        Json obj = Json::object();
        for (std::size_t i = 0; i < header_.size(); ++i) obj[header_[i]] = r[i];
        arr.push_back(std::move(obj));
    }
    return arr;
}

std::string json_str(const Json& j) { return j.dump(2) + "\n"; }

void write_text(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("cannot open output file '" + path + "'");
    out << content;
    if (!out) throw ConfigError("failed writing output file '" + path + "'");
}

} // namespace fractlab::io
