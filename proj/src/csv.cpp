#include "smalldev/csv.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "smalldev/error.hpp"

namespace smalldev {

namespace {

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    std::istringstream ss(line);
    while (std::getline(ss, field, ',')) out.push_back(field);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

}  // namespace

std::size_t CsvTable::column(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (header[i] == name) return i;
    }
    throw Error(ErrorCode::ParseError, "missing CSV column '" + name + "'");
}

CsvTable read_csv_table(std::istream& in) {
    CsvTable table;
    std::string line;
    bool have_header = false;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line[0] == '#') {
            table.comments.push_back(line);
            continue;
        }
        auto fields = split_fields(line);
        if (!have_header) {
            table.header = std::move(fields);
            have_header = true;
            continue;
        }
        if (fields.size() != table.header.size()) {
            throw Error(ErrorCode::ParseError, "CSV line " + std::to_string(line_no) + " has " +
                                                   std::to_string(fields.size()) + " fields, expected " +
                                                   std::to_string(table.header.size()));
        }
        table.rows.push_back(std::move(fields));
    }
    if (!have_header) throw Error(ErrorCode::ParseError, "CSV input has no header row");
    return table;
}

double parse_double(const std::string& field) {
    if (field == "nan") return std::nan("");
    if (field == "inf") return HUGE_VAL;
    if (field == "-inf") return -HUGE_VAL;
    double value = 0.0;
    const char* begin = field.data();
    const char* end = begin + field.size();
    auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc() || ptr != end) {
        throw Error(ErrorCode::ParseError, "not a number: '" + field + "'");
    }
    return value;
}

std::string format_double(double value) {
    if (std::isnan(value)) return "nan";
    if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
    (void)ec;
    return std::string(buf, ptr);
}

std::string provenance_line(const Provenance& prov) {
    char hash[17];
    std::snprintf(hash, sizeof(hash), "%016llx", static_cast<unsigned long long>(prov.config_hash));
    return "# smalldev " + prov.version + " seed=" + std::to_string(prov.seed) + " config=" + hash;
}

CsvWriter::CsvWriter(std::ostream& out, std::vector<std::string> header, const Provenance* prov)
    : out_(out), columns_(header.size()) {
    if (prov) out_ << provenance_line(*prov) << '\n';
    for (std::size_t i = 0; i < header.size(); ++i) {
        out_ << (i ? "," : "") << header[i];
    }
    out_ << '\n';
}

CsvWriter& CsvWriter::cell(const std::string& text) {
    pending_.push_back(text);
    return *this;
}

CsvWriter& CsvWriter::cell(double value) { return cell(format_double(value)); }

CsvWriter& CsvWriter::cell(long long value) { return cell(std::to_string(value)); }

void CsvWriter::end_row() {
    if (pending_.size() != columns_) {
        throw Error(ErrorCode::InvalidArgument, "CSV row has " + std::to_string(pending_.size()) +
                                                    " cells, header has " + std::to_string(columns_));
    }
    for (std::size_t i = 0; i < pending_.size(); ++i) {
        out_ << (i ? "," : "") << pending_[i];
    }
    out_ << '\n';
    pending_.clear();
}

}  // namespace smalldev
