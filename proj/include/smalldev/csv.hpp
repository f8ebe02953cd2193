#pragma once

#include <cstdint>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

namespace smalldev {

// Rows are kept as strings; numeric columns go through parse_double.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> comments;

    std::size_t column(const std::string& name) const;  // throws ParseError
};

// Lines starting with '#' are comments. No quoting: fields never contain commas.
CsvTable read_csv_table(std::istream& in);
double parse_double(const std::string& field);

// Shortest text that parses back to the same double.
std::string format_double(double value);

struct Provenance {
    std::string version;
    std::uint64_t seed = 0;
    std::uint64_t config_hash = 0;
};

std::string provenance_line(const Provenance& prov);

class CsvWriter {
public:
    CsvWriter(std::ostream& out, std::vector<std::string> header, const Provenance* prov = nullptr);

    CsvWriter& cell(const std::string& text);
    CsvWriter& cell(double value);
    CsvWriter& cell(long long value);
    CsvWriter& cell(int value) { return cell(static_cast<long long>(value)); }
    CsvWriter& cell(std::size_t value) { return cell(static_cast<long long>(value)); }
    void end_row();

private:
    std::ostream& out_;
    std::size_t columns_;
    std::vector<std::string> pending_;
};

}  // namespace smalldev
