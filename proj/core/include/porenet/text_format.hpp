#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace porenet {

/// Shortest decimal form that parses back to the identical double
/// (std::to_chars). Locale-independent; used for every number the
/// artifact writes, so exports are byte-stable and re-readable without
/// precision loss.
std::string fmt_double(double value);

/// Fixed-point form with the given number of fractional digits.
std::string fmt_fixed(double value, int precision);

/// General form with the given number of significant digits (plot tick
/// labels); std::to_chars, so locale-independent and deterministic.
std::string fmt_general(double value, int precision);

std::string fmt_u64(std::uint64_t value);
std::string fmt_i64(std::int64_t value);

/// Exact inverse of fmt_double (std::from_chars). Throws FormatError on
/// malformed input.
double parse_double(const std::string& text);
std::int64_t parse_i64(const std::string& text);
std::uint64_t parse_u64(const std::string& text);

/// Splits one CSV line on commas. No quoting: artifact CSVs contain only
/// numbers and identifier-like names.
std::vector<std::string> split_csv_line(const std::string& line);

/// Reads a whole CSV file: first row is the header, remaining rows are
/// returned as raw cells. Throws FormatError if a row's cell count does
/// not match the header.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    int column(const std::string& name) const;  // -1 when absent
};

CsvTable read_csv(const std::string& path);

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

std::string trim(const std::string& text);

}  // namespace porenet
