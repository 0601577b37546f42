#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace optpred {

/// One parsed CSV record (already unquoted).
using CsvRecord = std::vector<std::string>;

/// Reads a whole CSV file. Handles RFC-4180 quoting (embedded commas,
/// doubled quotes, newlines inside quoted fields) and skips blank lines.
/// Throws std::runtime_error if the file cannot be opened.
std::vector<CsvRecord> read_csv(const std::filesystem::path& path);

std::vector<CsvRecord> parse_csv_text(std::string_view text);

/// Quotes a field if it contains a delimiter, quote or newline.
std::string csv_escape(std::string_view field);

/// Shortest round-trip decimal representation of a double ("nan"/"inf"
/// spelled out). Used everywhere CSV output must be byte-stable.
std::string fmt_double(double v);

/// Strips whitespace from both ends.
std::string_view trim(std::string_view s);

/// Parses a numeric cell the way exchange archives need it: trims, drops
/// thousands separators, maps "-" / "" / garbage to nullopt.
std::optional<double> parse_numeric_cell(std::string_view cell);

class CsvWriter {
public:
    explicit CsvWriter(const std::filesystem::path& path);
    ~CsvWriter();
    CsvWriter(const CsvWriter&) = delete;
    CsvWriter& operator=(const CsvWriter&) = delete;

    void raw_line(std::string_view line);
    void row(const std::vector<std::string>& fields);
    void close();

private:
    struct Impl;
    Impl* impl_;
};

}  // namespace optpred
