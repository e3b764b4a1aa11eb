#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace mobelcov {

/// Every CSV written by this project carries this value in a leading
/// `schema_version` column.
inline constexpr std::string_view kCsvSchemaVersion = "1";

/// Writes to a temporary sibling file and renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

/// Shortest decimal text that round-trips to the same double.
std::string format_double(double value);

/// Builds a comma-separated table; the schema_version column is prepended.
class CsvWriter {
public:
    explicit CsvWriter(std::vector<std::string> header);

    CsvWriter& row(const std::vector<std::string>& cells);
    const std::string& str() const { return text_; }
    void save(const std::filesystem::path& path) const { write_file_atomic(path, text_); }

private:
    std::size_t columns_;
    std::string text_;
};

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    /// Index of a named column, or -1.
    int column(std::string_view name) const;
    double number(std::size_t row, std::string_view name) const;
};

CsvTable read_csv(const std::filesystem::path& path);
CsvTable parse_csv(std::string_view text);

}  // namespace mobelcov
