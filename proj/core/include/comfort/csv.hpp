#pragma once

#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace comfort {

// RFC 4180-style field handling: quoted fields may contain commas, newlines
// are not supported inside fields, doubled quotes escape a quote.
std::vector<std::string> split_csv_line(std::string_view line);
std::string csv_escape(std::string_view field);

// Shortest round-trip decimal representation (std::to_chars); deterministic
// across runs, exact on re-parse.
std::string format_double(double v);
std::optional<double> parse_strict_double(std::string_view s);

struct CsvRow {
    int line = 0;  // 1-based line number in the file
    std::vector<std::string> fields;
};

struct CsvFile {
    std::vector<std::string> header;
    std::vector<CsvRow> rows;
};

// Reads the whole file; throws MalformedFileError if unreadable or the header
// line is missing. Blank lines are skipped.
CsvFile read_csv(const std::filesystem::path& path);

class CsvWriter {
public:
    explicit CsvWriter(const std::filesystem::path& path);

    void row(const std::vector<std::string>& fields);

private:
    std::ofstream out_;
};

// Reads all lines of a text file (used by the JSONL loaders).
std::vector<std::string> read_lines(const std::filesystem::path& path);

void write_text_file(const std::filesystem::path& path, std::string_view content);
std::string read_text_file(const std::filesystem::path& path);

}  // namespace comfort
