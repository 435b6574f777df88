#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <string_view>
#include <vector>

namespace restadv {

// Streaming reader for simple comma-separated files: one header row, no
// quoting or embedded commas (none of the formats used here need them).
// Fields are string_views into an internal line buffer, valid until the
// next call to next_row().
class CsvReader {
public:
    explicit CsvReader(const std::filesystem::path& path);

    const std::vector<std::string>& header() const { return header_; }

    // Column index by name, or -1 when absent.
    int column(std::string_view name) const;
    // Column index by name; throws std::runtime_error naming the file when absent.
    int require_column(std::string_view name) const;

    // Advances to the next data row. Returns false at end of file.
    bool next_row();

    std::size_t field_count() const { return fields_.size(); }
    std::string_view field(std::size_t i) const;

    // 1-based line number of the current row (header is line 1).
    std::size_t line_number() const { return line_number_; }
    const std::filesystem::path& path() const { return path_; }

    // Throws std::runtime_error with file/line context.
    [[noreturn]] void fail(const std::string& message) const;

    long parse_long(std::size_t i, std::string_view what) const;
    double parse_double(std::size_t i, std::string_view what) const;

private:
    std::filesystem::path path_;
    std::ifstream in_;
    std::string line_;
    std::vector<std::string> header_;
    std::vector<std::string_view> fields_;
    std::size_t line_number_ = 0;
};

void split_csv_line(std::string_view line, std::vector<std::string_view>& out);

// Shortest decimal form that round-trips the double exactly (%.17g with
// trailing-precision reduction).
std::string format_double(double v);
// Fixed-precision form for human-facing tables.
std::string format_fixed(double v, int digits);

// FNV-1a 64-bit over a file's bytes; used as a cheap provenance digest.
std::uint64_t fnv1a_file(const std::filesystem::path& path);
std::uint64_t fnv1a_update(std::uint64_t state, const void* data, std::size_t len);
inline constexpr std::uint64_t kFnvOffset = 1469598103934665603ull;

// Opens an output file, throwing std::runtime_error on failure.
std::ofstream open_output(const std::filesystem::path& path);

}  // namespace restadv
