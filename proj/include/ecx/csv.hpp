#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace ecx::csv {

using Row = std::vector<std::string>;

// Minimal RFC 4180 reader: comma separated, double-quoted fields may contain
// commas, quotes ("") and newlines. Handles \n and \r\n line endings.
class Reader {
public:
    explicit Reader(std::istream& in) : in_(in) {}

    // Reads the next record. Returns false at end of stream.
    bool next(Row& row);

    // 1-based physical line on which the last record returned by next() started.
    std::size_t line() const { return record_line_; }

private:
    std::istream& in_;
    std::size_t line_ = 1;
    std::size_t record_line_ = 0;
};

// Reads the header row and checks it against the expected column names.
// Throws InputError naming the mismatch.
Row read_header(Reader& reader, const std::vector<std::string_view>& expected, std::string_view what);

std::string escape(std::string_view field);
void write_row(std::ostream& out, const Row& row);

// Shortest decimal representation that parses back to the same double.
std::string format_double(double v);

std::optional<double> parse_double(std::string_view text);
std::optional<std::int64_t> parse_int(std::string_view text);
std::string_view trim(std::string_view text);

} // namespace ecx::csv
