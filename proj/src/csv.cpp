#include "ecx/csv.hpp"

#include "ecx/error.hpp"

#include <fmt/format.h>

#include <array>
#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>

namespace ecx::csv {

bool Reader::next(Row& row)
{
    row.clear();
    if (in_.peek() == std::char_traits<char>::eof()) {
        return false;
    }
    record_line_ = line_;
    std::string field;
    bool quoted = false;
    bool any = false;
    char c;
    while (in_.get(c)) {
        any = true;
        if (quoted) {
            if (c == '"') {
                if (in_.peek() == '"') {
                    in_.get(c);
                    field.push_back('"');
                } else {
                    quoted = false;
                }
            } else {
                if (c == '\n') {
                    ++line_;
                }
                field.push_back(c);
            }
            continue;
        }
        if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            row.push_back(std::move(field));
            field.clear();
        } else if (c == '\n') {
            ++line_;
            break;
        } else if (c == '\r') {
            if (in_.peek() == '\n') {
                continue;
            }
            field.push_back(c);
        } else {
            field.push_back(c);
        }
    }
    if (quoted) {
        throw InputError(fmt::format("unterminated quoted field starting on line {}", record_line_));
    }
    if (in_.bad()) {
        throw IoError("stream read failure");
    }
    if (!any) {
        return false;
    }
    row.push_back(std::move(field));
    return true;
}

Row read_header(Reader& reader, const std::vector<std::string_view>& expected, std::string_view what)
{
    Row header;
    if (!reader.next(header)) {
        throw InputError(fmt::format("{}: empty stream, expected a header", what));
    }
    if (!header.empty() && header[0].size() >= 3 && header[0].compare(0, 3, "\xEF\xBB\xBF") == 0) {
        header[0].erase(0, 3);
    }
    bool ok = header.size() == expected.size();
    for (std::size_t i = 0; ok && i < expected.size(); ++i) {
        ok = trim(header[i]) == expected[i];
    }
    if (!ok) {
        std::string want;
        for (auto e : expected) {
            want += want.empty() ? "" : ",";
            want += e;
        }
        throw InputError(fmt::format("{}: bad header, expected '{}'", what, want));
    }
    return header;
}

std::string escape(std::string_view field)
{
    if (field.find_first_of(",\"\r\n") == std::string_view::npos) {
        return std::string(field);
    }
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') {
            out.push_back('"');
        }
        out.push_back(c);
    }
    out.push_back('"');
    return out;
}

void write_row(std::ostream& out, const Row& row)
{
    for (std::size_t i = 0; i < row.size(); ++i) {
        if (i) {
            out << ',';
        }
        out << escape(row[i]);
    }
    out << '\n';
}

std::string format_double(double v)
{
    if (v == 0.0) {
        return "0"; // folds -0 as well
    }
    std::array<char, 64> buf{};
    auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    if (ec != std::errc{}) {
        throw Error("number formatting failed");
    }
    return std::string(buf.data(), end);
}

std::string_view trim(std::string_view text)
{
    constexpr std::string_view ws = " \t\r\n";
    const auto b = text.find_first_not_of(ws);
    if (b == std::string_view::npos) {
        return {};
    }
    const auto e = text.find_last_not_of(ws);
    return text.substr(b, e - b + 1);
}

std::optional<double> parse_double(std::string_view text)
{
    text = trim(text);
    if (text.empty()) {
        return std::nullopt;
    }
    if (text.front() == '+') {
        text.remove_prefix(1);
    }
    double v = 0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc{} || ptr != text.data() + text.size() || !std::isfinite(v)) {
        return std::nullopt;
    }
    return v;
}

std::optional<std::int64_t> parse_int(std::string_view text)
{
    text = trim(text);
    if (text.empty()) {
        return std::nullopt;
    }
    if (text.front() == '+') {
        text.remove_prefix(1);
    }
    std::int64_t v = 0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc{} || ptr != text.data() + text.size()) {
        return std::nullopt;
    }
    return v;
}

} // namespace ecx::csv
