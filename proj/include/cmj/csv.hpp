#pragma once

#include <array>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <ostream>
#include <string>
#include <string_view>
#include <system_error>

namespace cmj {

/// Shortest round-trip decimal form, independent of the global locale.
inline std::string format_double(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    std::array<char, 64> buf{};
    auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), x);
    if (ec != std::errc{}) return "nan";
    return std::string(buf.data(), end);
}

/// Minimal CSV row writer: comma separated, '.' decimal point, '\n' endings.
class CsvWriter {
public:
    explicit CsvWriter(std::ostream& out) : out_(out) {}

    /// Text fields holding a comma, quote or line break are quoted, with
    /// embedded quotes doubled.
    CsvWriter& field(std::string_view s) {
        sep();
        if (s.find_first_of(",\"\r\n") == std::string_view::npos) {
            out_ << s;
            return *this;
        }
        out_ << '"';
        for (char c : s) {
            if (c == '"') out_ << '"';
            out_ << c;
        }
        out_ << '"';
        return *this;
    }
    CsvWriter& field(const char* s) { return field(std::string_view(s)); }
    CsvWriter& field(const std::string& s) { return field(std::string_view(s)); }
    CsvWriter& field(double x) { return field(std::string_view(format_double(x))); }
    CsvWriter& field(std::uint64_t x) {
        sep();
        out_ << x;
        return *this;
    }
    CsvWriter& field(std::int64_t x) {
        sep();
        out_ << x;
        return *this;
    }
    CsvWriter& field(unsigned x) { return field(static_cast<std::uint64_t>(x)); }
    CsvWriter& field(int x) { return field(static_cast<std::int64_t>(x)); }
    CsvWriter& empty() { return field(std::string_view()); }

    void end_row() {
        out_ << '\n';
        first_ = true;
    }

    template <class... Ts>
    void row(const Ts&... xs) {
        (field(xs), ...);
        end_row();
    }

private:
    void sep() {
        if (!first_) out_ << ',';
        first_ = false;
    }

    std::ostream& out_;
    bool first_ = true;
};

}  // namespace cmj
