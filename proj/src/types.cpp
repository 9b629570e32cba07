#include "pubbias/types.hpp"

#include <charconv>
#include <cstdio>

#include "pubbias/errors.hpp"

namespace pubbias {

std::string_view to_string(Side side) { return side == Side::Signed ? "signed" : "absolute"; }

Side parse_side(std::string_view text) {
    if (text == "signed") return Side::Signed;
    if (text == "absolute") return Side::Absolute;
    throw DataError("unknown side '" + std::string(text) + "' (expected signed or absolute)");
}

YearMonth YearMonth::parse(std::string_view text) {
    int year = 0, month = 0;
    auto parse_int = [&](std::string_view s, int& out) {
        auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
        return ec == std::errc{} && ptr == s.data() + s.size();
    };
    bool ok = false;
    if (text.size() == 7 && text[4] == '-') {
        ok = parse_int(text.substr(0, 4), year) && parse_int(text.substr(5, 2), month);
    } else if (text.size() == 6) {
        ok = parse_int(text.substr(0, 4), year) && parse_int(text.substr(4, 2), month);
    }
    if (!ok || month < 1 || month > 12) {
        throw DataError("invalid year-month '" + std::string(text) + "' (expected YYYY-MM)");
    }
    return YearMonth(year, month);
}

std::string YearMonth::str() const {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02d", year(), month());
    return buf;
}

}  // namespace pubbias
