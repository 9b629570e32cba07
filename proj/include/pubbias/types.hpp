#pragma once

#include <compare>
#include <string>
#include <string_view>

namespace pubbias {

/// Which tail(s) of the t distribution a threshold acts on.
enum class Side { Signed, Absolute };

std::string_view to_string(Side side);
Side parse_side(std::string_view text);

/// Calendar month stored as months since year 0 (January of year y is 12*y).
class YearMonth {
public:
    constexpr YearMonth() = default;
    constexpr YearMonth(int year, int month) : index_(year * 12 + (month - 1)) {}

    static constexpr YearMonth from_index(int index) {
        YearMonth ym;
        ym.index_ = index;
        return ym;
    }
    /// Parses "YYYY-MM" (also accepts "YYYYMM"). Throws DataError.
    static YearMonth parse(std::string_view text);

    constexpr int index() const noexcept { return index_; }
    constexpr int year() const noexcept { return index_ / 12; }
    constexpr int month() const noexcept { return index_ % 12 + 1; }
    std::string str() const;

    friend constexpr int operator-(YearMonth a, YearMonth b) { return a.index_ - b.index_; }
    friend constexpr YearMonth operator+(YearMonth a, int months) {
        return from_index(a.index_ + months);
    }
    friend constexpr auto operator<=>(YearMonth, YearMonth) = default;

private:
    int index_ = 0;
};

}  // namespace pubbias
