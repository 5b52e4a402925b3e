#pragma once

#include <charconv>
#include <compare>
#include <cstdio>
#include <stdexcept>
#include <string>
#include <string_view>

namespace dyncut {

/// Calendar date (proleptic Gregorian), compared lexicographically.
struct Date {
    int year = 0;
    int month = 0;
    int day = 0;

    auto operator<=>(const Date&) const = default;

    bool valid() const {
        if (month < 1 || month > 12 || day < 1) return false;
        static constexpr int lengths[12] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
        int n = lengths[month - 1];
        if (month == 2 && (year % 4 == 0 && (year % 100 != 0 || year % 400 == 0))) n = 29;
        return day <= n;
    }

    /// Days since 1970-01-01 (Howard Hinnant's civil-date algorithm).
    long serial() const {
        long y = year - (month <= 2);
        const long era = (y >= 0 ? y : y - 399) / 400;
        const unsigned yoe = static_cast<unsigned>(y - era * 400);
        const unsigned doy = (153u * (month + (month > 2 ? -3 : 9)) + 2) / 5 + day - 1;
        const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
        return era * 146097 + static_cast<long>(doe) - 719468;
    }

    static Date from_serial(long z) {
        z += 719468;
        const long era = (z >= 0 ? z : z - 146096) / 146097;
        const unsigned doe = static_cast<unsigned>(z - era * 146097);
        const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
        const long y = static_cast<long>(yoe) + era * 400;
        const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
        const unsigned mp = (5 * doy + 2) / 153;
        const unsigned d = doy - (153 * mp + 2) / 5 + 1;
        const unsigned m = mp + (mp < 10 ? 3 : -9);
        return Date{static_cast<int>(y + (m <= 2)), static_cast<int>(m), static_cast<int>(d)};
    }

    Date plus_days(long n) const { return from_serial(serial() + n); }

    std::string str() const {
        char buf[16];
        std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d", year, month, day);
        return buf;
    }

    /// Parses strict "YYYY-MM-DD"; throws std::invalid_argument otherwise.
    static Date parse(std::string_view s) {
        auto fail = [&] { throw std::invalid_argument("invalid date '" + std::string(s) + "', expected YYYY-MM-DD"); };
        if (s.size() != 10 || s[4] != '-' || s[7] != '-') fail();
        Date d;
        auto num = [&](int lo, int hi, int& out) {
            auto [p, ec] = std::from_chars(s.data() + lo, s.data() + hi, out);
            if (ec != std::errc{} || p != s.data() + hi) fail();
        };
        num(0, 4, d.year);
        num(5, 7, d.month);
        num(8, 10, d.day);
        if (!d.valid()) fail();
        return d;
    }
};

} // namespace dyncut
