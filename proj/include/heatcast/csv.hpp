#pragma once

#include <charconv>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "heatcast/series.hpp"

namespace heatcast {

// ---------------------------------------------------------------------------
// Civil-calendar <-> epoch conversion (proleptic Gregorian, no leap seconds).
// Algorithms from Howard Hinnant's chrono date notes; exact over the full
// int64 range we care about.
// ---------------------------------------------------------------------------

inline std::int64_t days_from_civil(std::int64_t y, unsigned m, unsigned d) {
    y -= m <= 2;
    const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);               // [0, 399]
    const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;     // [0, 365]
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;              // [0, 146096]
    return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

struct CivilDate {
    std::int64_t year;
    unsigned month;  // 1..12
    unsigned day;    // 1..31
};

inline CivilDate civil_from_days(std::int64_t z) {
    z += 719468;
    const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const std::int64_t y = static_cast<std::int64_t>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    const unsigned d = doy - (153 * mp + 2) / 5 + 1;
    const unsigned m = mp + (mp < 10 ? 3 : -9);
    return {y + (m <= 2), m, d};
}

inline bool is_leap_year(std::int64_t y) {
    return (y % 4 == 0 && y % 100 != 0) || y % 400 == 0;
}

inline unsigned days_in_month(std::int64_t y, unsigned m) {
    static constexpr unsigned lengths[12] = {31, 28, 31, 30, 31, 30,
                                             31, 31, 30, 31, 30, 31};
    if (m == 2 && is_leap_year(y)) return 29;
    return lengths[m - 1];
}

// ---------------------------------------------------------------------------
// ISO-8601 timestamps: YYYY-MM-DDTHH:MM:SS followed by Z or +HH:MM / -HH:MM.
// Second precision; stored internally as epoch seconds UTC.
// ---------------------------------------------------------------------------

namespace detail {

inline bool parse_fixed_uint(std::string_view s, std::size_t pos, std::size_t len,
                             unsigned& out) {
    unsigned v = 0;
    for (std::size_t i = pos; i < pos + len; ++i) {
        if (i >= s.size() || s[i] < '0' || s[i] > '9') return false;
        v = v * 10 + static_cast<unsigned>(s[i] - '0');
    }
    out = v;
    return true;
}

}  // namespace detail

inline std::int64_t parse_iso8601(std::string_view s) {
    const auto fail = [&]() -> std::int64_t {
        throw std::invalid_argument("invalid ISO-8601 timestamp: '" + std::string(s) + "'");
    };
    // Minimum form: 2020-01-01T00:00:00Z (20 chars).
    if (s.size() < 20) return fail();
    unsigned year = 0, month = 0, day = 0, hour = 0, minute = 0, second = 0;
    if (!detail::parse_fixed_uint(s, 0, 4, year) || s[4] != '-' ||
        !detail::parse_fixed_uint(s, 5, 2, month) || s[7] != '-' ||
        !detail::parse_fixed_uint(s, 8, 2, day) || s[10] != 'T' ||
        !detail::parse_fixed_uint(s, 11, 2, hour) || s[13] != ':' ||
        !detail::parse_fixed_uint(s, 14, 2, minute) || s[16] != ':' ||
        !detail::parse_fixed_uint(s, 17, 2, second)) {
        return fail();
    }
    if (month < 1 || month > 12 || day < 1 || day > days_in_month(year, month) ||
        hour > 23 || minute > 59 || second > 59) {
        return fail();
    }

    std::int64_t offset = 0;  // seconds east of UTC
    const char tz = s[19];
    if (tz == 'Z') {
        if (s.size() != 20) return fail();
    } else if (tz == '+' || tz == '-') {
        if (s.size() != 25 || s[22] != ':') return fail();
        unsigned oh = 0, om = 0;
        if (!detail::parse_fixed_uint(s, 20, 2, oh) ||
            !detail::parse_fixed_uint(s, 23, 2, om) || oh > 23 || om > 59) {
            return fail();
        }
        offset = static_cast<std::int64_t>(oh) * 3600 + om * 60;
        if (tz == '-') offset = -offset;
    } else {
        return fail();
    }

    const std::int64_t days = days_from_civil(year, month, day);
    return days * 86400 + hour * 3600 + minute * 60 + second - offset;
}

inline std::string format_iso8601_utc(std::int64_t epoch) {
    std::int64_t days = epoch / 86400;
    std::int64_t sod = epoch % 86400;
    if (sod < 0) {
        sod += 86400;
        days -= 1;
    }
    const CivilDate cd = civil_from_days(days);
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%04lld-%02u-%02uT%02u:%02u:%02u+00:00",
                  static_cast<long long>(cd.year), cd.month, cd.day,
                  static_cast<unsigned>(sod / 3600),
                  static_cast<unsigned>((sod % 3600) / 60),
                  static_cast<unsigned>(sod % 60));
    return std::string(buf);
}

/// Shortest decimal representation that round-trips the exact double.
inline std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

// ---------------------------------------------------------------------------
// CSV files: header "timestamp,value", one ISO-8601 timestamp and one numeric
// value per row. Rows with unparsable fields are an error, never skipped.
// ---------------------------------------------------------------------------

inline RawSeries read_series_csv(const std::filesystem::path& path, Unit unit) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open '" + path.string() + "' for reading");
    }
    std::string line;
    std::size_t line_no = 0;
    bool header_seen = false;
    std::vector<RawPoint> points;

    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (!header_seen) {
            if (line.rfind("timestamp", 0) != 0) {
                throw std::runtime_error(path.string() +
                                         ": missing 'timestamp,value' header row");
            }
            header_seen = true;
            continue;
        }
        const std::size_t comma = line.find(',');
        if (comma == std::string::npos) {
            throw std::runtime_error(path.string() + ":" + std::to_string(line_no) +
                                     ": expected 'timestamp,value'");
        }
        const std::string_view ts_field{line.data(), comma};
        const std::string_view val_field{line.data() + comma + 1,
                                         line.size() - comma - 1};
        std::int64_t t = 0;
        try {
            t = parse_iso8601(ts_field);
        } catch (const std::invalid_argument& e) {
            throw std::runtime_error(path.string() + ":" + std::to_string(line_no) +
                                     ": " + e.what());
        }
        double v = 0.0;
        const auto res =
            std::from_chars(val_field.data(), val_field.data() + val_field.size(), v);
        if (res.ec != std::errc{} || res.ptr != val_field.data() + val_field.size()) {
            throw std::runtime_error(path.string() + ":" + std::to_string(line_no) +
                                     ": unparsable value field '" +
                                     std::string(val_field) + "'");
        }
        points.push_back({t, v});
    }
    if (!header_seen) {
        throw std::runtime_error(path.string() + ": empty file");
    }
    try {
        return RawSeries(std::move(points), unit);
    } catch (const std::invalid_argument& e) {
        throw std::runtime_error(path.string() + ": " + e.what());
    }
}

inline std::string to_csv(const RawSeries& s) {
    std::string out = "timestamp,value\n";
    for (const auto& p : s.points()) {
        out += format_iso8601_utc(p.timestamp);
        out += ',';
        out += format_double(p.value);
        out += '\n';
    }
    return out;
}

inline std::string to_csv(const RegularSeries& s) {
    std::string out = "timestamp,value\n";
    for (std::size_t i = 0; i < s.size(); ++i) {
        out += format_iso8601_utc(s.time_at(i));
        out += ',';
        out += format_double(s[i]);
        out += '\n';
    }
    return out;
}

/// Writes atomically: content goes to a sibling temp file which is then
/// renamed over the target, so readers never observe a half-written file.
inline void write_text_file(const std::filesystem::path& path, std::string_view content) {
    const std::filesystem::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw std::runtime_error("cannot open '" + tmp.string() + "' for writing");
        }
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        if (!out) {
            throw std::runtime_error("short write to '" + tmp.string() + "'");
        }
    }
    std::filesystem::rename(tmp, path);
}

}  // namespace heatcast
