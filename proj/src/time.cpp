#include "ocsplab/time.hpp"

#include <charconv>
#include <cstdio>

#include "ocsplab/error.hpp"

namespace ocsplab {

using namespace std::chrono;

Instant truncate(Instant t, Granularity g) {
  const auto q = step(g).count();
  auto ms = t.time_since_epoch().count();
  auto r = ms % q;
  if (r < 0) r += q;
  return Instant(Duration(ms - r));
}

std::string_view granularity_name(Granularity g) {
  return g == Granularity::second ? "second" : "millisecond";
}

Granularity parse_granularity(std::string_view s) {
  if (s == "second" || s == "s") return Granularity::second;
  if (s == "millisecond" || s == "ms") return Granularity::millisecond;
  throw Error(Errc::invalid_argument, "unknown granularity '" + std::string(s) + "'");
}

std::string format_instant(Instant t) {
  const auto day = floor<days>(t);
  const year_month_day ymd{day};
  const auto tod = t - day;
  const auto h = duration_cast<hours>(tod);
  const auto m = duration_cast<minutes>(tod - h);
  const auto s = duration_cast<seconds>(tod - h - m);
  const auto ms = (tod - h - m - s).count();
  char buf[40];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:%02d.%03dZ", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                static_cast<int>(h.count()), static_cast<int>(m.count()),
                static_cast<int>(s.count()), static_cast<int>(ms));
  return buf;
}

namespace {

bool parse_uint(std::string_view s, long long& out) {
  if (s.empty()) return false;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && p == s.data() + s.size();
}

}  // namespace

Instant parse_instant(std::string_view s) {
  long long raw = 0;
  if (parse_uint(s, raw)) {
    return Instant(Duration(raw));
  }
  // YYYY-MM-DDTHH:MM:SS[.fff]Z
  auto fail = [&] { return Error(Errc::invalid_argument, "bad instant '" + std::string(s) + "'"); };
  if (s.size() < 20 || s.back() != 'Z' || s[4] != '-' || s[7] != '-' || s[10] != 'T' ||
      s[13] != ':' || s[16] != ':') {
    throw fail();
  }
  long long y, mo, d, h, mi, sec, frac = 0;
  if (!parse_uint(s.substr(0, 4), y) || !parse_uint(s.substr(5, 2), mo) ||
      !parse_uint(s.substr(8, 2), d) || !parse_uint(s.substr(11, 2), h) ||
      !parse_uint(s.substr(14, 2), mi) || !parse_uint(s.substr(17, 2), sec)) {
    throw fail();
  }
  auto rest = s.substr(19, s.size() - 20);
  if (!rest.empty()) {
    if (rest[0] != '.' || rest.size() < 2 || rest.size() > 4) throw fail();
    std::string digits(rest.substr(1));
    while (digits.size() < 3) digits.push_back('0');
    if (!parse_uint(digits, frac)) throw fail();
  }
  const year_month_day ymd{year(static_cast<int>(y)), month(static_cast<unsigned>(mo)),
                           day(static_cast<unsigned>(d))};
  if (!ymd.ok() || h > 23 || mi > 59 || sec > 59) throw fail();
  return Instant(sys_days(ymd)) + hours(h) + minutes(mi) + seconds(sec) + Duration(frac);
}

Duration parse_duration(std::string_view s) {
  if (s.empty()) throw Error(Errc::invalid_argument, "empty duration");
  bool negative = false;
  std::string_view body = s;
  if (body.front() == '-' || body.front() == '+') {
    negative = body.front() == '-';
    body.remove_prefix(1);
  }
  std::size_t split = 0;
  while (split < body.size() && body[split] >= '0' && body[split] <= '9') ++split;
  long long n = 0;
  if (!parse_uint(body.substr(0, split), n)) {
    throw Error(Errc::invalid_argument, "bad duration '" + std::string(s) + "'");
  }
  auto unit = body.substr(split);
  long long scale = 0;
  if (unit.empty() || unit == "s") scale = 1000;
  else if (unit == "ms") scale = 1;
  else if (unit == "m" || unit == "min") scale = 60'000;
  else if (unit == "h") scale = 3'600'000;
  else if (unit == "d") scale = 86'400'000;
  else throw Error(Errc::invalid_argument, "bad duration unit in '" + std::string(s) + "'");
  return Duration((negative ? -n : n) * scale);
}

std::string format_duration(Duration d) {
  auto ms = d.count();
  if (ms == 0) return "0s";
  struct Unit { long long scale; const char* suffix; };
  static constexpr Unit units[] = {{86'400'000, "d"}, {3'600'000, "h"}, {60'000, "m"}, {1000, "s"}};
  for (auto u : units) {
    if (ms % u.scale == 0) return std::to_string(ms / u.scale) + u.suffix;
  }
  return std::to_string(ms) + "ms";
}

}  // namespace ocsplab
