#include "futureyou/time_util.hpp"

#include <atomic>
#include <charconv>
#include <memory>

#include <fmt/format.h>

namespace futureyou {
namespace {

int parse_int(std::string_view s, std::size_t pos, std::size_t len) {
  int v = 0;
  if (pos + len > s.size()) throw TimeFormatError("truncated timestamp '" + std::string(s) + "'");
  auto [ptr, ec] = std::from_chars(s.data() + pos, s.data() + pos + len, v);
  if (ec != std::errc{} || ptr != s.data() + pos + len) {
    throw TimeFormatError("malformed timestamp '" + std::string(s) + "'");
  }
  return v;
}

}  // namespace

TimePoint system_now() { return std::chrono::floor<std::chrono::milliseconds>(std::chrono::system_clock::now()); }

Clock system_clock() { return [] { return system_now(); }; }

Clock fixed_step_clock(TimePoint start, std::chrono::milliseconds step) {
  auto ticks = std::make_shared<std::atomic<long long>>(0);
  return [=] { return start + step * ticks->fetch_add(1); };
}

std::string to_rfc3339(TimePoint t) {
  using namespace std::chrono;
  const auto day = floor<days>(t);
  const year_month_day ymd{day};
  const hh_mm_ss<milliseconds> hms{t - day};
  return fmt::format("{:04d}-{:02d}-{:02d}T{:02d}:{:02d}:{:02d}.{:03d}Z", static_cast<int>(ymd.year()),
                     static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()), hms.hours().count(),
                     hms.minutes().count(), hms.seconds().count(), hms.subseconds().count());
}

TimePoint parse_rfc3339(std::string_view s) {
  using namespace std::chrono;
  if (s.size() < 20 || s[4] != '-' || s[7] != '-' || s[10] != 'T' || s[13] != ':' || s[16] != ':') {
    throw TimeFormatError("malformed timestamp '" + std::string(s) + "'");
  }
  const year_month_day ymd{year{parse_int(s, 0, 4)}, month{static_cast<unsigned>(parse_int(s, 5, 2))},
                           day{static_cast<unsigned>(parse_int(s, 8, 2))}};
  if (!ymd.ok()) throw TimeFormatError("invalid date in '" + std::string(s) + "'");
  TimePoint t = sys_days{ymd} + hours{parse_int(s, 11, 2)} + minutes{parse_int(s, 14, 2)} +
                seconds{parse_int(s, 17, 2)};
  std::size_t pos = 19;
  if (s[pos] == '.') {
    std::size_t end = pos + 1;
    while (end < s.size() && s[end] >= '0' && s[end] <= '9') ++end;
    std::string frac(s.substr(pos + 1, end - pos - 1));
    if (frac.empty()) throw TimeFormatError("malformed fraction in '" + std::string(s) + "'");
    frac.resize(3, '0');
    t += milliseconds{parse_int(frac, 0, 3)};
    pos = end;
  }
  if (pos + 1 != s.size() || s[pos] != 'Z') throw TimeFormatError("timestamp must be UTC ('Z'): " + std::string(s));
  return t;
}

}  // namespace futureyou
