#pragma once

#include <chrono>
#include <functional>
#include <string>
#include <string_view>

#include "futureyou/error.hpp"

namespace futureyou {

using TimePoint = std::chrono::sys_time<std::chrono::milliseconds>;
using Clock = std::function<TimePoint()>;

// Wall clock truncated to milliseconds, the precision the logs keep.
TimePoint system_now();
Clock system_clock();

// Starts at `start` and advances by `step` on every call. Thread-safe.
Clock fixed_step_clock(TimePoint start, std::chrono::milliseconds step);

// UTC, "YYYY-MM-DDTHH:MM:SS.mmmZ".
std::string to_rfc3339(TimePoint t);
TimePoint parse_rfc3339(std::string_view s);

class TimeFormatError : public Error {
 public:
  using Error::Error;
};

}  // namespace futureyou
