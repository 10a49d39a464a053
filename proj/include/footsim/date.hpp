#pragma once

#include <charconv>
#include <compare>
#include <cstdio>
#include <string>
#include <string_view>

#include "footsim/errors.hpp"

namespace footsim {

// Calendar date with ordering.  Match files in the wild carry either
// DD/MM/YYYY (sometimes DD/MM/YY) or ISO YYYY-MM-DD; both parse here and
// everything serializes back out as ISO.
struct Date {
  int year = 0;
  int month = 0;
  int day = 0;

  auto operator<=>(const Date&) const = default;

  static Date parse(std::string_view text) {
    const auto fail = [&] {
      throw InputError("unparseable date: '" + std::string(text) + "'");
    };
    const auto number = [&](std::string_view part) {
      int value = 0;
      const auto [ptr, ec] =
          std::from_chars(part.data(), part.data() + part.size(), value);
      if (ec != std::errc() || ptr != part.data() + part.size()) fail();
      return value;
    };

    Date d;
    if (auto dash = text.find('-'); dash != std::string_view::npos) {
      auto dash2 = text.find('-', dash + 1);
      if (dash2 == std::string_view::npos) fail();
      d.year = number(text.substr(0, dash));
      d.month = number(text.substr(dash + 1, dash2 - dash - 1));
      d.day = number(text.substr(dash2 + 1));
    } else if (auto slash = text.find('/'); slash != std::string_view::npos) {
      auto slash2 = text.find('/', slash + 1);
      if (slash2 == std::string_view::npos) fail();
      d.day = number(text.substr(0, slash));
      d.month = number(text.substr(slash + 1, slash2 - slash - 1));
      d.year = number(text.substr(slash2 + 1));
      // Two-digit seasons: pivot at 70, so 94 -> 1994 and 23 -> 2023.
      if (text.size() - slash2 - 1 == 2) d.year += (d.year >= 70) ? 1900 : 2000;
    } else {
      fail();
    }
    if (d.month < 1 || d.month > 12 || d.day < 1 || d.day > 31 || d.year < 1800)
      fail();
    return d;
  }

  std::string to_iso() const {
    char buf[11];
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d", year, month, day);
    return buf;
  }
};

}  // namespace footsim
