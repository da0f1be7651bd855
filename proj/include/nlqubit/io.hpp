#pragma once

#include <cstdio>
#include <ostream>
#include <string>
#include <type_traits>

namespace nlqubit {

/// Round-trippable decimal form of a double (17 significant digits).
inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

/// Writes comma-separated doubles followed by a newline.
template <class... Ts>
void write_csv_row(std::ostream& os, const Ts&... values) {
  bool first = true;
  auto put = [&](const auto& v) {
    if (!first) os << ',';
    first = false;
    if constexpr (std::is_floating_point_v<std::decay_t<decltype(v)>>) {
      os << format_double(v);
    } else {
      os << v;
    }
  };
  (put(values), ...);
  os << '\n';
}

}  // namespace nlqubit
