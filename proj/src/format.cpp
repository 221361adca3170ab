#include "potkit/format.hpp"

#include <cstdio>

namespace potkit {

std::string format_sig(double x, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, x);
  return buf;
}

}  // namespace potkit
