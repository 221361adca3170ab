#pragma once

#include <string>

namespace potkit {

/// printf "%.<digits>g". Human-readable output uses 6, tables use 12.
std::string format_sig(double x, int digits = 6);

}  // namespace potkit
