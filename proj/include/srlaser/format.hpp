#pragma once

#include <cstdio>
#include <string>

namespace srlaser {

// Shortest round-trip decimal form, locale independent. Used for every
// number written to CSV or JSON so repeated runs are byte identical.
inline std::string g17(double x) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

}  // namespace srlaser
