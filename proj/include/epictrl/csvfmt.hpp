#pragma once

#include <charconv>
#include <cmath>
#include <string>

namespace epictrl {

// CSV dialect: comma separator, '.' decimal point, LF line endings, header
// row, 17 significant digits (locale independent).
inline std::string csv_double(double v) {
    if (std::isnan(v)) return "nan";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v,
                                   std::chars_format::general, 17);
    return std::string(buf, res.ptr);
}

} // namespace epictrl
