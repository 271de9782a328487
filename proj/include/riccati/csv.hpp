#pragma once

#include <array>
#include <charconv>
#include <cmath>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "riccati/grid.hpp"

namespace riccati {

/// 17 significant digits, enough to round-trip any double.
inline std::string csv_number(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    std::array<char, 48> buf{};
    auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v, std::chars_format::general, 17);
    return std::string(buf.data(), res.ptr);
}

/// Header `x,value`, one row per node.
inline void write_csv(std::ostream& os, const GridFunction& f) {
    os << "x,value\n";
    for (std::size_t k = 0; k < f.size(); ++k) os << csv_number(f.grid().x(k)) << ',' << csv_number(f[k]) << '\n';
}

/// Several columns sampled on one grid; the first column is x.
inline void write_csv(std::ostream& os, const Grid& grid, std::span<const std::string> names,
                      std::span<const GridFunction* const> columns) {
    os << 'x';
    for (const auto& n : names) os << ',' << n;
    os << '\n';
    for (std::size_t k = 0; k < grid.size(); ++k) {
        os << csv_number(grid.x(k));
        for (const GridFunction* c : columns) os << ',' << csv_number((*c)[k]);
        os << '\n';
    }
}

}  // namespace riccati
