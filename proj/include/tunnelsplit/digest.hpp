#pragma once

#include <string>
#include <string_view>

namespace tunnel {

/// Lower-case hex SHA-256 of the bytes.
std::string sha256_hex(std::string_view data);

/// Fixed 17-significant-digit form used in canonical serializations.
std::string fmt17(double v);

/// Shortest decimal string that round-trips to the same double.
std::string shortest(double v);

}  // namespace tunnel
