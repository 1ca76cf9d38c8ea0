#include "rsmkit/format.hpp"

#include <array>
#include <charconv>

namespace rsmkit {

std::string format_double(double value) {
    std::array<char, 64> buf{};
    auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
    if (ec != std::errc{}) return "nan";
    std::string out(buf.data(), ptr);
    if (out == "-0") out = "0";
    return out;
}

std::optional<double> parse_double(std::string_view text) {
    if (text.empty()) return std::nullopt;
    // from_chars rejects a leading '+', which operators do type.
    if (text.front() == '+') text.remove_prefix(1);
    double v = 0.0;
    const char* end = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(text.data(), end, v);
    if (ec != std::errc{} || ptr != end) return std::nullopt;
    return v;
}

}  // namespace rsmkit
