#include "embedlab/hash.hpp"

#include <charconv>

namespace embedlab::hash {

std::string to_hex(std::uint64_t h) {
    char buf[16];
    std::string out(16, '0');
    const auto res = std::to_chars(buf, buf + sizeof buf, h, 16);
    const std::size_t len = static_cast<std::size_t>(res.ptr - buf);
    out.replace(16 - len, len, buf, len);  // zero-padded to 16 digits
    return out;
}

}  // namespace embedlab::hash
