#ifndef LANGMPC_COMMON_DIGEST_HPP_
#define LANGMPC_COMMON_DIGEST_HPP_

#include <string>
#include <string_view>

namespace langmpc {

/// Lower-case hex SHA-256 of `data`.
std::string sha256_hex(std::string_view data);

}  // namespace langmpc

#endif  // LANGMPC_COMMON_DIGEST_HPP_
