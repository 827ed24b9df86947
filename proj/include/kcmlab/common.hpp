#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace kcm {

using u8 = std::uint8_t;
using u32 = std::uint32_t;
using u64 = std::uint64_t;
using i64 = std::int64_t;
using i128 = __int128;
using u128 = unsigned __int128;

inline int popcount(u64 x) { return __builtin_popcountll(x); }

/// Exact binomial coefficient; throws on overflow of the running product.
inline u64 binomial(u64 n, u64 k) {
    if (k > n) return 0;
    if (k > n - k) k = n - k;
    u128 result = 1;
    for (u64 i = 0; i < k; ++i) {
        result *= (n - i);
        result /= (i + 1);
        if (result > u128(UINT64_MAX)) throw std::overflow_error("binomial overflow");
    }
    return u64(result);
}

} // namespace kcm
