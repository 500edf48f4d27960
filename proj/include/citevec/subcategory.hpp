#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string_view>

namespace citevec {

// The 36 NBER technological subcategory codes. Citation vectors are indexed
// by position in this list.
inline constexpr std::size_t kNumSubcategories = 36;

inline constexpr std::array<int, kNumSubcategories> kSubcategoryCodes = {
    11, 12, 13, 14, 15, 19,          // chemical
    21, 22, 23, 24,                  // computers & communications
    31, 32, 33, 39,                  // drugs & medical
    41, 42, 43, 44, 45, 46, 49,      // electrical & electronic
    51, 52, 53, 54, 55, 59,          // mechanical
    61, 62, 63, 64, 65, 66, 67, 68, 69,  // others
};

std::optional<std::size_t> subcategory_index(int code);
bool is_subcategory(int code);
std::string_view subcategory_name(int code);

}  // namespace citevec
