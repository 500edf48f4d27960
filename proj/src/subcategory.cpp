#include "citevec/subcategory.hpp"

#include <algorithm>

namespace citevec {
namespace {

constexpr std::array<std::string_view, kNumSubcategories> kNames = {
    "Agriculture, Food, Textiles",
    "Coating",
    "Gas",
    "Organic Compounds",
    "Resins",
    "Miscellaneous-Chemical",
    "Communications",
    "Computer Hardware & Software",
    "Computer Peripherals",
    "Information Storage",
    "Drugs",
    "Surgery & Medical Instruments",
    "Biotechnology",
    "Miscellaneous-Drugs & Medical",
    "Electrical Devices",
    "Electrical Lighting",
    "Measuring & Testing",
    "Nuclear & X-rays",
    "Power Systems",
    "Semiconductor Devices",
    "Miscellaneous-Electric",
    "Materials Processing & Handling",
    "Metal Working",
    "Motors, Engines & Parts",
    "Optics",
    "Transportation",
    "Miscellaneous-Mechanical",
    "Agriculture, Husbandry, Food",
    "Amusement Devices",
    "Apparel & Textile",
    "Earth Working & Wells",
    "Furniture, House Fixtures",
    "Heating",
    "Pipes & Joints",
    "Receptacles",
    "Miscellaneous-Others",
};

}  // namespace

std::optional<std::size_t> subcategory_index(int code) {
  auto it = std::lower_bound(kSubcategoryCodes.begin(), kSubcategoryCodes.end(), code);
  if (it == kSubcategoryCodes.end() || *it != code) return std::nullopt;
  return static_cast<std::size_t>(it - kSubcategoryCodes.begin());
}

bool is_subcategory(int code) { return subcategory_index(code).has_value(); }

std::string_view subcategory_name(int code) {
  auto i = subcategory_index(code);
  return i ? kNames[*i] : std::string_view{};
}

}  // namespace citevec
