#pragma once

#include <string_view>
#include <vector>

namespace rmc::detail {

struct ShippedFile {
  std::string_view name;
  std::string_view content;
};

const std::vector<ShippedFile>& shipped_files();

}  // namespace rmc::detail
