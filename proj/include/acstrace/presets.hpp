#pragma once

#include <optional>
#include <string>

#include "acstrace/config.hpp"

namespace acstrace {

// Scenario grids for the three simulation tables. Table 4 blocks:
// srs-m1000, srs-m5000, eta2-m1000 (or all when block is empty).
RunConfig table1_config();
RunConfig table2_config();
RunConfig table4_config(const std::string& block = "");

RunConfig table_config(int table, const std::string& block = "");

}  // namespace acstrace
