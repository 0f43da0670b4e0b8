#pragma once

#include <filesystem>
#include <json.hpp>
#include <string>
#include <vector>

namespace pdc {

struct AnchorRow {
  std::string id;
  std::string description;
  std::string unit;
  double paper = 0.0;
  double tolerance = 0.0;
  double computed = 0.0;
  bool evaluated = false;  // false when the computation failed; see error
  bool pass = false;
  std::string error;
};

struct AnchorReport {
  std::vector<AnchorRow> rows;
  int passed() const;
};

// Evaluates every published design number against the bundled crystal files in
// crystal_dir (bibo.json, bbo.json). A failing computation marks its rows failed
// without aborting the others. tolerance_scale widens every tolerance.
AnchorReport reproduce_paper(const std::filesystem::path& crystal_dir, double tolerance_scale = 1.0);

nlohmann::json to_json(const AnchorReport& report);
std::string format_table(const AnchorReport& report);

}  // namespace pdc
