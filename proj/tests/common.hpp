#pragma once

#include <fstream>
#include <sstream>
#include <string>

#include "pdc/dispersion.hpp"
#include "pdc/errors.hpp"
#include "pdc/geometry.hpp"
#include <json.hpp>

namespace testing {

inline const pdc::CrystalDefinition& bibo() {
  static const auto c = pdc::load_crystal(pdc::bundled_data_dir() / "bibo.json");
  return c;
}

inline const pdc::CrystalDefinition& bbo() {
  static const auto c = pdc::load_crystal(pdc::bundled_data_dir() / "bbo.json");
  return c;
}

inline nlohmann::json bundled_json(const std::string& file) {
  std::ifstream in(pdc::bundled_data_dir() / file);
  return nlohmann::json::parse(in);
}

inline const pdc::Direction T = pdc::Direction::from_angles(63.5, 53.5);

}  // namespace testing
