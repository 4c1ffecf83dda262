#include "icv/configuration.h"

#include "icv/error.h"

namespace icv {

using nlohmann::json;

const char *OrderingName(Ordering ordering) {
  return ordering == Ordering::kAlphabetical ? "alphabetical"
                                             : "confidence_desc";
}

Ordering ParseOrdering(std::string_view name) {
  if (name == "alphabetical") return Ordering::kAlphabetical;
  if (name == "confidence_desc") return Ordering::kConfidenceDesc;
  throw Error(ErrorCode::kValidation,
              "unknown ordering \"" + std::string(name) + "\"");
}

void Configuration::Validate() const {
  auto fail = [&](const std::string &why) {
    throw Error(ErrorCode::kValidation,
                "configuration " + name + " (LoA " +
                    std::to_string(loa_level) + "): " + why);
  };
  if (!(threshold >= 0.0 && threshold <= 1.0)) fail("threshold outside [0,1]");
  switch (loa_level) {
    case 1:
    case 2:
      if (ordering != Ordering::kAlphabetical) fail("must be alphabetical");
      if (preselect || autoselect_and_skip) fail("no automation allowed");
      break;
    case 3:
      if (ordering != Ordering::kConfidenceDesc) {
        fail("must order by confidence");
      }
      if (preselect || autoselect_and_skip) fail("no automation allowed");
      break;
    case 4:
      if (ordering != Ordering::kAlphabetical) fail("must be alphabetical");
      if (!preselect) fail("requires preselection");
      if (autoselect_and_skip) fail("autoselect not allowed");
      break;
    case 5:
      if (!autoselect_and_skip) fail("requires autoselect-and-skip");
      if (preselect) fail("preselection not allowed");
      break;
    case 10:
      if (preselect || autoselect_and_skip) fail("flags unused at LoA 10");
      break;
    default:
      fail("unsupported level");
  }
}

Configuration PresetConfiguration(std::string_view name) {
  Configuration c;
  c.name = std::string(name);
  if (name == "all-human") {
    c.loa_level = 1;
  } else if (name == "baseline") {
    c.loa_level = 2;
  } else if (name == "ranking") {
    c.loa_level = 3;
    c.ordering = Ordering::kConfidenceDesc;
  } else if (name == "validated-threshold") {
    c.loa_level = 4;
    c.preselect = true;
  } else if (name == "automatic-threshold") {
    c.loa_level = 5;
    c.autoselect_and_skip = true;
  } else if (name == "ranking-threshold") {
    c.loa_level = 5;
    c.ordering = Ordering::kConfidenceDesc;
    c.autoselect_and_skip = true;
  } else if (name == "all-computer") {
    c.loa_level = 10;
    c.ordering = Ordering::kConfidenceDesc;
  } else {
    throw Error(ErrorCode::kInvalidArgument,
                "unknown configuration \"" + std::string(name) + "\"");
  }
  return c;
}

const std::vector<std::string> &PresetNames() {
  static const std::vector<std::string> names = {
      "all-human",           "baseline",          "ranking",
      "validated-threshold", "automatic-threshold", "ranking-threshold",
      "all-computer"};
  return names;
}

const std::vector<std::string> &InBetweenPresetNames() {
  static const std::vector<std::string> names = {
      "baseline", "ranking", "validated-threshold", "automatic-threshold",
      "ranking-threshold"};
  return names;
}

json ConfigurationToJson(const Configuration &config) {
  return {{"name", config.name},
          {"loa", config.loa_level},
          {"ordering", OrderingName(config.ordering)},
          {"preselect", config.preselect},
          {"autoselectAndSkip", config.autoselect_and_skip},
          {"threshold", config.threshold}};
}

Configuration ConfigurationFromJson(const json &doc) {
  try {
    Configuration c;
    c.name = doc.at("name").get<std::string>();
    c.loa_level = doc.at("loa").get<int>();
    c.ordering = ParseOrdering(doc.at("ordering").get<std::string>());
    c.preselect = doc.at("preselect").get<bool>();
    c.autoselect_and_skip = doc.at("autoselectAndSkip").get<bool>();
    c.threshold = doc.value("threshold", kDefaultAutomationThreshold);
    c.Validate();
    return c;
  } catch (const json::exception &e) {
    throw Error(ErrorCode::kParse, std::string("configuration: ") + e.what());
  }
}

}  // namespace icv
