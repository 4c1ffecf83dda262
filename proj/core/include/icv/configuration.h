#ifndef ICV_CONFIGURATION_H_
#define ICV_CONFIGURATION_H_

#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace icv {

inline constexpr double kDefaultAutomationThreshold = 0.95;

enum class Ordering { kAlphabetical, kConfidenceDesc };

const char *OrderingName(Ordering ordering);
Ordering ParseOrdering(std::string_view name);

// A level of automation expressed as feature flags.
//
// Allowed combinations:
//   LoA 1, 2   alphabetical, no preselect, no autoselect
//   LoA 3      confidence-descending, no preselect, no autoselect
//   LoA 4      alphabetical with preselection
//   LoA 5      autoselect-and-skip, either ordering, no preselect
//   LoA 10     no human interaction; flags unused
struct Configuration {
  std::string name;
  int loa_level = 2;
  Ordering ordering = Ordering::kAlphabetical;
  bool preselect = false;
  bool autoselect_and_skip = false;
  double threshold = kDefaultAutomationThreshold;

  // Throws Error(kValidation) when the flags do not fit the level.
  void Validate() const;

  // Automation fires only for top confidences strictly above the threshold.
  bool Fires(double top_confidence) const {
    return top_confidence > threshold;
  }

  bool operator==(const Configuration &) const = default;
};

// Named presets: all-human, baseline, ranking, validated-threshold,
// automatic-threshold, ranking-threshold, all-computer.
Configuration PresetConfiguration(std::string_view name);
const std::vector<std::string> &PresetNames();

// The five configurations between the two boundaries.
const std::vector<std::string> &InBetweenPresetNames();

nlohmann::json ConfigurationToJson(const Configuration &config);
Configuration ConfigurationFromJson(const nlohmann::json &doc);

}  // namespace icv

#endif  // ICV_CONFIGURATION_H_
