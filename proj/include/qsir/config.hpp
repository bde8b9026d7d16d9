#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "qsir/errors.hpp"
#include "qsir/simulation.hpp"

namespace qsir {

/// Flat `key = value` text with `[section]` headers. '#' and ';' start
/// comment lines.
struct IniEntry {
    std::string section;
    std::string key;
    std::string value;
    std::size_t line = 0;
};

std::vector<IniEntry> parse_ini(std::istream& in);

/// Invalid experiment configuration; keys() lists every offending key as
/// "section.key".
class ConfigError : public ArgumentError {
public:
    explicit ConfigError(std::vector<std::string> keys);
    const std::vector<std::string>& keys() const noexcept { return keys_; }

private:
    std::vector<std::string> keys_;
};

struct ExperimentConfig {
    enum class Kind { estimation, forecast };
    Kind kind = Kind::estimation;
    EstimationExperiment estimation;
    ForecastExperiment forecast;
};

ExperimentConfig load_experiment_config(const std::vector<IniEntry>& entries);
ExperimentConfig load_experiment_config_file(const std::string& path);

/// "M1", "M2", "M3:5" (theta after the colon). Dimension d applies to all.
ModelSpec parse_model_spec(const std::string& text, std::size_t d);

} // namespace qsir
