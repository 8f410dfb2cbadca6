#pragma once

#include <filesystem>
#include <istream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "vlsim/channel.hpp"
#include "vlsim/mac.hpp"
#include "vlsim/mobility.hpp"
#include "vlsim/rrc.hpp"
#include "vlsim/traffic.hpp"

namespace vlsim {

struct EnbConfig
{
    std::string name;
    Position position;
    double txPowerDbm = 46.0;

    bool operator==(const EnbConfig&) const = default;
};

/// Per-vehicle overrides; `car[i]` is the i-th vehicle to enter.
struct CarConfig
{
    std::optional<NodeId> masterId;
    std::optional<AccidentSpec> accident;

    bool operator==(const CarConfig&) const = default;
};

struct ScenarioConfig
{
    SimTime simEnd = SimTime::fromSeconds(100);
    std::uint64_t seed = 1;
    int numRbs = 50;
    ChannelParams channel;
    CqiTables cqi = CqiTables::standard();
    std::vector<EnbConfig> enbs;
    std::string traceFile;
    bool dynamicCellAssociation = false;
    AssociationMetric associationMetric = AssociationMetric::RX_POWER;
    HandoverConfig handover;
    double ueTxPowerDbm = 26.0;
    CarConfig carDefault;
    std::map<int, CarConfig> cars;
    std::vector<FlowSpec> flows;
    BackhaulConfig backhaul;
    SchedulerKind scheduler = SchedulerKind::RR;
    std::int64_t bufferBytes = 1024 * 1024;
    int fixedCqi = 0; // 0: adaptive
    SimTime positionLogInterval; // 0: off

    /// Manual serving cell for the vehicle with entry rank `index`, if any.
    std::optional<NodeId> masterIdFor(int index) const;
    AccidentSpec accidentFor(int index) const;

    bool operator==(const ScenarioConfig&) const = default;
};

/// A config problem tied to a line of the file.
class ConfigLineError : public ConfigError
{
  public:
    ConfigLineError(std::size_t line, const std::string& what);
    std::size_t line() const { return line_; }

  private:
    std::size_t line_;
};

/**
 * Parses the INI-style key = value format. A leading `**` or `*.` on a key
 * is accepted and ignored so lines written for the original framework read
 * unchanged. Relative trace paths resolve against `baseDir`.
 */
ScenarioConfig parseConfig(std::istream& in, const std::filesystem::path& baseDir, bool checkFiles = true);
ScenarioConfig loadConfig(const std::filesystem::path& path);

/// Writes every key, so parsing the result reproduces `cfg` exactly.
std::string dumpConfig(const ScenarioConfig& cfg);

/// The default configuration with placeholder trace and eNBs.
ScenarioConfig defaultConfig();

} // namespace vlsim
