#pragma once

#include <istream>
#include <optional>
#include <string>
#include <vector>

#include "vlsim/engine.hpp"
#include "vlsim/types.hpp"

namespace vlsim {

struct TrajectorySample
{
    SimTime time;
    Position position;

    bool operator==(const TrajectorySample&) const = default;
};

/// Accident stop: the vehicle halts `start` after departure for `duration`.
struct AccidentSpec
{
    int count = 0;
    SimTime start;
    SimTime duration;

    bool operator==(const AccidentSpec&) const = default;
};

class Trajectory
{
  public:
    /// Samples must be non-empty and strictly increasing in time.
    Trajectory(std::string vehicle, std::vector<TrajectorySample> samples);

    const std::string& vehicle() const { return vehicle_; }
    const std::vector<TrajectorySample>& samples() const { return samples_; }
    SimTime enterTime() const { return samples_.front().time; }
    SimTime leaveTime() const { return samples_.back().time; }
    bool covers(SimTime t) const { return t >= enterTime() && t <= leaveTime(); }

    /// Linear interpolation between the bracketing samples.
    Position positionAt(SimTime t) const;

    double pathLength() const;

  private:
    std::string vehicle_;
    std::vector<TrajectorySample> samples_;
};

class TraceParseError : public Error
{
  public:
    TraceParseError(std::size_t line, const std::string& what);
    std::size_t line() const { return line_; }

  private:
    std::size_t line_;
};

class OutOfLifetimeError : public Error
{
  public:
    using Error::Error;
};

/**
 * Parses a `time_s,vehicle,x_m,y_m` CSV trace. Rows may interleave vehicles
 * but must be strictly increasing in time per vehicle. Trajectories are
 * returned ordered by vehicle name.
 */
std::vector<Trajectory> parseTrace(std::istream& in);
std::vector<Trajectory> loadTrace(const std::string& path);

/**
 * Freezes the vehicle at the position reached `spec.start` after departure
 * for `spec.duration`, then replays the rest of the path delayed by the
 * duration. An accident starting after the leave time is ignored.
 */
Trajectory applyAccident(const Trajectory& traj, const AccidentSpec& spec);

/// One VEHICLE_ENTER and one VEHICLE_LEAVE per trajectory, sorted by (time, vehicle).
std::vector<SimEvent> lifecycleEvents(const std::vector<Trajectory>& trajs);

} // namespace vlsim
