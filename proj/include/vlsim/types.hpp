#pragma once

#include <cmath>
#include <compare>
#include <cstdint>
#include <ostream>
#include <stdexcept>
#include <string>

namespace vlsim {

/// Simulation time, stored as integer microseconds.
class SimTime
{
  public:
    constexpr SimTime() = default;

    static constexpr SimTime fromMicros(std::int64_t us) { return SimTime(us); }
    static constexpr SimTime fromMillis(std::int64_t ms) { return SimTime(ms * 1000); }
    static SimTime fromSeconds(double s) { return SimTime(std::llround(s * 1e6)); }

    constexpr std::int64_t micros() const { return us_; }
    constexpr double millis() const { return static_cast<double>(us_) / 1e3; }
    constexpr double seconds() const { return static_cast<double>(us_) / 1e6; }

    constexpr auto operator<=>(const SimTime&) const = default;

    constexpr SimTime operator+(SimTime o) const { return SimTime(us_ + o.us_); }
    constexpr SimTime operator-(SimTime o) const { return SimTime(us_ - o.us_); }
    constexpr SimTime& operator+=(SimTime o) { us_ += o.us_; return *this; }

  private:
    constexpr explicit SimTime(std::int64_t us) : us_(us) {}
    std::int64_t us_ = 0;
};

inline constexpr SimTime kTti = SimTime::fromMicros(1000);

using TtiIndex = std::int64_t;

inline constexpr TtiIndex ttiOf(SimTime t) { return t.micros() / kTti.micros(); }
inline constexpr SimTime ttiStart(TtiIndex tti) { return SimTime::fromMicros(tti * kTti.micros()); }

/// Registered node identifier; 0 is never assigned.
using NodeId = std::uint32_t;
inline constexpr NodeId kNoNode = 0;

enum class Direction { DL, UL };

inline const char* directionName(Direction d) { return d == Direction::DL ? "DL" : "UL"; }

enum class NodeKind { UE, ENB };

struct Position
{
    double x = 0.0;
    double y = 0.0;

    bool operator==(const Position&) const = default;
};

inline double distance(const Position& a, const Position& b)
{
    return std::hypot(a.x - b.x, a.y - b.y);
}

inline std::ostream& operator<<(std::ostream& os, SimTime t) { return os << t.micros() << "us"; }
inline std::ostream& operator<<(std::ostream& os, Direction d) { return os << directionName(d); }
inline std::ostream& operator<<(std::ostream& os, const Position& p) { return os << '(' << p.x << ", " << p.y << ')'; }

/// Base of every error raised by the simulator.
class Error : public std::runtime_error
{
  public:
    using std::runtime_error::runtime_error;
};

/// A violated call contract; signals a logic bug in the caller.
class ContractError : public Error
{
  public:
    using Error::Error;
};

class ConfigError : public Error
{
  public:
    using Error::Error;
};

inline double dbmToMw(double dbm) { return std::pow(10.0, dbm / 10.0); }
inline double mwToDbm(double mw) { return 10.0 * std::log10(mw); }

} // namespace vlsim
