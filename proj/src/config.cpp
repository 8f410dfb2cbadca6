#include "vlsim/config.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <regex>
#include <set>
#include <sstream>

namespace vlsim {

std::optional<NodeId> ScenarioConfig::masterIdFor(int index) const
{
    auto it = cars.find(index);
    if (it != cars.end() && it->second.masterId)
        return it->second.masterId;
    return carDefault.masterId;
}

AccidentSpec ScenarioConfig::accidentFor(int index) const
{
    auto it = cars.find(index);
    if (it != cars.end() && it->second.accident)
        return *it->second.accident;
    return carDefault.accident.value_or(AccidentSpec{});
}

ConfigLineError::ConfigLineError(std::size_t line, const std::string& what)
    : ConfigError("config line " + std::to_string(line) + ": " + what), line_(line)
{
}

namespace {

struct Value
{
    std::string text;
    std::size_t line;
};

std::string trim(const std::string& s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos)
        return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::string stripSuffix(const std::string& text, std::initializer_list<const char*> units)
{
    for (const char* u : units) {
        const std::string unit(u);
        if (text.size() > unit.size() && text.compare(text.size() - unit.size(), unit.size(), unit) == 0)
            return trim(text.substr(0, text.size() - unit.size()));
    }
    return text;
}

double toDouble(const Value& v, const std::string& key, std::initializer_list<const char*> units = {})
{
    const std::string text = stripSuffix(v.text, units);
    try {
        std::size_t used = 0;
        const double d = std::stod(text, &used);
        if (used == text.size() && std::isfinite(d))
            return d;
    }
    catch (const std::logic_error&) {
    }
    throw ConfigLineError(v.line, key + ": expected a number, got '" + v.text + "'");
}

std::int64_t toInt(const Value& v, const std::string& key)
{
    try {
        std::size_t used = 0;
        const long long i = std::stoll(v.text, &used);
        if (used == v.text.size())
            return i;
    }
    catch (const std::logic_error&) {
    }
    throw ConfigLineError(v.line, key + ": expected an integer, got '" + v.text + "'");
}

bool toBool(const Value& v, const std::string& key)
{
    if (v.text == "true")
        return true;
    if (v.text == "false")
        return false;
    throw ConfigLineError(v.line, key + ": expected true or false, got '" + v.text + "'");
}

enum class Unit { S, MS };

SimTime toTime(const Value& v, const std::string& key, Unit defaultUnit)
{
    static const std::regex re(R"(^([-+0-9.eE]+)\s*(s|ms|us)?$)");
    std::smatch m;
    if (std::regex_match(v.text, m, re)) {
        try {
            std::size_t used = 0;
            const std::string num = m[1].str();
            const double d = std::stod(num, &used);
            if (used == num.size() && std::isfinite(d) && d >= 0) {
                double factor = defaultUnit == Unit::S ? 1e6 : 1e3;
                if (m[2] == "s")
                    factor = 1e6;
                else if (m[2] == "ms")
                    factor = 1e3;
                else if (m[2] == "us")
                    factor = 1.0;
                return SimTime::fromMicros(std::llround(d * factor));
            }
        }
        catch (const std::logic_error&) {
        }
    }
    throw ConfigLineError(v.line, key + ": expected a non-negative time, got '" + v.text + "'");
}

std::vector<double> toList(const Value& v, const std::string& key, std::size_t n)
{
    std::vector<double> out;
    std::stringstream ss(v.text);
    std::string item;
    while (std::getline(ss, item, ','))
        out.push_back(toDouble({trim(item), v.line}, key));
    if (out.size() != n)
        throw ConfigLineError(v.line, key + ": expected " + std::to_string(n) + " values");
    return out;
}

Direction toDirection(const Value& v, const std::string& key)
{
    if (v.text == "DL")
        return Direction::DL;
    if (v.text == "UL")
        return Direction::UL;
    throw ConfigLineError(v.line, key + ": expected DL or UL");
}

std::string normalizeKey(std::string key)
{
    if (key.rfind("**", 0) == 0)
        key = key.substr(2);
    else if (key.rfind("*.", 0) == 0)
        key = key.substr(2);
    if (!key.empty() && key.front() == '.')
        key = key.substr(1);
    return key;
}

template <typename T>
std::vector<T> denseIndexed(std::map<int, T>& items, const char* what)
{
    std::vector<T> out;
    for (auto& [i, item] : items) {
        if (i != static_cast<int>(out.size()))
            throw ConfigError(std::string(what) + " indices must be contiguous from 0 (missing " +
                              what + "[" + std::to_string(out.size()) + "])");
        out.push_back(std::move(item));
    }
    return out;
}

void applyCarKey(CarConfig& car, const std::string& field, const Value& v, const std::string& key)
{
    auto accident = [&car]() -> AccidentSpec& {
        if (!car.accident)
            car.accident = AccidentSpec{};
        return *car.accident;
    };
    if (field == "masterId" || field == "macCellId") {
        const auto id = toInt(v, key);
        if (id <= 0)
            throw ConfigLineError(v.line, key + ": must reference an eNB (1-based)");
        if (car.masterId && *car.masterId != static_cast<NodeId>(id))
            throw ConfigLineError(v.line, key + ": masterId and macCellId disagree");
        car.masterId = static_cast<NodeId>(id);
    }
    else if (field == "vehicularMobility.accidentCount") {
        const auto n = toInt(v, key);
        if (n < 0 || n > 1)
            throw ConfigLineError(v.line, key + ": only 0 or 1 accidents are supported");
        accident().count = static_cast<int>(n);
    }
    else if (field == "vehicularMobility.accidentStart")
        accident().start = toTime(v, key, Unit::S);
    else if (field == "vehicularMobility.accidentDuration")
        accident().duration = toTime(v, key, Unit::S);
    else
        throw ConfigLineError(v.line, "unknown key '" + key + "'");
}

std::string formatTime(SimTime t)
{
    const auto us = t.micros();
    if (us % 1000000 == 0)
        return std::to_string(us / 1000000) + "s";
    if (us % 1000 == 0)
        return std::to_string(us / 1000) + "ms";
    return std::to_string(us) + "us";
}

std::string formatDouble(double d)
{
    // shortest form that parses back to the same value
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, d);
    return std::string(buf, res.ptr);
}

template <typename T, std::size_t N>
std::string formatList(const std::array<T, N>& values)
{
    std::string out;
    for (std::size_t i = 0; i < N; ++i) {
        if (i)
            out += ", ";
        if constexpr (std::is_integral_v<T>)
            out += std::to_string(values[i]);
        else
            out += formatDouble(values[i]);
    }
    return out;
}

} // namespace

ScenarioConfig parseConfig(std::istream& in, const std::filesystem::path& baseDir, bool checkFiles)
{
    std::map<std::string, Value> values;
    std::string raw;
    std::size_t lineNo = 0;
    while (std::getline(in, raw)) {
        ++lineNo;
        std::string line = trim(raw);
        if (line.empty() || line[0] == '#' || line[0] == ';')
            continue;
        if (line.front() == '[') {
            if (line != "[General]")
                throw ConfigLineError(lineNo, "only the [General] section is supported");
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigLineError(lineNo, "expected key = value");
        const std::string key = normalizeKey(trim(line.substr(0, eq)));
        std::string value = trim(line.substr(eq + 1));
        if (value.size() >= 2 && value.front() == '"' && value.back() == '"')
            value = value.substr(1, value.size() - 2);
        if (key.empty())
            throw ConfigLineError(lineNo, "empty key");
        if (values.count(key))
            throw ConfigLineError(lineNo, "duplicate key '" + key + "' (first set on line " +
                                              std::to_string(values[key].line) + ")");
        values[key] = {value, lineNo};
    }

    ScenarioConfig cfg;
    std::map<int, EnbConfig> enbs;
    std::map<int, std::set<std::string>> enbFields;
    std::set<int> flowsWithStop;
    std::map<int, FlowSpec> flows;
    static const std::regex indexed(R"(^(enb|car|flow)\[(\d+)\]\.(.+)$)");

    for (const auto& [key, v] : values) {
        std::smatch m;
        if (std::regex_match(key, m, indexed)) {
            const std::string group = m[1];
            const int idx = std::stoi(m[2]);
            const std::string field = m[3];
            if (group == "enb") {
                auto& e = enbs[idx];
                enbFields[idx].insert(field);
                if (field == "name")
                    e.name = v.text;
                else if (field == "x")
                    e.position.x = toDouble(v, key, {"m"});
                else if (field == "y")
                    e.position.y = toDouble(v, key, {"m"});
                else if (field == "txPower")
                    e.txPowerDbm = toDouble(v, key, {"dBm"});
                else
                    throw ConfigLineError(v.line, "unknown key '" + key + "'");
            }
            else if (group == "car") {
                applyCarKey(cfg.cars[idx], field, v, key);
            }
            else {
                auto& f = flows[idx];
                if (field == "direction")
                    f.direction = toDirection(v, key);
                else if (field == "target")
                    f.target = v.text;
                else if (field == "packetBits")
                    f.packetBits = toInt(v, key);
                else if (field == "interval")
                    f.interval = toTime(v, key, Unit::MS);
                else if (field == "start")
                    f.start = toTime(v, key, Unit::S);
                else if (field == "stop") {
                    f.stop = toTime(v, key, Unit::S);
                    flowsWithStop.insert(idx);
                }
                else
                    throw ConfigLineError(v.line, "unknown key '" + key + "'");
            }
            continue;
        }
        if (key.rfind("car.default.", 0) == 0) {
            applyCarKey(cfg.carDefault, key.substr(12), v, key);
            continue;
        }

        if (key == "simTimeLimit")
            cfg.simEnd = toTime(v, key, Unit::S);
        else if (key == "seed")
            cfg.seed = static_cast<std::uint64_t>(toInt(v, key));
        else if (key == "numRbs")
            cfg.numRbs = static_cast<int>(toInt(v, key));
        else if (key == "traceFile")
            cfg.traceFile = v.text;
        else if (key == "dynamicCellAssociation")
            cfg.dynamicCellAssociation = toBool(v, key);
        else if (key == "associationMetric") {
            if (v.text == "rxpower")
                cfg.associationMetric = AssociationMetric::RX_POWER;
            else if (v.text == "sinr")
                cfg.associationMetric = AssociationMetric::SINR;
            else
                throw ConfigLineError(v.line, key + ": expected rxpower or sinr");
        }
        else if (key == "enableHandover")
            cfg.handover.enabled = toBool(v, key);
        else if (key == "handoverHysteresis")
            cfg.handover.hysteresisDb = toDouble(v, key, {"dB"});
        else if (key == "handoverTimeToTrigger")
            cfg.handover.timeToTrigger = toTime(v, key, Unit::MS);
        else if (key == "ueTxPower")
            cfg.ueTxPowerDbm = toDouble(v, key, {"dBm"});
        else if (key == "scheduler") {
            if (v.text == "rr")
                cfg.scheduler = SchedulerKind::RR;
            else if (v.text == "maxcqi")
                cfg.scheduler = SchedulerKind::MAXCQI;
            else
                throw ConfigLineError(v.line, key + ": expected rr or maxcqi");
        }
        else if (key == "bufferBytes")
            cfg.bufferBytes = toInt(v, key);
        else if (key == "fixedCqi")
            cfg.fixedCqi = static_cast<int>(toInt(v, key));
        else if (key == "backhaulDelay")
            cfg.backhaul.oneWayDelay = toTime(v, key, Unit::MS);
        else if (key == "positionLogInterval")
            cfg.positionLogInterval = toTime(v, key, Unit::MS);
        else if (key == "channel.pathlossA")
            cfg.channel.pathlossA = toDouble(v, key, {"dB"});
        else if (key == "channel.pathlossB")
            cfg.channel.pathlossB = toDouble(v, key, {"dB"});
        else if (key == "channel.minDistance")
            cfg.channel.minDistance = toDouble(v, key, {"m"});
        else if (key == "channel.noiseFigure")
            cfg.channel.noiseFigure = toDouble(v, key, {"dB"});
        else if (key == "channel.rbBandwidth")
            cfg.channel.rbBandwidth = toDouble(v, key, {"Hz"});
        else if (key == "channel.shadowing")
            cfg.channel.shadowingEnabled = toBool(v, key);
        else if (key == "channel.shadowingSigma")
            cfg.channel.shadowingSigma = toDouble(v, key, {"dB"});
        else if (key == "channel.cqiThresholds") {
            const auto l = toList(v, key, 15);
            std::copy(l.begin(), l.end(), cfg.cqi.sinrThresholds.begin());
        }
        else if (key == "channel.cqiEfficiency" || key == "channel.bitsPerRb")
            continue;
        else
            throw ConfigLineError(v.line, "unknown key '" + key + "'");
    }

    // the efficiency table derives bits per RB unless those are given explicitly
    if (auto it = values.find("channel.cqiEfficiency"); it != values.end()) {
        const auto l = toList(it->second, it->first, 15);
        std::copy(l.begin(), l.end(), cfg.cqi.efficiency.begin());
        cfg.cqi.bitsPerRb = CqiTables::bitsFromEfficiency(cfg.cqi.efficiency);
    }
    if (auto it = values.find("channel.bitsPerRb"); it != values.end()) {
        const auto l = toList(it->second, it->first, 15);
        for (std::size_t i = 0; i < 15; ++i) {
            if (l[i] != std::floor(l[i]))
                throw ConfigLineError(it->second.line, "channel.bitsPerRb: values must be integers");
            cfg.cqi.bitsPerRb[i] = static_cast<int>(l[i]);
        }
    }

    for (auto& [i, fields] : enbFields) {
        if (!fields.count("x") || !fields.count("y"))
            throw ConfigError("enb[" + std::to_string(i) + "] requires x and y");
        if (enbs[i].name.empty())
            enbs[i].name = "enb" + std::to_string(i);
    }
    cfg.enbs = denseIndexed(enbs, "enb");
    for (auto& [i, f] : flows) {
        if (!flowsWithStop.count(i))
            f.stop = cfg.simEnd;
    }
    cfg.flows = denseIndexed(flows, "flow");

    if (cfg.traceFile.empty())
        throw ConfigError("missing required key 'traceFile'");
    if (cfg.enbs.empty())
        throw ConfigError("missing required key 'enb[0].x' (at least one eNB)");

    std::set<std::string> names;
    for (const auto& e : cfg.enbs) {
        if (!names.insert(e.name).second)
            throw ConfigError("duplicate eNB name '" + e.name + "'");
    }
    auto checkMaster = [&cfg](const CarConfig& car, const std::string& where) {
        if (car.masterId && *car.masterId > cfg.enbs.size())
            throw ConfigError(where + ".masterId = " + std::to_string(*car.masterId) +
                              " does not reference a declared eNB");
        if (car.accident && car.accident->count > 0 && car.accident->duration <= SimTime{})
            throw ConfigError(where + ": accidentDuration must be positive");
    };
    checkMaster(cfg.carDefault, "car.default");
    for (const auto& [i, car] : cfg.cars)
        checkMaster(car, "car[" + std::to_string(i) + "]");

    if (cfg.numRbs <= 0)
        throw ConfigError("numRbs must be positive");
    if (cfg.fixedCqi < 0 || cfg.fixedCqi > 15)
        throw ConfigError("fixedCqi must be within 0..15");
    if (cfg.bufferBytes <= 0)
        throw ConfigError("bufferBytes must be positive");
    if (cfg.handover.hysteresisDb < 0)
        throw ConfigError("handoverHysteresis must be non-negative");
    if (cfg.simEnd <= SimTime{})
        throw ConfigError("simTimeLimit must be positive");
    cfg.channel.validate();
    cfg.cqi.validate();
    for (const auto& f : cfg.flows)
        f.validate();

    std::filesystem::path trace(cfg.traceFile);
    if (trace.is_relative())
        trace = baseDir / trace;
    cfg.traceFile = std::filesystem::absolute(trace).lexically_normal().string();
    if (checkFiles && !std::filesystem::exists(cfg.traceFile))
        throw ConfigError("trace file " + cfg.traceFile + " does not exist");
    return cfg;
}

ScenarioConfig loadConfig(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot read config file " + path.string());
    return parseConfig(in, path.parent_path().empty() ? std::filesystem::path(".") : path.parent_path());
}

std::string dumpConfig(const ScenarioConfig& cfg)
{
    std::ostringstream os;
    auto boolText = [](bool b) { return b ? "true" : "false"; };
    os << "[General]\n";
    os << "simTimeLimit = " << formatTime(cfg.simEnd) << "\n";
    os << "seed = " << cfg.seed << "\n";
    os << "numRbs = " << cfg.numRbs << "\n";
    os << "traceFile = " << cfg.traceFile << "\n";
    os << "dynamicCellAssociation = " << boolText(cfg.dynamicCellAssociation) << "\n";
    os << "associationMetric = " << (cfg.associationMetric == AssociationMetric::SINR ? "sinr" : "rxpower") << "\n";
    os << "enableHandover = " << boolText(cfg.handover.enabled) << "\n";
    os << "handoverHysteresis = " << formatDouble(cfg.handover.hysteresisDb) << "dB\n";
    os << "handoverTimeToTrigger = " << formatTime(cfg.handover.timeToTrigger) << "\n";
    os << "ueTxPower = " << formatDouble(cfg.ueTxPowerDbm) << "dBm\n";
    os << "scheduler = " << (cfg.scheduler == SchedulerKind::MAXCQI ? "maxcqi" : "rr") << "\n";
    os << "bufferBytes = " << cfg.bufferBytes << "\n";
    os << "fixedCqi = " << cfg.fixedCqi << "\n";
    os << "backhaulDelay = " << formatTime(cfg.backhaul.oneWayDelay) << "\n";
    os << "positionLogInterval = " << formatTime(cfg.positionLogInterval) << "\n";
    os << "channel.pathlossA = " << formatDouble(cfg.channel.pathlossA) << "\n";
    os << "channel.pathlossB = " << formatDouble(cfg.channel.pathlossB) << "\n";
    os << "channel.minDistance = " << formatDouble(cfg.channel.minDistance) << "\n";
    os << "channel.noiseFigure = " << formatDouble(cfg.channel.noiseFigure) << "\n";
    os << "channel.rbBandwidth = " << formatDouble(cfg.channel.rbBandwidth) << "\n";
    os << "channel.shadowing = " << boolText(cfg.channel.shadowingEnabled) << "\n";
    os << "channel.shadowingSigma = " << formatDouble(cfg.channel.shadowingSigma) << "\n";
    os << "channel.cqiThresholds = " << formatList(cfg.cqi.sinrThresholds) << "\n";
    os << "channel.cqiEfficiency = " << formatList(cfg.cqi.efficiency) << "\n";
    os << "channel.bitsPerRb = " << formatList(cfg.cqi.bitsPerRb) << "\n";

    for (std::size_t i = 0; i < cfg.enbs.size(); ++i) {
        const auto& e = cfg.enbs[i];
        const std::string p = "enb[" + std::to_string(i) + "].";
        os << p << "name = " << e.name << "\n";
        os << p << "x = " << formatDouble(e.position.x) << "\n";
        os << p << "y = " << formatDouble(e.position.y) << "\n";
        os << p << "txPower = " << formatDouble(e.txPowerDbm) << "dBm\n";
    }

    auto dumpCar = [&os](const std::string& p, const CarConfig& car) {
        if (car.masterId)
            os << p << "masterId = " << *car.masterId << "\n";
        if (car.accident) {
            os << p << "vehicularMobility.accidentCount = " << car.accident->count << "\n";
            os << p << "vehicularMobility.accidentStart = " << formatTime(car.accident->start) << "\n";
            os << p << "vehicularMobility.accidentDuration = " << formatTime(car.accident->duration) << "\n";
        }
    };
    dumpCar("car.default.", cfg.carDefault);
    for (const auto& [i, car] : cfg.cars)
        dumpCar("car[" + std::to_string(i) + "].", car);

    for (std::size_t i = 0; i < cfg.flows.size(); ++i) {
        const auto& f = cfg.flows[i];
        const std::string p = "flow[" + std::to_string(i) + "].";
        os << p << "direction = " << directionName(f.direction) << "\n";
        os << p << "target = " << f.target << "\n";
        os << p << "packetBits = " << f.packetBits << "\n";
        os << p << "interval = " << formatTime(f.interval) << "\n";
        os << p << "start = " << formatTime(f.start) << "\n";
        os << p << "stop = " << formatTime(f.stop) << "\n";
    }
    return os.str();
}

ScenarioConfig defaultConfig()
{
    ScenarioConfig cfg;
    cfg.traceFile = "trace.csv";
    cfg.enbs = {{"enb0", {0.0, 0.0}, 46.0}, {"enb1", {1000.0, 0.0}, 46.0}};
    cfg.carDefault.masterId = 1;
    cfg.flows = {FlowSpec{Direction::DL, kAllVehicles, 1000, SimTime::fromMillis(10), SimTime{}, cfg.simEnd}};
    return cfg;
}

} // namespace vlsim
