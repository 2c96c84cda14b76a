#pragma once

#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "geolock/error.hpp"
#include "geolock/geokey.hpp"
#include "geolock/lockscreen.hpp"
#include "geolock/util.hpp"

namespace geolock::sim {

struct Sample {
    double t;  // seconds, strictly increasing within a script
    geo::GeoFix fix;
};

struct LocationScript {
    std::vector<Sample> samples;
};

/// Parse a trace CSV: `t,lat,lon` per line, blank lines and `#` comments
/// ignored.
inline LocationScript load_trace(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail(Errc::StorageUnavailable, "cannot open trace file " + path);
    LocationScript script;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        std::string_view sv = line;
        while (!sv.empty() && (sv.front() == ' ' || sv.front() == '\t')) sv.remove_prefix(1);
        if (sv.empty() || sv.front() == '#') continue;
        auto fields = util::split(sv, ',');
        if (fields.size() != 3) fail(Errc::TraceFormatError, "line " + std::to_string(line_no) + ": expected t,lat,lon");
        auto t = util::parse_double(fields[0]);
        auto lat = util::parse_double(fields[1]);
        auto lon = util::parse_double(fields[2]);
        if (!t || !lat || !lon) fail(Errc::TraceFormatError, "line " + std::to_string(line_no) + ": bad number");
        if (!script.samples.empty() && !(*t > script.samples.back().t))
            fail(Errc::TraceFormatError, "line " + std::to_string(line_no) + ": timestamps must be strictly increasing");
        try {
            script.samples.push_back(Sample{*t, geo::GeoFix(*lat, *lon)});
        } catch (const Error&) {
            fail(Errc::TraceFormatError, "line " + std::to_string(line_no) + ": coordinate out of range");
        }
    }
    if (script.samples.empty()) fail(Errc::TraceFormatError, "trace has no samples");
    return script;
}

struct DeviceState {
    geo::GeoFix current;
    std::optional<geo::GeoFix> previous;
};

/// Advance the simulated device to the script sample at `index`.
inline DeviceState step(const DeviceState& state, const LocationScript& script, std::size_t index) {
    if (index >= script.samples.size())
        fail(Errc::IndexOutOfRange, "sample index " + std::to_string(index) + " beyond trace of " +
                                        std::to_string(script.samples.size()));
    return DeviceState{script.samples[index].fix, state.current};
}

/// Closed-rectangle membership; boundary points count as inside.
inline bool inside(const lock::GeoFence& fence, const geo::GeoFix& fix) { return fence.contains(fix); }

}  // namespace geolock::sim
