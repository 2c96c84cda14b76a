#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <string>

#include "geolock/geosim.hpp"

using namespace geolock;

namespace {

class TraceFile {
public:
    explicit TraceFile(const std::string& content) {
        path_ = std::filesystem::temp_directory_path() /
                ("geolock_trace_" + std::to_string(reinterpret_cast<std::uintptr_t>(this)) + ".csv");
        std::ofstream out(path_);
        out << content;
    }
    ~TraceFile() { std::filesystem::remove(path_); }
    std::string path() const { return path_.string(); }

private:
    std::filesystem::path path_;
};

}  // namespace

TEST(GeoSim, LoadTrace) {
    TraceFile f(
        "# commute, sampled once a minute\n"
        "\n"
        "0,26.5,32.5\n"
        "60,26.6,32.7\r\n"
        "  120,28.0,35.0\n");
    auto script = sim::load_trace(f.path());
    ASSERT_EQ(script.samples.size(), 3u);
    EXPECT_EQ(script.samples[0].t, 0.0);
    EXPECT_EQ(script.samples[1].fix, geo::GeoFix(26.6, 32.7));
    EXPECT_EQ(script.samples[2].t, 120.0);
}

TEST(GeoSim, LoadTraceErrors) {
    try {
        sim::load_trace("/nonexistent/geolock.csv");
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::StorageUnavailable);
    }

    struct Case {
        const char* name;
        const char* content;
    } cases[] = {
        {"field count", "0,26.5\n"},
        {"bad number", "0,26.5,abc\n"},
        {"non-increasing", "0,26.5,32.5\n0,26.6,32.6\n"},
        {"decreasing", "5,26.5,32.5\n4,26.6,32.6\n"},
        {"out of range", "0,95.0,32.5\n"},
        {"empty", "# nothing here\n"},
    };
    for (const auto& c : cases) {
        TraceFile f(c.content);
        try {
            sim::load_trace(f.path());
            FAIL() << c.name;
        } catch (const Error& e) {
            EXPECT_EQ(e.code(), Errc::TraceFormatError) << c.name;
        }
    }
}

TEST(GeoSim, StepAdvancesDevice) {
    TraceFile f("0,26.5,32.5\n1,26.6,32.6\n2,28.0,35.0\n");
    auto script = sim::load_trace(f.path());

    sim::DeviceState state{geo::GeoFix(0, 0), std::nullopt};
    state = sim::step(state, script, 0);
    EXPECT_EQ(state.current, geo::GeoFix(26.5, 32.5));
    ASSERT_TRUE(state.previous.has_value());
    EXPECT_EQ(*state.previous, geo::GeoFix(0, 0));

    state = sim::step(state, script, 1);
    EXPECT_EQ(state.current, geo::GeoFix(26.6, 32.6));
    EXPECT_EQ(*state.previous, geo::GeoFix(26.5, 32.5));

    try {
        sim::step(state, script, 3);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::IndexOutOfRange);
    }
}

TEST(GeoSim, InsideMatchesFenceContains) {
    lock::GeoFence fence(26, 27, 32, 33);
    EXPECT_TRUE(sim::inside(fence, geo::GeoFix(26, 32)));
    EXPECT_TRUE(sim::inside(fence, geo::GeoFix(27, 33)));
    EXPECT_FALSE(sim::inside(fence, geo::GeoFix(27.000001, 33)));
}

TEST(GeoSim, ReplayAgainstFence) {
    // One excursion out of the fence: exactly one inside-to-outside edge.
    TraceFile f("0,26.5,32.5\n1,26.9,32.9\n2,28.0,35.0\n3,28.5,35.5\n4,26.5,32.5\n");
    auto script = sim::load_trace(f.path());
    lock::GeoFence fence(26, 27, 32, 33);

    int exits = 0;
    for (std::size_t i = 1; i < script.samples.size(); ++i) {
        bool was = sim::inside(fence, script.samples[i - 1].fix);
        bool is = sim::inside(fence, script.samples[i].fix);
        if (was && !is) ++exits;
    }
    EXPECT_EQ(exits, 1);
}
