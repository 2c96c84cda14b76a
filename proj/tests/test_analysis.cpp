#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <functional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "geolock/analysis.hpp"

using namespace geolock;
namespace fs = std::filesystem;

namespace {

lock::Salt test_salt() {
    lock::Salt s{};
    for (std::size_t i = 0; i < s.size(); ++i) s[i] = static_cast<std::uint8_t>(i);
    return s;
}

lock::LockMeta test_meta() {
    return lock::enroll(lock::Pattern::parse("0-5-10-15"), lock::GeoFence(26, 27, 32, 33), test_salt());
}

const geo::GeoFix kFix{26.15875768, 32.153457537};

struct TempVault {
    fs::path path;
    explicit TempVault(const char* name) : path(fs::temp_directory_path() / name) { fs::remove(path); }
    ~TempVault() { fs::remove(path); }
};

// Ordered distinct-cell sequences counted one by one.
std::uint64_t enumerate_sequences(int n, int len) {
    std::vector<bool> used(static_cast<std::size_t>(n), false);
    std::function<std::uint64_t(int)> go = [&](int remaining) -> std::uint64_t {
        if (remaining == 0) return 1;
        std::uint64_t total = 0;
        for (int c = 0; c < n; ++c)
            if (!used[static_cast<std::size_t>(c)]) {
                used[static_cast<std::size_t>(c)] = true;
                total += go(remaining - 1);
                used[static_cast<std::size_t>(c)] = false;
            }
        return total;
    };
    return go(len);
}

}  // namespace

TEST(GridSpec, CellArithmetic) {
    audit::GridSpec g(26, 27, 32, 33, 0.01);
    EXPECT_EQ(g.lat_cells(), 100);
    EXPECT_EQ(g.lon_cells(), 100);
    EXPECT_EQ(g.cell_count(), 10000);
    EXPECT_DOUBLE_EQ(g.lat_center(0), 26.005);
    EXPECT_DOUBLE_EQ(g.lon_center(99), 32.995);

    audit::GridSpec single(26.15, 26.16, 32.15, 32.16, 0.01);
    EXPECT_EQ(single.cell_count(), 1);
    EXPECT_DOUBLE_EQ(single.lat_center(0), 26.155);
}

TEST(GridSpec, Validation) {
    for (auto [a, b, c, d] : {std::tuple{27.0, 26.0, 32.0, 33.0}, {26.0, 26.0, 32.0, 33.0}, {26.0, 27.0, 33.0, 32.0}}) {
        try {
            audit::GridSpec g(a, b, c, d);
            FAIL();
        } catch (const Error& e) {
            EXPECT_EQ(e.code(), Errc::GridInvalid);
        }
    }
    try {
        audit::GridSpec g(26, 27, 32, 33, 0.0);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::GridInvalid);
    }
    try {
        audit::GridSpec g(26, 91, 32, 33);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::OutOfRangeCoordinate);
    }
}

TEST(GridSpec, TooLargeIsRejectedUpFront) {
    audit::GridSpec g(-90, 90, -180, 180, 0.001);
    ASSERT_GT(g.cell_count(), g.max_cells);
    try {
        audit::keyspace_census(g);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::GridTooLarge);
    }
    audit::GridSpec small(26, 27, 32, 33, 0.01);
    small.max_cells = 10;
    try {
        audit::keyspace_census(small);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::GridTooLarge);
    }
}

TEST(Census, DegenerateGrid) {
    auto census = audit::keyspace_census(audit::GridSpec(26.15, 26.16, 32.15, 32.16, 0.01));
    EXPECT_EQ(census.distinct_key_pairs, 1);
    EXPECT_EQ(census.cell_count, 1);
}

TEST(Census, MatchesExhaustiveEnumeration) {
    audit::GridSpec g(26, 27, 32, 33, 0.01);
    auto census = audit::keyspace_census(g);
    EXPECT_EQ(census.cell_count, 10000);

    std::set<std::pair<int, int>> expected;
    for (int i = 0; i < 100; ++i)
        for (int j = 0; j < 100; ++j) {
            auto keys = geo::derive_keys(geo::GeoFix(26 + (i + 0.5) * 0.01, 32 + (j + 0.5) * 0.01));
            expected.emplace(keys.k1.to_int(), keys.k2.to_int());
        }
    EXPECT_EQ(census.distinct_key_pairs, static_cast<std::int64_t>(expected.size()));
    EXPECT_LE(census.distinct_key_pairs, census.cell_count);
    EXPECT_LE(census.distinct_key_pairs, 720 * 720);
}

TEST(Census, SingleQuantizedLatitudeBand) {
    // All centers share lat digits "2615", so K1 is constant across the grid.
    audit::GridSpec g(26.15, 26.16, 32.0, 33.0, 0.002);
    std::set<int> k1s;
    audit::enumerate_cells(g, [&](double lat, double lon) {
        (void)lon;
        k1s.insert(geo::complete_key(geo::quantize_digits(lat)).to_int());
    });
    EXPECT_EQ(k1s.size(), 1u);
    EXPECT_EQ(*k1s.begin(), 261534);
}

TEST(Leak, RecoversEverythingFromHeaders) {
    TempVault t("geolock_leak.vault");
    auto v = store::Vault::create(t.path.string(), test_meta());
    std::vector<std::string> messages = {
        "Hai...Dear...Howz Life",
        "pick up the keys at noon",
        std::string(300, 'm') + " tail",
    };
    for (const auto& m : messages) v.put_message(m, kFix);

    auto recovered = audit::leak_decrypt_all(v.records());
    ASSERT_EQ(recovered.size(), messages.size());
    for (const auto& [handle, text] : recovered) EXPECT_EQ(text, v.get_message(handle));

    // Insertion order: first stored message first.
    EXPECT_EQ(recovered[0].second, messages[0]);
    EXPECT_EQ(recovered[1].second, messages[1]);
    EXPECT_EQ(recovered[2].second, messages[2]);
}

TEST(Leak, EmptyVault) {
    EXPECT_TRUE(audit::leak_decrypt_all({}).empty());
}

TEST(Leak, RedactionControlBlocksRecovery) {
    TempVault t("geolock_redact.vault");
    auto v = store::Vault::create(t.path.string(), test_meta());
    v.put_message("secret errand list", kFix);

    store::RecordMap redacted;
    for (const auto& [addr, value] : v.records()) redacted.emplace(addr, audit::redact_keys(value));
    for (const auto& [addr, value] : redacted) EXPECT_EQ(value.substr(5, 6), "000000");

    try {
        audit::leak_decrypt_all(redacted);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::InvalidKey);
    }
}

TEST(RedactedPair, FromRecordsValidation) {
    auto pair = codec::assemble_pair("validation probe 0", kFix, 999, 1);
    auto v1 = audit::redact_keys(pair.part1.serialize());
    auto v2 = audit::redact_keys(pair.part2.serialize());

    auto ok = audit::RedactedPair::from_records(999, v1, 1, v2);
    EXPECT_EQ(ok.part1_ciphertext, pair.part1.ciphertext);
    EXPECT_EQ(ok.part2_ciphertext, pair.part2.ciphertext);

    try {
        audit::RedactedPair::from_records(999, v1, 2, v2);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::LinkMismatch);
    }
    try {
        audit::RedactedPair::from_records(999, "short", 1, v2);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::BadHeader);
    }
    try {
        audit::RedactedPair::from_records(999, v1 + "x", 1, v2);  // ragged ciphertext
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::BadHeader);
    }
}

TEST(Brute, PlantAndRecover) {
    std::string message = "meet me at the old bridge at dawn";
    auto planted = codec::assemble_pair(codec::attach_pointer(message, 0), kFix, 999, 1);
    auto pair = audit::RedactedPair::from_records(999, audit::redact_keys(planted.part1.serialize()), 1,
                                                  audit::redact_keys(planted.part2.serialize()));

    audit::GridSpec g(26, 27, 32, 33, 0.01);
    auto candidates = audit::brute_force_pair(pair, g);
    ASSERT_FALSE(candidates.empty());

    for (std::size_t i = 1; i < candidates.size(); ++i) EXPECT_GE(candidates[i - 1].score, candidates[i].score);

    bool found = false;
    for (const auto& c : candidates)
        if (c.plaintext == message) {
            found = true;
            EXPECT_EQ(c.score, candidates.front().score);  // among the rank-1 ties
            EXPECT_EQ(c.next_address, 0);
            EXPECT_EQ(c.lat_digits.str(), "2615");
            EXPECT_EQ(c.lon_digits.str(), "3215");
            EXPECT_NEAR(c.center_lat, 26.155, 1e-9);
            EXPECT_NEAR(c.center_lon, 32.155, 1e-9);
        }
    EXPECT_TRUE(found);
}

TEST(Brute, ControlGridMissesPlaintext) {
    std::string message = "meet me at the old bridge at dawn";
    auto planted = codec::assemble_pair(codec::attach_pointer(message, 0), kFix, 999, 1);
    auto pair = audit::RedactedPair::from_records(999, audit::redact_keys(planted.part1.serialize()), 1,
                                                  audit::redact_keys(planted.part2.serialize()));

    auto far = audit::brute_force_pair(pair, audit::GridSpec(27, 28, 33, 34, 0.01));
    for (const auto& c : far) EXPECT_NE(c.plaintext, message);

    auto single = audit::brute_force_pair(pair, audit::GridSpec(40.0, 40.01, 70.0, 70.01, 0.01));
    for (const auto& c : single) EXPECT_NE(c.plaintext, message);
}

TEST(Brute, DeterministicAndTieOrderIsCellOrder) {
    auto planted = codec::assemble_pair("tie order probe 0", kFix, 999, 1);
    auto pair = audit::RedactedPair::from_records(999, audit::redact_keys(planted.part1.serialize()), 1,
                                                  audit::redact_keys(planted.part2.serialize()));
    audit::GridSpec g(26.1, 26.3, 32.1, 32.3, 0.01);

    auto a = audit::brute_force_pair(pair, g);
    auto b = audit::brute_force_pair(pair, g);
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        EXPECT_EQ(a[i].plaintext, b[i].plaintext);
        EXPECT_EQ(a[i].score, b[i].score);
        EXPECT_EQ(a[i].center_lat, b[i].center_lat);
        EXPECT_EQ(a[i].center_lon, b[i].center_lon);
    }

    // Within a tie group, cells appear lat-major ascending.
    for (std::size_t i = 1; i < a.size(); ++i) {
        if (a[i - 1].score != a[i].score) continue;
        EXPECT_TRUE(a[i - 1].center_lat < a[i].center_lat ||
                    (a[i - 1].center_lat == a[i].center_lat && a[i - 1].center_lon < a[i].center_lon));
    }
}

TEST(PatternSpace, WorkedValues) {
    EXPECT_EQ(audit::pattern_space(4, 1), 16u);
    EXPECT_EQ(audit::pattern_space(4, 4), 43680u);
    EXPECT_EQ(audit::pattern_space(5, 2), 600u);
    EXPECT_EQ(audit::pattern_space(4, 16), 20922789888000u);  // 16!
}

TEST(PatternSpace, MatchesEnumeration) {
    for (int side = 2; side <= 4; ++side)
        for (int len = 1; len <= 4; ++len)
            EXPECT_EQ(audit::pattern_space(side, len), enumerate_sequences(side * side, len)) << side << "," << len;
}

TEST(PatternSpace, StrictlyIncreasingInGridSide) {
    std::uint64_t prev = 0;
    for (int side = 2; side <= 5; ++side) {
        auto count = audit::pattern_space(side, 4);
        EXPECT_GT(count, prev);
        prev = count;
    }
    EXPECT_EQ(prev, 303600u);  // 25 * 24 * 23 * 22
}

TEST(PatternSpace, Errors) {
    for (auto [side, len] : {std::pair{1, 1}, {4, 0}, {4, 17}, {2, 5}}) {
        try {
            audit::pattern_space(side, len);
            FAIL() << side << "," << len;
        } catch (const Error& e) {
            EXPECT_EQ(e.code(), Errc::LengthOutOfRange);
        }
    }
    try {
        audit::pattern_space(256, 11);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::CountOverflow);
    }
}

TEST(Reports, LineFormats) {
    std::ostringstream out;
    audit::emit_census(out, audit::Census{42, 10000});
    EXPECT_EQ(out.str(), "CENSUS 42 10000\n");

    std::ostringstream cand;
    audit::CandidateResult c{geo::quantize_digits(26.155), geo::quantize_digits(32.155),
                             26.155, 32.155, "hello there", 42, 0.9375};
    audit::emit_candidates(cand, {c});
    EXPECT_EQ(cand.str(), "CAND 0.9375 26.1550 32.1550 hello there\n");
}
