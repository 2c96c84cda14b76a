#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <vector>

#include "geolock/codec.hpp"
#include "geolock/error.hpp"
#include "geolock/geokey.hpp"
#include "geolock/store.hpp"

namespace geolock::audit {

/// Rectangular search grid evaluated at cell centers; at the default 0.01
/// degree step any interior point is equivalent after quantization.
struct GridSpec {
    double lat_min, lat_max, lon_min, lon_max;
    double step = 0.01;
    std::int64_t max_cells = 100'000'000;

    GridSpec(double la0, double la1, double lo0, double lo1, double s = 0.01)
        : lat_min(la0), lat_max(la1), lon_min(lo0), lon_max(lo1), step(s) {
        if (!(lat_min < lat_max) || !(lon_min < lon_max)) fail(Errc::GridInvalid, "grid min must be below max on both axes");
        if (!(step > 0)) fail(Errc::GridInvalid, "grid step must be positive");
        if (lat_min < -geo::kLatLimit || lat_max > geo::kLatLimit || lon_min < -geo::kLonLimit || lon_max > geo::kLonLimit)
            fail(Errc::OutOfRangeCoordinate, "grid outside coordinate range");
    }

    std::int64_t lat_cells() const { return std::max<std::int64_t>(1, std::llround((lat_max - lat_min) / step)); }
    std::int64_t lon_cells() const { return std::max<std::int64_t>(1, std::llround((lon_max - lon_min) / step)); }
    std::int64_t cell_count() const { return lat_cells() * lon_cells(); }

    double lat_center(std::int64_t i) const { return lat_min + (static_cast<double>(i) + 0.5) * step; }
    double lon_center(std::int64_t j) const { return lon_min + (static_cast<double>(j) + 0.5) * step; }
};

/// Visit every cell lat-major ascending (the tie-break order used for
/// candidate ranking).
template <typename Fn>
void enumerate_cells(const GridSpec& g, Fn&& fn) {
    if (g.cell_count() > g.max_cells)
        fail(Errc::GridTooLarge, std::to_string(g.cell_count()) + " cells exceed the limit of " + std::to_string(g.max_cells));
    for (std::int64_t i = 0; i < g.lat_cells(); ++i)
        for (std::int64_t j = 0; j < g.lon_cells(); ++j) fn(g.lat_center(i), g.lon_center(j));
}

// ---------------------------------------------------------------------------
// Header leakage: the stored inverse keys are sufficient to read everything.

/// Reconstruct every message from the raw address -> value mapping alone.
/// No pattern, no location: the stored headers carry the inverse keys and the
/// link structure, so level-1 encryption is reversible by any reader of the
/// vault file.
inline std::vector<std::pair<store::MessageHandle, std::string>> leak_decrypt_all(const store::RecordMap& records) {
    auto chunks = store::scan_chunks(records);
    std::vector<std::pair<store::MessageHandle, std::string>> out;
    for (auto handle : store::chain_starts(chunks)) out.emplace_back(handle, store::follow_chain(chunks, handle));
    return out;
}

// ---------------------------------------------------------------------------
// Location keyspace census.

struct Census {
    std::int64_t distinct_key_pairs = 0;
    std::int64_t cell_count = 0;
};

inline Census keyspace_census(const GridSpec& g) {
    std::set<std::pair<int, int>> pairs;
    std::int64_t cells = 0;
    enumerate_cells(g, [&](double lat, double lon) {
        auto keys = geo::derive_keys(geo::GeoFix(lat, lon));
        pairs.emplace(keys.k1.to_int(), keys.k2.to_int());
        ++cells;
    });
    return Census{static_cast<std::int64_t>(pairs.size()), cells};
}

// ---------------------------------------------------------------------------
// Brute-force recovery over the location grid, header keys withheld.

/// A record pair as an attacker without header keys sees it: addresses, link
/// structure and payloads, key fields ignored (possibly zeroed).
struct RedactedPair {
    int a1 = 0;
    int a2 = 0;
    std::string part1_ciphertext;
    std::string part2_ciphertext;

    static RedactedPair from_records(int a1, std::string_view value1, int a2, std::string_view value2) {
        auto redacted = [](std::string_view value) {
            std::string v(value);
            if (v.size() < codec::kHeaderLen + 1 || v[codec::kHeaderLen] != '*')
                fail(Errc::BadHeader, "value does not carry the 12-character header");
            for (std::size_t i = 0; i < codec::kHeaderLen; ++i)
                if (v[i] < '0' || v[i] > '9') fail(Errc::BadHeader, "non-digit in fixed header field");
            return v;
        };
        auto v1 = redacted(value1);
        auto v2 = redacted(value2);
        int link1 = (v1[2] - '0') * 100 + (v1[3] - '0') * 10 + (v1[4] - '0');
        int link2 = (v2[2] - '0') * 100 + (v2[3] - '0') * 10 + (v2[4] - '0');
        if (link1 != 2 * a2) fail(Errc::LinkMismatch, "part-1 link does not name part-2's address twice");
        if (link2 != a2) fail(Errc::LinkMismatch, "part-2 link does not name its own address");
        auto ct1 = v1.substr(codec::kHeaderLen + 1);
        auto ct2 = v2.substr(codec::kHeaderLen + 1);
        for (const auto& ct : {ct1, ct2})
            if (ct.empty() || ct.size() % cipher::kBlockSize != 0)
                fail(Errc::BadHeader, "ciphertext length not whole blocks");
        return RedactedPair{a1, a2, std::move(ct1), std::move(ct2)};
    }
};

/// Overwrite the 6 key digits of a serialized record value with zeros.
inline std::string redact_keys(std::string_view value) {
    std::string v(value);
    if (v.size() >= codec::kHeaderLen) v.replace(5, 6, "000000");
    return v;
}

struct CandidateResult {
    geo::QuantizedDigits lat_digits;
    geo::QuantizedDigits lon_digits;
    double center_lat = 0;
    double center_lon = 0;
    std::string plaintext;  // recovered chunk, pointer suffix detached
    int next_address = 0;
    double score = 0;  // admissible-alphabet fraction of the recovered text
};

inline double admissible_fraction(std::string_view text) {
    if (text.empty()) return 0.0;
    std::size_t ok = 0;
    for (char c : text) ok += util::is_admissible_char(c) ? 1u : 0u;
    return static_cast<double>(ok) / static_cast<double>(text.size());
}

/// Try every grid cell's key pair against the pair's payloads. Candidates
/// whose pointer suffix fails to parse are discarded; survivors are ranked
/// by score descending with ties in cell order.
inline std::vector<CandidateResult> brute_force_pair(const RedactedPair& pair, const GridSpec& g) {
    struct Attempt {
        bool parsed = false;
        std::string chunk;
        int next = 0;
        double score = 0;
    };
    std::map<std::pair<int, int>, Attempt> memo;
    std::vector<CandidateResult> results;
    enumerate_cells(g, [&](double lat, double lon) {
        auto keys = geo::derive_keys(geo::GeoFix(lat, lon));
        auto key_id = std::pair{keys.k1.to_int(), keys.k2.to_int()};
        auto [it, inserted] = memo.try_emplace(key_id);
        if (inserted) {
            auto first = cipher::decrypt(pair.part2_ciphertext, cipher::invert_key(keys.k1));
            auto second = cipher::decrypt(pair.part1_ciphertext, cipher::invert_key(keys.k2));
            auto candidate = codec::unscramble(first + second);
            try {
                auto [chunk, next] = codec::detach_pointer(candidate);
                it->second = Attempt{true, std::move(chunk), next, admissible_fraction(candidate)};
            } catch (const Error& e) {
                if (e.code() != Errc::BadPointerSuffix) throw;
            }
        }
        const auto& attempt = it->second;
        if (attempt.parsed)
            results.push_back(CandidateResult{geo::quantize_digits(lat), geo::quantize_digits(lon), lat, lon,
                                              attempt.chunk, attempt.next, attempt.score});
    });
    std::stable_sort(results.begin(), results.end(),
                     [](const CandidateResult& a, const CandidateResult& b) { return a.score > b.score; });
    return results;
}

// ---------------------------------------------------------------------------
// Pattern space of the unlock grid.

/// Number of ordered distinct-cell sequences of the given length on a
/// grid_side x grid_side grid: n * (n-1) * ... * (n-length+1).
inline std::uint64_t pattern_space(int grid_side, int length) {
    if (grid_side < 2) fail(Errc::LengthOutOfRange, "grid side must be at least 2");
    std::int64_t n = static_cast<std::int64_t>(grid_side) * grid_side;
    if (length < 1 || length > n) fail(Errc::LengthOutOfRange, "length " + std::to_string(length) + " outside 1.." + std::to_string(n));
    std::uint64_t count = 1;
    for (std::int64_t f = n; f > n - length; --f) {
        auto factor = static_cast<std::uint64_t>(f);
        if (count > UINT64_MAX / factor) fail(Errc::CountOverflow, "pattern count exceeds 64 bits");
        count *= factor;
    }
    return count;
}

// ---------------------------------------------------------------------------
// Line-oriented report emission.

inline void emit_census(std::ostream& out, const Census& census) {
    out << "CENSUS " << census.distinct_key_pairs << ' ' << census.cell_count << '\n';
}

inline void emit_candidates(std::ostream& out, const std::vector<CandidateResult>& candidates) {
    char buf[64];
    for (const auto& c : candidates) {
        std::snprintf(buf, sizeof buf, "CAND %.4f %.4f %.4f ", c.score, c.center_lat, c.center_lon);
        out << buf << c.plaintext << '\n';
    }
}

}  // namespace geolock::audit
