#pragma once

#include <array>
#include <cstdint>
#include <numeric>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "geolock/error.hpp"
#include "geolock/geokey.hpp"
#include "geolock/sha256.hpp"
#include "geolock/util.hpp"

namespace geolock::lock {

inline constexpr int kGridSide = 4;
inline constexpr int kGridCells = kGridSide * kGridSide;
inline constexpr std::size_t kMinPatternLen = 4;
inline constexpr std::size_t kSaltLen = 16;

using Salt = std::array<std::uint8_t, kSaltLen>;

/// Ordered sequence of distinct cells on the 4x4 grid, row-major 0..15.
class Pattern {
public:
    explicit Pattern(std::vector<int> cells) : cells_(std::move(cells)) {
        if (cells_.size() < kMinPatternLen)
            fail(Errc::PatternTooShort, "pattern needs at least " + std::to_string(kMinPatternLen) + " cells");
        std::array<bool, kGridCells> seen{};
        for (int c : cells_) {
            if (c < 0 || c >= kGridCells) fail(Errc::PatternCellOutOfRange, "cell " + std::to_string(c) + " outside 0..15");
            if (seen[static_cast<std::size_t>(c)]) fail(Errc::DuplicateCell, "cell " + std::to_string(c) + " repeated");
            seen[static_cast<std::size_t>(c)] = true;
        }
    }

    static Pattern parse(std::string_view dashed) {
        std::vector<int> cells;
        for (const auto& tok : util::split(dashed, '-')) {
            auto v = util::parse_long(tok);
            if (!v) fail(Errc::PatternCellOutOfRange, "bad pattern cell \"" + tok + "\"");
            cells.push_back(static_cast<int>(*v));
        }
        return Pattern(std::move(cells));
    }

    const std::vector<int>& cells() const { return cells_; }
    std::size_t size() const { return cells_.size(); }

    std::string to_string() const { return canonical(cells_); }

    // Dash-joined decimal cell list; the digest input, order-sensitive.
    static std::string canonical(const std::vector<int>& cells) {
        std::string s;
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) s.push_back('-');
            s += std::to_string(cells[i]);
        }
        return s;
    }

    bool operator==(const Pattern&) const = default;

private:
    std::vector<int> cells_;
};

/// Closed lat/lon rectangle; crossing from inside to outside triggers a
/// pattern-rotation proposal.
struct GeoFence {
    double lat_min, lat_max, lon_min, lon_max;

    GeoFence(double la0, double la1, double lo0, double lo1)
        : lat_min(la0), lat_max(la1), lon_min(lo0), lon_max(lo1) {
        if (!(lat_min < lat_max) || !(lon_min < lon_max)) fail(Errc::FenceInvalid, "fence min must be below max on both axes");
        if (lat_min < -geo::kLatLimit || lat_max > geo::kLatLimit || lon_min < -geo::kLonLimit || lon_max > geo::kLonLimit)
            fail(Errc::FenceInvalid, "fence outside coordinate range");
    }

    bool contains(const geo::GeoFix& fix) const {
        return fix.latitude_deg >= lat_min && fix.latitude_deg <= lat_max &&
               fix.longitude_deg >= lon_min && fix.longitude_deg <= lon_max;
    }

    bool operator==(const GeoFence&) const = default;
};

struct SeedPair {
    geo::QuantizedDigits lat;
    geo::QuantizedDigits lon;
    bool operator==(const SeedPair&) const = default;
};

struct LockMeta {
    hash::Digest pattern_digest{};
    Salt salt{};
    GeoFence fence;
    std::size_t pattern_len = 0;
    bool pending_rotation = false;
    std::optional<SeedPair> proposed_seed;
};

struct Session {
    bool unlocked = false;
    bool rotation_pending = false;
};

// Lenient attempt parsing for verification paths: anything malformed becomes
// an empty attempt, which can never match an enrolled digest.
inline std::vector<int> parse_attempt(std::string_view dashed) {
    if (dashed.empty()) return {};
    std::vector<int> cells;
    for (const auto& tok : util::split(dashed, '-')) {
        auto v = util::parse_long(tok);
        if (!v) return {};
        cells.push_back(static_cast<int>(*v));
    }
    return cells;
}

inline hash::Digest pattern_digest(const Salt& salt, std::string_view canonical_pattern) {
    hash::Sha256 h;
    h.update(salt.data(), salt.size());
    h.update(canonical_pattern);
    return h.finish();
}

inline Salt random_salt() {
    std::random_device rd;
    Salt s{};
    for (auto& b : s) b = static_cast<std::uint8_t>(rd());
    return s;
}

inline LockMeta enroll(const Pattern& pattern, const GeoFence& fence, const Salt& salt) {
    LockMeta meta{.pattern_digest = pattern_digest(salt, pattern.to_string()),
                  .salt = salt,
                  .fence = fence,
                  .pattern_len = pattern.size(),
                  .pending_rotation = false,
                  .proposed_seed = std::nullopt};
    return meta;
}

inline LockMeta enroll(const Pattern& pattern, const GeoFence& fence) { return enroll(pattern, fence, random_salt()); }

/// Digest comparison is the only unlock path. Structurally invalid attempts
/// (empty, repeats, reordered cells) simply fail to match.
inline Session verify_pattern(const LockMeta& meta, const std::vector<int>& attempt_cells) {
    bool ok = pattern_digest(meta.salt, Pattern::canonical(attempt_cells)) == meta.pattern_digest;
    return Session{.unlocked = ok, .rotation_pending = meta.pending_rotation};
}

/// Fence-crossing detector: an inside-to-outside transition records a
/// rotation proposal seeded from the new location. Re-entering or moving
/// outside the fence does not trigger.
inline LockMeta observe_fix(LockMeta meta, const geo::GeoFix& prev, const geo::GeoFix& cur) {
    if (meta.fence.contains(prev) && !meta.fence.contains(cur)) {
        meta.pending_rotation = true;
        meta.proposed_seed = SeedPair{geo::quantize_digits(cur.latitude_deg), geo::quantize_digits(cur.longitude_deg)};
    }
    return meta;
}

/// Deterministic pattern derivation: draw cells without replacement from
/// 0..15 using the salted location digest stream.
inline Pattern generate_pattern(const SeedPair& seed, const Salt& salt, std::size_t length) {
    if (length < kMinPatternLen || length > kGridCells)
        fail(Errc::LengthOutOfRange, "pattern length " + std::to_string(length) + " outside 4..16");
    std::string prefix(reinterpret_cast<const char*>(salt.data()), salt.size());
    prefix += seed.lat.str();
    prefix += seed.lon.str();
    hash::DigestStream stream(prefix);

    std::vector<int> remaining(kGridCells);
    std::iota(remaining.begin(), remaining.end(), 0);
    std::vector<int> cells;
    cells.reserve(length);
    for (std::size_t i = 0; i < length; ++i) {
        auto idx = stream.next_byte() % remaining.size();
        cells.push_back(remaining[idx]);
        remaining.erase(remaining.begin() + static_cast<std::ptrdiff_t>(idx));
    }
    return Pattern(std::move(cells));
}

struct RotationResult {
    LockMeta meta;
    bool accepted = false;
    // Set when the rotation was accepted; pattern_changed is false in the
    // unlikely event the generated pattern equals the old one.
    std::optional<Pattern> new_pattern;
    bool pattern_changed = false;
};

/// Decide a pending rotation. The old pattern authorizes either outcome:
/// accept swaps in the location-derived pattern and the new fence; skip
/// clears the proposal and keeps everything.
inline RotationResult apply_rotation(const LockMeta& meta, const std::vector<int>& old_attempt, bool accept,
                                     const GeoFence& new_fence) {
    if (!meta.pending_rotation || !meta.proposed_seed) fail(Errc::NoRotationPending, "no rotation proposal to decide");
    if (!verify_pattern(meta, old_attempt).unlocked) fail(Errc::PatternMismatch, "old pattern rejected; rotation still pending");

    RotationResult result{.meta = meta, .accepted = false, .new_pattern = std::nullopt, .pattern_changed = false};
    result.meta.pending_rotation = false;
    result.meta.proposed_seed = std::nullopt;
    if (!accept) return result;

    auto pattern = generate_pattern(*meta.proposed_seed, meta.salt, meta.pattern_len);
    result.accepted = true;
    result.pattern_changed = pattern_digest(meta.salt, pattern.to_string()) != meta.pattern_digest;
    result.meta.pattern_digest = pattern_digest(meta.salt, pattern.to_string());
    result.meta.fence = new_fence;
    result.new_pattern = std::move(pattern);
    return result;
}

enum class Request { ReadPlaintext, ReadRaw };
enum class Policy { Allow, JunkOnly };

/// Raw (intruder) reads are always allowed; plaintext requires an unlocked
/// session with no rotation decision outstanding.
inline Policy view_policy(const Session& session, Request request) {
    if (request == Request::ReadRaw) return Policy::Allow;
    return session.unlocked && !session.rotation_pending ? Policy::Allow : Policy::JunkOnly;
}

}  // namespace geolock::lock
