#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <utility>

#include "geolock/cipher.hpp"
#include "geolock/error.hpp"

namespace geolock::geo {

inline constexpr double kLatLimit = 90.0;
inline constexpr double kLonLimit = 180.0;

struct GeoFix {
    double latitude_deg;
    double longitude_deg;

    GeoFix(double lat, double lon) : latitude_deg(lat), longitude_deg(lon) {
        if (!(lat >= -kLatLimit && lat <= kLatLimit))
            fail(Errc::OutOfRangeCoordinate, "latitude " + std::to_string(lat) + " outside [-90, 90]");
        if (!(lon >= -kLonLimit && lon <= kLonLimit))
            fail(Errc::OutOfRangeCoordinate, "longitude " + std::to_string(lon) + " outside [-180, 180]");
    }

    bool operator==(const GeoFix&) const = default;
};

/// Four decimal digit characters: last two integer digits + two decimals
/// of a truncated coordinate.
class QuantizedDigits {
public:
    static QuantizedDigits from_string(std::string_view s) {
        if (s.size() != 4) fail(Errc::OutOfRangeCoordinate, "quantized digits must be 4 characters");
        std::array<char, 4> d{};
        for (std::size_t i = 0; i < 4; ++i) {
            if (s[i] < '0' || s[i] > '9') fail(Errc::OutOfRangeCoordinate, "quantized digits must be decimal");
            d[i] = s[i];
        }
        return QuantizedDigits(d);
    }

    std::string str() const { return std::string(digits_.begin(), digits_.end()); }
    char operator[](std::size_t i) const { return digits_[i]; }

    bool operator==(const QuantizedDigits&) const = default;

private:
    explicit QuantizedDigits(const std::array<char, 4>& d) : digits_(d) {}
    std::array<char, 4> digits_;
};

/// Truncate |coord| to two decimals; emit the last two integer digits
/// followed by the two decimal digits, all zero-padded.
inline QuantizedDigits quantize_digits(double coord) {
    if (!(std::abs(coord) <= kLonLimit) || !std::isfinite(coord))
        fail(Errc::OutOfRangeCoordinate, "coordinate " + std::to_string(coord) + " outside valid range");
    // Small slack so that values written as e.g. 26.15 land in the 26.15 cell
    // despite binary representation sitting just below the boundary.
    auto scaled = static_cast<std::int64_t>(std::floor(std::abs(coord) * 100.0 + 1e-9));
    auto integer_part = scaled / 100;
    auto decimals = scaled % 100;
    std::string s(4, '0');
    s[0] = static_cast<char>('0' + (integer_part / 10) % 10);
    s[1] = static_cast<char>('0' + integer_part % 10);
    s[2] = static_cast<char>('0' + decimals / 10);
    s[3] = static_cast<char>('0' + decimals % 10);
    return QuantizedDigits::from_string(s);
}

/// Grow a 4-digit seed into a permutation of 1..6: keep first occurrences of
/// digits 1..6, then append the missing digits above the retained maximum in
/// ascending order, then the missing digits below it.
inline cipher::PermutationKey complete_key(const QuantizedDigits& seed) {
    std::array<std::uint8_t, 6> out{};
    std::size_t n = 0;
    std::array<bool, 7> used{};
    std::uint8_t max_digit = 0;
    for (std::size_t i = 0; i < 4; ++i) {
        auto d = static_cast<std::uint8_t>(seed[i] - '0');
        if (d < 1 || d > 6 || used[d]) continue;
        used[d] = true;
        out[n++] = d;
        max_digit = std::max(max_digit, d);
    }
    if (n == 0) return cipher::PermutationKey::from_int(123456);
    for (std::uint8_t d = max_digit + 1; d <= 6; ++d)
        if (!used[d]) out[n++] = d;
    for (std::uint8_t d = 1; d < max_digit; ++d)
        if (!used[d]) out[n++] = d;
    return cipher::PermutationKey(out);
}

struct KeyPair {
    cipher::PermutationKey k1;
    cipher::PermutationKey k2;
    bool operator==(const KeyPair&) const = default;
};

inline KeyPair derive_keys(const GeoFix& fix) {
    return KeyPair{complete_key(quantize_digits(fix.latitude_deg)),
                   complete_key(quantize_digits(fix.longitude_deg))};
}

}  // namespace geolock::geo
