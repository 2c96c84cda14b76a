#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>

#include "geolock/error.hpp"

namespace geolock::cipher {

inline constexpr std::size_t kBlockSize = 6;
inline constexpr char kPadChar = 'z';

/// A 6-digit permutation of 1..6. Position l of every output block is fed
/// from input position digits[l] of the same block.
class PermutationKey {
public:
    explicit PermutationKey(const std::array<std::uint8_t, kBlockSize>& digits) : digits_(digits) {
        validate();
    }

    static PermutationKey from_string(std::string_view s) {
        if (s.size() != kBlockSize) fail(Errc::InvalidKey, "key must be 6 digits, got \"" + std::string(s) + "\"");
        std::array<std::uint8_t, kBlockSize> d{};
        for (std::size_t i = 0; i < kBlockSize; ++i) {
            if (s[i] < '1' || s[i] > '6') fail(Errc::InvalidKey, "key digit out of 1..6 in \"" + std::string(s) + "\"");
            d[i] = static_cast<std::uint8_t>(s[i] - '0');
        }
        return PermutationKey(d);
    }

    // Convenience for literal keys such as 261534.
    static PermutationKey from_int(int value) {
        if (value < 111111 || value > 666666) fail(Errc::InvalidKey, "key literal out of range");
        std::array<std::uint8_t, kBlockSize> d{};
        for (int i = static_cast<int>(kBlockSize) - 1; i >= 0; --i) {
            d[static_cast<std::size_t>(i)] = static_cast<std::uint8_t>(value % 10);
            value /= 10;
        }
        return PermutationKey(d);
    }

    std::uint8_t operator[](std::size_t i) const { return digits_[i]; }
    const std::array<std::uint8_t, kBlockSize>& digits() const { return digits_; }

    int to_int() const {
        int v = 0;
        for (auto d : digits_) v = v * 10 + d;
        return v;
    }

    std::string to_string() const {
        std::string s(kBlockSize, '0');
        for (std::size_t i = 0; i < kBlockSize; ++i) s[i] = static_cast<char>('0' + digits_[i]);
        return s;
    }

    bool operator==(const PermutationKey& other) const = default;

private:
    void validate() const {
        std::array<bool, kBlockSize + 1> seen{};
        for (auto d : digits_) {
            if (d < 1 || d > kBlockSize || seen[d]) fail(Errc::InvalidKey, "digits are not a permutation of 1..6");
            seen[d] = true;
        }
    }

    std::array<std::uint8_t, kBlockSize> digits_;
};

/// One transposition pass: output[i*6 + l] = input[i*6 + key[l] - 1].
inline std::string transpose_once(std::string_view text, const PermutationKey& key) {
    if (text.empty() || text.size() % kBlockSize != 0)
        fail(Errc::LengthNotBlockMultiple, "text length " + std::to_string(text.size()) + " is not a positive multiple of 6");
    std::string out(text.size(), '\0');
    for (std::size_t block = 0; block < text.size(); block += kBlockSize)
        for (std::size_t l = 0; l < kBlockSize; ++l)
            out[block + l] = text[block + key[l] - 1];
    return out;
}

/// Inverse permutation: inv[j] is the position l with key[l] == j.
inline PermutationKey invert_key(const PermutationKey& key) {
    std::array<std::uint8_t, kBlockSize> inv{};
    for (std::size_t l = 0; l < kBlockSize; ++l) inv[key[l] - 1] = static_cast<std::uint8_t>(l + 1);
    return PermutationKey(inv);
}

/// Pad with 'z' to a block boundary, then transpose twice with the same key.
/// Plaintext must not end in 'z' or the decrypt-side pad strip would eat it.
inline std::string encrypt(std::string_view text, const PermutationKey& key) {
    if (text.empty()) fail(Errc::EmptyInput, "cannot encrypt empty text");
    if (text.back() == kPadChar) fail(Errc::EndsWithPadChar, "plaintext must not end with the pad character 'z'");
    std::string padded(text);
    padded.resize((text.size() + kBlockSize - 1) / kBlockSize * kBlockSize, kPadChar);
    return transpose_once(transpose_once(padded, key), key);
}

/// Transpose twice with the inverse key, then strip trailing pad characters.
inline std::string decrypt(std::string_view cipher_text, const PermutationKey& inverse_key) {
    std::string out = transpose_once(transpose_once(cipher_text, inverse_key), inverse_key);
    while (!out.empty() && out.back() == kPadChar) out.pop_back();
    return out;
}

}  // namespace geolock::cipher
