#pragma once

#include <cstdio>
#include <string>
#include <string_view>
#include <utility>

#include "geolock/cipher.hpp"
#include "geolock/error.hpp"
#include "geolock/geokey.hpp"
#include "geolock/util.hpp"

namespace geolock::codec {

inline constexpr std::size_t kMaxChunkLen = 144;  // chunk + ' ' + 3-digit pointer stays within a 150-char record value
inline constexpr int kMaxAddress = 999;
inline constexpr std::size_t kHeaderLen = 11;     // serialized header before the '*' delimiter

/// Append the continuation pointer: chunk + ' ' + decimal address, 0 marks
/// the final chunk.
inline std::string attach_pointer(std::string_view chunk, int next_address) {
    if (chunk.empty()) fail(Errc::EmptyMessage, "chunk is empty");
    if (chunk.size() > kMaxChunkLen)
        fail(Errc::ChunkTooLong, "chunk length " + std::to_string(chunk.size()) + " exceeds " + std::to_string(kMaxChunkLen));
    if (!util::is_admissible_text(chunk)) fail(Errc::AlphabetViolation, "chunk contains control or non-printable characters");
    if (next_address < 0 || next_address > kMaxAddress)
        fail(Errc::AddressOutOfRange, "pointer " + std::to_string(next_address) + " outside 0..999");
    return std::string(chunk) + ' ' + std::to_string(next_address);
}

/// Split at the last space; the tail must be 1..3 decimal digits.
inline std::pair<std::string, int> detach_pointer(std::string_view text) {
    auto pos = text.rfind(' ');
    if (pos == std::string_view::npos) fail(Errc::BadPointerSuffix, "no pointer suffix present");
    auto tail = text.substr(pos + 1);
    if (tail.empty() || tail.size() > 3) fail(Errc::BadPointerSuffix, "pointer suffix must be 1..3 digits");
    int addr = 0;
    for (char c : tail) {
        if (c < '0' || c > '9') fail(Errc::BadPointerSuffix, "pointer suffix is not decimal");
        addr = addr * 10 + (c - '0');
    }
    return {std::string(text.substr(0, pos)), addr};
}

/// Perfect out-shuffle: interleave the first half (rounded up) with the
/// second half.
inline std::string scramble(std::string_view text) {
    std::size_t n = text.size();
    std::size_t h = (n + 1) / 2;
    std::string out;
    out.reserve(n);
    for (std::size_t i = 0; i < h; ++i) {
        out.push_back(text[i]);
        if (h + i < n) out.push_back(text[h + i]);
    }
    return out;
}

inline std::string unscramble(std::string_view text) {
    std::size_t n = text.size();
    std::string first, second;
    first.reserve((n + 1) / 2);
    second.reserve(n / 2);
    for (std::size_t i = 0; i < n; ++i) (i % 2 == 0 ? first : second).push_back(text[i]);
    return first + second;
}

/// Tail-biased split: the second part takes 6 * floor(n/12) characters so it
/// is whole blocks whenever n >= 12; below that, floor(n/2).
inline std::pair<std::string, std::string> split_halves(std::string_view text) {
    std::size_t n = text.size();
    if (n < 3) fail(Errc::MessageTooShort, "cannot split " + std::to_string(n) + " characters");
    std::size_t second_len = 6 * (n / 12);
    if (second_len == 0) second_len = n / 2;
    return {std::string(text.substr(0, n - second_len)), std::string(text.substr(n - second_len))};
}

/// Case-insensitive alphabet index of the first character; 0 for non-letters.
inline int first_char_code(std::string_view text) {
    if (text.empty()) fail(Errc::EmptyMessage, "no first character");
    char c = text.front();
    if (c >= 'a' && c <= 'z') return c - 'a' + 1;
    if (c >= 'A' && c <= 'Z') return c - 'A' + 1;
    return 0;
}

struct RecordHeader {
    int first_char_code;             // 0..26
    int link_field;                  // 0..999
    cipher::PermutationKey inverse_key;

    bool operator==(const RecordHeader&) const = default;
};

/// 12 characters: 2-digit code, 3-digit link, 6 key digits, '*'.
inline std::string encode_header(const RecordHeader& h) {
    if (h.first_char_code < 0 || h.first_char_code > 26)
        fail(Errc::FieldOutOfRange, "first-char code " + std::to_string(h.first_char_code) + " outside 0..26");
    if (h.link_field < 0 || h.link_field > kMaxAddress)
        fail(Errc::FieldOutOfRange, "link field " + std::to_string(h.link_field) + " outside 0..999");
    char buf[32];
    std::snprintf(buf, sizeof buf, "%02d%03d%s*", h.first_char_code, h.link_field, h.inverse_key.to_string().c_str());
    return std::string(buf, 12);
}

inline std::pair<RecordHeader, std::string> decode_header(std::string_view value) {
    if (value.size() < kHeaderLen + 1) fail(Errc::BadHeader, "value shorter than the 12-character header");
    if (value[kHeaderLen] != '*') fail(Errc::BadHeader, "'*' delimiter missing at position 12");
    for (std::size_t i = 0; i < kHeaderLen; ++i)
        if (value[i] < '0' || value[i] > '9') fail(Errc::BadHeader, "non-digit in fixed header field");
    int code = (value[0] - '0') * 10 + (value[1] - '0');
    if (code > 26) fail(Errc::BadHeader, "first-char code " + std::to_string(code) + " outside 0..26");
    int link = (value[2] - '0') * 100 + (value[3] - '0') * 10 + (value[4] - '0');
    auto key = cipher::PermutationKey::from_string(value.substr(5, 6));
    return {RecordHeader{code, link, key}, std::string(value.substr(kHeaderLen + 1))};
}

struct StoredRecord {
    int address;
    RecordHeader header;
    std::string ciphertext;

    std::string serialize() const { return encode_header(header) + ciphertext; }
    bool operator==(const StoredRecord&) const = default;
};

/// The two records holding one chunk. Each part stores the *other* half's
/// ciphertext beside its own inverse key, so reading back requires the
/// exchange step.
struct RecordPair {
    StoredRecord part1;  // carries inv(K1) and payload EA2; link = 2 * part2.address
    StoredRecord part2;  // carries inv(K2) and payload EA1; link = own address

    bool operator==(const RecordPair&) const = default;
};

/// Full per-chunk encryption pipeline: scramble, split, derive keys from the
/// fix, encrypt each half, cross-store under the two headers.
inline RecordPair assemble_pair(std::string_view chunk_with_pointer, const geo::GeoFix& fix, int a1, int a2) {
    if (a1 < 1 || a1 > kMaxAddress || a2 < 1 || a2 > kMaxAddress || a1 == a2)
        fail(Errc::AddressOutOfRange, "addresses must be distinct and within 1..999");
    if (a2 > 499) fail(Errc::AddressOutOfRange, "part-2 address " + std::to_string(a2) + " exceeds 499 (2x link needs 3 digits)");
    if (!util::is_admissible_text(chunk_with_pointer)) fail(Errc::AlphabetViolation, "chunk contains control or non-printable characters");

    auto [first, second] = split_halves(scramble(chunk_with_pointer));
    auto keys = geo::derive_keys(fix);
    auto encrypted_first = cipher::encrypt(first, keys.k1);
    auto encrypted_second = cipher::encrypt(second, keys.k2);
    int code = first_char_code(chunk_with_pointer);

    return RecordPair{
        StoredRecord{a1, RecordHeader{code, 2 * a2, cipher::invert_key(keys.k1)}, encrypted_second},
        StoredRecord{a2, RecordHeader{code, a2, cipher::invert_key(keys.k2)}, encrypted_first},
    };
}

/// Exact inverse of assemble_pair: exchange payloads, decrypt, concatenate,
/// unscramble, detach the pointer.
inline std::pair<std::string, int> disassemble_pair(const RecordPair& pair) {
    if (pair.part1.header.link_field != 2 * pair.part2.address)
        fail(Errc::LinkMismatch, "part-1 link " + std::to_string(pair.part1.header.link_field) + " != 2 * " +
                                     std::to_string(pair.part2.address));
    if (pair.part2.header.link_field != pair.part2.address)
        fail(Errc::LinkMismatch, "part-2 link " + std::to_string(pair.part2.header.link_field) + " != address " +
                                     std::to_string(pair.part2.address));
    auto first = cipher::decrypt(pair.part2.ciphertext, pair.part1.header.inverse_key);
    auto second = cipher::decrypt(pair.part1.ciphertext, pair.part2.header.inverse_key);
    return detach_pointer(unscramble(first + second));
}

}  // namespace geolock::codec
