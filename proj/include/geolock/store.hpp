#pragma once

#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "geolock/codec.hpp"
#include "geolock/error.hpp"
#include "geolock/geokey.hpp"
#include "geolock/lockscreen.hpp"
#include "geolock/util.hpp"

namespace geolock::store {

inline constexpr int kMaxPairs = 498;           // 999 addresses, one part-1 + one part-2 per pair
inline constexpr int kFirstPart1Address = 502;  // pair k lives at (1000 - k, k)
inline constexpr const char* kMagic = "GEOVAULT v1";

/// Part-1 address of the first chunk of a stored message.
struct MessageHandle {
    int id;
    bool operator==(const MessageHandle&) const = default;
};

inline int part1_address(int pair_index) { return 1000 - pair_index; }

// ---------------------------------------------------------------------------
// META line codec. The lock-screen fields are fixed; the device fix rides
// along as an extra key so that `locate` survives between CLI invocations.

inline std::string format_fix(const geo::GeoFix& fix) {
    return util::format_double(fix.latitude_deg) + "," + util::format_double(fix.longitude_deg);
}

inline std::string format_meta(const lock::LockMeta& meta, const std::optional<geo::GeoFix>& device_fix) {
    std::string line = "META digest=" + util::to_hex(meta.pattern_digest.data(), meta.pattern_digest.size());
    line += " salt=" + util::to_hex(meta.salt.data(), meta.salt.size());
    line += " fence=" + util::format_double(meta.fence.lat_min) + "," + util::format_double(meta.fence.lat_max) + "," +
            util::format_double(meta.fence.lon_min) + "," + util::format_double(meta.fence.lon_max);
    line += " plen=" + std::to_string(meta.pattern_len);
    line += std::string(" pending=") + (meta.pending_rotation ? "1" : "0");
    if (meta.pending_rotation && meta.proposed_seed)
        line += " seed=" + meta.proposed_seed->lat.str() + "," + meta.proposed_seed->lon.str();
    if (device_fix) line += " fix=" + format_fix(*device_fix);
    return line;
}

inline std::pair<lock::LockMeta, std::optional<geo::GeoFix>> parse_meta(const std::string& line) {
    auto tokens = util::split(line, ' ');
    if (tokens.empty() || tokens[0] != "META") fail(Errc::CorruptVault, "META line missing");
    std::map<std::string, std::string> kv;
    for (std::size_t i = 1; i < tokens.size(); ++i) {
        auto eq = tokens[i].find('=');
        if (eq == std::string::npos || eq == 0) fail(Errc::CorruptVault, "malformed META field \"" + tokens[i] + "\"");
        if (!kv.emplace(tokens[i].substr(0, eq), tokens[i].substr(eq + 1)).second)
            fail(Errc::CorruptVault, "duplicate META field \"" + tokens[i] + "\"");
    }
    for (const char* required : {"digest", "salt", "fence", "plen", "pending"})
        if (!kv.count(required)) fail(Errc::CorruptVault, std::string("META missing field ") + required);

    auto digest_bytes = util::from_hex(kv["digest"]);
    if (!digest_bytes || digest_bytes->size() != 32) fail(Errc::CorruptVault, "META digest must be 64 hex characters");
    auto salt_bytes = util::from_hex(kv["salt"]);
    if (!salt_bytes || salt_bytes->size() != lock::kSaltLen) fail(Errc::CorruptVault, "META salt must be 32 hex characters");

    auto fence_fields = util::split(kv["fence"], ',');
    if (fence_fields.size() != 4) fail(Errc::CorruptVault, "META fence needs 4 comma-separated values");
    std::array<double, 4> fv{};
    for (std::size_t i = 0; i < 4; ++i) {
        auto v = util::parse_double(fence_fields[i]);
        if (!v) fail(Errc::CorruptVault, "META fence value not numeric");
        fv[i] = *v;
    }

    auto plen = util::parse_long(kv["plen"]);
    if (!plen || *plen < static_cast<long>(lock::kMinPatternLen) || *plen > lock::kGridCells)
        fail(Errc::CorruptVault, "META plen outside 4..16");
    if (kv["pending"] != "0" && kv["pending"] != "1") fail(Errc::CorruptVault, "META pending must be 0 or 1");
    bool pending = kv["pending"] == "1";
    if (pending != (kv.count("seed") > 0)) fail(Errc::CorruptVault, "META seed must be present exactly when pending=1");

    try {
        lock::LockMeta meta{.pattern_digest = {}, .salt = {}, .fence = lock::GeoFence(fv[0], fv[1], fv[2], fv[3]),
                            .pattern_len = static_cast<std::size_t>(*plen), .pending_rotation = pending,
                            .proposed_seed = std::nullopt};
        std::copy(digest_bytes->begin(), digest_bytes->end(), meta.pattern_digest.begin());
        std::copy(salt_bytes->begin(), salt_bytes->end(), meta.salt.begin());
        if (pending) {
            auto seed_fields = util::split(kv["seed"], ',');
            if (seed_fields.size() != 2) fail(Errc::CorruptVault, "META seed needs two 4-digit groups");
            meta.proposed_seed = lock::SeedPair{geo::QuantizedDigits::from_string(seed_fields[0]),
                                                geo::QuantizedDigits::from_string(seed_fields[1])};
        }
        std::optional<geo::GeoFix> device_fix;
        if (kv.count("fix")) {
            auto fix_fields = util::split(kv["fix"], ',');
            if (fix_fields.size() != 2) fail(Errc::CorruptVault, "META fix needs lat,lon");
            auto lat = util::parse_double(fix_fields[0]);
            auto lon = util::parse_double(fix_fields[1]);
            if (!lat || !lon) fail(Errc::CorruptVault, "META fix not numeric");
            device_fix = geo::GeoFix(*lat, *lon);
        }
        return {std::move(meta), device_fix};
    } catch (const Error& e) {
        if (e.code() == Errc::CorruptVault) throw;
        fail(Errc::CorruptVault, std::string("META invalid: ") + e.what());
    }
}

// ---------------------------------------------------------------------------
// Record-level helpers shared with the audit side. These operate on the bare
// address -> value mapping and rely on nothing but the stored headers.

using RecordMap = std::map<int, std::string>;

/// Rebuild the RecordPair rooted at a part-1 address using only stored data.
inline codec::RecordPair pair_at(const RecordMap& records, int part1_addr) {
    auto it = records.find(part1_addr);
    if (it == records.end()) fail(Errc::AddressNotFound, "no record at address " + std::to_string(part1_addr));
    auto [header1, ct1] = codec::decode_header(it->second);
    int a2 = header1.link_field / 2;
    auto it2 = records.find(a2);
    if (it2 == records.end()) fail(Errc::BrokenChain, "pair half missing at address " + std::to_string(a2));
    auto [header2, ct2] = codec::decode_header(it2->second);
    return codec::RecordPair{codec::StoredRecord{part1_addr, header1, std::move(ct1)},
                             codec::StoredRecord{a2, header2, std::move(ct2)}};
}

/// Decoded chunk and continuation pointer per part-1 address.
using ChunkMap = std::map<int, std::pair<std::string, int>>;

inline ChunkMap scan_chunks(const RecordMap& records) {
    ChunkMap chunks;
    for (const auto& [addr, value] : records) {
        (void)value;
        if (addr < kFirstPart1Address) continue;
        chunks.emplace(addr, codec::disassemble_pair(pair_at(records, addr)));
    }
    return chunks;
}

/// Message starts: part-1 addresses no other chunk points at, in insertion
/// order (descending address).
inline std::vector<MessageHandle> chain_starts(const ChunkMap& chunks) {
    std::set<int> pointed;
    for (const auto& [addr, entry] : chunks) {
        (void)addr;
        if (entry.second != 0) pointed.insert(entry.second);
    }
    std::vector<MessageHandle> starts;
    for (auto it = chunks.rbegin(); it != chunks.rend(); ++it)
        if (!pointed.count(it->first)) starts.push_back(MessageHandle{it->first});
    return starts;
}

inline std::string follow_chain(const ChunkMap& chunks, MessageHandle handle) {
    if (!chunks.count(handle.id)) fail(Errc::AddressNotFound, "no message at address " + std::to_string(handle.id));
    std::string out;
    std::set<int> visited;
    int addr = handle.id;
    while (true) {
        if (!visited.insert(addr).second) fail(Errc::CycleDetected, "pointer chain revisits address " + std::to_string(addr));
        const auto& [chunk, next] = chunks.at(addr);
        out += chunk;
        if (next == 0) return out;
        if (!chunks.count(next)) fail(Errc::BrokenChain, "pointer to absent address " + std::to_string(next));
        addr = next;
    }
}

// ---------------------------------------------------------------------------

/// Line-oriented persistent vault. Pair k of a message chunk occupies
/// addresses (1000 - k, k); mutations persist via write-to-temp-then-rename.
class Vault {
public:
    static Vault create(const std::string& path, lock::LockMeta meta, bool allow_overwrite = false) {
        if (!allow_overwrite && std::filesystem::exists(path))
            fail(Errc::VaultExists, "vault already exists at " + path);
        Vault v(path, std::move(meta));
        v.save();
        return v;
    }

    static Vault open(const std::string& path) {
        std::ifstream in(path, std::ios::binary);
        if (!in) fail(Errc::StorageUnavailable, "cannot open vault file " + path);
        std::vector<std::string> lines;
        std::string line;
        while (std::getline(in, line)) lines.push_back(line);
        if (in.bad()) fail(Errc::StorageUnavailable, "I/O error reading " + path);
        if (lines.size() < 2 || lines[0] != kMagic) fail(Errc::CorruptVault, "missing GEOVAULT v1 magic line");

        auto [meta, device_fix] = parse_meta(lines[1]);
        Vault v(path, std::move(meta));
        v.device_fix_ = device_fix;
        int last_addr = 0;
        for (std::size_t i = 2; i < lines.size(); ++i) {
            const auto& rec_line = lines[i];
            if (rec_line.rfind("REC ", 0) != 0) fail(Errc::CorruptVault, "unexpected line " + std::to_string(i + 1));
            auto sep = rec_line.find(' ', 4);
            if (sep == std::string::npos) fail(Errc::CorruptVault, "REC line missing value");
            auto addr_token = rec_line.substr(4, sep - 4);
            auto addr = util::parse_long(addr_token);
            if (!addr || *addr < 1 || *addr > codec::kMaxAddress || std::to_string(*addr) != addr_token)
                fail(Errc::CorruptVault, "bad REC address \"" + addr_token + "\"");
            if (*addr <= last_addr) fail(Errc::CorruptVault, "REC addresses must be strictly ascending");
            last_addr = static_cast<int>(*addr);
            v.records_.emplace(last_addr, rec_line.substr(sep + 1));
        }
        v.validate_records();
        return v;
    }

    MessageHandle put_message(std::string_view text, const geo::GeoFix& fix) {
        if (text.empty()) fail(Errc::EmptyMessage, "message is empty");
        if (!util::is_admissible_text(text)) fail(Errc::AlphabetViolation, "message contains control or non-printable characters");
        std::size_t chunk_count = (text.size() + codec::kMaxChunkLen - 1) / codec::kMaxChunkLen;
        if (pairs_allocated_ + static_cast<int>(chunk_count) > kMaxPairs)
            fail(Errc::CapacityExceeded, "vault holds " + std::to_string(pairs_allocated_) + " of " +
                                             std::to_string(kMaxPairs) + " pairs; message needs " + std::to_string(chunk_count));

        RecordMap staged = records_;
        for (std::size_t i = 0; i < chunk_count; ++i) {
            int k = pairs_allocated_ + static_cast<int>(i) + 1;
            auto chunk = text.substr(i * codec::kMaxChunkLen, codec::kMaxChunkLen);
            if (chunk.back() == cipher::kPadChar) fail(Errc::ChunkEndsWithPad, "chunk " + std::to_string(i + 1) + " ends with 'z'");
            int next = (i + 1 < chunk_count) ? part1_address(k + 1) : 0;
            try {
                auto pair = codec::assemble_pair(codec::attach_pointer(chunk, next), fix, part1_address(k), k);
                staged.emplace(pair.part1.address, pair.part1.serialize());
                staged.emplace(pair.part2.address, pair.part2.serialize());
            } catch (const Error& e) {
                if (e.code() == Errc::EndsWithPadChar)
                    fail(Errc::ChunkEndsWithPad, "chunk " + std::to_string(i + 1) + " scrambles to a 'z'-terminated half");
                throw;
            }
        }
        write_file(staged);
        records_ = std::move(staged);
        pairs_allocated_ += static_cast<int>(chunk_count);
        return MessageHandle{part1_address(pairs_allocated_ - static_cast<int>(chunk_count) + 1)};
    }

    std::string get_message(MessageHandle handle) const {
        if (handle.id < kFirstPart1Address || handle.id > codec::kMaxAddress || !records_.count(handle.id))
            fail(Errc::AddressNotFound, "no message at address " + std::to_string(handle.id));
        std::string out;
        std::set<int> visited;
        int addr = handle.id;
        while (true) {
            if (!visited.insert(addr).second) fail(Errc::CycleDetected, "pointer chain revisits address " + std::to_string(addr));
            auto [chunk, next] = codec::disassemble_pair(pair_at(records_, addr));
            out += chunk;
            if (next == 0) return out;
            if (next < kFirstPart1Address || next > codec::kMaxAddress || !records_.count(next))
                fail(Errc::BrokenChain, "pointer to absent address " + std::to_string(next));
            addr = next;
        }
    }

    /// Raw intruder view: stored values in address order, never decrypted.
    std::vector<std::pair<int, std::string>> list_records() const {
        return {records_.begin(), records_.end()};
    }

    std::vector<std::pair<MessageHandle, std::string>> find_messages(std::string_view term) const {
        if (term.empty()) fail(Errc::EmptyQuery, "search term is empty");
        auto chunks = scan_chunks(records_);
        std::vector<std::pair<MessageHandle, std::string>> hits;
        for (auto handle : chain_starts(chunks)) {
            auto message = follow_chain(chunks, handle);
            if (message.find(term) != std::string::npos) hits.emplace_back(handle, std::move(message));
        }
        return hits;
    }

    std::vector<MessageHandle> message_handles() const { return chain_starts(scan_chunks(records_)); }

    int pairs_allocated() const { return pairs_allocated_; }
    const RecordMap& records() const { return records_; }
    const lock::LockMeta& meta() const { return meta_; }
    const std::optional<geo::GeoFix>& device_fix() const { return device_fix_; }
    const std::string& path() const { return path_; }

    void set_meta(lock::LockMeta meta) { meta_ = std::move(meta); }
    void set_device_fix(const geo::GeoFix& fix) { device_fix_ = fix; }

    void save() const { write_file(records_); }

private:
    Vault(std::string path, lock::LockMeta meta) : path_(std::move(path)), meta_(std::move(meta)) {}

    void validate_records() {
        int max_pair = 0;
        for (const auto& [addr, value] : records_) {
            if (addr > kMaxPairs && addr < kFirstPart1Address)
                fail(Errc::CorruptVault, "address " + std::to_string(addr) + " is outside both pair ranges");
            try {
                auto [header, ct] = codec::decode_header(value);
                if (ct.empty() || ct.size() % cipher::kBlockSize != 0)
                    fail(Errc::CorruptVault, "ciphertext length not whole blocks");
                if (!util::is_admissible_text(ct)) fail(Errc::CorruptVault, "non-printable ciphertext");
                if (addr <= kMaxPairs) {
                    max_pair = std::max(max_pair, addr);
                    if (header.link_field != addr) fail(Errc::CorruptVault, "part-2 link mismatch");
                } else if (header.link_field != 2 * (1000 - addr)) {
                    fail(Errc::CorruptVault, "part-1 link mismatch");
                }
            } catch (const Error& e) {
                fail(Errc::CorruptVault, "record " + std::to_string(addr) + ": " + e.detail());
            }
        }
        for (int k = 1; k <= max_pair; ++k) {
            if (!records_.count(k) || !records_.count(part1_address(k)))
                fail(Errc::CorruptVault, "pair " + std::to_string(k) + " is incomplete");
            auto code1 = codec::decode_header(records_.at(part1_address(k))).first.first_char_code;
            auto code2 = codec::decode_header(records_.at(k)).first.first_char_code;
            if (code1 != code2) fail(Errc::CorruptVault, "pair " + std::to_string(k) + " first-char codes disagree");
        }
        for (const auto& [addr, value] : records_) {
            (void)value;
            if (addr >= kFirstPart1Address && !records_.count(1000 - addr))
                fail(Errc::CorruptVault, "pair " + std::to_string(1000 - addr) + " is incomplete");
        }
        pairs_allocated_ = max_pair;
    }

    void write_file(const RecordMap& records) const {
        namespace fs = std::filesystem;
        fs::path target(path_);
        fs::path tmp = target;
        tmp += ".tmp";
        {
            std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
            if (!out) fail(Errc::StorageUnavailable, "cannot write " + tmp.string());
            out << kMagic << '\n';
            out << format_meta(meta_, device_fix_) << '\n';
            for (const auto& [addr, value] : records) out << "REC " << addr << ' ' << value << '\n';
            out.flush();
            if (!out) fail(Errc::StorageUnavailable, "I/O error writing " + tmp.string());
        }
        std::error_code ec;
        fs::rename(tmp, target, ec);
        if (ec) fail(Errc::StorageUnavailable, "cannot replace " + path_ + ": " + ec.message());
    }

    std::string path_;
    lock::LockMeta meta_;
    RecordMap records_;
    std::optional<geo::GeoFix> device_fix_;
    int pairs_allocated_ = 0;
};

}  // namespace geolock::store
