#pragma once

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include <algorithm>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "geolock/analysis.hpp"
#include "geolock/error.hpp"
#include "geolock/geosim.hpp"
#include "geolock/lockscreen.hpp"
#include "geolock/store.hpp"

namespace geolock::cli {

/// Advisory whole-vault lock held for the duration of a mutating command.
class FileLock {
public:
    explicit FileLock(const std::string& vault_path) {
        auto lock_path = vault_path + ".lock";
        fd_ = ::open(lock_path.c_str(), O_CREAT | O_RDWR, 0644);
        if (fd_ < 0) fail(Errc::StorageUnavailable, "cannot create lock file " + lock_path);
        if (::flock(fd_, LOCK_EX) != 0) {
            ::close(fd_);
            fail(Errc::StorageUnavailable, "cannot lock " + lock_path);
        }
    }
    ~FileLock() {
        if (fd_ >= 0) ::close(fd_);  // closing releases the flock
    }
    FileLock(const FileLock&) = delete;
    FileLock& operator=(const FileLock&) = delete;

private:
    int fd_ = -1;
};

inline lock::GeoFence parse_fence(const std::string& flag) {
    auto fields = util::split(flag, ',');
    if (fields.size() != 4) fail(Errc::FenceInvalid, "fence must be latmin,latmax,lonmin,lonmax");
    double v[4];
    for (int i = 0; i < 4; ++i) {
        auto d = util::parse_double(fields[static_cast<std::size_t>(i)]);
        if (!d) fail(Errc::FenceInvalid, "bad fence number \"" + fields[static_cast<std::size_t>(i)] + "\"");
        v[i] = *d;
    }
    return lock::GeoFence(v[0], v[1], v[2], v[3]);
}

inline std::pair<double, double> parse_range(const std::string& flag, const char* name) {
    auto fields = util::split(flag, ':');
    std::optional<double> a, b;
    if (fields.size() == 2) {
        a = util::parse_double(fields[0]);
        b = util::parse_double(fields[1]);
    }
    if (!a || !b) fail(Errc::GridInvalid, std::string(name) + " must be min:max");
    return {*a, *b};
}

inline lock::Salt parse_salt_hex(const std::string& flag) {
    auto bytes = util::from_hex(flag);
    if (!bytes || bytes->size() != lock::kSaltLen)
        fail(Errc::SaltInvalid, "salt-hex must be " + std::to_string(2 * lock::kSaltLen) + " hex digits");
    lock::Salt salt{};
    std::copy(bytes->begin(), bytes->end(), salt.begin());
    return salt;
}

/// Resolve the pattern attempt for a gated command: the flag if given,
/// otherwise one prompted line. EOF yields an empty attempt, which cannot
/// match any enrolled pattern.
inline std::vector<int> pattern_attempt(const CLI::Option* flag, const std::string& value, std::istream& in,
                                        std::ostream& err) {
    if (flag->count() > 0) return lock::parse_attempt(value);
    err << "pattern: " << std::flush;
    std::string line;
    if (!std::getline(in, line)) return {};
    return lock::parse_attempt(line);
}

/// Unlock gate shared by get/find: wrong pattern and undecided rotation both
/// deny plaintext, under distinct error names.
inline void require_plaintext_access(const lock::LockMeta& meta, const std::vector<int>& attempt) {
    auto session = lock::verify_pattern(meta, attempt);
    if (!session.unlocked) fail(Errc::PatternMismatch, "pattern rejected");
    if (lock::view_policy(session, lock::Request::ReadPlaintext) != lock::Policy::Allow)
        fail(Errc::RotationPending, "decide the pending rotation before reading plaintext");
}

inline const char* yes_no(bool b) { return b ? "yes" : "no"; }

inline int run(const std::vector<std::string>& args, std::istream& in, std::ostream& out, std::ostream& err) {
    CLI::App app{"location-keyed record vault with pattern lock"};
    app.name("geolock");
    app.fallthrough();
    app.require_subcommand(1);

    std::string vault_path = "geolock.vault";
    app.add_option("--vault", vault_path, "vault file path")->capture_default_str();

    // init
    auto* init = app.add_subcommand("init", "create a vault: enroll pattern and fence");
    std::string init_pattern, init_fence, init_salt_hex;
    init->add_option("--pattern", init_pattern, "unlock pattern, dash-separated cells")->required();
    init->add_option("--fence", init_fence, "geofence latmin,latmax,lonmin,lonmax")->required();
    auto* init_salt_opt = init->add_option("--salt-hex", init_salt_hex, "fixed enrollment salt (testing)");

    // locate
    auto* locate = app.add_subcommand("locate", "record the device's location fix");
    double locate_lat = 0, locate_lon = 0;
    locate->add_option("--lat", locate_lat, "latitude in degrees")->required();
    locate->add_option("--lon", locate_lon, "longitude in degrees")->required();

    // trace
    auto* trace = app.add_subcommand("trace", "replay a location trace CSV (t,lat,lon)");
    std::string trace_file;
    bool step_through = false;
    trace->add_option("--file", trace_file, "trace CSV path")->required();
    trace->add_flag("--step-through", step_through, "print per-sample state");

    // store
    auto* store_cmd = app.add_subcommand("store", "encrypt and store a message at the current fix");
    std::string store_text;
    store_cmd->add_option("--text", store_text, "message text")->required();

    // get
    auto* get = app.add_subcommand("get", "read a message back (pattern-gated)");
    int get_id = 0;
    std::string get_pattern;
    get->add_option("--id", get_id, "message handle")->required();
    auto* get_pattern_opt = get->add_option("--pattern", get_pattern, "unlock pattern");

    // find
    auto* find = app.add_subcommand("find", "search messages for a substring (pattern-gated)");
    std::string find_term, find_pattern;
    find->add_option("--term", find_term, "search term")->required();
    auto* find_pattern_opt = find->add_option("--pattern", find_pattern, "unlock pattern");

    // list
    app.add_subcommand("list", "print raw stored records (the intruder view)");

    // status
    app.add_subcommand("status", "print vault occupancy and lock state");

    // rotate
    auto* rotate = app.add_subcommand("rotate", "decide a pending pattern rotation");
    std::string rotate_pattern, rotate_fence;
    bool rotate_accept = false, rotate_skip = false;
    auto* rotate_pattern_opt = rotate->add_option("--pattern", rotate_pattern, "current pattern");
    auto* accept_flag = rotate->add_flag("--accept", rotate_accept, "adopt the proposed pattern");
    rotate->add_flag("--skip", rotate_skip, "keep the old pattern")->excludes(accept_flag);
    auto* rotate_fence_opt = rotate->add_option("--fence", rotate_fence, "replacement fence on accept");

    // audit
    auto* audit_cmd = app.add_subcommand("audit", "security audits of the stored data");
    audit_cmd->require_subcommand(1);
    audit_cmd->fallthrough();
    auto* leak = audit_cmd->add_subcommand("leak", "decrypt everything from stored headers alone");
    bool leak_redact = false;
    leak->add_flag("--redact-keys", leak_redact, "zero the header key fields first (control case)");
    std::string lat_range, lon_range;
    double grid_step = 0.01;
    auto* census = audit_cmd->add_subcommand("census", "count distinct key pairs over a grid");
    census->add_option("--lat-range", lat_range, "latitude range min:max")->required();
    census->add_option("--lon-range", lon_range, "longitude range min:max")->required();
    census->add_option("--step", grid_step, "grid step in degrees")->capture_default_str();
    auto* brute = audit_cmd->add_subcommand("brute", "grid brute force of one pair, keys withheld");
    int brute_id = 0;
    bool brute_redact = false;
    auto* brute_id_opt = brute->add_option("--id", brute_id, "part-1 address of the pair (default: highest)");
    brute->add_option("--lat-range", lat_range, "latitude range min:max")->required();
    brute->add_option("--lon-range", lon_range, "longitude range min:max")->required();
    brute->add_option("--step", grid_step, "grid step in degrees")->capture_default_str();
    brute->add_flag("--redact-keys", brute_redact, "accepted for symmetry; brute never reads the keys");

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::Success& e) {
        app.exit(e, out, err);
        return 0;
    } catch (const CLI::ParseError& e) {
        app.exit(e, out, err);
        return 2;
    }

    try {
        if (init->parsed()) {
            FileLock guard(vault_path);
            auto pattern = lock::Pattern::parse(init_pattern);
            auto fence = parse_fence(init_fence);
            auto meta = init_salt_opt->count() ? lock::enroll(pattern, fence, parse_salt_hex(init_salt_hex))
                                               : lock::enroll(pattern, fence);
            store::Vault::create(vault_path, std::move(meta));
            return 0;
        }
        if (locate->parsed()) {
            FileLock guard(vault_path);
            auto v = store::Vault::open(vault_path);
            geo::GeoFix fix(locate_lat, locate_lon);
            if (v.device_fix()) v.set_meta(lock::observe_fix(v.meta(), *v.device_fix(), fix));
            v.set_device_fix(fix);
            v.save();
            out << "pending=" << yes_no(v.meta().pending_rotation) << '\n';
            return 0;
        }
        if (trace->parsed()) {
            FileLock guard(vault_path);
            auto v = store::Vault::open(vault_path);
            auto script = sim::load_trace(trace_file);
            for (const auto& sample : script.samples) {
                if (v.device_fix()) v.set_meta(lock::observe_fix(v.meta(), *v.device_fix(), sample.fix));
                v.set_device_fix(sample.fix);
                if (step_through)
                    out << "t=" << util::format_double(sample.t) << " inside=" << yes_no(v.meta().fence.contains(sample.fix))
                        << " pending=" << yes_no(v.meta().pending_rotation) << '\n';
            }
            v.save();
            out << "pending=" << yes_no(v.meta().pending_rotation) << '\n';
            return 0;
        }
        if (store_cmd->parsed()) {
            FileLock guard(vault_path);
            auto v = store::Vault::open(vault_path);
            if (!v.device_fix()) fail(Errc::NoLocationFix, "no location fix recorded; run locate first");
            int before = v.pairs_allocated();
            auto handle = v.put_message(store_text, *v.device_fix());
            out << "id=" << handle.id << " pairs=" << (v.pairs_allocated() - before) << '\n';
            return 0;
        }
        if (get->parsed()) {
            auto v = store::Vault::open(vault_path);
            require_plaintext_access(v.meta(), pattern_attempt(get_pattern_opt, get_pattern, in, err));
            out << v.get_message(store::MessageHandle{get_id}) << '\n';
            return 0;
        }
        if (find->parsed()) {
            auto v = store::Vault::open(vault_path);
            require_plaintext_access(v.meta(), pattern_attempt(find_pattern_opt, find_pattern, in, err));
            for (const auto& [handle, message] : v.find_messages(find_term)) out << "MSG " << handle.id << ' ' << message << '\n';
            return 0;
        }
        if (app.get_subcommand("list")->parsed()) {
            auto v = store::Vault::open(vault_path);
            for (const auto& [addr, value] : v.list_records()) out << value << '\n';
            return 0;
        }
        if (app.get_subcommand("status")->parsed()) {
            auto v = store::Vault::open(vault_path);
            out << "pairs=" << v.pairs_allocated() << " locked=yes pending=" << yes_no(v.meta().pending_rotation) << '\n';
            return 0;
        }
        if (rotate->parsed()) {
            if (rotate_accept == rotate_skip) {
                err << "ERROR: rotate requires exactly one of --accept or --skip\n";
                return 2;
            }
            FileLock guard(vault_path);
            auto v = store::Vault::open(vault_path);
            auto attempt = pattern_attempt(rotate_pattern_opt, rotate_pattern, in, err);
            auto fence = rotate_fence_opt->count() ? parse_fence(rotate_fence) : v.meta().fence;
            auto result = lock::apply_rotation(v.meta(), attempt, rotate_accept, fence);
            v.set_meta(result.meta);
            v.save();
            if (result.accepted)
                out << "pattern=" << result.new_pattern->to_string() << '\n';
            else
                out << "pattern=unchanged\n";
            return 0;
        }
        if (leak->parsed()) {
            auto v = store::Vault::open(vault_path);
            store::RecordMap records = v.records();
            if (leak_redact)
                for (auto& [addr, value] : records) value = audit::redact_keys(value);
            auto recovered = audit::leak_decrypt_all(records);
            for (const auto& [handle, message] : recovered) out << "MSG " << handle.id << ' ' << message << '\n';
            out << "RECOVERED " << recovered.size() << '\n';
            return 0;
        }
        if (census->parsed() || brute->parsed()) {
            auto [lat_min, lat_max] = parse_range(lat_range, "lat-range");
            auto [lon_min, lon_max] = parse_range(lon_range, "lon-range");
            audit::GridSpec grid(lat_min, lat_max, lon_min, lon_max, grid_step);
            if (census->parsed()) {
                audit::emit_census(out, audit::keyspace_census(grid));
                return 0;
            }
            auto v = store::Vault::open(vault_path);
            int a1 = brute_id;
            if (brute_id_opt->count() == 0) {
                if (v.records().empty()) fail(Errc::AddressNotFound, "vault holds no pairs");
                a1 = v.records().rbegin()->first;
            }
            store::pair_at(v.records(), a1);  // structural validation and a clear error if absent
            const auto& raw1 = v.records().at(a1);
            int a2 = codec::decode_header(raw1).first.link_field / 2;
            auto pair = audit::RedactedPair::from_records(a1, audit::redact_keys(raw1), a2,
                                                          audit::redact_keys(v.records().at(a2)));
            audit::emit_candidates(out, audit::brute_force_pair(pair, grid));
            return 0;
        }
    } catch (const Error& e) {
        err << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        err << "InternalError " << e.what() << '\n';
        return 1;
    }
    return 2;
}

}  // namespace geolock::cli
