// checkpoint.hpp
// Line-based key=value records used for checkpoints and text reports.
// Floating state is stored as C99 hex floats so a record round-trips
// bit-exactly and does not depend on host endianness.

#pragma once

#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "cpnt/core.hpp"

namespace cpnt {

inline constexpr int kCheckpointFormatVersion = 1;

inline std::string hexfloat(long double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%La", v);
    return buf;
}

inline long double parse_hexfloat(const std::string& s) {
    char* end = nullptr;
    const long double v = std::strtold(s.c_str(), &end);
    if (end == s.c_str() || *end != '\0') throw ParseError("bad floating value '" + s + "'");
    return v;
}

// Decimal rendering used in human-readable reports.
inline std::string decimal(long double v, int digits = 17) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*Lg", digits, v);
    return buf;
}

class KeyValueRecord {
public:
    void put(const std::string& key, const std::string& value) { items_.emplace_back(key, value); }
    void put_u64(const std::string& key, std::uint64_t v) { put(key, std::to_string(v)); }
    void put_i64(const std::string& key, std::int64_t v) { put(key, std::to_string(v)); }
    void put_float(const std::string& key, long double v) { put(key, hexfloat(v)); }

    bool has(const std::string& key) const {
        for (const auto& [k, v] : items_)
            if (k == key) return true;
        return false;
    }

    const std::string& get(const std::string& key) const {
        for (const auto& [k, v] : items_)
            if (k == key) return v;
        throw ParseError("record: missing key '" + key + "'");
    }

    std::vector<std::string> get_all(const std::string& key) const {
        std::vector<std::string> out;
        for (const auto& [k, v] : items_)
            if (k == key) out.push_back(v);
        return out;
    }

    std::uint64_t get_u64(const std::string& key) const {
        const auto& s = get(key);
        try {
            std::size_t pos = 0;
            const auto v = std::stoull(s, &pos);
            if (pos != s.size()) throw ParseError("");
            return v;
        } catch (...) {
            throw ParseError("record: key '" + key + "' is not an unsigned integer");
        }
    }

    std::int64_t get_i64(const std::string& key) const {
        const auto& s = get(key);
        try {
            std::size_t pos = 0;
            const auto v = std::stoll(s, &pos);
            if (pos != s.size()) throw ParseError("");
            return v;
        } catch (...) {
            throw ParseError("record: key '" + key + "' is not an integer");
        }
    }

    long double get_float(const std::string& key) const { return parse_hexfloat(get(key)); }

    const std::vector<std::pair<std::string, std::string>>& items() const { return items_; }

    std::string to_string() const {
        std::string out;
        for (const auto& [k, v] : items_) out += k + "=" + v + "\n";
        return out;
    }

    static KeyValueRecord parse(std::istream& in) {
        KeyValueRecord r;
        std::string line;
        long n = 0;
        while (std::getline(in, line)) {
            ++n;
            if (line.empty() || line[0] == '#') continue;
            const auto eq = line.find('=');
            if (eq == std::string::npos || eq == 0) throw ParseError("record: expected key=value", n);
            r.put(line.substr(0, eq), line.substr(eq + 1));
        }
        return r;
    }

    // Written to a temporary file, then renamed into place.
    void write_atomic(const std::filesystem::path& path) const {
        const auto tmp = path.string() + ".tmp";
        {
            std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
            if (!out) throw std::runtime_error("cannot write " + tmp);
            out << to_string();
            if (!out) throw std::runtime_error("write failed: " + tmp);
        }
        std::filesystem::rename(tmp, path);
    }

    static KeyValueRecord read(const std::filesystem::path& path) {
        std::ifstream in(path, std::ios::binary);
        if (!in) throw ParseError("cannot open " + path.string());
        return parse(in);
    }

private:
    std::vector<std::pair<std::string, std::string>> items_;
};

// Checkpoint envelope: kind tag, version, segment boundary, config hash.
inline KeyValueRecord checkpoint_header(const std::string& kind, std::uint64_t segment_hi, std::uint64_t config_hash) {
    KeyValueRecord r;
    r.put("format", "cpnt-checkpoint");
    r.put("format_version", std::to_string(kCheckpointFormatVersion));
    r.put("kind", kind);
    r.put_u64("segment_hi", segment_hi);
    r.put_u64("config_hash", config_hash);
    return r;
}

inline void check_checkpoint(const KeyValueRecord& r, const std::string& kind, std::uint64_t config_hash) {
    if (r.get("format") != "cpnt-checkpoint") throw ParseError("not a checkpoint file");
    if (r.get_u64("format_version") != static_cast<std::uint64_t>(kCheckpointFormatVersion))
        throw ParseError("unsupported checkpoint format_version " + r.get("format_version"));
    if (r.get("kind") != kind) throw ParseError("checkpoint kind mismatch: " + r.get("kind"));
    if (r.get_u64("config_hash") != config_hash) throw ValidationError("checkpoint belongs to a different configuration");
}

}  // namespace cpnt
