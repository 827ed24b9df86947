#pragma once

#include <map>
#include <string>
#include <vector>

#include "kcmlab/common.hpp"

namespace kcm {

/// Flat key-value run configuration. Files hold one `key = value` per line
/// ('#' comments); command-line flags override file values.
struct RunConfig {
    std::map<std::string, std::string> values;

    void set(const std::string& key, const std::string& value) { values[key] = value; }
    bool has(const std::string& key) const { return values.count(key) > 0; }
    std::string get(const std::string& key, const std::string& fallback = "") const;

    static RunConfig from_file(const std::string& path);
    /// Canonical text form: sorted keys, one per line.
    std::string canonical_text() const;
    /// FNV-1a hash of the canonical text, hex-encoded.
    std::string hash() const;
};

/// 12-significant-digit representation used in every CSV.
std::string format_number(double v);

/// CSV writer: a `# config_hash=...` comment line, a mandatory header row,
/// then the data rows. Values are joined with ','.
void write_csv(const std::string& path, const std::string& config_hash,
               const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows);

/// Provenance sidecar: config, hash, timings and tool version as JSON.
void write_provenance(const std::string& path, const RunConfig& config,
                      const std::map<std::string, double>& timings_s);

std::string kcmlab_version();

} // namespace kcm
