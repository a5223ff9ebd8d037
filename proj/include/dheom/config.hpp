#pragma once

#include <cstdint>
#include <map>
#include <string>

#include "dheom/hierarchy.hpp"
#include "dheom/mc.hpp"
#include "dheom/rydberg.hpp"

namespace dheom {

/// Flat `[section]` + `key = value` text config. `#` and `;` start comments.
/// Unknown sections or keys are rejected at parse time.
struct ConfigFile {
    // section -> key -> raw value, insertion order irrelevant
    std::map<std::string, std::map<std::string, std::string>> sections;

    bool has(const std::string& section, const std::string& key) const;
    const std::string& get(const std::string& section, const std::string& key) const;

    /// Sorted, whitespace-normalized rendering; idempotent under re-parse.
    std::string canonical() const;
    /// FNV-1a 64-bit digest of the canonical form, as lowercase hex.
    std::string hash() const;
};

ConfigFile parse_config_text(const std::string& text, const std::string& name);
ConfigFile parse_config_file(const std::string& path);

Complex parse_complex(const std::string& token); // "re+imj" form

struct BuildOptions {
    std::uint64_t seed = 0;
    bool seed_overridden = false;
    int depth_override = 0; // 0 = honor config
    bool allow_unsound_truncation = false;
    int threads = 1;
};

ProcessSpec process_from(const ConfigFile& cfg, const BuildOptions& opt);
SolverConfig solver_config_from(const ConfigFile& cfg, const BuildOptions& opt);
McConfig mc_config_from(const ConfigFile& cfg, const BuildOptions& opt);
RydbergConfig rydberg_config_from(const ConfigFile& cfg, const BuildOptions& opt);

std::string format_double(double x); // 17 significant digits

} // namespace dheom
