#pragma once

#include <string>

#include "ecsrep/analytic.hpp"
#include "ecsrep/chain_sim.hpp"
#include "ecsrep/optimizer.hpp"

namespace ecsrep {

struct OutputConfig {
    std::string directory = ".";
    bool json_summary = false;
};

// One flat config document with sections [link], [chain], [search], [output].
// Keys mirror the field names; units are km and seconds throughout.
struct RunConfig {
    LinkParams link;
    ChainConfig chain;
    SearchSpec search;
    OutputConfig output;

    // Copies the shared link parameters into the chain and search blocks and
    // re-validates every bound strictly (efficiencies must be positive here,
    // the drive must respect the truncation policy's |alpha|^2 <= 4 cap, and
    // the tapped fraction must stay below 1/2).
    void finalize();
};

// Parses the document; `origin` names the source in error messages. Rejects
// unknown sections/keys, duplicate keys, and malformed values.
RunConfig parse_config_text(const std::string& text, const std::string& origin);
RunConfig load_config_file(const std::string& path);

} // namespace ecsrep
