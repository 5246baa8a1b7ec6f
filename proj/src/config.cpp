#include "ecsrep/config.hpp"

#include <cctype>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace ecsrep {

namespace {

std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

[[noreturn]] void fail(const std::string& origin, std::size_t line, const std::string& what) {
    std::ostringstream msg;
    msg << origin << ":" << line << ": " << what;
    throw std::invalid_argument(msg.str());
}

double parse_double(const std::string& origin, std::size_t line, const std::string& key,
                    const std::string& value) {
    const std::string v = trim(value);
    char* end = nullptr;
    const double x = std::strtod(v.c_str(), &end);
    if (v.empty() || end != v.c_str() + v.size())
        fail(origin, line, "key '" + key + "': cannot parse number from '" + value + "'");
    return x;
}

std::uint64_t parse_uint(const std::string& origin, std::size_t line, const std::string& key,
                         const std::string& value) {
    const std::string v = trim(value);
    char* end = nullptr;
    const unsigned long long x = std::strtoull(v.c_str(), &end, 10);
    if (v.empty() || end != v.c_str() + v.size() || v[0] == '-')
        fail(origin, line, "key '" + key + "': cannot parse non-negative integer from '" +
                               value + "'");
    return static_cast<std::uint64_t>(x);
}

bool parse_bool(const std::string& origin, std::size_t line, const std::string& key,
                const std::string& value) {
    const std::string v = trim(value);
    if (v == "true") return true;
    if (v == "false") return false;
    fail(origin, line, "key '" + key + "': expected true or false, got '" + value + "'");
}

} // namespace

void RunConfig::finalize() {
    link.validate();
    if (!(link.eta_d > 0.0 && link.eta_m > 0.0))
        throw std::invalid_argument("config: efficiencies must be positive");
    if (link.alpha_sq > 4.0)
        throw std::invalid_argument(
            "config: |alpha|^2 exceeds 4; the truncation policy caps the drive there");
    if (!(link.tap < 0.5))
        throw std::invalid_argument("config: tapped fraction must stay below 0.5");
    chain.link = link;
    search.link = link;
    if (chain.n_links != 2 && chain.n_links != 4)
        throw std::invalid_argument("config: n_links must be 2 or 4");
    if (chain.n_trials == 0)
        throw std::invalid_argument("config: n_trials must be at least 1");
    search.validate();
}

RunConfig parse_config_text(const std::string& text, const std::string& origin) {
    RunConfig cfg;
    std::istringstream in(text);
    std::string raw, section;
    std::size_t lineno = 0;
    std::vector<std::string> seen;

    while (std::getline(in, raw)) {
        ++lineno;
        const std::string line = trim(raw);
        if (line.empty() || line[0] == '#' || line[0] == ';') continue;

        if (line.front() == '[') {
            if (line.back() != ']')
                fail(origin, lineno, "malformed section header '" + line + "'");
            section = trim(line.substr(1, line.size() - 2));
            if (section != "link" && section != "chain" && section != "search" &&
                section != "output")
                fail(origin, lineno, "unknown section [" + section + "]");
            continue;
        }

        const std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            fail(origin, lineno, "expected key = value, got '" + line + "'");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (section.empty()) fail(origin, lineno, "key '" + key + "' outside any section");

        const std::string qualified = section + "." + key;
        for (const std::string& s : seen)
            if (s == qualified) fail(origin, lineno, "duplicate key '" + qualified + "'");
        seen.push_back(qualified);

        auto num = [&] { return parse_double(origin, lineno, qualified, value); };
        auto uint = [&] { return parse_uint(origin, lineno, qualified, value); };
        auto boolean = [&] { return parse_bool(origin, lineno, qualified, value); };

        if (section == "link") {
            if (key == "alpha_sq") cfg.link.alpha_sq = num();
            else if (key == "tap") cfg.link.tap = num();
            else if (key == "L0_km") cfg.link.L0_km = num();
            else if (key == "L_att_km") cfg.link.L_att_km = num();
            else if (key == "eta_d") cfg.link.eta_d = num();
            else if (key == "eta_m") cfg.link.eta_m = num();
            else if (key == "c_km_s") cfg.link.c_km_s = num();
            else fail(origin, lineno, "unknown key '" + qualified + "'");
        } else if (section == "chain") {
            if (key == "n_links") cfg.chain.n_links = static_cast<std::size_t>(uint());
            else if (key == "n_trials") cfg.chain.n_trials = static_cast<std::size_t>(uint());
            else if (key == "seed") cfg.chain.rng_seed = uint();
            else if (key == "swap_cost") {
                const std::string v = trim(value);
                if (v == "free") cfg.chain.swap_cost = SwapCost::free_swaps;
                else if (v == "communication") cfg.chain.swap_cost = SwapCost::communication;
                else fail(origin, lineno, "swap_cost must be free or communication");
            } else if (key == "pairing") {
                const std::string v = trim(value);
                if (v == "synchronized") cfg.chain.pairing = PairingMode::synchronized;
                else if (v == "amortized") cfg.chain.pairing = PairingMode::amortized;
                else fail(origin, lineno, "pairing must be synchronized or amortized");
            } else if (key == "postselection") cfg.chain.postselection = boolean();
            else fail(origin, lineno, "unknown key '" + qualified + "'");
        } else if (section == "search") {
            if (key == "alpha_sq_min") cfg.search.alpha_sq_min = num();
            else if (key == "alpha_sq_max") cfg.search.alpha_sq_max = num();
            else if (key == "tap_min") cfg.search.tap_min = num();
            else if (key == "tap_max") cfg.search.tap_max = num();
            else if (key == "alpha_grid") cfg.search.alpha_grid = static_cast<std::size_t>(uint());
            else if (key == "tap_grid") cfg.search.tap_grid = static_cast<std::size_t>(uint());
            else if (key == "fidelity_floor") cfg.search.fidelity_floor = num();
            else fail(origin, lineno, "unknown key '" + qualified + "'");
        } else { // output
            if (key == "directory") cfg.output.directory = trim(value);
            else if (key == "json_summary") cfg.output.json_summary = boolean();
            else fail(origin, lineno, "unknown key '" + qualified + "'");
        }
    }

    return cfg;
}

RunConfig load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("config: cannot open '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str(), path);
}

} // namespace ecsrep
