#pragma once

#include <cmath>
#include <fstream>
#include <sstream>

#include "pexp/closure.hpp"
#include "pexp/local_dist.hpp"

namespace pexp {

/// Stable 64-bit FNV-1a content hash, hex-encoded; identifies report inputs.
inline std::string fnv1a64_hex(const std::string& bytes) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw input_error("cannot read file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_file(const std::string& path, const std::string& bytes) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw input_error("cannot write file: " + path);
    out << bytes;
}

inline json check_to_json(const CheckResult& r) {
    json j;
    j["status"] = to_string(r.status);
    if (!r.detail.empty()) j["witness"] = r.detail;
    return j;
}

inline json closed_set_to_json(const ClosedSet& cs) {
    json j;
    j["vars"] = cs.vars;
    j["clauses"] = cs.clauses;
    j["radius"] = cs.radius;
    return j;
}

inline json cycle_to_json(const Cycle& c) {
    json j;
    j["clauses"] = c.clauses;
    j["links"] = c.links;
    return j;
}

inline json expansion_to_json(const ExpansionResult& e) {
    json j;
    j["status"] = to_string(e.status);
    j["checked"] = e.checked;
    j["sampled"] = e.sampled;
    j["exhausted"] = e.exhausted;
    j["measured_beta"] = rat_to_string(e.measured_beta);
    if (!e.witness.empty()) j["witness"] = e.witness;
    return j;
}

inline json niceness_to_json(const NicenessReport& r) {
    json j;
    j["pass"] = r.pass;
    j["girth"] = json::object();
    j["girth"]["value"] = r.girth_value ? json(*r.girth_value) : json("infinity");
    j["girth"]["bound_used"] = r.girth_bound_used;
    j["girth"]["bound_formula"] = r.params.girth_bound;
    j["girth"]["pass"] = r.girth_pass;
    j["girth"]["two_cycle_rule"] = "clause pairs sharing two vertices count as 2-cycles";
    if (r.girth_witness) j["girth"]["witness"] = cycle_to_json(*r.girth_witness);
    j["expansion"] = expansion_to_json(r.expansion);
    j["expansion"]["radius"] = r.expansion_radius;
    auto fin = [](double x) { return std::isfinite(x) ? json(x) : json("infinity"); };
    j["params"] = json::object();
    j["params"]["epsilon"] = r.params.epsilon;
    j["params"]["delta"] = rat_to_string(r.params.delta);
    j["params"]["gamma"] = rat_to_string(r.params.gamma);
    j["params"]["eta"] = fin(r.params.eta);
    j["params"]["tau"] = fin(r.params.tau);
    if (!r.note.empty()) j["note"] = r.note;
    return j;
}

inline json property_report_to_json(const PropertyReport& r) {
    json j;
    j["pass"] = r.pass();
    if (!r.note.empty()) j["note"] = r.note;
    j["checks"] = json::array();
    for (const auto& c : r.checks) {
        json jc;
        jc["name"] = c.name;
        jc["trials"] = c.trials;
        jc["pass"] = c.pass();
        if (!c.violations.empty()) jc["violations"] = c.violations;
        j["checks"].push_back(jc);
    }
    return j;
}

}  // namespace pexp
