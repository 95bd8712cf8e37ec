#include "nmd/records.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <stdexcept>
#include <vector>

namespace nmd {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::string need(const KeyValues& kv, const std::string& key) {
    const auto it = kv.find(key);
    if (it == kv.end()) throw std::invalid_argument("manifest is missing key '" + key + "'");
    return it->second;
}

}  // namespace

std::string format_real(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

double parse_real(const std::string& text, const std::string& what) {
    const std::string t = trim(text);
    if (t == "inf" || t == "+inf") return std::numeric_limits<double>::infinity();
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(t, &used);
    } catch (const std::logic_error&) {
        used = 0;
    }
    if (used == 0 || used != t.size())
        throw std::invalid_argument(what + ": '" + text + "' is not a number");
    return v;
}

long parse_long(const std::string& text, const std::string& what) {
    const std::string t = trim(text);
    std::size_t used = 0;
    long v = 0;
    try {
        v = std::stol(t, &used);
    } catch (const std::logic_error&) {
        used = 0;
    }
    if (used == 0 || used != t.size())
        throw std::invalid_argument(what + ": '" + text + "' is not an integer");
    return v;
}

void write_key_values(const std::string& path, const KeyValues& kv) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
    for (const auto& [k, v] : kv) out << k << '=' << v << '\n';
    if (!out) throw std::runtime_error("write to '" + path + "' failed");
}

KeyValues read_key_values(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open '" + path + "'");
    KeyValues kv;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        line = trim(line);
        if (line.empty() || line[0] == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error(path + ":" + std::to_string(lineno) + ": expected key=value");
        kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
    }
    return kv;
}

KeyValues InstanceManifest::to_key_values() const {
    return {
        {"d1", std::to_string(d1)},
        {"d2", std::to_string(d2)},
        {"r", std::to_string(r)},
        {"s", std::to_string(s)},
        {"alpha", format_real(alpha)},
        {"nu", format_real(nu)},
        {"magnitude", format_real(magnitude)},
        {"seed", std::to_string(seed)},
        {"kind", std::string(to_string(kind))},
        {"operator", std::string(to_string(op))},
        {"theta_frobenius", format_real(theta_frobenius)},
    };
}

InstanceManifest InstanceManifest::from_key_values(const KeyValues& kv) {
    InstanceManifest m;
    m.d1 = parse_long(need(kv, "d1"), "d1");
    m.d2 = parse_long(need(kv, "d2"), "d2");
    m.r = parse_long(need(kv, "r"), "r");
    m.s = parse_long(need(kv, "s"), "s");
    m.alpha = parse_real(need(kv, "alpha"), "alpha");
    m.nu = parse_real(need(kv, "nu"), "nu");
    if (kv.count("magnitude")) m.magnitude = parse_real(kv.at("magnitude"), "magnitude");
    try {
        m.seed = std::stoull(need(kv, "seed"));
    } catch (const std::logic_error&) {
        throw std::invalid_argument("seed: not an unsigned integer");
    }
    m.kind = parse_regularizer_kind(need(kv, "kind"));
    if (kv.count("operator")) m.op = parse_operator_kind(kv.at("operator"));
    if (kv.count("theta_frobenius"))
        m.theta_frobenius = parse_real(kv.at("theta_frobenius"), "theta_frobenius");
    return m;
}

KeyValues diagnostics(const DecompositionEstimate& est, const PenaltyParams& params) {
    return {
        {"iterations", std::to_string(est.iterations)},
        {"final_objective", format_real(est.final_objective())},
        {"feasibility_residual", format_real(est.feasibility_residual)},
        {"converged", est.converged ? "1" : "0"},
        {"fixed_point_residual", format_real(est.fixed_point_residual)},
        {"inexact_prox_calls", std::to_string(est.inexact_prox_calls)},
        {"lambda", format_real(params.lambda)},
        {"mu", format_real(params.mu)},
        {"alpha", format_real(params.alpha)},
    };
}

void write_support_csv(const std::string& path, const Support& support) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
    if (support.kind() == RegularizerKind::elementwise_l1) {
        out << "row,col\n";
        for (const auto& [i, j] : support.entry_list()) out << i << ',' << j << '\n';
    } else {
        out << "col\n";
        for (auto j : support.column_list()) out << j << '\n';
    }
    if (!out) throw std::runtime_error("write to '" + path + "' failed");
}

Support read_support_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open '" + path + "'");
    std::string header;
    if (!std::getline(in, header)) throw std::runtime_error("'" + path + "' is empty");
    header = trim(header);
    std::string line;
    if (header == "row,col") {
        std::vector<Support::Entry> entries;
        while (std::getline(in, line)) {
            line = trim(line);
            if (line.empty()) continue;
            const auto comma = line.find(',');
            if (comma == std::string::npos)
                throw std::runtime_error("'" + path + "': expected row,col");
            entries.emplace_back(parse_long(line.substr(0, comma), "row"),
                                 parse_long(line.substr(comma + 1), "col"));
        }
        return Support::entries(std::move(entries));
    }
    if (header == "col") {
        std::vector<Eigen::Index> cols;
        while (std::getline(in, line)) {
            line = trim(line);
            if (!line.empty()) cols.push_back(parse_long(line, "col"));
        }
        return Support::columns(std::move(cols));
    }
    throw std::runtime_error("'" + path + "': unknown support header '" + header + "'");
}

}  // namespace nmd
