#pragma once

#include "nmd/reg.hpp"
#include "nmd/solver.hpp"

#include <cstdint>
#include <map>
#include <string>

namespace nmd {

/// Ordered so files come out byte identical across runs.
using KeyValues = std::map<std::string, std::string>;

/// "key=value" per line. '#' starts a comment line.
void write_key_values(const std::string& path, const KeyValues& kv);
KeyValues read_key_values(const std::string& path);

/// Replay record of a generated instance.
struct InstanceManifest {
    long d1 = 0;
    long d2 = 0;
    long r = 0;
    long s = 0;
    double alpha = 0.0;
    double nu = 0.0;
    double magnitude = 1.0;
    std::uint64_t seed = 0;
    RegularizerKind kind = RegularizerKind::elementwise_l1;
    OperatorKind op = OperatorKind::identity;
    double theta_frobenius = 0.0;

    KeyValues to_key_values() const;
    static InstanceManifest from_key_values(const KeyValues& kv);
};

/// Diagnostics of one solve, plus the weights used.
KeyValues diagnostics(const DecompositionEstimate& est, const PenaltyParams& params);

/// Sorted index list of a support: "row,col" lines (l1) or "col" lines
/// (col21), after a header naming the layout.
void write_support_csv(const std::string& path, const Support& support);
Support read_support_csv(const std::string& path);

/// Real number at 17 significant digits ("inf" for +infinity).
std::string format_real(double v);
double parse_real(const std::string& text, const std::string& what);
long parse_long(const std::string& text, const std::string& what);

}  // namespace nmd
