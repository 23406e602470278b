#pragma once

#include "irmc/solver.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace irmc {

inline constexpr std::uint32_t kStackFormatVersion = 1;

/// One fitted step as stored on disk.
struct StepRecord {
    SurrogateKind kind = SurrogateKind::Tps;
    Box domain;
    std::vector<double> coefficients;
    /// Ẑ coefficients (TPS); empty when no Ẑ was fitted.
    std::vector<double> zhat;
};

struct StackFile {
    std::uint32_t version = kStackFormatVersion;
    std::uint32_t steps = 0;
    std::uint32_t dim = 0;
    std::string metadata;  // JSON
    std::vector<StepRecord> records;
};

StackFile stack_to_file(const PolicyStack& stack, const std::string& metadata);

/// Layout (little-endian): "IRMC", u32 version, u32 K, u32 dim, u64 metadata length,
/// metadata bytes, then per step: u32 kind, f64 lo[dim], f64 hi[dim], u64 n, f64 coef[n],
/// u64 nz, f64 zhat[nz].
void write_stack(std::ostream& out, const StackFile& file);
void save_stack(const std::string& path, const StackFile& file);

/// Throws FormatError for malformed input and VersionMismatch for other versions.
StackFile read_stack(std::istream& in);
StackFile load_stack(const std::string& path);

/// Rebuilds the policies (targets and caches are recomputed from the coefficients).
PolicyStack rebuild_stack(const StackFile& file, std::shared_ptr<const ImpulseModel> model,
                          const InterventionOptions& options);

} // namespace irmc
