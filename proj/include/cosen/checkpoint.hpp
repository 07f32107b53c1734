#pragma once

#include "cosen/cost_matrix.hpp"
#include "cosen/network.hpp"

#include <filesystem>
#include <iosfwd>

namespace cosen {

/// A trained network together with the cost matrix it finished with.
struct Checkpoint {
    Network network;
    CostMatrix costs;
};

/// Text container, versioned by a magic first line and a format version.
/// Every real number is written as a C99 hex float so a load reproduces the
/// saved bits exactly:
///
///   cosen-checkpoint
///   format_version 1
///   layers <L>
///   layer <l> <in> <out> <activation>
///   <out rows of <in> weights>
///   <one row of <out> biases>
///   ... (one block per layer)
///   costs <N>
///   <N rows of N entries>
inline constexpr const char* kCheckpointMagic = "cosen-checkpoint";
inline constexpr int kCheckpointFormatVersion = 1;

void write_checkpoint(std::ostream& out, const Checkpoint& checkpoint);
/// Throws ParseError (bad magic, unsupported version, malformed body).
Checkpoint read_checkpoint(std::istream& in);

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace cosen
