#pragma once

#include <stdexcept>
#include <string>

#include "doalab/array_model.hpp"

namespace doalab {

class SnapshotFormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Snapshot files.
///
/// CSV: N lines, each with 2M comma separated numbers
///   re(x_1), im(x_1), re(x_2), im(x_2), ..., re(x_M), im(x_M)
/// Blank lines and lines starting with '#' are skipped.
///
/// Binary (little endian):
///   8 bytes   magic "DOASNAP1"
///   uint32    M
///   uint32    N
///   N*M pairs (float32 re, float32 im), snapshot-major: all M sensors of
///             snapshot 1, then snapshot 2, ...
///
/// read_snapshots picks the format from the first 8 bytes.
inline constexpr char kSnapshotMagic[8] = {'D', 'O', 'A', 'S', 'N', 'A', 'P', '1'};

SnapshotMatrix read_snapshots(const std::string& path);
SnapshotMatrix read_snapshots_csv(const std::string& path);
SnapshotMatrix read_snapshots_binary(const std::string& path);

void write_snapshots_csv(const std::string& path, const CMatrix& data);
void write_snapshots_binary(const std::string& path, const CMatrix& data);

}  // namespace doalab
