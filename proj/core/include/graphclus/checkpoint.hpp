#pragma once

#include <iosfwd>
#include <string>
#include <variant>

#include "graphclus/gcn.hpp"

namespace graphclus {

/// Binary model checkpoint:
///
///   bytes 0-3   magic "GCNM"
///   byte  4     format version (1)
///   byte  5     model kind: 'D' detector, 'S' segmenter
///   then        u32 LE input dim, u32 LE hidden1, u32 LE hidden2
///   then        every parameter matrix in declaration order, row-major,
///               as IEEE-754 binary64 little-endian
///
/// For the segmenter the stored input dim excludes the seed-indicator column.
/// Only max-pooling detectors can be written.
inline constexpr char kCheckpointMagic[4] = {'G', 'C', 'N', 'M'};
inline constexpr unsigned char kCheckpointVersion = 1;

void write_checkpoint(std::ostream& out, const GcnDetModel& model);
void write_checkpoint(std::ostream& out, const GcnSegModel& model);

using AnyModel = std::variant<GcnDetModel, GcnSegModel>;

/// Throws std::runtime_error on bad magic, unknown version or kind, or a
/// truncated stream.
AnyModel read_checkpoint(std::istream& in);
GcnDetModel read_det_checkpoint(std::istream& in);
GcnSegModel read_seg_checkpoint(std::istream& in);

void save_checkpoint(const std::string& path, const GcnDetModel& model);
void save_checkpoint(const std::string& path, const GcnSegModel& model);
GcnDetModel load_det_checkpoint(const std::string& path);
GcnSegModel load_seg_checkpoint(const std::string& path);

}  // namespace graphclus
