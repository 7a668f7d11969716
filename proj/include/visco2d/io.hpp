#ifndef VISCO2D_IO_HPP
#define VISCO2D_IO_HPP

// Diagnostics CSV, binary field snapshots and checkpoints.
//
// Snapshot layout (little-endian):
//   "V2DS"  u32 version=1  u32 N  f64 t  u32 count
//   count x { char name[8] (space padded), u64 byte offset of the payload }
//   payloads: N*N f64 each, row-major with rows of constant y, i.e. the value
//   at (x_i, y_j) sits at index j*N + i.  Field order vx, vy, b11, b12, b22.
//
// Checkpoints ("V2DC") hold both the samples and the spectrum of every field
// so that a restored state continues bit-identically.

#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include "visco2d/diagnostics.hpp"
#include "visco2d/fields.hpp"

namespace visco2d {

/// Header line of the diagnostics CSV.
const std::vector<std::string>& diagnostics_columns();

std::string format_diagnostics_row(const DiagnosticsRecord& r);

/// Parses one data row; throws Error on a wrong field count.
DiagnosticsRecord parse_diagnostics_row(const std::string& line);

/// Append-only diagnostics writer; the header is written on open.
class DiagnosticsWriter {
 public:
  explicit DiagnosticsWriter(const std::string& path);
  void write(const DiagnosticsRecord& r);
  void flush();
  const std::string& path() const { return path_; }

 private:
  std::string path_;
  std::ofstream out_;
};

/// Reads every row; throws IoError when the file is missing and Error when the
/// header does not match.
std::vector<DiagnosticsRecord> read_diagnostics(const std::string& path);

struct Snapshot {
  std::uint32_t n = 0;
  double t = 0;
  std::vector<std::string> names;
  std::vector<std::vector<double>> payloads;

  /// Payload by name; throws Error when absent.
  const std::vector<double>& field(const std::string& name) const;
};

void write_snapshot(const State<double>& s, const std::string& path);
Snapshot read_snapshot(const std::string& path);

struct Checkpoint {
  State<double> state;
  long step = 0;
};

void checkpoint(const State<double>& s, long step, const std::string& path);
Checkpoint restore(const std::string& path);

}  // namespace visco2d

#endif  // VISCO2D_IO_HPP
