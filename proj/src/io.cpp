#include "visco2d/io.hpp"

#include <bit>
#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <sstream>

#include "visco2d/errors.hpp"

namespace visco2d {

namespace {

constexpr char kSnapshotMagic[4] = {'V', '2', 'D', 'S'};
constexpr char kCheckpointMagic[4] = {'V', '2', 'D', 'C'};
constexpr std::uint32_t kVersion = 1;
const char* const kFieldNames[5] = {"vx", "vy", "b11", "b12", "b22"};

// Little-endian encoding of trivially copyable values.
template <typename T>
void put(std::ostream& out, T v) {
  unsigned char b[sizeof(T)];
  std::memcpy(b, &v, sizeof(T));
  if constexpr (std::endian::native == std::endian::big)
    for (std::size_t i = 0; i < sizeof(T) / 2; ++i) std::swap(b[i], b[sizeof(T) - 1 - i]);
  out.write(reinterpret_cast<const char*>(b), sizeof(T));
}

template <typename T>
T get(std::istream& in, const std::string& path) {
  unsigned char b[sizeof(T)];
  if (!in.read(reinterpret_cast<char*>(b), sizeof(T))) throw CorruptSnapshot(path, "truncated file");
  if constexpr (std::endian::native == std::endian::big)
    for (std::size_t i = 0; i < sizeof(T) / 2; ++i) std::swap(b[i], b[sizeof(T) - 1 - i]);
  T v;
  std::memcpy(&v, b, sizeof(T));
  return v;
}

void put_doubles(std::ostream& out, const double* p, std::size_t count) {
  if constexpr (std::endian::native == std::endian::little) {
    out.write(reinterpret_cast<const char*>(p), std::streamsize(count * sizeof(double)));
  } else {
    for (std::size_t i = 0; i < count; ++i) put(out, p[i]);
  }
}

void get_doubles(std::istream& in, double* p, std::size_t count, const std::string& path) {
  if constexpr (std::endian::native == std::endian::little) {
    if (!in.read(reinterpret_cast<char*>(p), std::streamsize(count * sizeof(double))))
      throw CorruptSnapshot(path, "truncated payload");
  } else {
    for (std::size_t i = 0; i < count; ++i) p[i] = get<double>(in, path);
  }
}

void check_magic(std::istream& in, const char (&magic)[4], const std::string& path) {
  char m[4];
  if (!in.read(m, 4)) throw CorruptSnapshot(path, "truncated header");
  if (std::memcmp(m, magic, 4) != 0) throw CorruptSnapshot(path, "bad magic");
  const auto version = get<std::uint32_t>(in, path);
  if (version != kVersion) throw CorruptSnapshot(path, "unsupported version " + std::to_string(version));
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(path, std::strerror(errno));
  return out;
}

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path, "cannot open for reading");
  return in;
}

std::vector<const ScalarField<double>*> components(const State<double>& s) {
  return {&s.v.x, &s.v.y, &s.B.b11, &s.B.b12, &s.B.b22};
}

std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double to_double(const std::string& s) {
  char* end = nullptr;
  const double x = std::strtod(s.c_str(), &end);
  if (s.empty() || *end != '\0') throw Error("diagnostics: not a number: '" + s + "'");
  return x;
}

}  // namespace

// ---------------------------------------------------------------------------
// Diagnostics CSV.

const std::vector<std::string>& diagnostics_columns() {
  static const std::vector<std::string> cols = {
      "t",          "kinetic", "elastic",   "dissipation", "power_in",  "energy_residual", "lambda_min",
      "norm_v",     "norm_gradv", "norm_B", "norm_gradB",  "norm_B_l4", "gronwall_g",      "eps_gap"};
  return cols;
}

std::string format_diagnostics_row(const DiagnosticsRecord& r) {
  const double v[] = {r.t,      r.kinetic,    r.elastic, r.dissipation, r.power_in,  r.energy_residual, r.lambda_min,
                      r.norm_v, r.norm_gradv, r.norm_B,  r.norm_gradB,  r.norm_B_l4, r.gronwall_g,      r.eps_gap};
  std::string line;
  for (std::size_t i = 0; i < std::size(v); ++i) {
    if (i) line += ',';
    line += fmt(v[i]);
  }
  return line;
}

DiagnosticsRecord parse_diagnostics_row(const std::string& line) {
  const auto cells = split(line);
  if (cells.size() != diagnostics_columns().size())
    throw Error("diagnostics: expected " + std::to_string(diagnostics_columns().size()) + " fields, got " +
                std::to_string(cells.size()));
  DiagnosticsRecord r;
  double* dst[] = {&r.t,      &r.kinetic,    &r.elastic, &r.dissipation, &r.power_in,  &r.energy_residual, &r.lambda_min,
                   &r.norm_v, &r.norm_gradv, &r.norm_B,  &r.norm_gradB,  &r.norm_B_l4, &r.gronwall_g,      &r.eps_gap};
  for (std::size_t i = 0; i < cells.size(); ++i) *dst[i] = to_double(cells[i]);
  r.dissipation_weighted = r.dissipation;
  return r;
}

DiagnosticsWriter::DiagnosticsWriter(const std::string& path) : path_(path), out_(path, std::ios::trunc) {
  if (!out_) throw IoError(path, std::strerror(errno));
  const auto& cols = diagnostics_columns();
  for (std::size_t i = 0; i < cols.size(); ++i) out_ << (i ? "," : "") << cols[i];
  out_ << '\n';
}

void DiagnosticsWriter::write(const DiagnosticsRecord& r) {
  out_ << format_diagnostics_row(r) << '\n';
  if (!out_) throw IoError(path_, "write failed");
}

void DiagnosticsWriter::flush() { out_.flush(); }

std::vector<DiagnosticsRecord> read_diagnostics(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError(path, "cannot open for reading");
  std::string line;
  if (!std::getline(in, line)) throw Error("diagnostics: empty file " + path);
  const auto head = split(line);
  if (head != diagnostics_columns()) throw Error("diagnostics: header mismatch in " + path);
  std::vector<DiagnosticsRecord> out;
  while (std::getline(in, line))
    if (!line.empty()) out.push_back(parse_diagnostics_row(line));
  return out;
}

// ---------------------------------------------------------------------------
// Snapshots.

const std::vector<double>& Snapshot::field(const std::string& name) const {
  for (std::size_t i = 0; i < names.size(); ++i)
    if (names[i] == name) return payloads[i];
  throw Error("snapshot has no field '" + name + "'");
}

void write_snapshot(const State<double>& s, const std::string& path) {
  auto out = open_out(path);
  const std::uint32_t n = static_cast<std::uint32_t>(s.grid().size());
  const std::uint32_t count = 5;
  out.write(kSnapshotMagic, 4);
  put(out, kVersion);
  put(out, n);
  put(out, s.t);
  put(out, count);
  const std::uint64_t header = 4 + 4 + 4 + 8 + 4 + count * (8 + 8);
  const std::uint64_t bytes = std::uint64_t(n) * n * sizeof(double);
  for (std::uint32_t k = 0; k < count; ++k) {
    char name[8];
    std::memset(name, ' ', 8);
    std::memcpy(name, kFieldNames[k], std::strlen(kFieldNames[k]));
    out.write(name, 8);
    put(out, header + k * bytes);
  }
  for (const auto* f : components(s)) put_doubles(out, f->values().data(), std::size_t(n) * n);
  if (!out) throw IoError(path, "write failed");
}

Snapshot read_snapshot(const std::string& path) {
  auto in = open_in(path);
  check_magic(in, kSnapshotMagic, path);
  Snapshot snap;
  snap.n = get<std::uint32_t>(in, path);
  snap.t = get<double>(in, path);
  const auto count = get<std::uint32_t>(in, path);
  if (count > 64) throw CorruptSnapshot(path, "implausible field count");
  std::vector<std::uint64_t> offsets;
  for (std::uint32_t k = 0; k < count; ++k) {
    char name[8];
    if (!in.read(name, 8)) throw CorruptSnapshot(path, "truncated field table");
    std::string s(name, 8);
    s.erase(s.find_last_not_of(' ') + 1);
    snap.names.push_back(s);
    offsets.push_back(get<std::uint64_t>(in, path));
  }
  const std::size_t cells = std::size_t(snap.n) * snap.n;
  for (std::uint32_t k = 0; k < count; ++k) {
    in.seekg(std::streamoff(offsets[k]));
    std::vector<double> data(cells);
    get_doubles(in, data.data(), cells, path);
    snap.payloads.push_back(std::move(data));
  }
  return snap;
}

// ---------------------------------------------------------------------------
// Checkpoints.

void checkpoint(const State<double>& s, long step, const std::string& path) {
  auto out = open_out(path);
  const auto& g = s.grid();
  const std::uint32_t n = static_cast<std::uint32_t>(g.size());
  out.write(kCheckpointMagic, 4);
  put(out, kVersion);
  put(out, n);
  put(out, std::uint8_t(g.dealias_enabled() ? 1 : 0));
  put(out, s.t);
  put(out, std::int64_t(step));
  const std::size_t cells = std::size_t(n) * n;
  for (const auto* f : components(s)) {
    put_doubles(out, f->values().data(), cells);
    put_doubles(out, reinterpret_cast<const double*>(f->spectrum().data()), 2 * cells);
  }
  if (!out) throw IoError(path, "write failed");
}

Checkpoint restore(const std::string& path) {
  auto in = open_in(path);
  check_magic(in, kCheckpointMagic, path);
  const auto n = get<std::uint32_t>(in, path);
  const bool dealias = get<std::uint8_t>(in, path) != 0;
  const double t = get<double>(in, path);
  const auto step = get<std::int64_t>(in, path);
  if (n < 4 || n % 2 != 0 || n > (1u << 15)) throw CorruptSnapshot(path, "bad grid size");
  const auto grid = make_grid<double>(int(n), dealias);
  const std::size_t cells = std::size_t(n) * n;
  ScalarField<double> f[5];
  for (auto& field : f) {
    RealArray<double> values(n, n);
    ComplexArray<double> spectrum(n, n);
    get_doubles(in, values.data(), cells, path);
    get_doubles(in, reinterpret_cast<double*>(spectrum.data()), 2 * cells, path);
    field = ScalarField<double>::from_both(grid, std::move(values), std::move(spectrum));
  }
  Checkpoint c;
  c.state = State<double>(t, {f[0], f[1]}, {f[2], f[3], f[4]});
  c.step = long(step);
  return c;
}

}  // namespace visco2d
