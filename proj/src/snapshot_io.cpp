#include "doalab/snapshot_io.hpp"

#include <bit>
#include <charconv>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <vector>

namespace doalab {

namespace {

static_assert(std::endian::native == std::endian::little, "binary snapshot I/O assumes a little-endian host");

std::ifstream open_in(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw SnapshotFormatError("cannot open '" + path + "'");
  return f;
}

std::uint32_t read_u32(std::istream& in, const std::string& path) {
  unsigned char b[4];
  if (!in.read(reinterpret_cast<char*>(b), 4)) throw SnapshotFormatError(path + ": truncated header");
  return std::uint32_t{b[0]} | std::uint32_t{b[1]} << 8 | std::uint32_t{b[2]} << 16 | std::uint32_t{b[3]} << 24;
}

void write_u32(std::ostream& out, std::uint32_t v) {
  const unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                              static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
  out.write(reinterpret_cast<const char*>(b), 4);
}

}  // namespace

SnapshotMatrix read_snapshots(const std::string& path) {
  std::ifstream f = open_in(path);
  char head[sizeof kSnapshotMagic] = {};
  f.read(head, sizeof head);
  if (f.gcount() == sizeof head && std::memcmp(head, kSnapshotMagic, sizeof head) == 0) {
    return read_snapshots_binary(path);
  }
  return read_snapshots_csv(path);
}

SnapshotMatrix read_snapshots_csv(const std::string& path) {
  std::ifstream f = open_in(path);
  std::vector<std::vector<double>> rows;
  std::string line;
  int lineno = 0;
  while (std::getline(f, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto first = line.find_first_not_of(" \t");
    if (first == std::string::npos || line[first] == '#') continue;
    std::vector<double> row;
    const char* p = line.data();
    const char* end = p + line.size();
    while (true) {
      while (p < end && (*p == ' ' || *p == '\t')) ++p;
      double v = 0.0;
      const auto [next, ec] = std::from_chars(p, end, v);
      if (ec != std::errc()) {
        throw SnapshotFormatError(path + ":" + std::to_string(lineno) + ": bad number in column " +
                                  std::to_string(row.size() + 1));
      }
      row.push_back(v);
      p = next;
      while (p < end && (*p == ' ' || *p == '\t')) ++p;
      if (p == end) break;
      if (*p != ',') throw SnapshotFormatError(path + ":" + std::to_string(lineno) + ": expected ','");
      ++p;
    }
    if (row.size() % 2 != 0) {
      throw SnapshotFormatError(path + ":" + std::to_string(lineno) + ": odd column count " +
                                std::to_string(row.size()) + " (need re,im pairs)");
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw SnapshotFormatError(path + ":" + std::to_string(lineno) + ": row has " + std::to_string(row.size()) +
                                " columns, expected " + std::to_string(rows.front().size()));
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw SnapshotFormatError(path + ": no snapshot rows");
  const Eigen::Index m = static_cast<Eigen::Index>(rows.front().size() / 2);
  const Eigen::Index n = static_cast<Eigen::Index>(rows.size());
  CMatrix x(m, n);
  for (Eigen::Index t = 0; t < n; ++t) {
    const auto& r = rows[static_cast<std::size_t>(t)];
    for (Eigen::Index s = 0; s < m; ++s) x(s, t) = cplx(r[2 * s], r[2 * s + 1]);
  }
  return SnapshotMatrix(std::move(x));
}

SnapshotMatrix read_snapshots_binary(const std::string& path) {
  std::ifstream f = open_in(path);
  char head[sizeof kSnapshotMagic];
  if (!f.read(head, sizeof head) || std::memcmp(head, kSnapshotMagic, sizeof head) != 0) {
    throw SnapshotFormatError(path + ": missing DOASNAP1 magic");
  }
  const std::uint32_t m = read_u32(f, path);
  const std::uint32_t n = read_u32(f, path);
  if (m == 0 || n == 0) throw SnapshotFormatError(path + ": M and N must be positive");
  const std::size_t count = std::size_t{m} * n * 2;
  std::vector<float> buf(count);
  if (!f.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(count * sizeof(float)))) {
    throw SnapshotFormatError(path + ": truncated payload, expected " + std::to_string(count / 2) + " complex values");
  }
  CMatrix x(m, n);
  for (std::uint32_t t = 0; t < n; ++t) {
    for (std::uint32_t s = 0; s < m; ++s) {
      const std::size_t k = 2 * (std::size_t{t} * m + s);
      x(s, t) = cplx(buf[k], buf[k + 1]);
    }
  }
  return SnapshotMatrix(std::move(x));
}

void write_snapshots_csv(const std::string& path, const CMatrix& data) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw SnapshotFormatError("cannot write '" + path + "'");
  for (Eigen::Index t = 0; t < data.cols(); ++t) {
    for (Eigen::Index s = 0; s < data.rows(); ++s) {
      std::fprintf(f, "%s%.17g,%.17g", s ? "," : "", data(s, t).real(), data(s, t).imag());
    }
    std::fputc('\n', f);
  }
  if (std::fclose(f) != 0) throw SnapshotFormatError("write failed for '" + path + "'");
}

void write_snapshots_binary(const std::string& path, const CMatrix& data) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw SnapshotFormatError("cannot write '" + path + "'");
  f.write(kSnapshotMagic, sizeof kSnapshotMagic);
  write_u32(f, static_cast<std::uint32_t>(data.rows()));
  write_u32(f, static_cast<std::uint32_t>(data.cols()));
  for (Eigen::Index t = 0; t < data.cols(); ++t) {
    for (Eigen::Index s = 0; s < data.rows(); ++s) {
      const float pair[2] = {static_cast<float>(data(s, t).real()), static_cast<float>(data(s, t).imag())};
      f.write(reinterpret_cast<const char*>(pair), sizeof pair);
    }
  }
  f.flush();
  if (!f) throw SnapshotFormatError("write failed for '" + path + "'");
}

}  // namespace doalab
