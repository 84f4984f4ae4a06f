#include "bevx/io.hpp"

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>

#include "bevx/error.hpp"

namespace bevx::io {

namespace {

constexpr std::array<char, 4> kTensorMagic{'B', 'X', 'T', '1'};
constexpr std::array<char, 4> kSparseMagic{'B', 'X', 'S', '1'};
// Guards against absurd allocations from corrupted headers.
constexpr std::uint64_t kMaxElements = std::uint64_t{1} << 34;

void put_u64(std::ostream& out, std::uint64_t v) {
  std::array<char, 8> b;
  for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
  out.write(b.data(), b.size());
}

void put_f32(std::ostream& out, float f) {
  std::uint32_t v = std::bit_cast<std::uint32_t>(f);
  std::array<char, 4> b;
  for (int i = 0; i < 4; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
  out.write(b.data(), b.size());
}

void read_exact(std::istream& in, char* dst, std::size_t n, const char* what) {
  in.read(dst, static_cast<std::streamsize>(n));
  if (static_cast<std::size_t>(in.gcount()) != n) {
    throw FormatError(std::string("truncated file while reading ") + what);
  }
}

std::uint64_t get_u64(std::istream& in, const char* what) {
  std::array<unsigned char, 8> b;
  read_exact(in, reinterpret_cast<char*>(b.data()), b.size(), what);
  std::uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | b[i];
  return v;
}

float get_f32(std::istream& in) {
  std::array<unsigned char, 4> b;
  read_exact(in, reinterpret_cast<char*>(b.data()), b.size(), "payload");
  std::uint32_t v = 0;
  for (int i = 3; i >= 0; --i) v = (v << 8) | b[i];
  return std::bit_cast<float>(v);
}

void expect_magic(std::istream& in, const std::array<char, 4>& magic) {
  std::array<char, 4> got{};
  read_exact(in, got.data(), got.size(), "magic");
  if (got != magic) {
    throw FormatError("bad magic: expected " + std::string(magic.data(), 4) + ", got " +
                      std::string(got.data(), 4));
  }
}

std::size_t checked_size(std::uint64_t v, const char* what) {
  if (v > kMaxElements) throw FormatError(std::string(what) + " too large: " + std::to_string(v));
  return static_cast<std::size_t>(v);
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  return out;
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return in;
}

}  // namespace

void write_tensor(std::ostream& out, const Tensor& t) {
  out.write(kTensorMagic.data(), kTensorMagic.size());
  put_u64(out, t.rank());
  for (std::size_t e : t.shape()) put_u64(out, e);
  for (float v : t.data()) put_f32(out, v);
  if (!out) throw IoError("failed writing tensor");
}

Tensor read_tensor(std::istream& in) {
  expect_magic(in, kTensorMagic);
  std::size_t rank = checked_size(get_u64(in, "rank"), "rank");
  if (rank == 0 || rank > 16) throw FormatError("unsupported tensor rank " + std::to_string(rank));
  Shape shape(rank);
  std::uint64_t count = 1;
  for (auto& e : shape) {
    e = checked_size(get_u64(in, "extent"), "extent");
    if (e == 0) throw FormatError("zero extent in tensor header");
    count *= e;
    checked_size(count, "element count");
  }
  std::vector<float> data(count);
  for (auto& v : data) v = get_f32(in);
  return Tensor(std::move(shape), std::move(data));
}

void save_tensor(const std::filesystem::path& path, const Tensor& t) {
  auto out = open_out(path);
  write_tensor(out, t);
}

Tensor load_tensor(const std::filesystem::path& path) {
  auto in = open_in(path);
  return read_tensor(in);
}

void write_sparse(std::ostream& out, const SparseBinaryMatrix& m) {
  out.write(kSparseMagic.data(), kSparseMagic.size());
  put_u64(out, m.rows());
  put_u64(out, m.cols());
  put_u64(out, m.nnz());
  for (std::size_t v : m.row_offsets()) put_u64(out, v);
  for (std::size_t v : m.col_indices()) put_u64(out, v);
  if (!out) throw IoError("failed writing sparse matrix");
}

SparseBinaryMatrix read_sparse(std::istream& in) {
  expect_magic(in, kSparseMagic);
  std::size_t rows = checked_size(get_u64(in, "rows"), "rows");
  std::size_t cols = checked_size(get_u64(in, "cols"), "cols");
  std::size_t nnz = checked_size(get_u64(in, "nnz"), "nnz");
  std::vector<std::size_t> offsets(rows + 1);
  for (auto& v : offsets) v = checked_size(get_u64(in, "row_offsets"), "row offset");
  std::vector<std::size_t> indices(nnz);
  for (auto& v : indices) v = checked_size(get_u64(in, "col_indices"), "column index");
  try {
    return SparseBinaryMatrix(rows, cols, std::move(offsets), std::move(indices));
  } catch (const ValidationError& e) {
    throw FormatError(std::string("invalid sparse matrix: ") + e.what());
  }
}

void save_sparse(const std::filesystem::path& path, const SparseBinaryMatrix& m) {
  auto out = open_out(path);
  write_sparse(out, m);
}

SparseBinaryMatrix load_sparse(const std::filesystem::path& path) {
  auto in = open_in(path);
  return read_sparse(in);
}

}  // namespace bevx::io
