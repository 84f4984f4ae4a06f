#include <doctest.h>

#include <filesystem>
#include <sstream>

#include "bevx/error.hpp"
#include "bevx/io.hpp"
#include "bevx/sparse.hpp"
#include "support.hpp"

using namespace bevx;
using namespace bevx::testing;

TEST_SUITE("sparse") {

TEST_CASE("CSR invariants are validated") {
  CHECK_NOTHROW(SparseBinaryMatrix(2, 3, {0, 1, 3}, {2, 0, 1}));
  CHECK_THROWS_AS(SparseBinaryMatrix(2, 3, {0, 1}, {2}), ValidationError);
  CHECK_THROWS_AS(SparseBinaryMatrix(2, 3, {1, 1, 1}, {2}), ValidationError);
  CHECK_THROWS_AS(SparseBinaryMatrix(2, 3, {0, 2, 1}, {0, 1}), ValidationError);
  CHECK_THROWS_AS(SparseBinaryMatrix(2, 3, {0, 1, 2}, {3, 0}), ValidationError);
  CHECK_THROWS_AS(SparseBinaryMatrix(1, 3, {0, 2}, {1, 1}), ValidationError);
  CHECK_THROWS_AS(SparseBinaryMatrix(1, 3, {0, 2}, {2, 1}), ValidationError);
}

TEST_CASE("from_coordinates sorts and deduplicates") {
  auto m = SparseBinaryMatrix::from_coordinates(3, 4, {{2, 1}, {0, 3}, {2, 1}, {0, 0}});
  CHECK(m.nnz() == 3);
  CHECK(m.contains(0, 0));
  CHECK(m.contains(0, 3));
  CHECK(m.contains(2, 1));
  CHECK_FALSE(m.contains(1, 1));
  CHECK_THROWS_AS(SparseBinaryMatrix::from_coordinates(3, 4, {{3, 0}}), IndexError);
}

TEST_CASE("densify is binary and from_dense inverts it") {
  Rng rng(1);
  const SparseBinaryMatrix s = random_sparse(20, 30, 0.2, rng);
  const Tensor d = densify(s);
  for (float v : d.data()) CHECK((v == 0.0f || v == 1.0f));
  CHECK(SparseBinaryMatrix::from_dense(d) == s);
}

TEST_CASE("with_flipped toggles exactly one entry") {
  Rng rng(2);
  const SparseBinaryMatrix s = random_sparse(10, 10, 0.3, rng);
  const SparseBinaryMatrix on = s.with_flipped(4, 7);
  CHECK(on.contains(4, 7) != s.contains(4, 7));
  CHECK(on.with_flipped(4, 7) == s);
  CHECK(std::abs(double(on.nnz()) - double(s.nnz())) == 1.0);
}

TEST_CASE("containment") {
  auto inner = SparseBinaryMatrix::from_coordinates(2, 4, {{0, 1}, {1, 3}});
  auto outer = SparseBinaryMatrix::from_coordinates(2, 4, {{0, 1}, {0, 2}, {1, 3}});
  CHECK(is_contained(inner, outer));
  CHECK_FALSE(is_contained(outer, inner));
}

}  // TEST_SUITE

TEST_SUITE("io") {

TEST_CASE("BXT1 layout is bit-exact") {
  const Tensor t({1, 2}, std::vector<float>{1.0f, -2.0f});
  std::ostringstream os;
  io::write_tensor(os, t);
  const std::string bytes = os.str();
  REQUIRE(bytes.size() == 4 + 8 + 2 * 8 + 2 * 4);
  CHECK(bytes.substr(0, 4) == "BXT1");
  CHECK(bytes[4] == 2);  // rank, little-endian
  for (int i = 5; i < 12; ++i) CHECK(bytes[i] == 0);
  CHECK(bytes[12] == 1);
  CHECK(bytes[20] == 2);
  // 1.0f = 0x3F800000 little-endian
  CHECK(static_cast<unsigned char>(bytes[28]) == 0x00);
  CHECK(static_cast<unsigned char>(bytes[31]) == 0x3F);
  // -2.0f = 0xC0000000
  CHECK(static_cast<unsigned char>(bytes[35]) == 0xC0);
}

TEST_CASE("property: tensor and sparse files round-trip") {
  Rng rng(3);
  const auto dir = std::filesystem::temp_directory_path() / "bevx_io_test";
  std::filesystem::create_directories(dir);
  for (int trial = 0; trial < 5; ++trial) {
    Shape shape;
    for (std::size_t r = 0, rank = 1 + rng() % 4; r < rank; ++r) shape.push_back(1 + rng() % 5);
    const Tensor t = random_tensor(shape, rng, -1e6f, 1e6f);
    io::save_tensor(dir / "t.bxt", t);
    CHECK(io::load_tensor(dir / "t.bxt") == t);

    const SparseBinaryMatrix s = random_sparse(1 + rng() % 40, 1 + rng() % 40, 0.1, rng);
    io::save_sparse(dir / "s.bxs", s);
    CHECK(io::load_sparse(dir / "s.bxs") == s);
  }
  std::filesystem::remove_all(dir);
}

TEST_CASE("corrupted files are rejected") {
  std::istringstream bad_magic("BXT2xxxxxxxx");
  CHECK_THROWS_AS(io::read_tensor(bad_magic), FormatError);

  std::ostringstream os;
  io::write_tensor(os, Tensor({3}, std::vector<float>{1, 2, 3}));
  std::string truncated = os.str();
  truncated.pop_back();
  std::istringstream in(truncated);
  CHECK_THROWS_AS(io::read_tensor(in), FormatError);

  std::ostringstream sp;
  io::write_sparse(sp, SparseBinaryMatrix::from_coordinates(2, 2, {{0, 1}, {1, 0}}));
  std::string bytes = sp.str();
  // Make the first column index out of range.
  bytes[4 + 24 + 24] = 9;
  std::istringstream sin(bytes);
  CHECK_THROWS_AS(io::read_sparse(sin), FormatError);

  CHECK_THROWS_AS(io::load_tensor("/nonexistent/path.bxt"), IoError);
}

}  // TEST_SUITE
