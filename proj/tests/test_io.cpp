#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <random>

#include "grlol/errors.hpp"
#include "grlol/io.hpp"

namespace {
using namespace grlol;

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / ("grlol_io_" + name)).string();
}

std::string write_temp(const std::string& name, const std::string& text) {
  std::string path = temp_path(name);
  std::ofstream(path) << text;
  return path;
}

TEST(Io, MatrixDelimitersAndHeader) {
  Matrix comma = io::read_matrix(write_temp("a.csv", "x1,x2,x3\n1,2,3\n4,5,6\n"));
  Matrix blank = io::read_matrix(write_temp("b.txt", "# comment\n1  2\t3\n4 5 6\n"));
  Matrix semi = io::read_matrix(write_temp("c.csv", "1;2;3\n4;5;6\n"));
  Matrix expect(2, 3);
  expect << 1, 2, 3, 4, 5, 6;
  EXPECT_EQ(comma, expect);
  EXPECT_EQ(blank, expect);
  EXPECT_EQ(semi, expect);
}

TEST(Io, MatrixErrors) {
  EXPECT_THROW(io::read_matrix(write_temp("ragged.csv", "1,2\n3\n")), Error);
  EXPECT_THROW(io::read_matrix(write_temp("text.csv", "a,b\n1,x\n")), Error);
  EXPECT_THROW(io::read_matrix(temp_path("missing.csv")), Error);
}

TEST(Io, MatrixRoundTripIsExact) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> z;
  Matrix m(7, 4);
  for (Index i = 0; i < 7; ++i)
    for (Index j = 0; j < 4; ++j)
      m(i, j) = z(rng) * 1e-3;
  m(0, 0) = 0.1;
  m(1, 1) = 1e-300;
  std::string path = temp_path("round.csv");
  io::write_matrix(path, m, {"a", "b", "c", "d"});
  EXPECT_EQ(io::read_matrix(path), m);
  io::write_gram(path, m.transpose() * m);
  EXPECT_EQ(io::read_matrix(path), m.transpose() * m);
}

TEST(Io, VectorColumnOrRow) {
  Vector expect(3);
  expect << 1.5, -2, 3;
  EXPECT_EQ(io::read_vector(write_temp("col.csv", "y\n1.5\n-2\n3\n")), expect);
  EXPECT_EQ(io::read_vector(write_temp("row.csv", "1.5,-2,3\n")), expect);
  EXPECT_THROW(io::read_vector(write_temp("mat.csv", "1,2\n3,4\n")), Error);
}

TEST(Io, PartitionRoundTrip) {
  Partition part = Partition::from_groups({{3, 0}, {1}, {2, 4}}, 5);
  std::string path = temp_path("part.csv");
  io::write_partition(path, part);
  EXPECT_EQ(io::read_partition(path, 5), part);

  std::ifstream in(path);
  std::string header, first;
  std::getline(in, header);
  std::getline(in, first);
  EXPECT_EQ(first, "1,4,1");
}

TEST(Io, PartitionValidation) {
  EXPECT_THROW(io::read_partition(write_temp("p1.csv", "1,1,1\n1,2,3\n"), 2), Error);
  EXPECT_THROW(io::read_partition(write_temp("p2.csv", "1,1,1\n3,2,1\n"), 2), Error);
  EXPECT_THROW(io::read_partition(write_temp("p3.csv", "1,1,1\n"), 2), Error);
  EXPECT_EQ(io::read_partition(write_temp("p4.csv", "2 1 1\n1 2 1\n"), 2).group(0), (IndexSet{1}));
}

TEST(Io, CoefficientsRoundTrip) {
  Vector beta(4);
  beta << 0, 1.25, -3e-17, 0;
  std::string path = temp_path("coef.csv");
  io::write_coefficients(path, beta);
  EXPECT_EQ(io::read_coefficients(path), beta);
}

TEST(Io, Records) {
  io::Record rec{{"gamma", "0.25"}, {"n_star", "3"}, {"note", "a=b"}};
  std::string path = temp_path("rec.txt");
  io::write_record(path, rec);
  io::Record back = io::read_record(path);
  EXPECT_EQ(back, rec);
  EXPECT_EQ(io::record_value(back, "n_star"), "3");
  EXPECT_THROW(io::record_value(back, "absent"), Error);
}

TEST(Io, ManifestIsDeterministic) {
  std::string out = temp_path("out.csv");
  io::write_manifest(out, {{"seed", "1"}});
  io::Record a = io::read_record(out + ".manifest");
  io::write_manifest(out, {{"seed", "1"}});
  EXPECT_EQ(io::read_record(out + ".manifest"), a);
  EXPECT_EQ(io::record_value(a, "seed"), "1");
  EXPECT_FALSE(io::record_value(a, "grlol_version").empty());
}

TEST(Io, Formatting) {
  EXPECT_EQ(io::format_double(0.1), "0.1");
  EXPECT_EQ(io::format_double(2.0), "2");
  EXPECT_EQ(std::stod(io::format_double(1.0 / 3.0)), 1.0 / 3.0);
  EXPECT_EQ(io::format_indices({0, 4, 2}), "1 5 3");
  EXPECT_EQ(io::format_indices({}), "");
}
} // namespace
