// On-disk formats: binary field dumps (header + float64 payload + sidecar),
// CSV report tables, summary records, atomic writes, and the bit-exact
// round-trip guarantees.

#include <cstdint>
#include <filesystem>
#include <random>

#include <gtest/gtest.h>

#include "nfh/io.hpp"
#include "test_util.hpp"

namespace {

using namespace nfh;
namespace fs = std::filesystem;

class IoTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / ("nfh_io_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) + "_" +
                                        ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  fs::path dir_;
};

TEST_F(IoTest, MacroFieldRoundTripsBitExactly) {
  MacroGrid g{1, 8.0, 256};
  std::mt19937_64 rng(7);
  MacroField u{g, testutil::random_values(rng, g.size(), -3.0, 3.0)};
  u.values[0] = 0.1 + 0.2;  // not exactly representable as 0.3
  u.values[1] = -0.0;
  u.values[2] = 1e-300;

  const fs::path p = dir_ / "field.nfh";
  write_field(p, u);
  const LoadedField f = read_field(p);
  EXPECT_FALSE(f.two_scale());
  const MacroField back = f.as_macro();
  EXPECT_EQ(back.grid.dim, 1);
  EXPECT_EQ(back.grid.points, 256);
  EXPECT_EQ(back.grid.half_width, 8.0);
  ASSERT_EQ(back.values.size(), u.values.size());
  for (std::size_t i = 0; i < u.values.size(); ++i) EXPECT_EQ(back.values[i], u.values[i]);

  // header is 4 (magic) + 4 + 4 + 8 + 4 bytes, then 8 bytes per value
  EXPECT_EQ(fs::file_size(p), 24u + 8u * u.values.size());
  EXPECT_TRUE(fs::exists(p.string() + ".meta"));
}

TEST_F(IoTest, TwoScaleFieldRoundTripsBitExactly) {
  MacroGrid g{1, 4.0, 64};
  CellGrid c{1, 16};
  std::mt19937_64 rng(9);
  TwoScaleField u{g, c, testutil::random_values(rng, g.size() * c.size())};

  const fs::path p = dir_ / "field2.nfh";
  write_field(p, u);
  const LoadedField f = read_field(p);
  EXPECT_TRUE(f.two_scale());
  const TwoScaleField back = f.as_two_scale();
  EXPECT_EQ(back.cell.points, 16);
  ASSERT_EQ(back.values.size(), u.values.size());
  for (std::size_t i = 0; i < u.values.size(); ++i) EXPECT_EQ(back.values[i], u.values[i]);
  EXPECT_THROW(f.as_macro(), std::runtime_error);
}

TEST_F(IoTest, RepeatedWritesAreByteIdentical) {
  MacroGrid g{1, 2.0, 128};
  std::mt19937_64 rng(11);
  MacroField u{g, testutil::random_values(rng, g.size())};
  write_field(dir_ / "a.nfh", u);
  write_field(dir_ / "b.nfh", u);
  EXPECT_EQ(read_file(dir_ / "a.nfh"), read_file(dir_ / "b.nfh"));
  EXPECT_EQ(read_file(dir_ / "a.nfh.meta"), read_file(dir_ / "b.nfh.meta"));
}

TEST_F(IoTest, RejectsCorruptDumps) {
  MacroGrid g{1, 2.0, 64};
  MacroField u = MacroField::zeros(g);
  const fs::path p = dir_ / "field.nfh";
  write_field(p, u);

  std::string bytes = read_file(p);
  std::string bad_magic = bytes;
  bad_magic[0] = 'X';
  write_file_atomic(dir_ / "bad_magic.nfh", bad_magic);
  EXPECT_THROW(read_field(dir_ / "bad_magic.nfh"), std::runtime_error);

  write_file_atomic(dir_ / "truncated.nfh", bytes.substr(0, bytes.size() - 5));
  EXPECT_THROW(read_field(dir_ / "truncated.nfh"), std::runtime_error);

  write_file_atomic(dir_ / "short_header.nfh", bytes.substr(0, 10));
  EXPECT_THROW(read_field(dir_ / "short_header.nfh"), std::runtime_error);

  EXPECT_THROW(read_field(dir_ / "missing.nfh"), std::runtime_error);
}

TEST_F(IoTest, AtomicWriteReplacesAndLeavesNoTemp) {
  const fs::path p = dir_ / "out.txt";
  write_file_atomic(p, "first");
  write_file_atomic(p, "second");
  EXPECT_EQ(read_file(p), "second");
  EXPECT_FALSE(fs::exists(p.string() + ".tmp"));
}

TEST_F(IoTest, PairingCsvRoundTripsValuesExactly) {
  PairingReport r;
  r.eps = {0.25, 0.125, 1.0 / 16.0};
  r.pairing = {1.0 / 3.0, 0.1 + 0.2, 5e-17};
  r.limit = 1.0 / 3.0;
  for (double p : r.pairing) r.abs_error.push_back(std::fabs(p - r.limit));

  const fs::path p = dir_ / "pairing.csv";
  write_pairing_csv(p, r);
  const PairingReport back = read_pairing_csv(p);
  ASSERT_EQ(back.eps.size(), 3u);
  for (std::size_t k = 0; k < 3; ++k) {
    EXPECT_EQ(back.eps[k], r.eps[k]);
    EXPECT_EQ(back.pairing[k], r.pairing[k]);
    EXPECT_EQ(back.abs_error[k], r.abs_error[k]);
  }
  EXPECT_EQ(back.limit, r.limit);

  // re-serializing the loaded report reproduces the file byte-for-byte
  write_pairing_csv(dir_ / "pairing2.csv", back);
  EXPECT_EQ(read_file(p), read_file(dir_ / "pairing2.csv"));

  const std::string text = read_file(p);
  EXPECT_EQ(text.substr(0, text.find('\n')), "eps,pairing,limit,abs_error");
}

TEST_F(IoTest, PairingCsvRejectsMalformedInput) {
  write_file_atomic(dir_ / "bad_header.csv", "eps,value\n0.25,1\n");
  EXPECT_THROW(read_pairing_csv(dir_ / "bad_header.csv"), std::runtime_error);
  write_file_atomic(dir_ / "bad_row.csv", "eps,pairing,limit,abs_error\n0.25,1,2\n");
  EXPECT_THROW(read_pairing_csv(dir_ / "bad_row.csv"), std::runtime_error);
  write_file_atomic(dir_ / "bad_cell.csv", "eps,pairing,limit,abs_error\n0.25,x,2,3\n");
  EXPECT_THROW(read_pairing_csv(dir_ / "bad_cell.csv"), std::runtime_error);
}

TEST_F(IoTest, TableCsvRoundTrips) {
  const std::vector<std::string> cols = {"t", "l1", "l2"};
  const std::vector<std::vector<double>> rows = {{0.0, 1.5, 0.75}, {0.1, 1.25, 0.5}};
  write_table_csv(dir_ / "norms.csv", cols, rows);
  const auto [cols2, rows2] = read_table_csv(dir_ / "norms.csv");
  EXPECT_EQ(cols2, cols);
  ASSERT_EQ(rows2.size(), 2u);
  EXPECT_EQ(rows2[0], rows[0]);
  EXPECT_EQ(rows2[1], rows[1]);
  EXPECT_THROW(write_table_csv(dir_ / "bad.csv", cols, {{1.0}}), std::invalid_argument);
}

TEST_F(IoTest, SummaryRecordRoundTrips) {
  const std::vector<std::pair<std::string, std::string>> entries = {
      {"mode", "sweep"}, {"eps_count", "4"}, {"pairings_pass", "true"}};
  write_summary(dir_ / "summary.txt", entries);
  const auto back = read_summary(dir_ / "summary.txt");
  ASSERT_EQ(back.size(), 3u);
  EXPECT_EQ(back.at("mode"), "sweep");
  EXPECT_EQ(back.at("pairings_pass"), "true");
}

TEST_F(IoTest, FormatDoubleRecoversExactValues) {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> val(-1e6, 1e6);
  for (int trial = 0; trial < 1000; ++trial) {
    const double v = val(rng);
    EXPECT_EQ(std::stod(format_double(v)), v);
  }
  EXPECT_EQ(std::stod(format_double(1.0 / 3.0)), 1.0 / 3.0);
  EXPECT_EQ(std::stod(format_double(std::numeric_limits<double>::min())),
            std::numeric_limits<double>::min());
  EXPECT_EQ(std::stod(format_double(std::numeric_limits<double>::max())),
            std::numeric_limits<double>::max());
}

}  // namespace
