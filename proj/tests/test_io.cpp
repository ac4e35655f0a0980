#include "hwave/io.hpp"

#include <doctest.h>

#include <filesystem>

using namespace hwave;

namespace {

std::filesystem::path temp(const std::string& name) { return std::filesystem::temp_directory_path() / name; }

}  // namespace

TEST_CASE("git blob hash") {
  CHECK(io::git_blob_hash("") == "e69de29bb2d1d6434b8b29ae775ad8c2e48c5391");
  CHECK(io::git_blob_hash("hello\n") == "ce013625030ba8dba906f756967f9e9ca394464a");
}

TEST_CASE("shortest round-trip doubles and CSV quoting") {
  CHECK(io::format_double(0.1) == "0.1");
  CHECK(io::format_double(2.0) == "2");
  CHECK(std::stod(io::format_double(1.0 / 3)) == 1.0 / 3);
  const auto p = temp("hwave_csv_test.csv");
  {
    io::CsvWriter csv(p, {"a", "b", "c"});
    csv.row({0.5, 7LL, std::string("x,\"y\"")});
    CHECK_THROWS_AS(csv.row({1.0}), std::invalid_argument);
  }
  CHECK(io::read_text(p) == "a,b,c\n0.5,7,\"x,\"\"y\"\"\"\n");
  std::filesystem::remove(p);
}

TEST_CASE("HWSF round trip") {
  const auto p = temp("hwave_field_test.hwsf");
  const auto hg = build_grid(0.5, 4.0, 6, 7.0, 1)->with_plancherel_constant(0.025);
  SpectralField h(hg);
  for (std::size_t i = 0; i < h.size(); ++i) h[i] = complex(0.5 * i, -1.0 / (i + 1));
  io::write_field(p, h);
  const auto hr = io::read_field(p);
  CHECK(hr.coefficients() == h.coefficients());
  CHECK(hr.grid()->lambda_nodes() == hg->lambda_nodes());
  CHECK(hr.grid()->raw_weights() == hg->raw_weights());
  CHECK(hr.grid()->plancherel_constant() == 0.025);
  CHECK(hr.grid()->hermite_count() == hg->hermite_count());

  const auto ag = build_abelian_grid(2, 8, 3.0);
  SpectralField a(ag);
  for (std::size_t i = 0; i < a.size(); ++i) a[i] = complex(i, 1.0);
  io::write_field(p, a);
  const auto ar = io::read_field(p);
  CHECK(ar.coefficients() == a.coefficients());
  CHECK(ar.grid()->points_per_axis() == 8);

  {
    std::ofstream(p, std::ios::binary) << "NOPE";
  }
  CHECK_THROWS_AS(io::read_field(p), std::runtime_error);
  std::filesystem::remove(p);
}
