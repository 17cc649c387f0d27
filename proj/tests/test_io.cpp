#include <cmath>
#include <limits>
#include <sstream>

#include "doctest.h"
#include "gevmiss/errors.hpp"
#include "gevmiss/io.hpp"

using namespace gevmiss;

TEST_CASE("six significant digits") {
  CHECK(format_number(8.507209855) == "8.50721");
  CHECK(format_number(1.0) == "1");
  CHECK(format_number(-0.0) == "0");
  CHECK(format_number(1.23456789e-7) == "1.23457e-07");
  CHECK(format_number(123456789.0) == "1.23457e+08");
  CHECK(format_number(std::numeric_limits<double>::quiet_NaN()) == "nan");
  CHECK(format_number(-std::numeric_limits<double>::infinity()) == "-inf");
}

TEST_CASE("field parsing") {
  CHECK(split_csv_line(" a, b ,,c") == std::vector<std::string>{"a", "b", "", "c"});
  CHECK(parse_real(" 2.5 ", "x") == 2.5);
  CHECK_THROWS_AS(parse_real("2.5x", "x"), InputError);
  CHECK_THROWS_AS(parse_real("", "x"), InputError);
  CHECK_THROWS_AS(parse_real("inf", "x"), InputError);
  CHECK(parse_integer("42", "n") == 42);
  CHECK_THROWS_AS(parse_integer("4.2", "n"), InputError);
}

TEST_CASE("block file reading") {
  std::istringstream in(
      "# produced by detrend\n"
      "year,max_surge,n_obs,n_miss\n"
      "1990,1.25,8760,0\n"
      "1991,0.9,8000,760\n"
      "1992,,0,8784\n");
  const auto rows = read_blocks_csv(in);
  REQUIRE(rows.size() == 3);
  CHECK(rows[0].year == 1990);
  CHECK(rows[0].record.delta == Censoring::kComplete);
  CHECK(rows[1].record.delta == Censoring::kUnknown);
  CHECK(rows[1].record.n_miss == 760);
  CHECK_FALSE(rows[2].record.max.has_value());
}

TEST_CASE("optional censoring column") {
  std::istringstream in(
      "year,max_surge,n_obs,n_miss,delta\n"
      "1,1.0,90,10,0\n"
      "2,1.1,90,10,1\n"
      "3,1.2,90,10,\n");
  const auto rows = read_blocks_csv(in);
  CHECK(rows[0].record.delta == Censoring::kCensored);
  CHECK(rows[1].record.delta == Censoring::kComplete);
  CHECK(rows[2].record.delta == Censoring::kUnknown);
  std::istringstream bad("year,max_surge,n_obs,n_miss,delta\n1,1.0,90,10,maybe\n");
  CHECK_THROWS_AS(read_blocks_csv(bad), InputError);
}

TEST_CASE("block file diagnostics") {
  std::istringstream header("year,max,n_obs,n_miss\n1990,1,1,0\n");
  try {
    read_blocks_csv(header);
    FAIL("bad header accepted");
  } catch (const InputError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("year,max_surge,n_obs,n_miss") != std::string::npos);
    CHECK(msg.find("year,max,n_obs,n_miss") != std::string::npos);
  }
  std::istringstream cols("# note\nyear,max_surge,n_obs,n_miss\n1990,1,1\n");
  try {
    read_blocks_csv(cols);
    FAIL("short row accepted");
  } catch (const InputError& e) {
    CHECK(std::string(e.what()).find("line 3") != std::string::npos);
  }
  std::istringstream blank_max("year,max_surge,n_obs,n_miss\n1990,,5,0\n");
  CHECK_THROWS_AS(read_blocks_csv(blank_max), InputError);
  std::istringstream negative("year,max_surge,n_obs,n_miss\n1990,1,-5,0\n");
  CHECK_THROWS_AS(read_blocks_csv(negative), InputError);
}

TEST_CASE("block file roundtrip") {
  const std::string text = "year,max_surge,n_obs,n_miss\n1990,1.25,8760,0\n1991,0.912346,8000,760\n1992,,0,8784\n";
  std::istringstream in(text);
  std::ostringstream out;
  write_blocks_csv(out, read_blocks_csv(in));
  CHECK(out.str() == text);
}

TEST_CASE("pool file uses the last column") {
  std::istringstream in("timestamp,surge\n2001-01-01T00:00:00,0.5\n2001-01-01T01:00:00,\n2001-01-01T02:00:00,-0.1\n");
  CHECK(read_pool_csv(in) == std::vector<double>{0.5, -0.1});
  std::istringstream plain("value\n1\n2\n");
  CHECK(read_pool_csv(plain) == std::vector<double>{1.0, 2.0});
  std::istringstream empty("value\n");
  CHECK_THROWS_AS(read_pool_csv(empty), InputError);
}
