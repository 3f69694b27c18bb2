#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <cstdlib>
#include <string>

#include "lagflow/io.hpp"

using namespace lagflow;
using Catch::Matchers::ContainsSubstring;

TEST_CASE("format_full round-trips doubles through text") {
  for (double v : {0.1, 1.0 / 3.0, 3.141592653589793, -2.5e-300, 1e308, 0.0, -7.25,
                   6.02214076e23}) {
    std::string s = format_full(v);
    CHECK(std::strtod(s.c_str(), nullptr) == v);
  }
  // Negative zero keeps its sign bit through the text form.
  std::string nz = format_full(-0.0);
  CHECK(std::signbit(std::strtod(nz.c_str(), nullptr)));
}

TEST_CASE("render_csv emits header plus full-precision rows") {
  CsvTable t;
  t.header = {"t", "value"};
  t.rows = {{0.0, 1.0 / 3.0}, {0.5, -2.0}};
  std::string s = render_csv(t);
  CHECK_THAT(s, ContainsSubstring("t,value\n"));
  CHECK_THAT(s, ContainsSubstring("0.33333333333333331"));
  CHECK(s.back() == '\n');

  CsvTable bad;
  bad.header = {"a", "b"};
  bad.rows = {{1.0}};
  CHECK_THROWS_AS(render_csv(bad), invalid_input);
}

TEST_CASE("text files round-trip bytes") {
  std::string path = "io_test_roundtrip.txt";
  std::string content = "line one\nline two, with commas\n";
  write_text_file(path, content);
  CHECK(read_text_file(path) == content);
  std::remove(path.c_str());

  CHECK_THROWS_AS(read_text_file("io_test_missing_file.txt"), invalid_input);
}

TEST_CASE("fnv1a64 matches the published reference vectors") {
  CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
  CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
  CHECK(fnv1a64("foobar") == 0x85944171f73967e8ULL);
  CHECK(hex64(0) == "0000000000000000");
  CHECK(hex64(0xcbf29ce484222325ULL) == "cbf29ce484222325");
}

TEST_CASE("utc stamp has the fixed ISO shape") {
  std::string s = iso8601_utc_now();
  REQUIRE(s.size() == 20);
  CHECK(s[4] == '-');
  CHECK(s[7] == '-');
  CHECK(s[10] == 'T');
  CHECK(s[13] == ':');
  CHECK(s[16] == ':');
  CHECK(s[19] == 'Z');
}
