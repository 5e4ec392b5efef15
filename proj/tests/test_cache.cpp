#include <catch2/catch_amalgamated.hpp>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "primepair/cache.hpp"
#include "primepair/constants.hpp"

using namespace primepair;

namespace {

namespace fs = std::filesystem;

fs::path fresh_dir(const char* tag) {
  fs::path dir = fs::temp_directory_path() / (std::string("primepair-cache-") + tag);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::vector<std::string> read_lines(const fs::path& file) {
  std::ifstream in(file);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) lines.push_back(line);
  return lines;
}

}  // namespace

TEST_CASE("cache round-trips computed constants exactly") {
  fs::path dir = fresh_dir("roundtrip");
  fs::path file = dir / kCacheFileName;

  constant_store().clear();
  EulerProductEstimate fresh_c, fresh_g, fresh_red;
  {
    CacheAppender appender;
    appender.attach(file, constant_store());
    fresh_c = c_constant(2, -2, 2000);
    fresh_g = gamma_constant(3, 10, 2000);
    fresh_red = gamma_constant(3, 8, 2000);  // reducible, value 0
  }

  auto lines = read_lines(file);
  REQUIRE(lines.size() == 4);
  CHECK(lines[0] == kCacheHeader);

  constant_store().clear();
  std::size_t kept = load_constant_cache(file, constant_store());
  CHECK(kept == 3);

  auto c = constant_store().find(ConstantKey{ConstantKind::PairAdjusted, 2, -2, 2000});
  REQUIRE(c.has_value());
  CHECK(c->value == fresh_c.value);
  CHECK_FALSE(c->vanished);
  CHECK_FALSE(c->reducible);

  auto g = constant_store().find(ConstantKey{ConstantKind::SingleGamma, 3, 10, 2000});
  REQUIRE(g.has_value());
  CHECK(g->value == fresh_g.value);

  auto red = constant_store().find(ConstantKey{ConstantKind::SingleGamma, 3, 8, 2000});
  REQUIRE(red.has_value());
  CHECK(red->value == 0.0);
  CHECK(red->reducible);

  // A constant served from the loaded store matches the fresh run bitwise.
  CHECK(c_constant(2, -2, 2000).value == fresh_c.value);

  constant_store().clear();
  fs::remove_all(dir);
}

TEST_CASE("appender writes the header once and only appends new keys") {
  fs::path dir = fresh_dir("append");
  fs::path file = dir / kCacheFileName;

  constant_store().clear();
  {
    CacheAppender appender;
    appender.attach(file, constant_store());
    c_constant(2, 2, 1000);
    c_constant(2, 2, 1000);  // store hit, no second row
  }
  CHECK(read_lines(file).size() == 2);

  // Reattach on the existing file: no duplicate header, loaded rows are
  // not echoed back, new keys land at the end.
  constant_store().clear();
  {
    CacheAppender appender;
    std::size_t kept = load_constant_cache(file, constant_store());
    CHECK(kept == 1);
    appender.attach(file, constant_store());
    c_constant(2, 2, 1000);  // cached, nothing written
    c_constant(2, 4, 1000);  // new row
  }
  auto lines = read_lines(file);
  REQUIRE(lines.size() == 3);
  CHECK(lines[0] == kCacheHeader);
  CHECK(lines[1].rfind("pair-adjusted,2,2,1000,", 0) == 0);
  CHECK(lines[2].rfind("pair-adjusted,2,4,1000,", 0) == 0);

  constant_store().clear();
  fs::remove_all(dir);
}

TEST_CASE("load skips foreign schema versions and missing files") {
  fs::path dir = fresh_dir("schema");
  fs::path file = dir / kCacheFileName;

  {
    std::ofstream out(file);
    out << kCacheHeader << "\n";
    out << "pair-adjusted,2,2,1000,1.25,0,0,99\n";
    out << "pair-adjusted,2,4,1000,1.5,0,0,1\n";
    out << "mystery-kind,2,6,1000,1.5,0,0,1\n";
  }
  constant_store().clear();
  CHECK(load_constant_cache(file, constant_store()) == 1);
  CHECK_FALSE(constant_store().find(ConstantKey{ConstantKind::PairAdjusted, 2, 2, 1000}).has_value());
  CHECK(constant_store().find(ConstantKey{ConstantKind::PairAdjusted, 2, 4, 1000}).has_value());

  CHECK(load_constant_cache(dir / "absent.csv", constant_store()) == 0);

  constant_store().clear();
  fs::remove_all(dir);
}

TEST_CASE("load rejects corrupt files") {
  fs::path dir = fresh_dir("corrupt");

  fs::path bad_header = dir / "bad_header.csv";
  {
    std::ofstream out(bad_header);
    out << "kind,k,q\n";
  }
  constant_store().clear();
  CHECK_THROWS_AS(load_constant_cache(bad_header, constant_store()), std::runtime_error);

  fs::path short_row = dir / "short_row.csv";
  {
    std::ofstream out(short_row);
    out << kCacheHeader << "\n";
    out << "pair-adjusted,2,2\n";
  }
  CHECK_THROWS_AS(load_constant_cache(short_row, constant_store()), std::runtime_error);

  fs::path bad_field = dir / "bad_field.csv";
  {
    std::ofstream out(bad_field);
    out << kCacheHeader << "\n";
    out << "pair-adjusted,two,2,1000,1.25,0,0,1\n";
  }
  CHECK_THROWS_AS(load_constant_cache(bad_field, constant_store()), std::runtime_error);

  constant_store().clear();
  fs::remove_all(dir);
}
