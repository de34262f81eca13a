#include <doctest.h>

#include <filesystem>

#include "gpgd/dataset.hpp"
#include "gpgd/io.hpp"
#include "gpgd/signal.hpp"

using namespace gpgd;

namespace {

const std::filesystem::path kFixtures = GPGD_FIXTURES_DIR;

std::filesystem::path scratch(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / "gpgd-unit-data" / name;
  std::filesystem::create_directories(p.parent_path());
  return p;
}

}  // namespace

TEST_CASE("idx fixture") {
  const auto ds = load_idx(kFixtures / "two_2x2.idx");
  REQUIRE(ds.size() == 2);
  CHECK(ds.shape == Shape{2, 2});
  CHECK(ds.items[0].size() == 4);
  CHECK(ds.items[0][0] == 0.0);
  CHECK(ds.items[0][1] == 1.0);
  CHECK(ds.items[0][2] == doctest::Approx(128.0 / 255.0));
  CHECK(ds.items[1][3] == 1.0);
  CHECK(load_idx(kFixtures / "two_2x2.idx", 1).size() == 1);
  CHECK(parse_idx(encode_idx(ds)).items == ds.items);
}

TEST_CASE("idx errors") {
  try {
    load_idx(kFixtures / "labels_magic.idx");
    FAIL("expected IdxFormatError");
  } catch (const IdxFormatError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("00000803") != std::string::npos);
    CHECK(msg.find("00000801") != std::string::npos);
    CHECK(e.offset() == 0);
  }
  const auto bytes = read_file_bytes(kFixtures / "two_2x2.idx");
  CHECK_THROWS_AS(parse_idx(bytes.substr(0, bytes.size() - 1)), IdxFormatError);
  CHECK_THROWS_AS(parse_idx(bytes.substr(0, 6)), IdxFormatError);
  CHECK_THROWS(load_idx(kFixtures / "missing.idx"));
}

TEST_CASE("synthetic datasets") {
  for (const auto& name : synth_dataset_names()) {
    const auto a = synth_dataset(name, {8, 8}, 1, 42);
    const auto b = synth_dataset(name, {8, 8}, 1, 42);
    CHECK(a.items == b.items);
    const auto ds = synth_dataset(name, {8, 8}, 50, 3);
    CHECK(ds.size() == 50);
    for (const auto& x : ds.items) {
      CHECK(x.minCoeff() >= 0.0);
      CHECK(x.maxCoeff() <= 1.0);
    }
  }
  for (const auto& x : synth_dataset("bars", {8, 8}, 100, 5).items) {
    CHECK(x.maxCoeff() == 1.0);
    for (double v : x) CHECK((v == 0.0 || v == 1.0));
  }
  for (const auto& x : synth_dataset("sparse-combos", {4, 4}, 20, 6).items) CHECK((x.array() != 0.0).count() <= 2);
  CHECK_THROWS(synth_dataset("noise", {4, 4}, 2, 1));
}

TEST_CASE("dataset csv round trip") {
  const auto ds = synth_dataset("gaussians", {3, 5}, 4, 9);
  const auto path = scratch("ds.csv");
  write_dataset_csv(path, ds);
  const auto back = load_dataset_csv(path, {3, 5});
  CHECK(back.items == ds.items);
  CHECK_THROWS(load_dataset_csv(path, {4, 4}));
}

TEST_CASE("signal io") {
  Vector v(6);
  v << 0.1, 1.0 / 3.0, -2.0, 1e-300, 0.0, 7.0;
  const Signal s(v, Shape{2, 3});
  write_signal_csv(scratch("s.csv"), s);
  const auto c = read_signal_csv(scratch("s.csv"));
  CHECK(c.data() == v);
  CHECK(*c.shape() == Shape{2, 3});
  write_signal_binary(scratch("s.bin"), s);
  CHECK(read_signal_binary(scratch("s.bin")).data() == v);
  CHECK(std::filesystem::file_size(scratch("s.bin")) == 8 + 6 * 8);

  Vector bad(2);
  bad << 1.0, std::nan("");
  CHECK_THROWS(Signal(bad));
  CHECK(Signal(v).clamped().data().maxCoeff() == 1.0);
  CHECK_THROWS_AS(Signal(v, Shape{4, 4}), DimensionError);
}

TEST_CASE("csv tables") {
  CsvTable t{{"a", "b"}, {{"1", "x"}, {"2", "y"}}};
  write_csv(scratch("t.csv"), t);
  const auto back = read_csv(scratch("t.csv"));
  CHECK(back.header == t.header);
  CHECK(back.rows == t.rows);
  CHECK(split_csv_line("a,,c") == std::vector<std::string>{"a", "", "c"});
}
