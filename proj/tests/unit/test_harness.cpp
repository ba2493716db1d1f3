#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "lsbound/config.hpp"
#include "lsbound/data_io.hpp"
#include "lsbound/errors.hpp"
#include "lsbound/records.hpp"
#include "lsbound/rng.hpp"
#include "lsbound/verify.hpp"

using namespace lsbound;

namespace {

std::filesystem::path temp_dir() {
  const auto dir = std::filesystem::temp_directory_path() / "lsbound_harness_test";
  std::filesystem::create_directories(dir);
  return dir;
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << text;
}

}  // namespace

TEST_SUITE("harness") {
  TEST_CASE("config: parse, comments, overrides") {
    const ConfigMap map = ConfigMap::parse_text(
        "# comment\n"
        "seed = 7\n"
        "data.source = synthetic   # trailing comment\n"
        "bound.sigma_p2 = 0.25\n");
    CHECK(map.get_u64("seed", 0) == 7);
    CHECK(map.get("data.source", "") == "synthetic");
    CHECK(map.get_double("bound.sigma_p2", 0.0) == 0.25);

    ConfigMap copy = map;
    copy.apply_override("bound.sigma_p2=0.5");
    CHECK(copy.get_double("bound.sigma_p2", 0.0) == 0.5);
    CHECK_THROWS_AS(copy.apply_override("no_equals_sign"), invalid_input_error);
  }

  TEST_CASE("config: unknown keys are hard errors") {
    CHECK_THROWS_AS(ConfigMap::parse_text("data.sorce = synthetic\n"), invalid_input_error);
    try {
      ConfigMap::parse_text("bound.sigma_p = 0.1\n");
      FAIL("expected invalid_input_error");
    } catch (const invalid_input_error& e) {
      CHECK(std::string(e.what()).find("bound.sigma_p") != std::string::npos);
    }
  }

  TEST_CASE("config hash is stable under key reordering") {
    const ConfigMap a = ConfigMap::parse_text("seed = 1\nbound.delta = 0.05\nmodel.depth = 2\n");
    const ConfigMap b = ConfigMap::parse_text("model.depth = 2\nseed = 1\nbound.delta = 0.05\n");
    CHECK(a.hash() == b.hash());
    CHECK(config_hash_hex(a) == config_hash_hex(b));
    const ConfigMap c = ConfigMap::parse_text("seed = 2\nbound.delta = 0.05\nmodel.depth = 2\n");
    CHECK(a.hash() != c.hash());
  }

  TEST_CASE("mixture round-trips through the config format") {
    const LabeledMixture mix = axis_mixture(3, 5, 1.25, 0.37);
    const ConfigMap map = mixture_to_config(mix);
    const LabeledMixture back = mixture_from_config(map);
    CHECK(back.label_marginals == mix.label_marginals);
    for (std::size_t y = 0; y < 3; ++y) {
      CHECK(back.components[y].mean == mix.components[y].mean);
      for (std::size_t j = 0; j < 5; ++j)
        CHECK(back.components[y].variance[j] ==
              doctest::Approx(mix.components[y].variance[j]).epsilon(1e-15));
    }
  }

  TEST_CASE("run config: exactly one data source") {
    CHECK_THROWS_AS(RunConfig::from_map(ConfigMap::parse_text(
                        "data.source = csv\n"
                        "data.csv.path = x.csv\n"
                        "data.csv.classes = 2\n"
                        "data.synthetic.classes = 3\n")),
                    invalid_input_error);
    const RunConfig ok = RunConfig::from_map(ConfigMap::parse_text("data.source = synthetic\n"));
    CHECK(ok.mixture.has_value());
    CHECK(ok.mixture->num_labels() == 10);
  }

  TEST_CASE("lambda tokens resolve against m") {
    CHECK(resolve_lambda("m", 256) == 256.0);
    CHECK(resolve_lambda("m/2", 256) == 128.0);
    CHECK(resolve_lambda("m/4", 256) == 64.0);
    CHECK(resolve_lambda("sqrt_m", 256) == 16.0);
    CHECK(resolve_lambda("12.5", 256) == 12.5);
    CHECK_THROWS_AS(resolve_lambda("bogus", 256), invalid_input_error);
  }

  TEST_CASE("idx: hand-constructed bytes decode to scaled features") {
    const auto dir = temp_dir();
    const auto ipath = (dir / "imgs").string();
    const auto lpath = (dir / "lbls").string();
    const std::vector<std::uint8_t> pixels = {0, 255, 0, 255};
    const std::vector<std::uint8_t> labels = {3};
    write_idx(pixels, labels, 2, 2, ipath, lpath);
    const IdxDataset ds = load_idx(ipath, lpath);
    REQUIRE(ds.samples.size() == 1);
    CHECK(ds.rows == 2);
    CHECK(ds.cols == 2);
    CHECK(ds.samples[0].y == 3);
    CHECK(ds.samples[0].x == std::vector<double>{0.0, 1.0, 0.0, 1.0});
  }

  TEST_CASE("idx: wrong magic names the observed value") {
    const auto dir = temp_dir();
    const auto ipath = (dir / "bad_imgs").string();
    const auto lpath = (dir / "ok_lbls").string();
    write_idx(std::vector<std::uint8_t>{0}, std::vector<std::uint8_t>{0}, 1, 1,
              (dir / "ok_imgs").string(), lpath);
    write_file(ipath, std::string("\x00\x00\x08\x04\x00\x00\x00\x01", 8));
    try {
      load_idx(ipath, lpath);
      FAIL("expected format_error");
    } catch (const format_error& e) {
      CHECK(std::string(e.what()).find("0x00000804") != std::string::npos);
    }
  }

  TEST_CASE("idx: truncation, count mismatch and empty datasets") {
    const auto dir = temp_dir();
    const auto ipath = (dir / "trunc_imgs").string();
    const auto lpath = (dir / "trunc_lbls").string();
    write_idx(std::vector<std::uint8_t>(8, 1), std::vector<std::uint8_t>{1, 2}, 2, 2, ipath,
              lpath);
    // Truncate the image payload.
    std::filesystem::resize_file(ipath, 16 + 4);
    CHECK_THROWS_AS(load_idx(ipath, lpath), format_error);

    // Count mismatch: 2 labels vs 1 image.
    const auto i1 = (dir / "one_img").string();
    const auto l2 = (dir / "two_lbls").string();
    write_idx(std::vector<std::uint8_t>(4, 0), std::vector<std::uint8_t>{0}, 2, 2, i1,
              (dir / "one_lbl").string());
    write_idx(std::vector<std::uint8_t>(8, 0), std::vector<std::uint8_t>{0, 1}, 2, 2,
              (dir / "two_imgs").string(), l2);
    CHECK_THROWS_AS(load_idx(i1, l2), format_error);
  }

  TEST_CASE("idx: writer/loader round trip on random tiny datasets") {
    const auto dir = temp_dir();
    RandomStream s(3, "idx_prop");
    for (int trial = 0; trial < 100; ++trial) {
      const std::size_t n = 1 + s.below(trial * 8, 5);
      const std::size_t rows = 1 + s.below(trial * 8 + 1, 4);
      const std::size_t cols = 1 + s.below(trial * 8 + 2, 4);
      std::vector<std::uint8_t> pixels(n * rows * cols);
      std::vector<std::uint8_t> labels(n);
      for (std::size_t i = 0; i < pixels.size(); ++i)
        pixels[i] = static_cast<std::uint8_t>(s.below(trial * 1000 + 16 + i, 256));
      for (std::size_t i = 0; i < n; ++i)
        labels[i] = static_cast<std::uint8_t>(s.below(trial * 1000 + 900 + i, 10));
      const auto ipath = (dir / "rt_imgs").string();
      const auto lpath = (dir / "rt_lbls").string();
      write_idx(pixels, labels, rows, cols, ipath, lpath);
      const IdxDataset ds = load_idx(ipath, lpath);
      REQUIRE(ds.samples.size() == n);
      for (std::size_t i = 0; i < n; ++i) {
        CHECK(ds.samples[i].y == labels[i]);
        for (std::size_t p = 0; p < rows * cols; ++p)
          CHECK(ds.samples[i].x[p] == pixels[i * rows * cols + p] / 255.0);
      }
    }
  }

  TEST_CASE("csv: basic parse and range checks") {
    const auto dir = temp_dir();
    const auto path = (dir / "basic.csv").string();
    write_file(path, "f0,f1,label\n0.5,1.0,1\n");
    const auto samples = load_csv(path, 2);
    REQUIRE(samples.size() == 1);
    CHECK(samples[0].x == std::vector<double>{0.5, 1.0});
    CHECK(samples[0].y == 1);

    write_file(path, "f0,f1,label\n0.5,1.0,2\n");
    try {
      load_csv(path, 2);
      FAIL("expected format_error");
    } catch (const format_error& e) {
      CHECK(std::string(e.what()).find("line 2") != std::string::npos);
    }

    write_file(path, "f0,f1,label\n0.5,1.0,0\n0.5,0\n");
    CHECK_THROWS_AS(load_csv(path, 2), format_error);
    write_file(path, "f0,f1,label\n0.5,abc,0\n");
    CHECK_THROWS_AS(load_csv(path, 2), format_error);
  }

  TEST_CASE("csv: synthetic round trip is lossless at 17 digits") {
    const LabeledMixture mix = axis_mixture(4, 6, 1.3, 0.8);
    const std::vector<Sample> samples = sample_mixture(mix, 10000, 21);
    const auto path = (temp_dir() / "roundtrip.csv").string();
    write_csv(samples, path);
    const std::vector<Sample> back = load_csv(path, 4);
    REQUIRE(back.size() == samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) {
      CHECK(back[i].y == samples[i].y);
      CHECK(back[i].x == samples[i].x);  // bitwise
    }
  }

  TEST_CASE("persist: appends one line per record, never rewrites") {
    const auto dir = (temp_dir() / "records_a").string();
    std::filesystem::remove_all(dir);
    const std::string hash = "deadbeefdeadbeef";
    std::vector<ResultRecord> records = {
        make_record("bound", nlohmann::json{{"rhs", 1.0}}, hash),
        make_record("bound", nlohmann::json{{"rhs", 2.0}}, hash)};
    const auto paths = persist(records, dir);
    REQUIRE(paths.size() == 1);
    std::ifstream in(paths[0]);
    std::string line;
    int count = 0;
    while (std::getline(in, line)) {
      const auto j = nlohmann::json::parse(line);
      CHECK(j["schema_version"] == 1);
      CHECK(j["kind"] == "bound");
      CHECK(j["config_hash"] == hash);
      ++count;
    }
    CHECK(count == 2);

    persist(std::vector<ResultRecord>{make_record("bound", nlohmann::json{{"rhs", 3.0}}, hash)},
            dir);
    std::ifstream in2(paths[0]);
    count = 0;
    while (std::getline(in2, line)) ++count;
    CHECK(count == 3);
  }

  TEST_CASE("persist: unwritable destination raises an I/O error") {
    const auto blocker = temp_dir() / "not_a_dir";
    write_file(blocker, "occupied");
    const std::string dir = (blocker / "sub").string();
    const std::vector<ResultRecord> records = {
        make_record("bound", nlohmann::json{{"rhs", 1.0}}, "00")};
    CHECK_THROWS_AS(persist(records, dir), format_error);
  }

  TEST_CASE("verify suite passes on the stock seed") {
    const auto checks = run_verify_suite(7, 20000);
    CHECK(checks.size() >= 14);
    for (const auto& c : checks) {
      INFO(c.name);
      CHECK(c.pass);
    }
  }
}
