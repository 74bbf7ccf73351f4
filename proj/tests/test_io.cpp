// SPDX-License-Identifier: Apache-2.0

#include <catch_amalgamated.hpp>

#include <cstdint>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "sonimap/brir.hpp"
#include "sonimap/io/brir_manifest.hpp"
#include "sonimap/io/csv.hpp"
#include "sonimap/io/ply.hpp"
#include "sonimap/io/trajectory.hpp"
#include "sonimap/io/wav.hpp"
#include "support.hpp"

using namespace sonimap;
using Catch::Approx;

namespace {

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
}

void write_bytes(const std::string& path, const std::vector<std::uint8_t>& b) {
  std::ofstream out(path, std::ios::binary);
  out.write(reinterpret_cast<const char*>(b.data()),
            static_cast<std::streamsize>(b.size()));
}

std::vector<std::uint8_t> read_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return std::vector<std::uint8_t>((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
}

}  // namespace

// --- trajectory -----------------------------------------------------------

TEST_CASE("trajectory parsing") {
  testsupport::TempDir tmp("traj");

  SECTION("identity record") {
    write_text(tmp.file("t.txt"), "0.0 0 0 0 0 0 0 1\n");
    const auto recs = io::parse_trajectory(tmp.file("t.txt"));
    REQUIRE(recs.size() == 1);
    REQUIRE(recs[0].timestamp == 0.0);
    REQUIRE(recs[0].pose.t.norm() == 0.0);
    REQUIRE(std::abs(recs[0].pose.q.w() - 1.0) < 1e-12);
  }

  SECTION("non-monotonic timestamps carry the line number") {
    write_text(tmp.file("t.txt"),
               "1.0 0 0 0 0 0 0 1\n0.5 0 0 0 0 0 0 1\n");
    try {
      io::parse_trajectory(tmp.file("t.txt"));
      FAIL("expected MonotonicityError");
    } catch (const MonotonicityError& e) {
      REQUIRE(e.line() == 2);
    }
  }

  SECTION("order preserved, comments and blanks skipped") {
    write_text(tmp.file("t.txt"),
               "# header\n\n0.0 1 0 0 0 0 0 1\n0.1 2 0 0 0 0 0 1\n"
               "0.2 3 0 0 0 0 0 1 # trailing\n");
    const auto recs = io::parse_trajectory(tmp.file("t.txt"));
    REQUIRE(recs.size() == 3);
    REQUIRE(recs[0].pose.t.x() == 1.0);
    REQUIRE(recs[1].pose.t.x() == 2.0);
    REQUIRE(recs[2].pose.t.x() == 3.0);
  }

  SECTION("wrong field count carries the line number") {
    write_text(tmp.file("t.txt"), "0.0 0 0 0 0 0 1\n");
    try {
      io::parse_trajectory(tmp.file("t.txt"));
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      REQUIRE(e.line() == 1);
    }
  }

  SECTION("denormalized quaternion rejected") {
    write_text(tmp.file("t.txt"), "0.0 0 0 0 0 0 0 0.5\n");
    REQUIRE_THROWS_AS(io::parse_trajectory(tmp.file("t.txt")), ParseError);
  }

  SECTION("slightly off-unit quaternion normalized") {
    write_text(tmp.file("t.txt"), "0.0 0 0 0 0 0 0 1.05\n");
    const auto recs = io::parse_trajectory(tmp.file("t.txt"));
    REQUIRE(std::abs(recs[0].pose.q.norm() - 1.0) < 1e-12);
  }

  SECTION("write-parse round trip") {
    std::vector<io::TrajectoryRecord> recs(3);
    for (int i = 0; i < 3; ++i) {
      recs[i].timestamp = 0.1 * i;
      recs[i].pose = Pose(Vec3(i, -i, 0.5 * i), testsupport::yaw_quat(30.0 * i));
    }
    io::write_trajectory(tmp.file("t.txt"), recs);
    const auto back = io::parse_trajectory(tmp.file("t.txt"));
    REQUIRE(back.size() == 3);
    for (int i = 0; i < 3; ++i) {
      REQUIRE((back[i].pose.t - recs[i].pose.t).norm() < 1e-8);
      REQUIRE(std::abs(std::abs(back[i].pose.q.dot(recs[i].pose.q)) - 1.0) <
              1e-8);
    }
  }
}

// --- PLY --------------------------------------------------------------------

TEST_CASE("ply parsing") {
  testsupport::TempDir tmp("ply");

  SECTION("ascii single vertex") {
    write_text(tmp.file("a.ply"),
               "ply\nformat ascii 1.0\nelement vertex 1\n"
               "property float x\nproperty float y\nproperty float z\n"
               "end_header\n1 2 3\n");
    const auto cloud = io::parse_ply(tmp.file("a.ply"));
    REQUIRE(cloud.frame == Frame::Sensor);
    REQUIRE(cloud.points.size() == 1);
    REQUIRE(cloud.points[0].isApprox(Vec3(1, 2, 3), 1e-6));
  }

  SECTION("binary little endian round trip is exact") {
    const std::vector<Vec3> pts = {Vec3(0.125, -2.5, 3.75),
                                   Vec3(1e-3, 400.0, -0.0625)};
    io::write_ply(tmp.file("b.ply"), pts, /*binary=*/true);
    const auto cloud = io::parse_ply(tmp.file("b.ply"));
    REQUIRE(cloud.points.size() == 2);
    for (int i = 0; i < 2; ++i)
      for (int a = 0; a < 3; ++a)
        REQUIRE(static_cast<float>(cloud.points[i][a]) ==
                static_cast<float>(pts[i][a]));
  }

  SECTION("header count larger than body") {
    write_text(tmp.file("t.ply"),
               "ply\nformat ascii 1.0\nelement vertex 10\n"
               "property float x\nproperty float y\nproperty float z\n"
               "end_header\n1 2 3\n1 2 3\n1 2 3\n1 2 3\n1 2 3\n"
               "1 2 3\n1 2 3\n1 2 3\n1 2 3\n");
    REQUIRE_THROWS_AS(io::parse_ply(tmp.file("t.ply")), ParseError);
  }

  SECTION("binary truncation reports byte counts") {
    std::vector<std::uint8_t> file;
    const std::string header =
        "ply\nformat binary_little_endian 1.0\nelement vertex 2\n"
        "property float x\nproperty float y\nproperty float z\n"
        "end_header\n";
    file.insert(file.end(), header.begin(), header.end());
    for (int i = 0; i < 15; ++i) file.push_back(0);  // 15 of 24 payload bytes
    write_bytes(tmp.file("trunc.ply"), file);
    try {
      io::parse_ply(tmp.file("trunc.ply"));
      FAIL("expected TruncationError");
    } catch (const TruncationError& e) {
      REQUIRE(std::string(e.what()).find("24") != std::string::npos);
      REQUIRE(std::string(e.what()).find("15") != std::string::npos);
    }
  }

  SECTION("missing z property") {
    write_text(tmp.file("m.ply"),
               "ply\nformat ascii 1.0\nelement vertex 1\n"
               "property float x\nproperty float y\nend_header\n1 2\n");
    REQUIRE_THROWS_AS(io::parse_ply(tmp.file("m.ply")), ParseError);
  }

  SECTION("NaN vertices dropped with a count") {
    write_text(tmp.file("n.ply"),
               "ply\nformat ascii 1.0\nelement vertex 3\n"
               "property float x\nproperty float y\nproperty float z\n"
               "end_header\n1 2 3\nnan 2 3\n4 5 6\n");
    std::size_t dropped = 0;
    const auto cloud = io::parse_ply(tmp.file("n.ply"), &dropped);
    REQUIRE(cloud.points.size() == 2);
    REQUIRE(dropped == 1);
  }

  SECTION("extra properties skipped") {
    write_text(tmp.file("e.ply"),
               "ply\nformat ascii 1.0\ncomment scanner\nelement vertex 2\n"
               "property float x\nproperty float y\nproperty float z\n"
               "property uchar red\n"
               "end_header\n1 2 3 255\n4 5 6 128\n");
    const auto cloud = io::parse_ply(tmp.file("e.ply"));
    REQUIRE(cloud.points.size() == 2);
    REQUIRE(cloud.points[1].isApprox(Vec3(4, 5, 6), 1e-6));
  }
}

// --- WAV --------------------------------------------------------------------

TEST_CASE("wav round trips and codecs") {
  testsupport::TempDir tmp("wav");

  SECTION("float sine round trip is bit exact") {
    const AudioBuffer sine = make_sine(440.0, 0.1, 48000);
    io::write_wav(tmp.file("s.wav"), sine);
    const AudioBuffer back = io::read_wav(tmp.file("s.wav"));
    REQUIRE(back.sample_rate == 48000);
    REQUIRE(back.channels == 1);
    REQUIRE(back.samples == sine.samples);
  }

  SECTION("PCM16 scaling convention") {
    // hand-built PCM16 WAV with samples {-32768, 32767}
    std::vector<std::uint8_t> f;
    auto put = [&](const void* p, std::size_t n) {
      const auto* b = static_cast<const std::uint8_t*>(p);
      f.insert(f.end(), b, b + n);
    };
    auto put32 = [&](std::uint32_t v) { put(&v, 4); };
    auto put16 = [&](std::uint16_t v) { put(&v, 2); };
    put("RIFF", 4); put32(36 + 4); put("WAVE", 4);
    put("fmt ", 4); put32(16); put16(1); put16(1); put32(44100);
    put32(88200); put16(2); put16(16);
    put("data", 4); put32(4);
    put16(0x8000);  // -32768
    put16(0x7FFF);  // +32767
    write_bytes(tmp.file("pcm.wav"), f);

    const AudioBuffer buf = io::read_wav(tmp.file("pcm.wav"));
    REQUIRE(buf.samples.size() == 2);
    REQUIRE(buf.samples[0] == Approx(-1.0));
    REQUIRE(buf.samples[1] == Approx(32767.0 / 32768.0));
  }

  SECTION("mu-law rejected naming the tag") {
    std::vector<std::uint8_t> f;
    auto put = [&](const void* p, std::size_t n) {
      const auto* b = static_cast<const std::uint8_t*>(p);
      f.insert(f.end(), b, b + n);
    };
    auto put32 = [&](std::uint32_t v) { put(&v, 4); };
    auto put16 = [&](std::uint16_t v) { put(&v, 2); };
    put("RIFF", 4); put32(36); put("WAVE", 4);
    put("fmt ", 4); put32(16); put16(7); put16(1); put32(8000);
    put32(8000); put16(1); put16(8);
    put("data", 4); put32(0);
    write_bytes(tmp.file("mu.wav"), f);
    try {
      io::read_wav(tmp.file("mu.wav"));
      FAIL("expected UnsupportedCodecError");
    } catch (const UnsupportedCodecError& e) {
      REQUIRE(std::string(e.what()).find("7") != std::string::npos);
    }
  }

  SECTION("stereo round trip") {
    AudioBuffer st;
    st.sample_rate = 44100;
    st.channels = 2;
    st.samples = {0.1f, -0.1f, 0.5f, -0.5f, 0.25f, 1.0f};
    io::write_wav(tmp.file("st.wav"), st);
    const AudioBuffer back = io::read_wav(tmp.file("st.wav"));
    REQUIRE(back.channels == 2);
    REQUIRE(back.samples == st.samples);
  }
}

// --- raster CSV ----------------------------------------------------------

TEST_CASE("circle CSV") {
  testsupport::TempDir tmp("csv");

  SECTION("all-unknown circle writes 360 rows") {
    CircularRaster r;
    io::write_circle_csv(tmp.file("c.csv"), r);
    std::ifstream in(tmp.file("c.csv"));
    std::string line;
    std::size_t rows = 0;
    std::getline(in, line);
    REQUIRE(line == "angle_deg,range_m,known");
    while (std::getline(in, line))
      if (!line.empty()) ++rows;
    REQUIRE(rows == 360);
  }

  SECTION("known bin row format") {
    CircularRaster r;
    r.update_min(90, 2.5);
    io::write_circle_csv(tmp.file("c.csv"), r);
    std::ifstream in(tmp.file("c.csv"));
    std::string line;
    for (int i = 0; i < 92; ++i) std::getline(in, line);
    REQUIRE(line == "90,2.5,1");
  }

  SECTION("round trip reproduces the raster exactly") {
    CircularRaster r;
    std::mt19937_64 rng = testsupport::seeded_rng(5);
    std::uniform_real_distribution<double> u(0.01, 9.99);
    for (int b = 0; b < 360; b += 3) r.update_min(b, u(rng));
    io::write_circle_csv(tmp.file("c.csv"), r);
    const CircularRaster back = io::read_circle_csv(tmp.file("c.csv"));
    REQUIRE(back.known == r.known);
    for (int b = 0; b < 360; ++b)
      if (r.is_known(b)) REQUIRE(back.range[b] == r.range[b]);
  }
}

TEST_CASE("cylinder CSV round trip") {
  testsupport::TempDir tmp("csv");
  RasterParams params;
  CylindricalRaster r(params);
  std::mt19937_64 rng = testsupport::seeded_rng(6);
  std::uniform_real_distribution<double> u(0.01, 9.99);
  for (int col = 0; col < 360; col += 7)
    for (int row = 0; row < r.rows; row += 3) r.update_min(col, row, u(rng));
  io::write_cylinder_csv(tmp.file("cyl.csv"), r);
  const CylindricalRaster back = io::read_cylinder_csv(tmp.file("cyl.csv"));
  REQUIRE(back.rows == r.rows);
  REQUIRE(back.known == r.known);
  REQUIRE(back.row_height == Approx(r.row_height).margin(1e-12));
  for (std::size_t i = 0; i < r.range.size(); ++i)
    if (r.known[i]) REQUIRE(back.range[i] == r.range[i]);
}

TEST_CASE("metrics and events CSV schemas") {
  testsupport::TempDir tmp("csv");

  std::vector<io::MetricsRow> rows(2);
  rows[0] = {0, 0.05, 0.5, 12.5};
  rows[1] = {1, std::nullopt, std::nullopt, 3.25};
  io::write_metrics_csv(tmp.file("m.csv"), rows);
  std::ifstream in(tmp.file("m.csv"));
  std::string line;
  std::getline(in, line);
  REQUIRE(line == "frame_index,rmse_m,coverage_fraction,elapsed_ms");
  std::getline(in, line);
  REQUIRE(line == "0,0.05,0.5,12.5");
  std::getline(in, line);
  REQUIRE(line == "1,,,3.25");

  std::vector<io::EventRow> events(2);
  events[0] = {0.0, 0, "tap", 7.0, 1.5, -4};
  events[1] = {0.1, 1, "woosh", 15.0, std::nullopt, 0};
  io::write_events_csv(tmp.file("e.csv"), events);
  const auto back = io::read_events_csv(tmp.file("e.csv"));
  REQUIRE(back.size() == 2);
  REQUIRE(back[0].kind == "tap");
  REQUIRE(back[0].distance_m.has_value());
  REQUIRE(back[1].kind == "woosh");
  REQUIRE_FALSE(back[1].distance_m.has_value());
}

// --- BRIR manifest -----------------------------------------------------

TEST_CASE("brir manifest") {
  testsupport::TempDir tmp("brir");

  SECTION("full synthetic grid loads and validates") {
    const BrirStore store = make_synthetic_brir_store(16000);
    io::write_brir_dataset(tmp.file("set"), store);
    const BrirStore back =
        io::parse_brir_manifest(tmp.file("set") + "/manifest.json",
                                /*require_full_grid=*/true);
    REQUIRE(back.size() == 1200);
    REQUIRE(back.sample_rate() == 16000);
  }

  SECTION("single-azimuth manifest valid without the full-grid flag") {
    std::string json = R"({"sample_rate": 8000, "entries": [)";
    AudioBuffer ir;
    ir.sample_rate = 8000;
    ir.channels = 2;
    ir.samples = {1.f, 1.f};
    io::write_wav(tmp.file("ir.wav"), ir);
    for (int d = 1; d <= 10; ++d) {
      if (d > 1) json += ",";
      json += R"({"azimuth_deg": 0, "distance_m": )" +
              std::to_string(0.4 * d) + R"(, "wav": "ir.wav"})";
    }
    json += "]}";
    write_text(tmp.file("m.json"), json);
    const BrirStore store = io::parse_brir_manifest(tmp.file("m.json"));
    REQUIRE(store.size() == 10);
    REQUIRE_THROWS_AS(
        io::parse_brir_manifest(tmp.file("m.json"), true), Error);
  }

  SECTION("duplicate key rejected") {
    AudioBuffer ir;
    ir.sample_rate = 8000;
    ir.channels = 2;
    ir.samples = {1.f, 1.f};
    io::write_wav(tmp.file("ir.wav"), ir);
    write_text(tmp.file("m.json"), R"({"sample_rate": 8000, "entries": [
      {"azimuth_deg": 0, "distance_m": 0.4, "wav": "ir.wav"},
      {"azimuth_deg": 0, "distance_m": 0.4, "wav": "ir.wav"}]})");
    REQUIRE_THROWS_AS(io::parse_brir_manifest(tmp.file("m.json")),
                      DuplicateKeyError);
  }

  SECTION("sample rate mismatch rejected") {
    AudioBuffer ir;
    ir.sample_rate = 44100;
    ir.channels = 2;
    ir.samples = {1.f, 1.f};
    io::write_wav(tmp.file("ir.wav"), ir);
    write_text(tmp.file("m.json"), R"({"sample_rate": 8000, "entries": [
      {"azimuth_deg": 0, "distance_m": 0.4, "wav": "ir.wav"}]})");
    REQUIRE_THROWS_AS(io::parse_brir_manifest(tmp.file("m.json")), ParseError);
  }

  SECTION("missing-cell error names the first gap") {
    std::string json = R"({"sample_rate": 8000, "entries": [)";
    AudioBuffer ir;
    ir.sample_rate = 8000;
    ir.channels = 2;
    ir.samples = {1.f, 1.f};
    io::write_wav(tmp.file("ir.wav"), ir);
    bool first = true;
    for (int a = 0; a < BrirStore::kAzimuthCount; ++a)
      for (int d = 0; d < BrirStore::kDistanceCount; ++d) {
        if (a == 3 && d == 2) continue;  // poke a hole at (-168, 1.2)
        if (!first) json += ",";
        first = false;
        json += R"({"azimuth_deg": )" +
                std::to_string(BrirStore::grid_azimuth_deg(a)) +
                R"(, "distance_m": )" +
                std::to_string(BrirStore::grid_distance_m(d)) +
                R"(, "wav": "ir.wav"})";
      }
    json += "]}";
    write_text(tmp.file("m.json"), json);
    try {
      io::parse_brir_manifest(tmp.file("m.json"), true);
      FAIL("expected missing-cell error");
    } catch (const Error& e) {
      REQUIRE(std::string(e.what()).find("-168") != std::string::npos);
      REQUIRE(std::string(e.what()).find("1.2") != std::string::npos);
    }
  }
}

// --- fuzz ----------------------------------------------------------------

namespace {

/// Parsers must reject arbitrary bytes with a library error, never crash.
template <typename Fn>
void fuzz_parser(const std::string& tag, Fn parse, unsigned seed,
                 const std::vector<std::uint8_t>& seed_file) {
  testsupport::TempDir tmp(tag);
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> byte(0, 255);
  std::uniform_int_distribution<std::size_t> len(0, 600);

  for (int i = 0; i < 150; ++i) {
    std::vector<std::uint8_t> data;
    if (i % 3 == 0 && !seed_file.empty()) {
      // mutate the valid file: truncate and flip bytes
      data = seed_file;
      data.resize(len(rng) % (data.size() + 1));
      for (int k = 0; k < 8 && !data.empty(); ++k)
        data[rng() % data.size()] = static_cast<std::uint8_t>(byte(rng));
    } else {
      data.resize(len(rng));
      for (auto& b : data) b = static_cast<std::uint8_t>(byte(rng));
    }
    const std::string path = tmp.file("fuzz.bin");
    write_bytes(path, data);
    try {
      parse(path);
    } catch (const Error&) {
      // expected: positioned library error
    }
    // anything else (std::bad_alloc, other exceptions, crashes) fails
  }
  SUCCEED();
}

}  // namespace

TEST_CASE("fuzzed inputs never crash the parsers") {
  testsupport::TempDir tmp("seeds");

  const std::vector<Vec3> pts = {Vec3(1, 2, 3), Vec3(4, 5, 6)};
  io::write_ply(tmp.file("seed.ply"), pts, true);
  const auto ply_seed = read_bytes(tmp.file("seed.ply"));

  io::write_wav(tmp.file("seed.wav"), make_sine(440, 0.01, 8000));
  const auto wav_seed = read_bytes(tmp.file("seed.wav"));

  const std::string traj = "0.0 0 0 0 0 0 0 1\n0.1 1 0 0 0 0 0 1\n";
  const std::vector<std::uint8_t> traj_seed(traj.begin(), traj.end());

  const std::string manifest =
      R"({"sample_rate": 8000, "entries": [{"azimuth_deg": 0, "distance_m": 0.4, "wav": "x.wav"}]})";
  const std::vector<std::uint8_t> man_seed(manifest.begin(), manifest.end());

  fuzz_parser("fz-ply", [](const std::string& p) { io::parse_ply(p); }, 101,
              ply_seed);
  fuzz_parser("fz-wav", [](const std::string& p) { io::read_wav(p); }, 102,
              wav_seed);
  fuzz_parser("fz-trj", [](const std::string& p) { io::parse_trajectory(p); },
              103, traj_seed);
  fuzz_parser("fz-man",
              [](const std::string& p) { io::parse_brir_manifest(p); }, 104,
              man_seed);
  fuzz_parser("fz-csv", [](const std::string& p) { io::read_circle_csv(p); },
              105, {});
}
