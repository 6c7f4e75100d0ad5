#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>

#include "error.hpp"
#include "protocol.hpp"
#include "rng.hpp"

using namespace hf;

namespace {

CommandFrame random_frame(Rng &rng, std::size_t max_elements = 300) {
  CommandFrame f;
  f.timestamp = static_cast<std::uint32_t>(rng());
  f.elements.resize(static_cast<std::size_t>(rng.uniform() * (max_elements + 1)));
  for (auto &e : f.elements) {
    const auto r = rng();
    e.phase = static_cast<std::uint8_t>(r);
    e.amplitude = static_cast<std::uint8_t>(r >> 8);
  }
  return f;
}

std::filesystem::path temp_file(const char *name) {
  return std::filesystem::temp_directory_path() / name;
}

void write_bytes(const std::filesystem::path &p, const std::vector<std::uint8_t> &bytes) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  out.write(reinterpret_cast<const char *>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

ErrorCode code_of(const std::vector<std::uint8_t> &bytes, std::string *what = nullptr) {
  try {
    decode_frame(bytes);
  } catch (const Error &e) {
    if (what) *what = e.what();
    return e.code();
  }
  FAIL("expected a decode error");
  return ErrorCode::Runtime;
}

} // namespace

TEST_SUITE("device-protocol") {

TEST_CASE("quantization examples") {
  const auto q = quantize({{0.0, std::numbers::pi, 2 * std::numbers::pi - 1e-9}, {1.0, 0.75, 0.0}});
  CHECK(q[0] == ElementDrive{0, 255});
  CHECK(q[1].phase == 128);
  CHECK(q[1].amplitude == 191);
  CHECK(q[2] == ElementDrive{0, 0}); // wraps to zero
}

TEST_CASE("quantization rounds half up") {
  const double lsb = 2 * std::numbers::pi / 256;
  CHECK(quantize({{0.5 * lsb}, {0.5 / 255}})[0] == ElementDrive{1, 1});
  CHECK(quantize({{0.49 * lsb}, {0.49 / 255}})[0] == ElementDrive{0, 0});
}

TEST_CASE("quantization error is within half an LSB") {
  Rng rng(1);
  PhaseSolution s;
  for (int i = 0; i < 5000; ++i) {
    s.phases.push_back(rng.uniform(0.0, 2 * std::numbers::pi));
    s.amplitudes.push_back(rng.uniform());
  }
  const auto back = dequantize(quantize(s));
  for (std::size_t i = 0; i < s.phases.size(); ++i) {
    CHECK(phase_distance(s.phases[i], back.phases[i]) <= std::numbers::pi / 256 + 1e-12);
    CHECK(std::abs(s.amplitudes[i] - back.amplitudes[i]) <= 1.0 / 510 + 1e-12);
  }
}

TEST_CASE("one-element frame bytes") {
  const CommandFrame f{0, {{0, 255}}};
  CHECK(encode_frame(f) == std::vector<std::uint8_t>{0x48, 0x41, 0x01, 0, 0, 0, 0, 0x01, 0x00, 0x00, 0xFF});
}

TEST_CASE("fields are little-endian") {
  const CommandFrame f{0x11223344, std::vector<ElementDrive>(0x0102)};
  const auto b = encode_frame(f);
  CHECK(b[3] == 0x44);
  CHECK(b[6] == 0x11);
  CHECK(b[7] == 0x02);
  CHECK(b[8] == 0x01);
}

TEST_CASE("frame length is 9 + 2n") {
  CHECK(encode_frame({0, std::vector<ElementDrive>(256)}).size() == 521);
  CHECK(frame_size(256) == 521);
  CHECK(encode_frame({7, {}}).size() == 9);
}

TEST_CASE("round trip on 10^3 random frames") {
  Rng rng(2);
  for (int i = 0; i < 1000; ++i) {
    const CommandFrame f = random_frame(rng);
    const auto bytes = encode_frame(f);
    CHECK(bytes.size() == frame_size(f.elements.size()));
    CHECK(decode_frame(bytes) == f);
  }
}

TEST_CASE("too many elements cannot be encoded") {
  CHECK_THROWS_AS(encode_frame({0, std::vector<ElementDrive>(65536)}), Error);
}

TEST_CASE("decode errors") {
  auto good = encode_frame({5, std::vector<ElementDrive>(4)});
  auto bad = good;
  bad[0] = 0x00;
  CHECK(code_of(bad) == ErrorCode::Format);
  bad = good;
  bad[2] = 0x02;
  CHECK(code_of(bad) == ErrorCode::UnsupportedVersion);
  bad = good;
  bad.push_back(0);
  CHECK(code_of(bad) == ErrorCode::Format);
  CHECK(code_of({0x48, 0x41}) == ErrorCode::Truncated);
  CHECK(code_of({}) == ErrorCode::Truncated);
}

TEST_CASE("truncated body reports expected and actual lengths") {
  auto bytes = encode_frame({0, std::vector<ElementDrive>(256)});
  bytes.resize(9 + 10);
  std::string what;
  CHECK(code_of(bytes, &what) == ErrorCode::Truncated);
  CHECK(what.find("521") != std::string::npos);
  CHECK(what.find("19") != std::string::npos);
}

TEST_CASE("stream: three frames in, three frames out") {
  Rng rng(3);
  const auto path = temp_file("hf_three.ahs");
  std::vector<CommandFrame> frames{random_frame(rng), random_frame(rng), random_frame(rng)};
  {
    FrameWriter w(path);
    for (const auto &f : frames) w.write(f);
    CHECK(w.frames_written() == 3);
  }
  std::size_t total = 0;
  for (const auto &f : frames) total += frame_size(f.elements.size());
  CHECK(std::filesystem::file_size(path) == total);
  CHECK(read_stream(path) == frames);
  {
    FrameWriter w(path, true);
    w.write(frames[0]);
  }
  CHECK(read_stream(path).size() == 4);
  std::filesystem::remove(path);
}

TEST_CASE("empty stream yields nothing") {
  const auto path = temp_file("hf_empty.ahs");
  write_bytes(path, {});
  FrameReader r(path);
  CHECK_FALSE(r.next());
  std::filesystem::remove(path);
}

TEST_CASE("corruption mid-stream names the byte offset") {
  const auto path = temp_file("hf_corrupt.ahs");
  std::vector<std::uint8_t> bytes;
  for (int i = 0; i < 3; ++i) {
    const auto f = encode_frame({static_cast<std::uint32_t>(i), std::vector<ElementDrive>(4)});
    bytes.insert(bytes.end(), f.begin(), f.end());
  }
  bytes[2 * 17] = 0x00; // third frame's magic
  write_bytes(path, bytes);
  FrameReader r(path);
  CHECK(r.next());
  CHECK(r.next());
  try {
    r.next();
    FAIL("expected an error");
  } catch (const Error &e) {
    CHECK(e.code() == ErrorCode::Format);
    CHECK(std::string(e.what()).find("offset 34") != std::string::npos);
  }
  bytes[34] = 0x48;
  bytes.resize(bytes.size() - 3);
  write_bytes(path, bytes);
  try {
    read_stream(path);
    FAIL("expected an error");
  } catch (const Error &e) {
    CHECK(e.code() == ErrorCode::Truncated);
    CHECK(std::string(e.what()).find("offset 34") != std::string::npos);
  }
  std::filesystem::remove(path);
}

TEST_CASE("missing stream file") {
  CHECK_THROWS_AS(FrameReader("/nonexistent/x.ahs"), Error);
}

} // TEST_SUITE
