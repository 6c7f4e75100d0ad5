#include "protocol.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "error.hpp"

namespace hf {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;

std::uint32_t read_u32(const std::uint8_t *p) {
  return static_cast<std::uint32_t>(p[0]) | static_cast<std::uint32_t>(p[1]) << 8 |
         static_cast<std::uint32_t>(p[2]) << 16 | static_cast<std::uint32_t>(p[3]) << 24;
}

void check_header(std::span<const std::uint8_t> h, std::uint64_t offset) {
  const std::string where = offset ? " at byte offset " + std::to_string(offset) : "";
  if (h[0] != kFrameMagic0 || h[1] != kFrameMagic1) {
    fail(ErrorCode::Format, "bad frame magic" + where);
  }
  if (h[2] != kFrameVersion) {
    fail(ErrorCode::UnsupportedVersion,
         "unsupported frame version " + std::to_string(h[2]) + where);
  }
}
} // namespace

std::vector<ElementDrive> quantize(const PhaseSolution &solution) {
  std::vector<ElementDrive> out(solution.phases.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double ph = std::floor(solution.phases[i] * 256.0 / kTwoPi + 0.5);
    const double am = std::floor(solution.amplitudes[i] * 255.0 + 0.5);
    out[i].phase = static_cast<std::uint8_t>(static_cast<long long>(ph) & 0xFF);
    out[i].amplitude = static_cast<std::uint8_t>(std::fmin(std::fmax(am, 0.0), 255.0));
  }
  return out;
}

PhaseSolution dequantize(std::span<const ElementDrive> drives) {
  PhaseSolution s;
  s.phases.resize(drives.size());
  s.amplitudes.resize(drives.size());
  for (std::size_t i = 0; i < drives.size(); ++i) {
    s.phases[i] = drives[i].phase * kTwoPi / 256.0;
    s.amplitudes[i] = drives[i].amplitude / 255.0;
  }
  return s;
}

void encode_frame_into(const CommandFrame &frame, std::vector<std::uint8_t> &out) {
  if (frame.elements.size() > 0xFFFF) {
    fail(ErrorCode::InvalidArgument, "frame element count exceeds 65535");
  }
  const auto count = static_cast<std::uint16_t>(frame.elements.size());
  out.clear();
  out.reserve(frame_size(count));
  out.push_back(kFrameMagic0);
  out.push_back(kFrameMagic1);
  out.push_back(kFrameVersion);
  for (int b = 0; b < 4; ++b) out.push_back(static_cast<std::uint8_t>(frame.timestamp >> (8 * b)));
  out.push_back(static_cast<std::uint8_t>(count & 0xFF));
  out.push_back(static_cast<std::uint8_t>(count >> 8));
  for (const auto &e : frame.elements) {
    out.push_back(e.phase);
    out.push_back(e.amplitude);
  }
}

std::vector<std::uint8_t> encode_frame(const CommandFrame &frame) {
  std::vector<std::uint8_t> out;
  encode_frame_into(frame, out);
  return out;
}

CommandFrame decode_frame(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < kFrameHeaderSize) {
    if (!bytes.empty() && bytes[0] != kFrameMagic0) fail(ErrorCode::Format, "bad frame magic");
    fail(ErrorCode::Truncated, "truncated frame header: expected " +
                                   std::to_string(kFrameHeaderSize) + " bytes, got " +
                                   std::to_string(bytes.size()));
  }
  check_header(bytes, 0);
  CommandFrame f;
  f.timestamp = read_u32(bytes.data() + 3);
  const std::size_t count = bytes[7] | static_cast<std::size_t>(bytes[8]) << 8;
  const std::size_t expected = frame_size(count);
  if (bytes.size() < expected) {
    fail(ErrorCode::Truncated, "truncated frame: expected " + std::to_string(expected) +
                                   " bytes, got " + std::to_string(bytes.size()));
  }
  if (bytes.size() > expected) {
    fail(ErrorCode::Format, "frame has " + std::to_string(bytes.size() - expected) +
                                " trailing bytes");
  }
  f.elements.resize(count);
  for (std::size_t i = 0; i < count; ++i) {
    f.elements[i] = {bytes[kFrameHeaderSize + 2 * i], bytes[kFrameHeaderSize + 2 * i + 1]};
  }
  return f;
}

FrameWriter::FrameWriter(const std::filesystem::path &path, bool append)
    : out_(path, std::ios::binary | (append ? std::ios::app : std::ios::trunc)), path_(path) {
  if (!out_) fail(ErrorCode::Io, "cannot open frame stream '" + path.string() + "'");
}

void FrameWriter::write(const CommandFrame &frame) {
  encode_frame_into(frame, buf_);
  out_.write(reinterpret_cast<const char *>(buf_.data()), static_cast<std::streamsize>(buf_.size()));
  if (!out_) fail(ErrorCode::Io, "write failed on '" + path_.string() + "'");
  ++count_;
}

void FrameWriter::flush() {
  out_.flush();
  if (!out_) fail(ErrorCode::Io, "flush failed on '" + path_.string() + "'");
}

FrameReader::FrameReader(const std::filesystem::path &path) : in_(path, std::ios::binary) {
  if (!in_) fail(ErrorCode::Io, "cannot open frame stream '" + path.string() + "'");
}

std::optional<CommandFrame> FrameReader::next() {
  std::uint8_t header[kFrameHeaderSize];
  in_.read(reinterpret_cast<char *>(header), kFrameHeaderSize);
  const auto got = static_cast<std::size_t>(in_.gcount());
  if (got == 0) return std::nullopt;
  const std::string where = " at byte offset " + std::to_string(offset_);
  if (got >= 1 && header[0] != kFrameMagic0) fail(ErrorCode::Format, "bad frame magic" + where);
  if (got < kFrameHeaderSize) {
    fail(ErrorCode::Truncated, "truncated frame header" + where + ": expected " +
                                   std::to_string(kFrameHeaderSize) + " bytes, got " +
                                   std::to_string(got));
  }
  if (header[1] != kFrameMagic1) fail(ErrorCode::Format, "bad frame magic" + where);
  if (header[2] != kFrameVersion) {
    fail(ErrorCode::UnsupportedVersion,
         "unsupported frame version " + std::to_string(header[2]) + where);
  }
  const std::size_t count = header[7] | static_cast<std::size_t>(header[8]) << 8;
  const std::size_t total = frame_size(count);
  buf_.assign(header, header + kFrameHeaderSize);
  buf_.resize(total);
  in_.read(reinterpret_cast<char *>(buf_.data() + kFrameHeaderSize),
           static_cast<std::streamsize>(total - kFrameHeaderSize));
  const auto body = static_cast<std::size_t>(in_.gcount());
  if (body < total - kFrameHeaderSize) {
    fail(ErrorCode::Truncated, "truncated frame" + where + ": expected " + std::to_string(total) +
                                   " bytes, got " + std::to_string(kFrameHeaderSize + body));
  }
  offset_ += total;
  return decode_frame(buf_);
}

std::vector<CommandFrame> read_stream(const std::filesystem::path &path) {
  FrameReader reader(path);
  std::vector<CommandFrame> frames;
  while (auto f = reader.next()) frames.push_back(std::move(*f));
  return frames;
}

} // namespace hf
