#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <span>
#include <vector>

#include "acoustic.hpp"

namespace hf {

struct ElementDrive {
  std::uint8_t phase = 0;     // units of 2pi/256
  std::uint8_t amplitude = 0; // 0 off, 255 full
  friend bool operator==(const ElementDrive &, const ElementDrive &) = default;
};

struct CommandFrame {
  std::uint32_t timestamp = 0; // control ticks since stream start
  std::vector<ElementDrive> elements;
  friend bool operator==(const CommandFrame &, const CommandFrame &) = default;
};

inline constexpr std::uint8_t kFrameMagic0 = 0x48; // 'H'
inline constexpr std::uint8_t kFrameMagic1 = 0x41; // 'A'
inline constexpr std::uint8_t kFrameVersion = 0x01;
inline constexpr std::size_t kFrameHeaderSize = 9;

constexpr std::size_t frame_size(std::size_t element_count) {
  return kFrameHeaderSize + 2 * element_count;
}

// Round half up: phase byte = round(phi * 256 / 2pi) mod 256, amplitude byte = round(a * 255).
std::vector<ElementDrive> quantize(const PhaseSolution &solution);
PhaseSolution dequantize(std::span<const ElementDrive> drives);

std::vector<std::uint8_t> encode_frame(const CommandFrame &frame);
void encode_frame_into(const CommandFrame &frame, std::vector<std::uint8_t> &out);

// Strict: bad magic, version != 1, truncated body and trailing bytes all throw.
CommandFrame decode_frame(std::span<const std::uint8_t> bytes);

class FrameWriter {
public:
  // Truncates unless `append`.
  explicit FrameWriter(const std::filesystem::path &path, bool append = false);
  void write(const CommandFrame &frame);
  void flush();
  std::uint64_t frames_written() const { return count_; }

private:
  std::ofstream out_;
  std::filesystem::path path_;
  std::vector<std::uint8_t> buf_;
  std::uint64_t count_ = 0;
};

class FrameReader {
public:
  explicit FrameReader(const std::filesystem::path &path);
  // nullopt at a clean end of file; corruption throws with the byte offset.
  std::optional<CommandFrame> next();
  std::uint64_t offset() const { return offset_; }

private:
  std::ifstream in_;
  std::uint64_t offset_ = 0;
  std::vector<std::uint8_t> buf_;
};

std::vector<CommandFrame> read_stream(const std::filesystem::path &path);

} // namespace hf
