// sonimap - RIFF/WAVE reader and float32 writer
// SPDX-License-Identifier: Apache-2.0

#ifndef SONIMAP_IO_WAV_HPP
#define SONIMAP_IO_WAV_HPP

#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "sonimap/audio.hpp"
#include "sonimap/error.hpp"

namespace sonimap::io {

namespace detail {

inline std::vector<std::uint8_t> read_file_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(path, 0, "cannot open file");
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  return bytes;
}

/// Bounds-checked little-endian cursor over an in-memory file.
class ByteReader {
public:
  ByteReader(const std::vector<std::uint8_t>& bytes, std::string path)
      : data_(bytes.data()), size_(bytes.size()), path_(std::move(path)) {}

  std::size_t pos() const { return pos_; }
  std::size_t remaining() const { return size_ - pos_; }

  void require(std::size_t n, const char* what) const {
    if (remaining() < n)
      throw TruncationError(path_, 0,
                            std::string("truncated ") + what + ": need " +
                                std::to_string(n) + " bytes at offset " +
                                std::to_string(pos_) + ", have " +
                                std::to_string(remaining()));
  }

  void skip(std::size_t n, const char* what) {
    require(n, what);
    pos_ += n;
  }

  template <typename T>
  T read(const char* what) {
    require(sizeof(T), what);
    T v;
    std::memcpy(&v, data_ + pos_, sizeof(T));
    pos_ += sizeof(T);
    return v;
  }

  std::string read_tag() {
    require(4, "chunk tag");
    std::string s(reinterpret_cast<const char*>(data_ + pos_), 4);
    pos_ += 4;
    return s;
  }

  const std::uint8_t* cursor() const { return data_ + pos_; }
  const std::string& path() const { return path_; }

private:
  const std::uint8_t* data_;
  std::size_t size_;
  std::size_t pos_ = 0;
  std::string path_;
};

inline const char* codec_name(std::uint16_t tag) {
  switch (tag) {
    case 2: return "ADPCM";
    case 6: return "A-law";
    case 7: return "mu-law";
    case 0xFFFE: return "WAVE_FORMAT_EXTENSIBLE";
    default: return "unknown";
  }
}

}  // namespace detail

/// Reads a PCM16 or IEEE-float32 WAV into floats in [-1, 1].
/// PCM16 scaling: value / 32768, so -32768 -> -1.0 and 32767 -> 32767/32768.
inline AudioBuffer read_wav(const std::string& path) {
  const auto bytes = detail::read_file_bytes(path);
  detail::ByteReader r(bytes, path);

  if (r.read_tag() != "RIFF") throw ParseError(path, 0, "not a RIFF file");
  r.read<std::uint32_t>("RIFF size");
  if (r.read_tag() != "WAVE") throw ParseError(path, 0, "not a WAVE file");

  bool have_fmt = false;
  std::uint16_t format_tag = 0, channels = 0, bits = 0;
  std::uint32_t sample_rate = 0;
  AudioBuffer buf;

  while (r.remaining() >= 8) {
    const std::string tag = r.read_tag();
    const std::uint32_t chunk_size = r.read<std::uint32_t>("chunk size");

    if (tag == "fmt ") {
      if (chunk_size < 16) throw ParseError(path, 0, "fmt chunk too small");
      r.require(chunk_size, "fmt chunk");
      format_tag = r.read<std::uint16_t>("format tag");
      channels = r.read<std::uint16_t>("channel count");
      sample_rate = r.read<std::uint32_t>("sample rate");
      r.read<std::uint32_t>("byte rate");
      r.read<std::uint16_t>("block align");
      bits = r.read<std::uint16_t>("bits per sample");
      r.skip((chunk_size - 16) + (chunk_size & 1), "fmt chunk tail");
      have_fmt = true;
    } else if (tag == "data") {
      if (!have_fmt) throw ParseError(path, 0, "data chunk before fmt chunk");
      r.require(chunk_size, "data chunk");
      if (format_tag != 1 && format_tag != 3)
        throw UnsupportedCodecError(
            path, 0,
            "unsupported codec: format tag " + std::to_string(format_tag) +
                " (" + detail::codec_name(format_tag) + ")");
      if (channels != 1 && channels != 2)
        throw ParseError(path, 0, "unsupported channel count " +
                                      std::to_string(channels));
      if (sample_rate == 0) throw ParseError(path, 0, "zero sample rate");
      if (format_tag == 1 && bits != 16)
        throw UnsupportedCodecError(
            path, 0, "unsupported PCM bit depth " + std::to_string(bits));
      if (format_tag == 3 && bits != 32)
        throw UnsupportedCodecError(
            path, 0, "unsupported float bit depth " + std::to_string(bits));

      const std::size_t bytes_per = bits / 8;
      const std::size_t count = chunk_size / bytes_per;
      buf.sample_rate = static_cast<int>(sample_rate);
      buf.channels = channels;
      buf.samples.resize(count - count % channels);
      const std::uint8_t* p = r.cursor();
      if (format_tag == 1) {
        for (std::size_t i = 0; i < buf.samples.size(); ++i) {
          std::int16_t v;
          std::memcpy(&v, p + i * 2, 2);
          buf.samples[i] = static_cast<float>(v) / 32768.0f;
        }
      } else {
        for (std::size_t i = 0; i < buf.samples.size(); ++i) {
          float v;
          std::memcpy(&v, p + i * 4, 4);
          buf.samples[i] = v;
        }
      }
      return buf;
    } else {
      r.skip(chunk_size + (chunk_size & 1), "chunk body");  // chunks are word-aligned
    }
  }
  throw ParseError(path, 0, have_fmt ? "missing data chunk"
                                     : "missing fmt chunk");
}

/// Writes float32 WAV. Finite samples survive a read_wav round trip exactly.
inline void write_wav(const std::string& path, const AudioBuffer& buf) {
  if (buf.channels != 1 && buf.channels != 2)
    throw Error("write_wav: channels must be 1 or 2");
  if (buf.sample_rate <= 0) throw Error("write_wav: invalid sample rate");

  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("write_wav: cannot open " + path);

  const std::uint32_t data_size =
      static_cast<std::uint32_t>(buf.samples.size() * 4);
  const std::uint16_t channels = static_cast<std::uint16_t>(buf.channels);
  const std::uint32_t sr = static_cast<std::uint32_t>(buf.sample_rate);

  auto put16 = [&](std::uint16_t v) { out.write(reinterpret_cast<char*>(&v), 2); };
  auto put32 = [&](std::uint32_t v) { out.write(reinterpret_cast<char*>(&v), 4); };

  out.write("RIFF", 4);
  put32(4 + 26 + 12 + 8 + data_size);
  out.write("WAVE", 4);
  out.write("fmt ", 4);
  put32(18);
  put16(3);  // IEEE float
  put16(channels);
  put32(sr);
  put32(sr * channels * 4);
  put16(channels * 4);
  put16(32);
  put16(0);  // cbSize
  out.write("fact", 4);
  put32(4);
  put32(static_cast<std::uint32_t>(buf.frames()));
  out.write("data", 4);
  put32(data_size);
  out.write(reinterpret_cast<const char*>(buf.samples.data()), data_size);
  if (!out) throw Error("write_wav: write failed for " + path);
}

}  // namespace sonimap::io

#endif  // SONIMAP_IO_WAV_HPP
