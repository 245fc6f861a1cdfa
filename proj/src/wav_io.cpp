// Copyright 2026 The tse Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "tse/wav_io.hpp"

#include <algorithm>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <vector>

namespace tse {

namespace {

constexpr uint16_t kFormatPcm = 1;
constexpr uint16_t kFormatFloat = 3;
constexpr uint16_t kFormatExtensible = 0xFFFE;

template <typename T>
T read_le(std::istream& is) {
  T v{};
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  return v;
}

template <typename T>
void write_le(std::ostream& os, T v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

void write_tag(std::ostream& os, const char* tag) { os.write(tag, 4); }

}  // namespace

MultiChannelWave read_wav(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error(ErrorCode::BadFile, "cannot open " + path);

  char tag[5] = {0};
  is.read(tag, 4);
  if (std::strncmp(tag, "RIFF", 4) != 0)
    throw Error(ErrorCode::BadFile, path + ": not a RIFF file");
  read_le<uint32_t>(is);  // riff size
  is.read(tag, 4);
  if (std::strncmp(tag, "WAVE", 4) != 0)
    throw Error(ErrorCode::BadFile, path + ": not a WAVE file");

  uint16_t format = 0, channels = 0, bits = 0;
  uint32_t rate = 0;
  std::vector<char> data;
  bool have_fmt = false, have_data = false;

  while (is.read(tag, 4)) {
    uint32_t chunk_size = read_le<uint32_t>(is);
    if (std::strncmp(tag, "fmt ", 4) == 0) {
      format = read_le<uint16_t>(is);
      channels = read_le<uint16_t>(is);
      rate = read_le<uint32_t>(is);
      read_le<uint32_t>(is);  // byte rate
      read_le<uint16_t>(is);  // block align
      bits = read_le<uint16_t>(is);
      if (chunk_size > 16) {
        if (format == kFormatExtensible && chunk_size >= 40) {
          read_le<uint16_t>(is);  // cbSize
          read_le<uint16_t>(is);  // valid bits
          read_le<uint32_t>(is);  // channel mask
          format = read_le<uint16_t>(is);  // subformat GUID starts with the tag
          is.ignore(14);
          is.ignore(chunk_size - 40);
        } else {
          is.ignore(chunk_size - 16);
        }
      }
      have_fmt = true;
    } else if (std::strncmp(tag, "data", 4) == 0) {
      data.resize(chunk_size);
      is.read(data.data(), chunk_size);
      have_data = true;
    } else {
      is.ignore(chunk_size + (chunk_size & 1));
    }
  }
  if (!have_fmt || !have_data)
    throw Error(ErrorCode::BadFile, path + ": missing fmt or data chunk");
  if (channels == 0 || rate == 0)
    throw Error(ErrorCode::BadFile, path + ": bad fmt chunk");

  const bool pcm16 = (format == kFormatPcm && bits == 16);
  const bool f32 = (format == kFormatFloat && bits == 32);
  if (!pcm16 && !f32)
    throw Error(ErrorCode::BadFile, path + ": only PCM16 and float32 are supported");

  const size_t bytes_per_sample = bits / 8;
  const size_t total = data.size() / (bytes_per_sample * channels);

  MultiChannelWave wave;
  wave.sample_rate = static_cast<int>(rate);
  wave.samples.resize(channels, total);
  const char* p = data.data();
  for (size_t i = 0; i < total; ++i) {
    for (int c = 0; c < channels; ++c) {
      if (pcm16) {
        int16_t v;
        std::memcpy(&v, p, 2);
        wave.samples(c, i) = static_cast<Real>(v) / 32768.0;
        p += 2;
      } else {
        float v;
        std::memcpy(&v, p, 4);
        wave.samples(c, i) = static_cast<Real>(v);
        p += 4;
      }
    }
  }
  return wave;
}

MultiChannelWave read_wav(const std::string& path, int expected_rate) {
  MultiChannelWave wave = read_wav(path);
  if (wave.sample_rate != expected_rate)
    throw Error(ErrorCode::BadFile,
                path + ": sample rate " + std::to_string(wave.sample_rate) +
                    " != expected " + std::to_string(expected_rate) +
                    " (resampling not supported)");
  return wave;
}

void write_wav(const std::string& path, const MultiChannelWave& wave, WavEncoding encoding) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error(ErrorCode::BadFile, "cannot write " + path);

  const int channels = wave.channels();
  const Eigen::Index n = wave.num_samples();
  const uint16_t bits = encoding == WavEncoding::Pcm16 ? 16 : 32;
  const uint16_t block = static_cast<uint16_t>(channels * bits / 8);
  const uint32_t data_size = static_cast<uint32_t>(n * block);

  write_tag(os, "RIFF");
  write_le<uint32_t>(os, 36 + data_size);
  write_tag(os, "WAVE");
  write_tag(os, "fmt ");
  write_le<uint32_t>(os, 16);
  write_le<uint16_t>(os, encoding == WavEncoding::Pcm16 ? kFormatPcm : kFormatFloat);
  write_le<uint16_t>(os, static_cast<uint16_t>(channels));
  write_le<uint32_t>(os, static_cast<uint32_t>(wave.sample_rate));
  write_le<uint32_t>(os, static_cast<uint32_t>(wave.sample_rate) * block);
  write_le<uint16_t>(os, block);
  write_le<uint16_t>(os, bits);
  write_tag(os, "data");
  write_le<uint32_t>(os, data_size);

  for (Eigen::Index i = 0; i < n; ++i) {
    for (int c = 0; c < channels; ++c) {
      const Real v = wave.samples(c, i);
      if (encoding == WavEncoding::Pcm16) {
        const Real clipped = std::clamp(v, -1.0, 1.0);
        write_le<int16_t>(os, static_cast<int16_t>(std::lround(clipped * 32767.0)));
      } else {
        write_le<float>(os, static_cast<float>(v));
      }
    }
  }
}

}  // namespace tse
