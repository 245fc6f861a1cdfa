// Copyright 2026 The tse Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#ifndef TSE_WAV_IO_HPP_
#define TSE_WAV_IO_HPP_

#include <string>

#include "tse/types.hpp"

namespace tse {

enum class WavEncoding { Pcm16, Float32 };

// Reads PCM 16-bit or IEEE float 32-bit RIFF/WAVE files, any channel count.
MultiChannelWave read_wav(const std::string& path);

// Same, but rejects files whose rate differs from expected_rate.
MultiChannelWave read_wav(const std::string& path, int expected_rate);

void write_wav(const std::string& path, const MultiChannelWave& wave,
               WavEncoding encoding = WavEncoding::Float32);

inline void write_wav(const std::string& path, const Wave& mono, int sample_rate,
                      WavEncoding encoding = WavEncoding::Float32) {
  write_wav(path, MultiChannelWave::from_mono(mono, sample_rate), encoding);
}

}  // namespace tse

#endif  // TSE_WAV_IO_HPP_
