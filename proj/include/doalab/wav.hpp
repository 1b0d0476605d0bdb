#pragma once

#include <filesystem>
#include <vector>

#include "doalab/signal.hpp"

namespace doalab::wav {

enum class SampleFormat { Pcm16, Float32 };

/// Decoded RIFF/WAVE contents; `channels` holds one MonoSignal per channel.
struct WavData {
  std::vector<MonoSignal> channels;
  SampleFormat format = SampleFormat::Pcm16;
};

/// Reads 16-bit PCM or 32-bit IEEE-float WAV files with any channel count.
[[nodiscard]] WavData read(const std::filesystem::path& path);
/// Reads a file with one or two channels; mono input is duplicated onto both channels.
[[nodiscard]] StereoSignal read_stereo(const std::filesystem::path& path);

void write(const std::filesystem::path& path, const std::vector<MonoSignal>& channels,
           SampleFormat format = SampleFormat::Float32);
void write(const std::filesystem::path& path, const StereoSignal& signal,
           SampleFormat format = SampleFormat::Float32);

}  // namespace doalab::wav
