#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "tlunet/kv.hpp"

namespace tlunet::model {

enum class EncoderFamily { kResNet, kDenseNet };
enum class InitMode { kRandom, kPretrained };

std::string to_string(EncoderFamily family);
std::string to_string(InitMode mode);
EncoderFamily parse_encoder_family(const std::string& text);
InitMode parse_init_mode(const std::string& text);

/// U-Net construction parameters.
///
/// `encoder_width` is the stem width: 64 gives the full ResNet-18 (stage
/// widths 64/128/256/512) and the full DenseNet-121 (growth rate
/// encoder_width / 2 = 32). Smaller values give proportionally narrower
/// networks with identical topology.
struct ModelConfig {
  EncoderFamily encoder = EncoderFamily::kResNet;
  InitMode init = InitMode::kRandom;
  int stages = 5;
  int num_classes = 4;
  int height = 256;
  int width = 1600;
  int encoder_width = 64;
  /// One entry per decoder stage; empty means 16·2^(stages-1-i), i.e.
  /// (256, 128, 64, 32, 16) at five stages.
  std::vector<int> decoder_channels;
  std::optional<std::filesystem::path> pretrained_source;
  std::uint64_t seed = 0;

  static constexpr int kMaxStages = 5;

  /// Throws ConstructionError/ValidationError on an invalid configuration.
  void validate() const;
  std::vector<int> resolved_decoder_channels() const;

  KeyValues to_kv() const;
  /// Reads the keys written by to_kv(); absent keys keep their defaults.
  static ModelConfig from_kv(const KeyValues& kv);
};

}  // namespace tlunet::model
