#include "tlunet/model/config.hpp"

#include "tlunet/error.hpp"

namespace tlunet::model {

std::string to_string(EncoderFamily family) {
  return family == EncoderFamily::kResNet ? "resnet" : "densenet";
}

std::string to_string(InitMode mode) {
  return mode == InitMode::kRandom ? "random" : "pretrained";
}

EncoderFamily parse_encoder_family(const std::string& text) {
  if (text == "resnet") return EncoderFamily::kResNet;
  if (text == "densenet") return EncoderFamily::kDenseNet;
  throw ValidationError("unknown encoder family '" + text + "' (expected resnet or densenet)");
}

InitMode parse_init_mode(const std::string& text) {
  if (text == "random") return InitMode::kRandom;
  if (text == "pretrained") return InitMode::kPretrained;
  throw ValidationError("unknown init mode '" + text + "' (expected random or pretrained)");
}

void ModelConfig::validate() const {
  if (stages < 2 || stages > kMaxStages) {
    throw ConstructionError("stages must lie in 2.." + std::to_string(kMaxStages) + ", got " +
                            std::to_string(stages));
  }
  if (num_classes < 1) throw ConstructionError("num_classes must be >= 1");
  if (height < 1 || width < 1) throw ConstructionError("input shape must be positive");
  const int factor = 1 << stages;
  if (height % factor != 0 || width % factor != 0) {
    throw ConstructionError("input " + std::to_string(height) + "x" + std::to_string(width) +
                            " is not divisible by 2^" + std::to_string(stages));
  }
  if (encoder_width < 2 || encoder_width % 2 != 0) {
    throw ConstructionError("encoder_width must be an even number >= 2");
  }
  if (!decoder_channels.empty()) {
    if (static_cast<int>(decoder_channels.size()) != stages) {
      throw ConstructionError("decoder_channels needs one entry per stage");
    }
    for (int c : decoder_channels) {
      if (c < 1) throw ConstructionError("decoder channel widths must be positive");
    }
  }
  if (init == InitMode::kPretrained && (!pretrained_source || pretrained_source->empty())) {
    throw ValidationError("init mode 'pretrained' requires a pretrained source archive");
  }
}

std::vector<int> ModelConfig::resolved_decoder_channels() const {
  if (!decoder_channels.empty()) return decoder_channels;
  std::vector<int> out;
  for (int i = 0; i < stages; ++i) out.push_back(16 << (stages - 1 - i));
  return out;
}

KeyValues ModelConfig::to_kv() const {
  KeyValues kv;
  kv.set("encoder", to_string(encoder));
  kv.set("init", to_string(init));
  kv.set("stages", std::to_string(stages));
  kv.set("classes", std::to_string(num_classes));
  kv.set("height", std::to_string(height));
  kv.set("width", std::to_string(width));
  kv.set("encoder_width", std::to_string(encoder_width));
  if (!decoder_channels.empty()) {
    std::string dec;
    for (int c : decoder_channels) dec += (dec.empty() ? "" : ",") + std::to_string(c);
    kv.set("decoder_channels", dec);
  }
  kv.set("pretrained", pretrained_source ? pretrained_source->string() : "");
  kv.set("init_seed", std::to_string(seed));
  return kv;
}

ModelConfig ModelConfig::from_kv(const KeyValues& kv) {
  ModelConfig cfg;
  cfg.encoder = parse_encoder_family(kv.get_string("encoder", "resnet"));
  cfg.init = parse_init_mode(kv.get_string("init", "random"));
  cfg.stages = kv.get_int("stages", cfg.stages);
  cfg.num_classes = kv.get_int("classes", cfg.num_classes);
  cfg.height = kv.get_int("height", cfg.height);
  cfg.width = kv.get_int("width", cfg.width);
  cfg.encoder_width = kv.get_int("encoder_width", cfg.encoder_width);
  cfg.decoder_channels = kv.get_int_list("decoder_channels", {});
  if (auto p = kv.get("pretrained"); p && !p->empty()) cfg.pretrained_source = *p;
  cfg.seed = kv.get_u64("init_seed", cfg.seed);
  return cfg;
}

}  // namespace tlunet::model
