#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "tlunet/model/unet.hpp"

namespace tlunet::model {

/// Weight archive layout (all integers little-endian):
///
///   magic    8 bytes  "TLUWARC1"
///   count    u32
///   count × { name_len u32, name bytes (UTF-8),
///             ndim u32, dims i64[ndim],
///             values f64[prod(dims)] }
///
/// A sidecar `<archive>.manifest` lists one tensor per line as
/// `name<TAB>d0xd1x...<TAB>fnv1a64-hex` of the raw value bytes; when
/// present, read_archive() verifies it.
struct ArchiveTensor {
  std::string name;
  std::vector<std::int64_t> dims;
  std::vector<double> values;
};

class WeightArchive {
 public:
  std::vector<ArchiveTensor> tensors;

  const ArchiveTensor* find(const std::string& name) const;
  void add(ArchiveTensor t);
};

std::string format_dims(const std::vector<std::int64_t>& dims);
std::uint64_t checksum(const std::vector<double>& values);
std::string format_manifest(const WeightArchive& archive);

void write_archive(const std::filesystem::path& path, const WeightArchive& archive);
WeightArchive read_archive(const std::filesystem::path& path);

/// Tensors in scope with their full model names minus `strip_prefix`.
WeightArchive export_parameters(UNet& model, ParamScope scope, const std::string& strip_prefix = "");

/// Result of a pretrained load: encoder tensors replaced, and archive
/// entries the encoder has no use for (e.g. a classifier, counters).
struct LoadManifest {
  std::vector<std::string> loaded;
  std::vector<std::string> skipped;
};

/// Replaces every encoder tensor (parameters and batch-norm statistics)
/// with the archive entry of the same torchvision name (the model name
/// minus "encoder."). Names and shapes must match exactly; decoder and
/// heads are untouched.
LoadManifest load_pretrained(UNet& model, const WeightArchive& archive);
LoadManifest load_pretrained(UNet& model, const std::filesystem::path& source);

/// Copies every tensor of a full-model archive into the model.
void load_all(UNet& model, const WeightArchive& archive);

/// Checkpoint directory: model.cfg (ModelConfig as key-value text),
/// weights.tlw and weights.tlw.manifest.
void save_checkpoint(const std::filesystem::path& dir, UNet& model);
std::unique_ptr<UNet> load_checkpoint(const std::filesystem::path& dir);

}  // namespace tlunet::model
