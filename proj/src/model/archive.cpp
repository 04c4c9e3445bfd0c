#include "tlunet/model/archive.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>

#include <fmt/format.h>

#include "tlunet/error.hpp"
#include "tlunet/io.hpp"

namespace tlunet::model {

static_assert(std::endian::native == std::endian::little, "archive IO assumes little-endian");

namespace {

constexpr char kMagic[8] = {'T', 'L', 'U', 'W', 'A', 'R', 'C', '1'};
const std::string kEncoderPrefix = "encoder.";

template <typename T>
void put(std::ostream& out, T value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T take(std::istream& in, const std::filesystem::path& path) {
  T value{};
  in.read(reinterpret_cast<char*>(&value), sizeof(T));
  if (!in) throw IoError("truncated weight archive " + path.string());
  return value;
}

std::int64_t product(const std::vector<std::int64_t>& dims) {
  std::int64_t n = 1;
  for (auto d : dims) n *= d;
  return n;
}

}  // namespace

const ArchiveTensor* WeightArchive::find(const std::string& name) const {
  for (const auto& t : tensors) {
    if (t.name == name) return &t;
  }
  return nullptr;
}

void WeightArchive::add(ArchiveTensor t) {
  if (find(t.name) != nullptr) throw ValidationError("duplicate archive tensor " + t.name);
  if (product(t.dims) != static_cast<std::int64_t>(t.values.size())) {
    throw ValidationError("archive tensor " + t.name + " has inconsistent size");
  }
  tensors.push_back(std::move(t));
}

std::string format_dims(const std::vector<std::int64_t>& dims) {
  if (dims.empty()) return "scalar";
  std::string out;
  for (std::size_t i = 0; i < dims.size(); ++i) {
    if (i) out += 'x';
    out += std::to_string(dims[i]);
  }
  return out;
}

std::uint64_t checksum(const std::vector<double>& values) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  const auto* bytes = reinterpret_cast<const unsigned char*>(values.data());
  for (std::size_t i = 0; i < values.size() * sizeof(double); ++i) {
    h ^= bytes[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string format_manifest(const WeightArchive& archive) {
  std::string out;
  for (const auto& t : archive.tensors) {
    out += fmt::format("{}\t{}\t{:016x}\n", t.name, format_dims(t.dims), checksum(t.values));
  }
  return out;
}

void write_archive(const std::filesystem::path& path, const WeightArchive& archive) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write weight archive " + path.string());
  out.write(kMagic, sizeof(kMagic));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(archive.tensors.size()));
  for (const auto& t : archive.tensors) {
    put<std::uint32_t>(out, static_cast<std::uint32_t>(t.name.size()));
    out.write(t.name.data(), static_cast<std::streamsize>(t.name.size()));
    put<std::uint32_t>(out, static_cast<std::uint32_t>(t.dims.size()));
    for (auto d : t.dims) put<std::int64_t>(out, d);
    out.write(reinterpret_cast<const char*>(t.values.data()),
              static_cast<std::streamsize>(t.values.size() * sizeof(double)));
  }
  if (!out) throw IoError("write failed for " + path.string());
  out.close();
  write_text_file(path.string() + ".manifest", format_manifest(archive));
}

WeightArchive read_archive(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open weight archive " + path.string());
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw IoError("not a weight archive (bad magic): " + path.string());
  }
  WeightArchive archive;
  const auto count = take<std::uint32_t>(in, path);
  for (std::uint32_t i = 0; i < count; ++i) {
    ArchiveTensor t;
    const auto name_len = take<std::uint32_t>(in, path);
    if (name_len > 4096) throw IoError("corrupt tensor name in " + path.string());
    t.name.resize(name_len);
    in.read(t.name.data(), name_len);
    const auto ndim = take<std::uint32_t>(in, path);
    if (ndim > 8) throw IoError("corrupt tensor rank in " + path.string());
    for (std::uint32_t d = 0; d < ndim; ++d) {
      const auto dim = take<std::int64_t>(in, path);
      if (dim < 0) throw IoError("negative dimension in " + path.string());
      t.dims.push_back(dim);
    }
    t.values.resize(static_cast<std::size_t>(product(t.dims)));
    in.read(reinterpret_cast<char*>(t.values.data()),
            static_cast<std::streamsize>(t.values.size() * sizeof(double)));
    if (!in) throw IoError("truncated weight archive " + path.string());
    archive.add(std::move(t));
  }

  const std::filesystem::path manifest = path.string() + ".manifest";
  if (std::filesystem::exists(manifest)) {
    const std::string expected = read_text_file(manifest);
    if (expected != format_manifest(archive)) {
      throw IoError("weight archive does not match its manifest: " + path.string());
    }
  }
  return archive;
}

WeightArchive export_parameters(UNet& model, ParamScope scope, const std::string& strip_prefix) {
  WeightArchive archive;
  for (const nn::Parameter* p : model.parameters(scope)) {
    std::string name = p->name;
    if (!strip_prefix.empty() && name.starts_with(strip_prefix)) name.erase(0, strip_prefix.size());
    archive.add({name, p->dims, std::vector<double>(p->value.values().begin(), p->value.values().end())});
  }
  return archive;
}

LoadManifest load_pretrained(UNet& model, const WeightArchive& archive) {
  auto params = model.parameters(ParamScope::kEncoder);
  std::vector<std::string> missing;
  std::vector<std::string> mismatched;
  std::map<std::string, const ArchiveTensor*> matched;
  for (const nn::Parameter* p : params) {
    const std::string name = p->name.substr(kEncoderPrefix.size());
    const ArchiveTensor* t = archive.find(name);
    if (t == nullptr) {
      missing.push_back(name);
    } else if (t->dims != p->dims) {
      mismatched.push_back(name + " (archive " + format_dims(t->dims) + ", model " +
                           format_dims(p->dims) + ")");
    } else {
      matched[name] = t;
    }
  }
  auto join = [](const std::vector<std::string>& items) {
    std::string out;
    const std::size_t shown = std::min<std::size_t>(items.size(), 8);
    for (std::size_t i = 0; i < shown; ++i) out += (i ? ", " : "") + items[i];
    if (items.size() > shown) out += fmt::format(", ... ({} total)", items.size());
    return out;
  };
  if (!missing.empty()) throw LoadError("pretrained archive lacks encoder tensors: " + join(missing));
  if (!mismatched.empty()) throw LoadError("pretrained tensor shape mismatch: " + join(mismatched));

  LoadManifest manifest;
  for (nn::Parameter* p : params) {
    const std::string name = p->name.substr(kEncoderPrefix.size());
    const ArchiveTensor* t = matched.at(name);
    std::copy(t->values.begin(), t->values.end(), p->value.data());
    manifest.loaded.push_back(name);
  }
  for (const auto& t : archive.tensors) {
    if (!matched.contains(t.name)) manifest.skipped.push_back(t.name);
  }
  return manifest;
}

LoadManifest load_pretrained(UNet& model, const std::filesystem::path& source) {
  return load_pretrained(model, read_archive(source));
}

void load_all(UNet& model, const WeightArchive& archive) {
  for (nn::Parameter* p : model.parameters(ParamScope::kAll)) {
    const ArchiveTensor* t = archive.find(p->name);
    if (t == nullptr) throw LoadError("checkpoint lacks tensor " + p->name);
    if (t->dims != p->dims) throw LoadError("checkpoint tensor shape mismatch for " + p->name);
    std::copy(t->values.begin(), t->values.end(), p->value.data());
  }
}

void save_checkpoint(const std::filesystem::path& dir, UNet& model) {
  std::filesystem::create_directories(dir);
  write_text_file(dir / "model.cfg", model.config().to_kv().str());
  write_archive(dir / "weights.tlw", export_parameters(model, ParamScope::kAll));
}

std::unique_ptr<UNet> load_checkpoint(const std::filesystem::path& dir) {
  ModelConfig cfg = ModelConfig::from_kv(KeyValues::load(dir / "model.cfg"));
  auto model = build_model(cfg);
  load_all(*model, read_archive(dir / "weights.tlw"));
  model->set_training(false);
  return model;
}

}  // namespace tlunet::model
