#include "treemil/checkpoint.hpp"

#include <fstream>

#include <json.hpp>

#include "treemil/errors.hpp"

namespace treemil {

namespace {
constexpr const char* kFormat = "treemil.checkpoint";
constexpr int kVersion = 1;
}  // namespace

std::string checkpoint_to_string(const Checkpoint& ckpt) {
  nlohmann::ordered_json j;
  j["format"] = kFormat;
  j["version"] = kVersion;
  nlohmann::ordered_json meta = nlohmann::ordered_json::object();
  for (const auto& [k, v] : ckpt.meta) meta[k] = v;
  j["meta"] = std::move(meta);
  nlohmann::ordered_json params = nlohmann::ordered_json::object();
  for (const auto& [name, tensor] : ckpt.params) {
    nlohmann::ordered_json entry;
    entry["shape"] = tensor.shape();
    entry["data"] = tensor.vec();
    params[name] = std::move(entry);
  }
  j["params"] = std::move(params);
  return j.dump();
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open checkpoint for writing: " + path.string());
  out << checkpoint_to_string(ckpt) << "\n";
  if (!out) throw IoError("failed while writing checkpoint: " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint: " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("invalid checkpoint JSON in " + path.string() + ": " + e.what());
  }
  if (!j.is_object() || j.value("format", "") != kFormat) {
    throw ParseError("not a treemil checkpoint: " + path.string());
  }
  if (j.value("version", -1) != kVersion) {
    throw ParseError("unsupported checkpoint version in " + path.string());
  }
  Checkpoint ckpt;
  for (const auto& [k, v] : j.at("meta").items()) ckpt.meta[k] = v.get<std::string>();
  for (const auto& [name, entry] : j.at("params").items()) {
    Shape shape = entry.at("shape").get<Shape>();
    std::vector<double> data = entry.at("data").get<std::vector<double>>();
    ckpt.params.emplace(name, Tensor::from(std::move(shape), std::move(data)));
  }
  return ckpt;
}

void ParamRegistry::add(std::string name, NodePtr p) {
  items_.emplace_back(std::move(name), std::move(p));
}

void ParamRegistry::extend(const ParamRegistry& other) {
  items_.insert(items_.end(), other.items_.begin(), other.items_.end());
}

std::vector<NodePtr> ParamRegistry::nodes() const {
  std::vector<NodePtr> out;
  out.reserve(items_.size());
  for (const auto& [name, p] : items_) out.push_back(p);
  return out;
}

ParamMap ParamRegistry::snapshot() const {
  ParamMap map;
  for (const auto& [name, p] : items_) {
    if (!map.emplace(name, p->value).second) {
      throw ContractError("duplicate parameter name: " + name);
    }
  }
  return map;
}

void ParamRegistry::restore(const ParamMap& values) {
  for (auto& [name, p] : items_) {
    auto it = values.find(name);
    if (it == values.end()) throw ContractError("checkpoint missing parameter: " + name);
    if (!it->second.same_shape(p->value)) {
      throw ContractError("checkpoint shape mismatch for " + name + ": expected " +
                          p->value.shape_string() + ", got " + it->second.shape_string());
    }
    p->value = it->second;
  }
}

}  // namespace treemil
