#pragma once

#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>

#include <json.hpp>

#include "poolscope/events.hpp"

namespace poolscope {

/// Storage is abstracted to a string key-value surface; datasets serialize to
/// their canonical JSONL form so a round-trip is byte-lossless.
class KeyValueStore {
 public:
  virtual ~KeyValueStore() = default;
  virtual void put(const std::string& key, const std::string& value) = 0;
  virtual std::optional<std::string> get(const std::string& key) = 0;
};

class MemoryKvStore final : public KeyValueStore {
 public:
  void put(const std::string& key, const std::string& value) override { data_[key] = value; }
  std::optional<std::string> get(const std::string& key) override {
    auto it = data_.find(key);
    if (it == data_.end()) return std::nullopt;
    return it->second;
  }

 private:
  std::map<std::string, std::string> data_;
};

/// One file per key under a root directory. Keys are used as file names
/// verbatim, so callers should stick to path-safe keys.
class DirectoryKvStore final : public KeyValueStore {
 public:
  explicit DirectoryKvStore(std::filesystem::path root) : root_(std::move(root)) {
    std::filesystem::create_directories(root_);
  }

  void put(const std::string& key, const std::string& value) override {
    std::ofstream out(root_ / key, std::ios::binary | std::ios::trunc);
    if (!out) throw RuntimeError("cannot write store entry: " + key);
    out << value;
    if (!out.flush()) throw RuntimeError("write failed for store entry: " + key);
  }

  std::optional<std::string> get(const std::string& key) override {
    std::ifstream in(root_ / key, std::ios::binary);
    if (!in) return std::nullopt;
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
  }

 private:
  std::filesystem::path root_;
};

inline std::string serialize_dataset(const EventDataset& dataset) {
  std::string out = "{\"pool\":\"" + dataset.pool_address + "\"}\n";
  for (const auto& e : dataset.events) {
    out += event_to_jsonl(e);
    out += '\n';
  }
  return out;
}

inline EventDataset deserialize_dataset(const std::string& blob) {
  std::istringstream in(blob);
  std::string line;
  if (!std::getline(in, line)) throw ValidationError("empty dataset blob");
  const std::string pool = nlohmann::json::parse(line).at("pool").get<std::string>();
  std::vector<PoolEvent> events;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    events.push_back(event_from_json(nlohmann::json::parse(line)));
  }
  return EventDataset::build(pool, std::move(events));
}

inline void persist_dataset(const EventDataset& dataset, KeyValueStore& store, const std::string& key) {
  store.put(key, serialize_dataset(dataset));
}

inline EventDataset load_dataset(KeyValueStore& store, const std::string& key) {
  auto blob = store.get(key);
  if (!blob) throw RuntimeError("dataset not found under key: " + key);
  return deserialize_dataset(*blob);
}

}  // namespace poolscope
