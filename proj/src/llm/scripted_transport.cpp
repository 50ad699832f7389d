#include "preduce/llm/scripted_transport.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

namespace preduce::llm {

using json = nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read fixture " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::vector<std::string> completions_from(const json& item, const fs::path& dir) {
  if (item.is_array()) return item.get<std::vector<std::string>>();
  if (!item.is_string()) throw std::runtime_error("fixture response must be a list or a file name");
  fs::path file = dir / item.get<std::string>();
  if (file.extension() == ".json") {
    auto doc = json::parse(slurp(file));
    if (!doc.is_array()) throw std::runtime_error("fixture " + file.string() + " must hold a JSON list");
    return doc.get<std::vector<std::string>>();
  }
  return {slurp(file)};
}

}  // namespace

ScriptedTransport::ScriptedTransport(std::vector<Entry> entries)
    : entries_(std::move(entries)), cursor_(entries_.size(), 0) {}

std::shared_ptr<ScriptedTransport> ScriptedTransport::from_directory(const fs::path& dir) {
  fs::path manifest = dir / "manifest.json";
  if (!fs::is_regular_file(manifest)) throw std::runtime_error("no manifest.json in " + dir.string());
  std::vector<Entry> entries;
  try {
    auto doc = json::parse(slurp(manifest));
    for (const auto& e : doc.at("entries")) {
      Entry entry;
      entry.match = e.value("match", "");
      entry.cycle = e.value("cycle", false);
      for (const auto& r : e.at("responses")) entry.responses.push_back(completions_from(r, dir));
      entries.push_back(std::move(entry));
    }
  } catch (const json::exception& e) {
    throw std::runtime_error("invalid fixture manifest " + manifest.string() + ": " + e.what());
  }
  return std::make_shared<ScriptedTransport>(std::move(entries));
}

LlmResponse ScriptedTransport::send(const LlmRequest& request) {
  std::lock_guard<std::mutex> lock(mutex_);
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    const auto& entry = entries_[i];
    if (request.user_prompt.find(entry.match) == std::string::npos) continue;
    if (cursor_[i] >= entry.responses.size()) {
      if (!entry.cycle || entry.responses.empty()) {
        throw TransportError("fixture underflow (entry matching \"" + entry.match + "\")");
      }
      cursor_[i] = 0;
    }
    const auto& completions = entry.responses[cursor_[i]++];
    if (completions.size() < static_cast<std::size_t>(request.n)) {
      throw TransportError("fixture has " + std::to_string(completions.size()) + " completions, " +
                           std::to_string(request.n) + " requested");
    }
    ++served_;
    LlmResponse out;
    out.completions.assign(completions.begin(), completions.begin() + request.n);
    out.usage.prompt_tokens = (request.system_prompt.size() + request.user_prompt.size() + 3) / 4;
    for (const auto& c : out.completions) out.usage.completion_tokens += (c.size() + 3) / 4;
    return out;
  }
  throw TransportError("no fixture matches the prompt");
}

std::size_t ScriptedTransport::served() const {
  std::lock_guard<std::mutex> lock(mutex_);
  return served_;
}

}  // namespace preduce::llm
