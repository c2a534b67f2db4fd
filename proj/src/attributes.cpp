#include "modesim/attributes.hpp"

#include <algorithm>
#include <set>

namespace modesim {

AttributeTable::AttributeTable(std::vector<std::string> universe,
                               std::map<int, std::string> initial_labels)
    : universe_(std::move(universe)) {
  for (int i = 0; i < static_cast<int>(universe_.size()); ++i) {
    if (!index_.emplace(universe_[i], i + 1).second) {
      throw ConfigError("attribute universe has duplicate label '" + universe_[i] + "'");
    }
  }
  for (auto& [agent, label] : initial_labels) {
    set_attribute(agent, 0.0, label);
  }
}

int AttributeTable::l_of(const std::string& label) const {
  auto it = index_.find(label);
  if (it == index_.end()) {
    throw ConfigError("unknown attribute '" + label + "'");
  }
  return it->second;
}

const std::string& AttributeTable::label_of(int index) const {
  if (index < 1 || index > size()) {
    throw ConfigError("attribute index " + std::to_string(index) + " out of range");
  }
  return universe_[static_cast<std::size_t>(index - 1)];
}

const std::string& AttributeTable::label_at(int agent, Scalar t) const {
  auto it = agent_attr_.find(agent);
  if (it == agent_attr_.end() || it->second.empty()) {
    throw ConfigError("agent " + std::to_string(agent) + " has no attribute");
  }
  const auto& hist = it->second;
  const std::string* best = &hist.front().second;
  for (const auto& [start, label] : hist) {
    if (start <= t) best = &label;
  }
  return *best;
}

void AttributeTable::set_attribute(int agent, Scalar t, const std::string& label) {
  if (!contains(label)) {
    throw ConfigError("unknown attribute '" + label + "'");
  }
  auto& hist = agent_attr_[agent];
  if (!hist.empty() && t < hist.back().first) {
    throw ConfigError("attribute history must be appended in time order");
  }
  hist.emplace_back(t, label);
}

std::vector<int> AttributeTable::agents() const {
  std::vector<int> out;
  out.reserve(agent_attr_.size());
  for (const auto& [agent, hist] : agent_attr_) out.push_back(agent);
  return out;
}

void AttributeTable::validate() const {
  std::set<int> seen;
  for (const auto& [label, idx] : index_) {
    if (idx < 1 || idx > size() || !seen.insert(idx).second) {
      throw ConfigError("attribute index map is not a bijection onto 1.." +
                        std::to_string(size()));
    }
  }
  if (static_cast<int>(seen.size()) != size()) {
    throw ConfigError("attribute index map does not cover 1.." + std::to_string(size()));
  }
  for (const auto& [agent, hist] : agent_attr_) {
    for (const auto& [t, label] : hist) {
      if (!contains(label)) {
        throw ConfigError("agent " + std::to_string(agent) +
                          " carries label outside the universe: '" + label + "'");
      }
    }
  }
}

}  // namespace modesim
