#pragma once

#include <map>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "modesim/types.hpp"

namespace modesim {

// Attribute universe with its bijection onto {1..|universe|} and the
// per-agent piecewise-constant attribute assignment. Labels are opaque
// tokens; the numeric index exists only so order-statistic machinery can
// run on them, and its order is arbitrary.
class AttributeTable {
 public:
  AttributeTable() = default;
  AttributeTable(std::vector<std::string> universe,
                 std::map<int, std::string> initial_labels);

  int size() const { return static_cast<int>(universe_.size()); }
  const std::vector<std::string>& universe() const { return universe_; }
  bool contains(const std::string& label) const { return index_.count(label) > 0; }

  // l(label), 1-based. Throws ConfigError for labels outside the universe.
  int l_of(const std::string& label) const;
  // l^{-1}(index).
  const std::string& label_of(int index) const;

  const std::string& label_at(int agent, Scalar t) const;
  int l_at(int agent, Scalar t) const { return l_of(label_at(agent, t)); }
  bool has_agent(int agent) const { return agent_attr_.count(agent) > 0; }

  // Appends a change at time t; labels stay piecewise constant.
  void set_attribute(int agent, Scalar t, const std::string& label);

  std::vector<int> agents() const;

  // Bijectivity of the index plus membership of every assigned label.
  void validate() const;

 private:
  std::vector<std::string> universe_;
  std::unordered_map<std::string, int> index_;
  // agent -> (start_time, label) history, sorted by start_time.
  std::map<int, std::vector<std::pair<Scalar, std::string>>> agent_attr_;
};

}  // namespace modesim
