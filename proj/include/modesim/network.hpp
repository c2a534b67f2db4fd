#pragma once

#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "modesim/attributes.hpp"
#include "modesim/types.hpp"

namespace modesim {

enum class EventKind { EdgeAdd, EdgeRemove, NodeJoin, NodeLeave, AttributeChange };

std::string to_string(EventKind kind);
EventKind event_kind_from_string(const std::string& s);

struct ScenarioEvent {
  Scalar time = 0.0;
  EventKind kind = EventKind::EdgeAdd;
  int node = 0;                      // join / leave / attribute-change
  std::pair<int, int> edge{0, 0};    // edge-add / edge-remove
  std::vector<int> neighbors;        // join: attachment edges
  std::string attribute;             // join / attribute-change
  std::optional<Scalar> init;        // join: local protocol initialization
  std::optional<Interval> init_box;  // admissible box for that initialization
};

// One constant-topology piece of the timeline.
struct Segment {
  Scalar start_time = 0.0;
  std::set<int> active;                      // nodes present in the network
  std::set<std::pair<int, int>> edges;       // undirected, stored with first < second
  int leader = 1;
  std::vector<int> component;                // component of interest, sorted; holds the leader

  bool has_edge(int i, int j) const;
  int degree(int i) const;
  std::vector<int> neighbors_of(int i) const;
  bool in_component(int i) const;
};

enum class LeaderPolicy { Fixed, LowestActiveId };

// Piecewise-constant undirected network over the potential node set
// {1..n_bar}, together with the attribute table and the event schedule.
// Values are immutable; apply_event returns a new timeline.
class NetworkTimeline {
 public:
  NetworkTimeline() = default;
  NetworkTimeline(int n_bar, Segment first, AttributeTable attrs,
                  LeaderPolicy policy = LeaderPolicy::Fixed);

  int n_bar() const { return n_bar_; }
  const AttributeTable& attrs() const { return attrs_; }
  const std::vector<Segment>& segments() const { return segments_; }
  const std::vector<ScenarioEvent>& events() const { return events_; }
  LeaderPolicy leader_policy() const { return policy_; }

  const Segment& segment(int i) const { return segments_.at(static_cast<std::size_t>(i)); }
  const Segment& segment_at(Scalar t) const;
  int n_segments() const { return static_cast<int>(segments_.size()); }

  // Validates admissibility, appends the new segment, and re-resolves the
  // component of interest. Throws AdmissibilityError with a reason.
  NetworkTimeline apply_event(const ScenarioEvent& ev) const;

  NetworkTimeline with_policy(LeaderPolicy policy) const {
    NetworkTimeline copy = *this;
    copy.policy_ = policy;
    return copy;
  }

 private:
  int n_bar_ = 0;
  std::vector<Segment> segments_;
  std::vector<ScenarioEvent> events_;
  AttributeTable attrs_;
  LeaderPolicy policy_ = LeaderPolicy::Fixed;
};

// Connected component of `start` within the active node set.
std::vector<int> connected_component(const Segment& seg, int start);

// Cycle graph on {1..n}, leader 1, one label per node. n_bar defaults to n.
NetworkTimeline build_ring(int n, const std::vector<std::string>& labels,
                           std::vector<std::string> universe = {}, int n_bar = 0);
NetworkTimeline build_path(int n, const std::vector<std::string>& labels,
                           std::vector<std::string> universe = {}, int n_bar = 0);
NetworkTimeline build_complete(int n, const std::vector<std::string>& labels,
                               std::vector<std::string> universe = {}, int n_bar = 0);
NetworkTimeline build_edge_list(int n, const std::vector<std::pair<int, int>>& edges,
                                const std::vector<std::string>& labels,
                                std::vector<std::string> universe = {}, int n_bar = 0);
// Random tree plus `extra_edges` extra edges; connected by construction.
NetworkTimeline build_random_connected(int n, int extra_edges, std::uint64_t seed,
                                       const std::vector<std::string>& labels,
                                       std::vector<std::string> universe = {}, int n_bar = 0);

// Graph Laplacian of the subgraph induced on `nodes` (sorted agent ids).
Matrix laplacian(const Segment& seg, const std::vector<int>& nodes);

struct DwellGap {
  Scalar t_prev = 0.0;
  Scalar t_next = 0.0;
  Scalar gap = 0.0;
  bool pass = true;
};

struct DwellReport {
  std::vector<DwellGap> gaps;
  bool all_pass = true;  // vacuously true with fewer than two events
};

// Flags every consecutive event pair closer than required_dwell.
DwellReport check_dwell(const NetworkTimeline& timeline, Scalar required_dwell);

}  // namespace modesim
