#include "modesim/network.hpp"

#include <algorithm>
#include <deque>
#include <map>

namespace modesim {

namespace {

std::pair<int, int> ordered(int i, int j) { return i < j ? std::make_pair(i, j) : std::make_pair(j, i); }

void validate_segment(int n_bar, const Segment& seg) {
  for (int node : seg.active) {
    if (node < 1 || node > n_bar) {
      throw AdmissibilityError("node " + std::to_string(node) + " outside potential set 1.." +
                               std::to_string(n_bar));
    }
  }
  for (const auto& [i, j] : seg.edges) {
    if (i == j) throw AdmissibilityError("self-loop at node " + std::to_string(i));
    if (i > j) throw AdmissibilityError("edge pair stored out of order");
    if (!seg.active.count(i) || !seg.active.count(j)) {
      throw AdmissibilityError("edge (" + std::to_string(i) + "," + std::to_string(j) +
                               ") incident to an inactive node");
    }
  }
  if (!seg.active.count(seg.leader)) {
    throw AdmissibilityError("leader " + std::to_string(seg.leader) + " is not active");
  }
}

void resolve_component(Segment& seg) {
  seg.component = connected_component(seg, seg.leader);
}

std::map<int, std::string> initial_label_map(const std::vector<std::string>& labels) {
  std::map<int, std::string> out;
  for (int i = 0; i < static_cast<int>(labels.size()); ++i) out[i + 1] = labels[i];
  return out;
}

std::vector<std::string> infer_universe(const std::vector<std::string>& labels) {
  std::vector<std::string> universe;
  for (const auto& label : labels) {
    if (std::find(universe.begin(), universe.end(), label) == universe.end()) {
      universe.push_back(label);
    }
  }
  return universe;
}

NetworkTimeline assemble(int n, int n_bar, std::set<std::pair<int, int>> edges,
                         const std::vector<std::string>& labels,
                         std::vector<std::string> universe) {
  if (static_cast<int>(labels.size()) != n) {
    throw ConfigError("need exactly " + std::to_string(n) + " attribute labels, got " +
                      std::to_string(labels.size()));
  }
  if (n_bar == 0) n_bar = n;
  if (universe.empty()) universe = infer_universe(labels);
  Segment seg;
  seg.start_time = 0.0;
  for (int i = 1; i <= n; ++i) seg.active.insert(i);
  seg.edges = std::move(edges);
  seg.leader = 1;
  AttributeTable attrs(std::move(universe), initial_label_map(labels));
  attrs.validate();
  return NetworkTimeline(n_bar, std::move(seg), std::move(attrs));
}

}  // namespace

std::string to_string(EventKind kind) {
  switch (kind) {
    case EventKind::EdgeAdd: return "edge-add";
    case EventKind::EdgeRemove: return "edge-remove";
    case EventKind::NodeJoin: return "node-join";
    case EventKind::NodeLeave: return "node-leave";
    case EventKind::AttributeChange: return "attribute-change";
  }
  return "?";
}

EventKind event_kind_from_string(const std::string& s) {
  if (s == "edge-add") return EventKind::EdgeAdd;
  if (s == "edge-remove") return EventKind::EdgeRemove;
  if (s == "node-join") return EventKind::NodeJoin;
  if (s == "node-leave") return EventKind::NodeLeave;
  if (s == "attribute-change") return EventKind::AttributeChange;
  throw ConfigError("unknown event kind '" + s + "'");
}

bool Segment::has_edge(int i, int j) const { return edges.count(ordered(i, j)) > 0; }

int Segment::degree(int i) const {
  int d = 0;
  for (const auto& [a, b] : edges) {
    if (a == i || b == i) ++d;
  }
  return d;
}

std::vector<int> Segment::neighbors_of(int i) const {
  std::vector<int> out;
  for (const auto& [a, b] : edges) {
    if (a == i) out.push_back(b);
    else if (b == i) out.push_back(a);
  }
  std::sort(out.begin(), out.end());
  return out;
}

bool Segment::in_component(int i) const {
  return std::binary_search(component.begin(), component.end(), i);
}

NetworkTimeline::NetworkTimeline(int n_bar, Segment first, AttributeTable attrs,
                                 LeaderPolicy policy)
    : n_bar_(n_bar), attrs_(std::move(attrs)), policy_(policy) {
  validate_segment(n_bar_, first);
  resolve_component(first);
  segments_.push_back(std::move(first));
}

const Segment& NetworkTimeline::segment_at(Scalar t) const {
  const Segment* best = &segments_.front();
  for (const auto& seg : segments_) {
    if (seg.start_time <= t) best = &seg;
  }
  return *best;
}

NetworkTimeline NetworkTimeline::apply_event(const ScenarioEvent& ev) const {
  if (!events_.empty() && ev.time <= events_.back().time) {
    throw AdmissibilityError("events must be strictly ordered in time");
  }
  if (ev.time <= segments_.back().start_time) {
    throw AdmissibilityError("event time must be after the last segment start");
  }

  NetworkTimeline next = *this;
  Segment seg = segments_.back();
  seg.start_time = ev.time;

  switch (ev.kind) {
    case EventKind::EdgeAdd: {
      auto e = ordered(ev.edge.first, ev.edge.second);
      if (e.first == e.second) throw AdmissibilityError("edge-add: self-loop");
      if (!seg.active.count(e.first) || !seg.active.count(e.second)) {
        throw AdmissibilityError("edge-add: edge incident to an inactive node");
      }
      if (!seg.edges.insert(e).second) {
        throw AdmissibilityError("edge-add: edge already present");
      }
      break;
    }
    case EventKind::EdgeRemove: {
      auto e = ordered(ev.edge.first, ev.edge.second);
      if (seg.edges.erase(e) == 0) {
        throw AdmissibilityError("edge-remove: edge not present");
      }
      break;
    }
    case EventKind::NodeJoin: {
      if (ev.node < 1 || ev.node > n_bar_) {
        throw AdmissibilityError("node-join: node outside potential set");
      }
      if (seg.active.count(ev.node)) {
        throw AdmissibilityError("node-join: node already active");
      }
      if (!ev.init.has_value()) {
        throw AdmissibilityError("node-join: missing local initialization value");
      }
      const Interval box = ev.init_box.value_or(Interval{-0.5, n_bar_ + 0.5});
      if (!box.contains(*ev.init)) {
        throw AdmissibilityError("node-join: initial state outside the admissible box");
      }
      if (ev.attribute.empty()) {
        throw AdmissibilityError("node-join: missing attribute");
      }
      seg.active.insert(ev.node);
      for (int nb : ev.neighbors) {
        if (!seg.active.count(nb)) {
          throw AdmissibilityError("node-join: attachment to inactive node " + std::to_string(nb));
        }
        seg.edges.insert(ordered(ev.node, nb));
      }
      next.attrs_.set_attribute(ev.node, ev.time, ev.attribute);
      break;
    }
    case EventKind::NodeLeave: {
      if (!seg.active.count(ev.node)) {
        throw AdmissibilityError("node-leave: node not active");
      }
      if (ev.node == seg.leader && policy_ == LeaderPolicy::Fixed) {
        throw AdmissibilityError("node-leave: leader departure not admissible under the fixed policy");
      }
      for (auto it = seg.edges.begin(); it != seg.edges.end();) {
        if (it->first == ev.node || it->second == ev.node) it = seg.edges.erase(it);
        else ++it;
      }
      seg.active.erase(ev.node);
      break;
    }
    case EventKind::AttributeChange: {
      if (!seg.active.count(ev.node)) {
        throw AdmissibilityError("attribute-change: node not active");
      }
      next.attrs_.set_attribute(ev.node, ev.time, ev.attribute);
      break;
    }
  }

  if (!seg.active.count(seg.leader)) {
    if (policy_ == LeaderPolicy::LowestActiveId && !seg.active.empty()) {
      seg.leader = *seg.active.begin();
    } else {
      throw AdmissibilityError("leader left the network under the fixed policy");
    }
  }

  validate_segment(n_bar_, seg);
  resolve_component(seg);
  next.segments_.push_back(std::move(seg));
  next.events_.push_back(ev);
  return next;
}

std::vector<int> connected_component(const Segment& seg, int start) {
  std::set<int> seen{start};
  std::deque<int> frontier{start};
  while (!frontier.empty()) {
    int node = frontier.front();
    frontier.pop_front();
    for (int nb : seg.neighbors_of(node)) {
      if (seen.insert(nb).second) frontier.push_back(nb);
    }
  }
  return {seen.begin(), seen.end()};
}

NetworkTimeline build_ring(int n, const std::vector<std::string>& labels,
                           std::vector<std::string> universe, int n_bar) {
  if (n < 3) throw ConfigError("degenerate ring: need n >= 3, got " + std::to_string(n));
  std::set<std::pair<int, int>> edges;
  for (int i = 1; i <= n; ++i) {
    int j = (i % n) + 1;
    edges.insert(ordered(i, j));
  }
  return assemble(n, n_bar, std::move(edges), labels, std::move(universe));
}

NetworkTimeline build_path(int n, const std::vector<std::string>& labels,
                           std::vector<std::string> universe, int n_bar) {
  if (n < 1) throw ConfigError("path needs n >= 1");
  std::set<std::pair<int, int>> edges;
  for (int i = 1; i < n; ++i) edges.insert({i, i + 1});
  return assemble(n, n_bar, std::move(edges), labels, std::move(universe));
}

NetworkTimeline build_complete(int n, const std::vector<std::string>& labels,
                               std::vector<std::string> universe, int n_bar) {
  if (n < 1) throw ConfigError("complete graph needs n >= 1");
  std::set<std::pair<int, int>> edges;
  for (int i = 1; i <= n; ++i)
    for (int j = i + 1; j <= n; ++j) edges.insert({i, j});
  return assemble(n, n_bar, std::move(edges), labels, std::move(universe));
}

NetworkTimeline build_edge_list(int n, const std::vector<std::pair<int, int>>& edge_list,
                                const std::vector<std::string>& labels,
                                std::vector<std::string> universe, int n_bar) {
  std::set<std::pair<int, int>> edges;
  for (const auto& [i, j] : edge_list) edges.insert(ordered(i, j));
  return assemble(n, n_bar, std::move(edges), labels, std::move(universe));
}

NetworkTimeline build_random_connected(int n, int extra_edges, std::uint64_t seed,
                                       const std::vector<std::string>& labels,
                                       std::vector<std::string> universe, int n_bar) {
  if (n < 1) throw ConfigError("random graph needs n >= 1");
  Rng rng(seed);
  std::set<std::pair<int, int>> edges;
  for (int i = 2; i <= n; ++i) {
    int j = static_cast<int>(uniform_int(rng, 1, i - 1));
    edges.insert(ordered(i, j));
  }
  const long max_extra = static_cast<long>(n) * (n - 1) / 2 - static_cast<long>(edges.size());
  long want = std::min<long>(extra_edges, max_extra);
  int guard = 50 * n * (extra_edges + 1);
  while (want > 0 && guard-- > 0) {
    int i = static_cast<int>(uniform_int(rng, 1, n));
    int j = static_cast<int>(uniform_int(rng, 1, n));
    if (i == j) continue;
    if (edges.insert(ordered(i, j)).second) --want;
  }
  return assemble(n, n_bar, std::move(edges), labels, std::move(universe));
}

Matrix laplacian(const Segment& seg, const std::vector<int>& nodes) {
  const int n = static_cast<int>(nodes.size());
  Matrix lap = Matrix::Zero(n, n);
  auto pos_of = [&](int node) {
    auto it = std::lower_bound(nodes.begin(), nodes.end(), node);
    return (it != nodes.end() && *it == node) ? static_cast<int>(it - nodes.begin()) : -1;
  };
  for (const auto& [a, b] : seg.edges) {
    int pa = pos_of(a);
    int pb = pos_of(b);
    if (pa < 0 || pb < 0) continue;
    lap(pa, pa) += 1.0;
    lap(pb, pb) += 1.0;
    lap(pa, pb) -= 1.0;
    lap(pb, pa) -= 1.0;
  }
  return lap;
}

DwellReport check_dwell(const NetworkTimeline& timeline, Scalar required_dwell) {
  if (required_dwell < 0) throw ConfigError("required dwell must be >= 0");
  DwellReport report;
  const auto& events = timeline.events();
  for (std::size_t i = 1; i < events.size(); ++i) {
    DwellGap gap;
    gap.t_prev = events[i - 1].time;
    gap.t_next = events[i].time;
    gap.gap = gap.t_next - gap.t_prev;
    gap.pass = gap.gap >= required_dwell;
    report.all_pass = report.all_pass && gap.pass;
    report.gaps.push_back(gap);
  }
  return report;
}

}  // namespace modesim
