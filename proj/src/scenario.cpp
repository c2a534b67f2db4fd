#include "modesim/scenario.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <ostream>

namespace modesim {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& msg) {
  throw ConfigError(path + ": " + msg);
}

const json& member(const json& obj, const std::string& path, const std::string& key) {
  if (!obj.is_object()) fail(path, "expected an object");
  if (!obj.contains(key)) fail(path + "." + key, "missing required field");
  return obj.at(key);
}

Scalar number_at(const json& obj, const std::string& path, const std::string& key,
                 Scalar fallback) {
  if (!obj.is_object() || !obj.contains(key)) return fallback;
  if (!obj.at(key).is_number()) fail(path + "." + key, "expected a number");
  return obj.at(key).get<Scalar>();
}

long integer_at(const json& obj, const std::string& path, const std::string& key,
                long fallback) {
  if (!obj.is_object() || !obj.contains(key)) return fallback;
  if (!obj.at(key).is_number_integer()) fail(path + "." + key, "expected an integer");
  return obj.at(key).get<long>();
}

std::string string_at(const json& obj, const std::string& path, const std::string& key,
                      const std::string& fallback) {
  if (!obj.is_object() || !obj.contains(key)) return fallback;
  if (!obj.at(key).is_string()) fail(path + "." + key, "expected a string");
  return obj.at(key).get<std::string>();
}

bool bool_at(const json& obj, const std::string& path, const std::string& key, bool fallback) {
  if (!obj.is_object() || !obj.contains(key)) return fallback;
  if (!obj.at(key).is_boolean()) fail(path + "." + key, "expected a boolean");
  return obj.at(key).get<bool>();
}

ScenarioEvent parse_event(const json& ev, const std::string& path) {
  ScenarioEvent out;
  if (!ev.is_object()) fail(path, "expected an object");
  if (!ev.contains("time") || !ev.at("time").is_number()) fail(path + ".time", "expected a number");
  out.time = ev.at("time").get<Scalar>();
  out.kind = event_kind_from_string(string_at(ev, path, "kind", ""));
  switch (out.kind) {
    case EventKind::EdgeAdd:
    case EventKind::EdgeRemove: {
      const json& edge = member(ev, path, "edge");
      if (!edge.is_array() || edge.size() != 2) fail(path + ".edge", "expected [i, j]");
      out.edge = {edge.at(0).get<int>(), edge.at(1).get<int>()};
      break;
    }
    case EventKind::NodeJoin: {
      out.node = static_cast<int>(integer_at(ev, path, "node", 0));
      const json& nb = member(ev, path, "neighbors");
      if (!nb.is_array()) fail(path + ".neighbors", "expected an array of node ids");
      for (const auto& v : nb) out.neighbors.push_back(v.get<int>());
      out.attribute = string_at(ev, path, "attribute", "");
      if (ev.contains("init")) out.init = ev.at("init").get<Scalar>();
      if (ev.contains("init_box")) {
        const json& box = ev.at("init_box");
        if (!box.is_array() || box.size() != 2) fail(path + ".init_box", "expected [lo, hi]");
        out.init_box = Interval{box.at(0).get<Scalar>(), box.at(1).get<Scalar>()};
      }
      break;
    }
    case EventKind::NodeLeave: {
      out.node = static_cast<int>(integer_at(ev, path, "node", 0));
      break;
    }
    case EventKind::AttributeChange: {
      out.node = static_cast<int>(integer_at(ev, path, "node", 0));
      out.attribute = string_at(ev, path, "attribute", "");
      if (out.attribute.empty()) fail(path + ".attribute", "missing new attribute");
      break;
    }
  }
  return out;
}

json event_to_json(const ScenarioEvent& ev) {
  json out;
  out["time"] = ev.time;
  out["kind"] = to_string(ev.kind);
  switch (ev.kind) {
    case EventKind::EdgeAdd:
    case EventKind::EdgeRemove:
      out["edge"] = {ev.edge.first, ev.edge.second};
      break;
    case EventKind::NodeJoin:
      out["node"] = ev.node;
      out["neighbors"] = ev.neighbors;
      out["attribute"] = ev.attribute;
      if (ev.init) out["init"] = *ev.init;
      if (ev.init_box) out["init_box"] = {ev.init_box->lo, ev.init_box->hi};
      break;
    case EventKind::NodeLeave:
      out["node"] = ev.node;
      break;
    case EventKind::AttributeChange:
      out["node"] = ev.node;
      out["attribute"] = ev.attribute;
      break;
  }
  return out;
}

std::string format_value(Scalar v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

json check_to_json(const CheckResult& check) {
  return json{{"name", check.name},
              {"required", check.required},
              {"actual", check.actual},
              {"pass", check.pass}};
}

json verdict_to_json(const Verdict& v) {
  return json{{"name", v.name}, {"pass", v.pass}, {"detail", v.detail}};
}

json candidate_to_json(const Candidate& c) {
  return json{{"position", c.position},
              {"attribute", c.attribute},
              {"frequency", c.frequency},
              {"z_lock_time_s", c.z_lock_time},
              {"y_lock_time_s", c.y_lock_time}};
}

}  // namespace

ScenarioConfig parse_config(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ConfigError("config: top level must be an object");

  ScenarioConfig cfg;
  cfg.name = string_at(doc, "config", "name", "scenario");
  if (doc.contains("seed")) cfg.seed = doc.at("seed").get<std::uint64_t>();
  cfg.leader_policy = string_at(doc, "config", "leader_policy", "fixed");
  if (cfg.leader_policy != "fixed" && cfg.leader_policy != "lowest-active-id") {
    fail("config.leader_policy", "expected 'fixed' or 'lowest-active-id'");
  }

  const json& net = member(doc, "config", "network");
  cfg.network.kind = string_at(net, "config.network", "kind", "ring");
  const bool known_kind = cfg.network.kind == "ring" || cfg.network.kind == "path" ||
                          cfg.network.kind == "complete" || cfg.network.kind == "edge-list" ||
                          cfg.network.kind == "random-connected";
  if (!known_kind) fail("config.network.kind", "unknown network kind '" + cfg.network.kind + "'");
  cfg.network.n = static_cast<int>(integer_at(net, "config.network", "n", 0));
  if (cfg.network.n < 1) fail("config.network.n", "need n >= 1");
  if (cfg.network.kind == "edge-list") {
    const json& edges = member(net, "config.network", "edges");
    if (!edges.is_array()) fail("config.network.edges", "expected an array of [i, j] pairs");
    for (const auto& e : edges) {
      if (!e.is_array() || e.size() != 2) fail("config.network.edges", "expected [i, j] pairs");
      cfg.network.edges.emplace_back(e.at(0).get<int>(), e.at(1).get<int>());
    }
  }
  if (cfg.network.kind == "random-connected") {
    cfg.network.extra_edges = static_cast<int>(integer_at(net, "config.network", "extra_edges", 0));
    cfg.network.seed = net.contains("seed") ? net.at("seed").get<std::uint64_t>() : 0;
  }

  cfg.n_bar = static_cast<int>(integer_at(doc, "config", "n_bar", cfg.network.n));
  if (cfg.n_bar < cfg.network.n) fail("config.n_bar", "n_bar must be at least the network size");

  const json& attrs = member(doc, "config", "attributes");
  if (attrs.contains("universe")) {
    for (const auto& v : attrs.at("universe")) cfg.attributes.universe.push_back(v.get<std::string>());
  }
  const bool has_hist = attrs.contains("histogram");
  const bool has_labels = attrs.contains("labels");
  if (has_hist == has_labels) {
    fail("config.attributes", "provide exactly one of 'histogram' or 'labels'");
  }
  if (has_hist) {
    if (cfg.attributes.universe.empty()) {
      fail("config.attributes.universe", "histogram form requires an explicit universe");
    }
    for (const auto& v : attrs.at("histogram")) cfg.attributes.histogram.push_back(v.get<long>());
    if (cfg.attributes.histogram.size() != cfg.attributes.universe.size()) {
      fail("config.attributes.histogram", "length must match the universe size");
    }
    const long total = std::accumulate(cfg.attributes.histogram.begin(),
                                       cfg.attributes.histogram.end(), 0L);
    if (total != cfg.network.n) {
      fail("config.attributes.histogram", "sums to " + std::to_string(total) + " but the network has " +
                                              std::to_string(cfg.network.n) + " nodes");
    }
  } else {
    for (const auto& v : attrs.at("labels")) cfg.attributes.labels.push_back(v.get<std::string>());
    if (static_cast<int>(cfg.attributes.labels.size()) != cfg.network.n) {
      fail("config.attributes.labels", "need exactly one label per agent");
    }
  }

  if (doc.contains("gains")) {
    const json& gains = doc.at("gains");
    cfg.gains.defaulted = !gains.contains("preset");
    cfg.gains.preset = string_at(gains, "config.gains", "preset", "desk");
    gain_preset_from_string(cfg.gains.preset);
    cfg.gains.known_n = static_cast<int>(integer_at(gains, "config.gains", "known_n", 0));
    if (gains.contains("overrides")) {
      const json& ov = gains.at("overrides");
      if (!ov.is_object()) fail("config.gains.overrides", "expected an object");
      for (const auto& [key, value] : ov.items()) {
        static const std::vector<std::string> known = {"h_x", "gamma_x", "h_y", "gamma_y",
                                                       "beta", "g",      "gamma_z"};
        if (std::find(known.begin(), known.end(), key) == known.end()) {
          fail("config.gains.overrides." + key, "unknown gain");
        }
        cfg.gains.overrides[key] = value.get<Scalar>();
      }
    }
  } else {
    cfg.gains.defaulted = true;
  }

  if (doc.contains("algorithm")) {
    const json& alg = doc.at("algorithm");
    cfg.algorithm.which = string_at(alg, "config.algorithm", "which", "direct");
    algorithm_from_string(cfg.algorithm.which);
    cfg.algorithm.k = static_cast<int>(integer_at(alg, "config.algorithm", "k", 0));
    cfg.algorithm.f_star = static_cast<int>(integer_at(alg, "config.algorithm", "f_star", 0));
    cfg.algorithm.use_counter = bool_at(alg, "config.algorithm", "use_counter", false);
    cfg.algorithm.combined = bool_at(alg, "config.algorithm", "combined", false);
    cfg.algorithm.tie_break = string_at(alg, "config.algorithm", "tie_break", "lowest-l");
    if (cfg.algorithm.tie_break != "lowest-l" && cfg.algorithm.tie_break != "highest-l") {
      fail("config.algorithm.tie_break", "expected 'lowest-l' or 'highest-l'");
    }
    cfg.algorithm.cadence = string_at(alg, "config.algorithm", "cadence", "lock-gated");
    if (cfg.algorithm.cadence != "lock-gated" && cfg.algorithm.cadence != "paper-cadence") {
      fail("config.algorithm.cadence", "expected 'lock-gated' or 'paper-cadence'");
    }
    cfg.algorithm.cadence_interval =
        number_at(alg, "config.algorithm", "cadence_interval", 0.6);
    if (cfg.algorithm.cadence_interval <= 0) {
      fail("config.algorithm.cadence_interval", "must be positive");
    }
  }

  if (doc.contains("events")) {
    const json& events = doc.at("events");
    if (!events.is_array()) fail("config.events", "expected an array");
    for (std::size_t i = 0; i < events.size(); ++i) {
      cfg.events.push_back(parse_event(events.at(i), "config.events[" + std::to_string(i) + "]"));
    }
  }

  if (doc.contains("integrator")) {
    const json& integ = doc.at("integrator");
    if (integ.contains("dt")) {
      const Scalar dt = integ.at("dt").get<Scalar>();
      if (dt <= 0) fail("config.integrator.dt", "must be positive");
      cfg.integrator.dt = dt;
    }
    if (integ.contains("horizon")) {
      const Scalar horizon = integ.at("horizon").get<Scalar>();
      if (horizon <= 0) fail("config.integrator.horizon", "must be positive");
      cfg.integrator.horizon = horizon;
    }
    cfg.integrator.stability_window =
        number_at(integ, "config.integrator", "stability_window", 0.05);
    cfg.integrator.sample_interval =
        number_at(integ, "config.integrator", "sample_interval", 0.01);
    if (cfg.integrator.stability_window <= 0) {
      fail("config.integrator.stability_window", "must be positive");
    }
    if (cfg.integrator.sample_interval <= 0) {
      fail("config.integrator.sample_interval", "must be positive");
    }
  }

  cfg.output_dir = string_at(doc, "config", "output_dir", "");

  // Pre-check the network-model invariants (graph construction, attribute
  // bijection, event admissibility) so errors surface at parse time.
  build_timeline(cfg);
  resolve_gains(cfg);
  return cfg;
}

nlohmann::json config_to_json(const ScenarioConfig& cfg) {
  json doc;
  doc["name"] = cfg.name;
  doc["n_bar"] = cfg.n_bar;
  doc["seed"] = cfg.seed;
  doc["leader_policy"] = cfg.leader_policy;
  json net{{"kind", cfg.network.kind}, {"n", cfg.network.n}};
  if (cfg.network.kind == "edge-list") {
    json edges = json::array();
    for (const auto& [i, j] : cfg.network.edges) edges.push_back({i, j});
    net["edges"] = edges;
  }
  if (cfg.network.kind == "random-connected") {
    net["extra_edges"] = cfg.network.extra_edges;
    net["seed"] = cfg.network.seed;
  }
  doc["network"] = net;
  json attrs;
  if (!cfg.attributes.universe.empty()) attrs["universe"] = cfg.attributes.universe;
  if (!cfg.attributes.histogram.empty()) attrs["histogram"] = cfg.attributes.histogram;
  if (!cfg.attributes.labels.empty()) attrs["labels"] = cfg.attributes.labels;
  doc["attributes"] = attrs;
  json gains{{"preset", cfg.gains.preset}};
  if (cfg.gains.known_n > 0) gains["known_n"] = cfg.gains.known_n;
  if (!cfg.gains.overrides.empty()) gains["overrides"] = cfg.gains.overrides;
  doc["gains"] = gains;
  doc["algorithm"] = json{{"which", cfg.algorithm.which},
                          {"k", cfg.algorithm.k},
                          {"f_star", cfg.algorithm.f_star},
                          {"use_counter", cfg.algorithm.use_counter},
                          {"combined", cfg.algorithm.combined},
                          {"tie_break", cfg.algorithm.tie_break},
                          {"cadence", cfg.algorithm.cadence},
                          {"cadence_interval", cfg.algorithm.cadence_interval}};
  json events = json::array();
  for (const auto& ev : cfg.events) events.push_back(event_to_json(ev));
  doc["events"] = events;
  json integ;
  if (cfg.integrator.dt) integ["dt"] = *cfg.integrator.dt;
  if (cfg.integrator.horizon) integ["horizon"] = *cfg.integrator.horizon;
  integ["stability_window"] = cfg.integrator.stability_window;
  integ["sample_interval"] = cfg.integrator.sample_interval;
  doc["integrator"] = integ;
  doc["output_dir"] = cfg.output_dir;
  return doc;
}

std::string emit_config(const ScenarioConfig& config) { return config_to_json(config).dump(2); }

NetworkTimeline build_timeline(const ScenarioConfig& cfg) {
  std::vector<std::string> labels = cfg.attributes.labels;
  if (labels.empty()) {
    for (std::size_t u = 0; u < cfg.attributes.histogram.size(); ++u) {
      for (long c = 0; c < cfg.attributes.histogram[u]; ++c) {
        labels.push_back(cfg.attributes.universe[u]);
      }
    }
  }
  NetworkTimeline timeline;
  if (cfg.network.kind == "ring") {
    timeline = build_ring(cfg.network.n, labels, cfg.attributes.universe, cfg.n_bar);
  } else if (cfg.network.kind == "path") {
    timeline = build_path(cfg.network.n, labels, cfg.attributes.universe, cfg.n_bar);
  } else if (cfg.network.kind == "complete") {
    timeline = build_complete(cfg.network.n, labels, cfg.attributes.universe, cfg.n_bar);
  } else if (cfg.network.kind == "edge-list") {
    timeline = build_edge_list(cfg.network.n, cfg.network.edges, labels, cfg.attributes.universe,
                               cfg.n_bar);
  } else {
    timeline = build_random_connected(cfg.network.n, cfg.network.extra_edges, cfg.network.seed,
                                      labels, cfg.attributes.universe, cfg.n_bar);
  }
  if (cfg.leader_policy == "lowest-active-id") {
    timeline = timeline.with_policy(LeaderPolicy::LowestActiveId);
  }
  for (const auto& ev : cfg.events) timeline = timeline.apply_event(ev);
  return timeline;
}

GainSet resolve_gains(const ScenarioConfig& cfg) {
  const int omega = static_cast<int>(!cfg.attributes.universe.empty()
                                         ? cfg.attributes.universe.size()
                                         : build_timeline(cfg).attrs().universe().size());
  GainSet gains = select_gains(cfg.n_bar, omega, gain_preset_from_string(cfg.gains.preset),
                               cfg.gains.known_n);
  for (const auto& [key, value] : cfg.gains.overrides) {
    if (key == "h_x") gains.h_x = value;
    else if (key == "gamma_x") gains.gamma_x = value;
    else if (key == "h_y") gains.h_y = value;
    else if (key == "gamma_y") gains.gamma_y = value;
    else if (key == "beta") gains.beta = value;
    else if (key == "g") gains.g = value;
    else if (key == "gamma_z") gains.gamma_z = value;
    if (value <= 0) throw ConfigError("gain override '" + key + "' must be positive");
  }
  gains.K = cfg.algorithm.k > 0 ? cfg.algorithm.k : 1;
  return gains;
}

RunOptions make_run_options(const ScenarioConfig& cfg) {
  RunOptions opts;
  opts.gains = resolve_gains(cfg);
  opts.seed = cfg.seed;
  opts.window = cfg.integrator.stability_window;
  opts.dt = cfg.integrator.dt;
  opts.horizon = cfg.integrator.horizon;
  opts.sample_interval = cfg.integrator.sample_interval;
  opts.tie_break = cfg.algorithm.tie_break == "highest-l" ? TieBreak::HighestL : TieBreak::LowestL;
  opts.use_counter = cfg.algorithm.use_counter;
  opts.combined = cfg.algorithm.combined;
  opts.lock_gated = cfg.algorithm.cadence != "paper-cadence";
  opts.cadence_interval = cfg.algorithm.cadence_interval;
  opts.n_for_gamma_y = cfg.gains.known_n;
  return opts;
}

void emit_timeseries(const Trajectory& traj, const std::string& variable_base,
                     std::ostream& out) {
  if (traj.n_samples() == 0) throw ConfigError("cannot emit an empty trajectory");
  out << "time_s,agent_id,variable,value\n";
  const int pairs = traj.kind == ProtocolKind::Combined ? (traj.state_dim - 1) / 2 : 0;
  int seg = 0;
  for (int s = 0; s < traj.n_samples(); ++s) {
    while (seg + 1 < traj.n_segments() && traj.segment_start_index[static_cast<std::size_t>(seg) + 1] <= s) {
      ++seg;
    }
    const auto& members = traj.segment_members[static_cast<std::size_t>(seg)];
    const Matrix& state = traj.states[static_cast<std::size_t>(s)];
    const std::string time = format_value(traj.times[static_cast<std::size_t>(s)]);
    for (std::size_t mi = 0; mi < members.size(); ++mi) {
      const int agent = members[mi];
      const int row = agent - 1;
      switch (traj.kind) {
        case ProtocolKind::Size:
        case ProtocolKind::Frequency:
        case ProtocolKind::Kth:
          out << time << ',' << agent << ',' << variable_base << ','
              << format_value(state(row, 0)) << '\n';
          break;
        case ProtocolKind::Counter:
          for (int d = 1; d <= traj.state_dim; ++d) {
            out << time << ',' << agent << ",xi[" << d << "],"
                << format_value(state(row, d - 1)) << '\n';
          }
          break;
        case ProtocolKind::Combined: {
          out << time << ',' << agent << ",x," << format_value(state(row, 0)) << '\n';
          for (int kk = 1; kk <= pairs; ++kk) {
            out << time << ',' << agent << ",z[" << kk << "],"
                << format_value(state(row, kk)) << '\n';
            out << time << ',' << agent << ",y[" << kk << "],"
                << format_value(state(row, pairs + kk)) << '\n';
          }
          out << time << ',' << agent << ",mhat,"
              << traj.rounded[static_cast<std::size_t>(s)][mi] << '\n';
          break;
        }
      }
    }
  }
}

nlohmann::json bounds_to_json(const BoundReport& report) {
  json out;
  out["t_x_s"] = report.t_x;
  out["t_y_s"] = report.t_y;
  out["t_z_s"] = report.t_z;
  out["total_apriori_s"] = algorithm2_time_bound(report);
  json gains = json::array();
  for (const auto& check : report.gain_checks) gains.push_back(check_to_json(check));
  out["gain_checks"] = gains;
  json spectral = json::array();
  for (const auto& check : report.spectral_checks) spectral.push_back(check_to_json(check));
  out["spectral_checks"] = spectral;
  return out;
}

nlohmann::json summary_to_json(const RunSummary& summary) {
  json out;
  out["scenario"] = summary.scenario;
  out["algorithm"] = summary.algorithm;
  out["mode"] = summary.mode;
  out["mode_l"] = summary.mode_l;
  out["mode_frequency"] = summary.mode_frequency;
  out["frequencies"] = summary.frequencies;
  out["size_estimate"] = summary.size_estimate;
  out["k_trace"] = summary.k_trace;
  out["k_trace_times_s"] = summary.k_trace_times;
  json candidates = json::array();
  for (const auto& c : summary.candidates) candidates.push_back(candidate_to_json(c));
  out["candidates"] = candidates;
  json rounds = json::array();
  for (const auto& round : summary.rounds) {
    json cands = json::array();
    for (const auto& c : round.candidates) cands.push_back(candidate_to_json(c));
    rounds.push_back(json{{"k", round.big_k}, {"candidates", cands}});
  }
  out["rounds"] = rounds;
  out["state_var_count"] = summary.state_var_count;
  out["elapsed_sim_s"] = summary.elapsed_sim;
  out["wall_clock_s"] = summary.wall_clock_s;
  out["bounds"] = bounds_to_json(summary.bounds);
  out["lock_times_s"] = summary.lock_times;
  json verdicts = json::array();
  for (const auto& v : summary.verdicts) verdicts.push_back(verdict_to_json(v));
  out["verdicts"] = verdicts;
  out["warnings"] = summary.warnings;
  out["notes"] = summary.notes;
  if (!summary.segments.empty()) {
    json segments = json::array();
    for (const auto& seg : summary.segments) {
      json s{{"segment", seg.segment},
             {"start_time_s", seg.start_time},
             {"mode", seg.mode},
             {"mode_frequency", seg.mode_frequency},
             {"mode_matches_oracle", seg.mode_matches_oracle},
             {"states_in_box_at_start", seg.states_in_box_at_start},
             {"frequencies", seg.frequencies}};
      if (seg.lock_time) s["lock_time_s"] = *seg.lock_time;
      segments.push_back(s);
    }
    out["segments"] = segments;
  }
  out["all_pass"] = summary.all_pass;
  return out;
}

RunSummary run_scenario(const ScenarioConfig& cfg, const std::string& out_dir) {
  const auto t_begin = std::chrono::steady_clock::now();
  const NetworkTimeline timeline = build_timeline(cfg);
  const RunOptions opts = make_run_options(cfg);
  const AttributeTable& attrs = timeline.attrs();

  RunSummary summary;
  summary.scenario = cfg.name;
  summary.algorithm = cfg.algorithm.which;
  summary.bounds = make_bound_report(opts.gains, timeline.n_bar(), attrs.size(),
                                     timeline.segment(0), cfg.gains.known_n);
  if (cfg.gains.defaulted) {
    summary.notes.push_back("no gains preset supplied; desk preset auto-selected");
  }

  std::vector<NamedTrajectory> trajectories;

  if (!timeline.events().empty()) {
    if (cfg.algorithm.which != "direct") {
      throw ConfigError("event schedules are supported for the direct algorithm");
    }
    const Scalar t_y = time_bound_y(timeline.n_bar(), opts.gains.h_y);
    const Scalar horizon =
        cfg.integrator.horizon.value_or(timeline.events().back().time + 1.5 * t_y);
    PiecewiseModeRun pm = run_algorithm1_piecewise(timeline, opts, horizon);
    summary.segments = pm.segments;
    summary.verdicts = pm.verdicts;
    trajectories = std::move(pm.trajectories);
    const SegmentModeReport& last = summary.segments.back();
    summary.mode = last.mode;
    summary.mode_l = attrs.l_of(last.mode);
    summary.mode_frequency = last.mode_frequency;
    summary.frequencies = last.frequencies;
    summary.state_var_count = state_count(AlgorithmId::Direct, attrs.size());
  } else {
    AlgorithmRun run;
    const AlgorithmId which = algorithm_from_string(cfg.algorithm.which);
    if (which == AlgorithmId::Direct) {
      run = run_algorithm1(timeline, opts);
    } else if (which == AlgorithmId::AprioriK) {
      if (cfg.algorithm.f_star < 1 && cfg.algorithm.k < 1) {
        throw ConfigError("apriori-k needs algorithm.f_star (or an explicit algorithm.k)");
      }
      run = run_algorithm2(timeline, opts, cfg.algorithm.f_star, cfg.algorithm.k);
    } else {
      run = run_algorithm3(timeline, opts);
    }
    summary.mode = run.mode;
    summary.mode_l = run.mode_l;
    summary.mode_frequency = run.mode_frequency;
    summary.frequencies = run.frequencies;
    summary.size_estimate = run.size_estimate;
    summary.k_trace = run.k_trace;
    summary.k_trace_times = run.k_trace_times;
    summary.candidates = run.candidates;
    summary.rounds = run.rounds;
    summary.state_var_count = run.state_var_count;
    summary.elapsed_sim = run.elapsed_sim;
    summary.lock_times = run.lock_times;
    summary.verdicts = run.verdicts;
    summary.warnings = run.warnings;
    trajectories = std::move(run.trajectories);
  }

  summary.all_pass = std::all_of(summary.verdicts.begin(), summary.verdicts.end(),
                                 [](const Verdict& v) { return v.pass; });
  summary.wall_clock_s =
      std::chrono::duration<Scalar>(std::chrono::steady_clock::now() - t_begin).count();

  if (!out_dir.empty()) {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) throw ConfigError("cannot create output directory '" + out_dir + "': " + ec.message());

    std::ofstream echo(fs::path(out_dir) / "config_echo.json");
    echo << emit_config(cfg) << '\n';

    json manifest = json::array();
    for (const auto& named : trajectories) {
      const std::string file = named.name + ".csv";
      std::ofstream csv(fs::path(out_dir) / file);
      if (!csv) throw ConfigError("cannot write " + file + " in '" + out_dir + "'");
      emit_timeseries(named.traj, named.variable, csv);
      manifest.push_back(json{{"file", file},
                              {"variable", named.variable},
                              {"protocol", to_string(named.traj.kind)},
                              {"description", named.description}});
    }
    if (summary.k_trace.size() > 1) {
      std::ofstream ktrace(fs::path(out_dir) / "k_trace.csv");
      ktrace << "time_s,K\n";
      for (std::size_t i = 0; i < summary.k_trace.size(); ++i) {
        ktrace << format_value(summary.k_trace_times[i]) << ',' << summary.k_trace[i] << '\n';
      }
      manifest.push_back(json{{"file", "k_trace.csv"},
                              {"variable", "K"},
                              {"protocol", "adaptive-k"},
                              {"description", "pigeonhole parameter staircase over the rounds"}});
    }
    std::ofstream mf(fs::path(out_dir) / "manifest.json");
    mf << manifest.dump(2) << '\n';
    std::ofstream sf(fs::path(out_dir) / "summary.json");
    sf << summary_to_json(summary).dump(2) << '\n';
  }
  return summary;
}

}  // namespace modesim
