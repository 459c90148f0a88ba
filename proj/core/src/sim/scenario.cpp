#include "slh/sim/scenario.hpp"

#include "slh/proof.hpp"
#include "slh/query.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <tuple>

namespace slh {

namespace {

constexpr uint64_t kDaySeconds = 86'400;
constexpr uint64_t kClinicOpenSecond = 8 * 3600;
constexpr uint64_t kPollInterval = 900;  // continuous links check in every 15 min

[[noreturn]] void script_error(size_t line_no, const std::string& what) {
  throw Error(Errc::parse_error,
              "scenario script line " + std::to_string(line_no) + ": " + what);
}

std::vector<std::string> tokenize(const std::string& line) {
  std::vector<std::string> out;
  std::istringstream in(line);
  std::string tok;
  while (in >> tok) out.push_back(tok);
  return out;
}

uint64_t parse_count(const std::string& tok, size_t line_no, const char* what) {
  size_t pos = 0;
  unsigned long long v = 0;
  try {
    v = std::stoull(tok, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos != tok.size() || tok[0] == '-')
    script_error(line_no, std::string(what) + " must be a non-negative integer, got '" + tok + "'");
  return v;
}

double parse_real(const std::string& tok, size_t line_no, const char* what) {
  size_t pos = 0;
  double v = 0;
  try {
    v = std::stod(tok, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos != tok.size())
    script_error(line_no, std::string(what) + " must be a number, got '" + tok + "'");
  return v;
}

NodeSpec* find_node_spec(TopologySpec& topo, const std::string& name) {
  for (auto& n : topo.nodes)
    if (n.name == name) return &n;
  return nullptr;
}

std::string fmt(const char* format, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, format, v);
  return buf;
}

}  // namespace

ScenarioSpec parse_scenario(std::string_view text) {
  ScenarioSpec spec;
  std::istringstream in{std::string(text)};
  std::string raw;
  size_t line_no = 0;
  bool saw_scenario = false;

  while (std::getline(in, raw)) {
    ++line_no;
    if (auto hash = raw.find('#'); hash != std::string::npos) raw.resize(hash);
    auto tok = tokenize(raw);
    if (tok.empty()) continue;
    const std::string& kw = tok[0];

    auto need = [&](size_t n, const char* usage) {
      if (tok.size() < n) script_error(line_no, std::string("usage: ") + usage);
    };

    if (kw == "scenario") {
      need(2, "scenario NAME");
      if (saw_scenario) script_error(line_no, "duplicate scenario line");
      spec.name = tok[1];
      saw_scenario = true;
    } else if (kw == "seed") {
      need(2, "seed N");
      spec.seed = parse_count(tok[1], line_no, "seed");
    } else if (kw == "days") {
      need(2, "days N");
      spec.days = parse_count(tok[1], line_no, "days");
      if (spec.days == 0) script_error(line_no, "days must be at least 1");
    } else if (kw == "drain") {
      need(2, "drain N");
      spec.drain_days = parse_count(tok[1], line_no, "drain");
    } else if (kw == "difficulty") {
      need(3, "difficulty D SCALE");
      spec.difficulty.d = parse_count(tok[1], line_no, "difficulty d");
      spec.difficulty.scale = parse_count(tok[2], line_no, "difficulty scale");
      if (spec.difficulty.d == 0 || spec.difficulty.scale == 0)
        script_error(line_no, "difficulty factors must be positive");
    } else if (kw == "dictionary") {
      need(2, "dictionary PATH");
      spec.dictionary = tok[1];
    } else if (kw == "node") {
      need(4, "node NAME tier T [parent NAME] [hashrate H] [power W] [uptime HOURS]");
      NodeSpec node;
      node.name = tok[1];
      if (find_node_spec(spec.topology, node.name))
        script_error(line_no, "duplicate node '" + node.name + "'");
      bool saw_tier = false;
      for (size_t i = 2; i < tok.size(); i += 2) {
        const std::string& key = tok[i];
        if (i + 1 >= tok.size())
          script_error(line_no, "node option '" + key + "' needs a value");
        const std::string& val = tok[i + 1];
        if (key == "tier") {
          uint64_t t = parse_count(val, line_no, "tier");
          if (t > 3) script_error(line_no, "tier must be 0..3");
          node.tier = uint8_t(t);
          saw_tier = true;
        } else if (key == "parent") {
          node.parent = val;
        } else if (key == "hashrate") {
          node.hashrate = parse_real(val, line_no, "hashrate");
        } else if (key == "power") {
          node.power_watts = parse_real(val, line_no, "power");
        } else if (key == "uptime") {
          node.uptime_hours = parse_real(val, line_no, "uptime");
        } else {
          script_error(line_no, "unknown node option '" + key + "'");
        }
      }
      if (!saw_tier) script_error(line_no, "node '" + node.name + "' is missing a tier");
      if (!node.parent.empty() && !find_node_spec(spec.topology, node.parent))
        script_error(line_no, "unknown parent '" + node.parent + "' (declare parents first)");
      spec.topology.nodes.push_back(std::move(node));
    } else if (kw == "link") {
      need(2, "link CHILD [bps N] [loss F] [windows MIN MAX] [minutes LO HI] [continuous]");
      NodeSpec* node = find_node_spec(spec.topology, tok[1]);
      if (!node) script_error(line_no, "unknown node '" + tok[1] + "'");
      if (node->parent.empty())
        script_error(line_no, "node '" + tok[1] + "' has no uplink to shape");
      for (size_t i = 2; i < tok.size();) {
        const std::string& key = tok[i];
        auto value = [&](size_t offset) -> const std::string& {
          if (i + offset >= tok.size())
            script_error(line_no, "link option '" + key + "' needs more values");
          return tok[i + offset];
        };
        if (key == "continuous") {
          node->windows.continuous = true;
          i += 1;
        } else if (key == "bps") {
          node->uplink_bps = uint32_t(parse_count(value(1), line_no, "bps"));
          i += 2;
        } else if (key == "loss") {
          node->uplink_loss = parse_real(value(1), line_no, "loss");
          i += 2;
        } else if (key == "windows") {
          node->windows.per_day_min = uint32_t(parse_count(value(1), line_no, "windows min"));
          node->windows.per_day_max = uint32_t(parse_count(value(2), line_no, "windows max"));
          i += 3;
        } else if (key == "minutes") {
          node->windows.duration_min = 60 * parse_count(value(1), line_no, "minutes lo");
          node->windows.duration_max = 60 * parse_count(value(2), line_no, "minutes hi");
          i += 3;
        } else {
          script_error(line_no, "unknown link option '" + key + "'");
        }
      }
    } else if (kw == "writes") {
      need(3, "writes NODE PER_DAY [emergency F] [referral F]");
      if (!find_node_spec(spec.topology, tok[1]))
        script_error(line_no, "unknown node '" + tok[1] + "'");
      WriteSpec w;
      w.node = tok[1];
      w.per_day = uint32_t(parse_count(tok[2], line_no, "per-day write count"));
      for (size_t i = 3; i < tok.size(); i += 2) {
        const std::string& key = tok[i];
        if (i + 1 >= tok.size())
          script_error(line_no, "writes option '" + key + "' needs a value");
        double v = parse_real(tok[i + 1], line_no, key.c_str());
        if (v < 0 || v > 1) script_error(line_no, key + " rate must be within [0, 1]");
        if (key == "emergency") {
          w.emergency_rate = v;
        } else if (key == "referral") {
          w.referral_rate = v;
        } else {
          script_error(line_no, "unknown writes option '" + key + "'");
        }
      }
      spec.writes.push_back(std::move(w));
    } else if (kw == "query") {
      need(4, "query NODE DAY TEXT...");
      if (!find_node_spec(spec.topology, tok[1]))
        script_error(line_no, "unknown node '" + tok[1] + "'");
      QuerySpec q;
      q.node = tok[1];
      q.day = parse_count(tok[2], line_no, "query day");
      std::string text;
      for (size_t i = 3; i < tok.size(); ++i) {
        if (!text.empty()) text += ' ';
        text += tok[i];
      }
      q.text = std::move(text);
      spec.queries.push_back(std::move(q));
    } else {
      script_error(line_no, "unknown keyword '" + kw + "'");
    }
  }

  if (spec.topology.nodes.empty())
    throw Error(Errc::parse_error, "scenario script declares no nodes");
  spec.topology.seed = spec.seed;
  return spec;
}

ScenarioSpec load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::io_error, "cannot open scenario " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  ScenarioSpec spec = parse_scenario(buf.str());
  if (!spec.dictionary.empty() && spec.dictionary.is_relative())
    spec.dictionary = path.parent_path() / spec.dictionary;
  return spec;
}

namespace {

// Everything a running scenario accumulates, kept together so the event
// handlers can share one mutable state block.
struct ScenarioRun {
  const ScenarioSpec* spec = nullptr;
  Simulator* sim = nullptr;
  EventQueue queue;
  DetRng sync_seeds{0};
  SynonymDictionary dict;
  ScenarioMetrics metrics;

  struct Tracked {
    RecordId id{};
    uint64_t created_at = 0;  // simulation clock, skew-free
    size_t origin = 0;
    size_t chain_root = 0;
    bool delivered = false;
  };
  std::vector<Tracked> tracked;
  size_t undelivered = 0;
  uint64_t record_counter = 0;
  double propagation_sum = 0;

  // (time, insertion index, row tail) so rows sort by time while handlers
  // that simulate past their trigger keep a stable order
  std::vector<std::tuple<uint64_t, size_t, std::string>> rows;

  void emit(uint64_t time, std::string tail) {
    rows.emplace_back(time, rows.size(), std::move(tail));
  }

  size_t chain_root_of(size_t idx) const {
    size_t r = idx;
    while (sim->node(r).parent) r = *sim->node(r).parent;
    return r;
  }

  std::string link_name(const SimLink& link) const {
    return sim->node(link.child).name + ">" + sim->node(link.parent).name;
  }

  void create_record(size_t origin, const WriteSpec& w, DetRng& rng);
  void settle_deliveries(uint64_t at);
  void run_link_window(size_t link_idx, SyncWindow window, bool scheduled);
  void run_query_event(const QuerySpec& q);
};

const char* const kPayloadPhrases[] = {
    "routine visit",    "bp check",        "blood pressure reading",
    "malaria test",     "fever complaint", "vaccination dose",
    "antenatal care",   "wound dressing",  "lab result",
    "referral note",    "cough exam",      "follow up",
};
constexpr size_t kPayloadPhraseCount = sizeof(kPayloadPhrases) / sizeof(kPayloadPhrases[0]);

void ScenarioRun::create_record(size_t origin, const WriteSpec& w, DetRng& rng) {
  SimNode& node = sim->node(origin);

  HealthRecord rec;
  // unique id: origin index (4) ∥ running counter (8) ∥ random tail (4)
  uint64_t counter = record_counter++;
  for (int i = 0; i < 4; ++i) rec.record_id[i] = uint8_t(origin >> (8 * (3 - i)));
  for (int i = 0; i < 8; ++i) rec.record_id[4 + i] = uint8_t(counter >> (8 * (7 - i)));
  Bytes tail = rng.bytes(4);
  std::copy(tail.begin(), tail.end(), rec.record_id.begin() + 12);

  Bytes pseudo = rng.bytes(rec.patient_pseudonym.size());
  std::copy(pseudo.begin(), pseudo.end(), rec.patient_pseudonym.begin());
  rec.facility_id = node.ledger.facility();
  rec.record_type = RecordType(rng.below(6));
  uint64_t local_clock = uint64_t(int64_t(queue.now()) + node.clock_skew);
  rec.created_at = local_clock;
  rec.flags = 0;
  if (rng.chance(w.emergency_rate)) rec.flags |= kFlagEmergency;
  if (rng.chance(w.referral_rate)) rec.flags |= kFlagReferralPending;
  rec.patient_birth_year = uint16_t(1930 + rng.below(90));

  std::string text{kPayloadPhrases[rng.below(kPayloadPhraseCount)]};
  size_t extra = 1 + size_t(rng.below(3));
  for (size_t i = 0; i < extra; ++i) {
    text += ' ';
    text += kPayloadPhrases[rng.below(kPayloadPhraseCount)];
  }
  rec.payload.assign(text.begin(), text.end());

  auto [proof, timing] =
      generate_proof(node.device, leaf_hash(rec), spec->difficulty, local_clock, rng);
  node.ledger.append_record(rec, proof);
  charge_energy(node, timing.elapsed_seconds);

  ++metrics.records_created;
  size_t root = chain_root_of(origin);
  emit(queue.now(), "record," + node.name + ",," +
                        to_hex(rec.record_id.data(), rec.record_id.size()) + "," +
                        to_string(rec.record_type) + "," + std::to_string(rec.flags) +
                        "," + std::to_string(local_clock));
  if (root == origin) {
    ++metrics.records_delivered;  // born at the top of its chain
  } else {
    tracked.push_back({rec.record_id, queue.now(), origin, root, false});
    ++undelivered;
  }
}

void ScenarioRun::settle_deliveries(uint64_t at) {
  if (undelivered == 0) return;
  for (auto& tr : tracked) {
    if (tr.delivered) continue;
    if (!sim->node(tr.chain_root).ledger.contains(tr.id)) continue;
    tr.delivered = true;
    --undelivered;
    ++metrics.records_delivered;
    double latency = double(at - tr.created_at);
    propagation_sum += latency;
    metrics.max_propagation_seconds = std::max(metrics.max_propagation_seconds, latency);
    emit(at, "deliver," + sim->node(tr.chain_root).name + ",," +
                 to_hex(tr.id.data(), tr.id.size()) + "," + fmt("%.3f", latency) + ",,");
  }
}

void ScenarioRun::run_link_window(size_t link_idx, SyncWindow window, bool scheduled) {
  SimLink& link = sim->links()[link_idx];
  SimNode& child = sim->node(link.child);
  SimNode& parent = sim->node(link.parent);
  const std::string lname = link_name(link);

  uint64_t t = window.open_at;
  uint64_t window_bytes = 0;
  size_t sessions_here = 0;
  while (t < window.close_at) {
    SyncOptions options;
    options.rng_seed = sync_seeds.u64();
    SyncReport rep = run_sync(sim->endpoint(link.child), sim->endpoint(link.parent),
                              link.shape, SyncWindow{t, window.close_at}, options);
    ++metrics.sync_sessions;
    ++sessions_here;
    if (rep.aborted) ++metrics.sync_aborts;
    metrics.records_transferred += rep.records_transferred;
    metrics.quarantined += rep.quarantined;
    uint64_t session_bytes = rep.bytes_sent + rep.bytes_received;
    window_bytes += session_bytes;
    metrics.bytes_on_wire += session_bytes;
    charge_energy(child, rep.duration_seconds);
    charge_energy(parent, rep.duration_seconds);

    uint64_t t_end = t + std::max<uint64_t>(1, uint64_t(std::ceil(rep.duration_seconds)));
    t_end = std::min(t_end, window.close_at);
    const char* status = rep.aborted         ? "aborted"
                         : rep.converged     ? "converged"
                         : rep.window_closed ? "window-closed"
                                             : "incomplete";
    emit(t_end, "sync,," + lname + "," + status + "," + std::to_string(session_bytes) +
                    "," + std::to_string(rep.records_transferred) + "," +
                    std::to_string(rep.quarantined));
    settle_deliveries(t_end);

    if (rep.converged || rep.window_closed) break;
    t = std::max(t + 1, t_end);
  }

  double capacity_bits =
      double(link.shape.bits_per_second) * double(window.close_at - window.open_at);
  double utilization = capacity_bits > 0 ? double(window_bytes) * 8.0 / capacity_bits : 0.0;
  metrics.max_window_utilization = std::max(metrics.max_window_utilization, utilization);
  if (scheduled) {
    ++metrics.windows_executed;
    emit(window.open_at, "window,," + lname + "," + std::to_string(window.close_at) +
                             "," + std::to_string(window_bytes) + "," +
                             fmt("%.6f", utilization) + "," + std::to_string(sessions_here));
  }
  child.replay.evict_expired(window.close_at);
  parent.replay.evict_expired(window.close_at);
}

void ScenarioRun::run_query_event(const QuerySpec& q) {
  size_t idx = sim->index_of(q.node);
  QueryResult res = run_query(q.text, dict, sim->node(idx).ledger);
  std::string top = res.matches.empty()
                        ? ""
                        : to_hex(res.matches[0].record_id.data(), res.matches[0].record_id.size());
  emit(queue.now(), "query," + q.node + ",," + normalize_text(q.text) + "," +
                        std::to_string(res.terms.size()) + "," +
                        std::to_string(res.matches.size()) + "," + top);
}

}  // namespace

ScenarioMetrics run_scenario(const ScenarioSpec& spec) {
  if (spec.days == 0) throw Error(Errc::bad_argument, "scenario needs at least one day");
  for (const auto& q : spec.queries) {
    if (q.day >= spec.days + spec.drain_days)
      throw Error(Errc::bad_argument, "query day " + std::to_string(q.day) +
                                          " is outside the simulated horizon");
  }

  TopologySpec topo = spec.topology;
  topo.seed = spec.seed;
  Simulator sim = Simulator::build(topo);

  ScenarioRun run;
  run.spec = &spec;
  run.sim = &sim;

  const uint64_t sched_days = spec.days + spec.drain_days;
  const uint64_t horizon = sched_days * kDaySeconds;

  DetRng root_rng(spec.seed);
  run.sync_seeds = root_rng.substream("sync-seeds");
  if (!spec.dictionary.empty()) run.dict = SynonymDictionary::load(spec.dictionary);

  run.metrics.name = spec.name;
  run.metrics.seed = spec.seed;
  run.metrics.days = spec.days;
  run.metrics.horizon_seconds = horizon;
  run.metrics.nodes = sim.node_count();
  run.metrics.links = sim.links().size();

  // window schedules: drawn per link, pinned to the child's name
  for (size_t li = 0; li < sim.links().size(); ++li) {
    SimLink& link = sim.links()[li];
    const std::string& child_name = sim.node(link.child).name;
    if (link.continuous) {
      for (uint64_t t = 0; t < horizon; t += kPollInterval) {
        SyncWindow w{t, std::min(t + kPollInterval, horizon)};
        run.queue.schedule(w.open_at, [&run, li, w] { run.run_link_window(li, w, false); });
      }
    } else {
      uint64_t wseed = root_rng.substream("windows " + child_name).u64();
      link.windows = schedule_windows(link.pattern, sched_days, wseed);
      for (const SyncWindow& w : link.windows)
        run.queue.schedule(w.open_at, [&run, li, w] { run.run_link_window(li, w, true); });
    }
  }

  // record creation, spread over each writer's duty hours from clinic open
  for (const WriteSpec& w : spec.writes) {
    if (w.per_day == 0) continue;
    size_t origin = sim.index_of(w.node);
    auto writer_rng = std::make_shared<DetRng>(root_rng.substream("writes " + w.node));
    uint64_t duty_seconds = uint64_t(sim.node(origin).uptime_hours * 3600);
    uint64_t step = std::max<uint64_t>(1, duty_seconds / w.per_day);
    for (uint64_t day = 0; day < spec.days; ++day) {
      for (uint32_t k = 0; k < w.per_day; ++k) {
        uint64_t at = day * kDaySeconds + kClinicOpenSecond + k * step;
        run.queue.schedule(at, [&run, origin, w, writer_rng] {
          run.create_record(origin, w, *writer_rng);
        });
      }
    }
  }

  for (const QuerySpec& q : spec.queries) {
    uint64_t at = (q.day + 1) * kDaySeconds - 1;
    run.queue.schedule(at, [&run, q] { run.run_query_event(q); });
  }

  run.queue.run_until(horizon);

  ScenarioMetrics& m = run.metrics;
  m.records_pending = m.records_created - m.records_delivered;
  size_t propagated = run.tracked.size() - run.undelivered;
  m.mean_propagation_seconds =
      propagated > 0 ? run.propagation_sum / double(propagated) : 0.0;

  m.all_links_converged = true;
  for (const SimLink& link : sim.links()) {
    SyncTree a = SyncTree::build(sim.node(link.child).ledger);
    SyncTree b = SyncTree::build(sim.node(link.parent).ledger);
    if (!(a.root() == b.root())) m.all_links_converged = false;
  }

  for (size_t i = 0; i < sim.node_count(); ++i)
    m.energy_joules[sim.node(i).name] = sim.node(i).energy_joules;

  std::stable_sort(run.rows.begin(), run.rows.end(),
                   [](const auto& a, const auto& b) {
                     return std::tie(std::get<0>(a), std::get<1>(a)) <
                            std::tie(std::get<0>(b), std::get<1>(b));
                   });
  std::string csv = "time,event,node,link,a,b,c,d\n";
  for (const auto& [time, seq, tail] : run.rows) {
    csv += std::to_string(time);
    csv += ',';
    csv += tail;
    csv += '\n';
  }
  m.csv = std::move(csv);

  std::ostringstream js;
  js << "{\n";
  js << "  \"scenario\": \"" << m.name << "\",\n";
  js << "  \"seed\": " << m.seed << ",\n";
  js << "  \"days\": " << m.days << ",\n";
  js << "  \"horizon_seconds\": " << m.horizon_seconds << ",\n";
  js << "  \"nodes\": " << m.nodes << ",\n";
  js << "  \"links\": " << m.links << ",\n";
  js << "  \"records_created\": " << m.records_created << ",\n";
  js << "  \"records_delivered\": " << m.records_delivered << ",\n";
  js << "  \"records_pending\": " << m.records_pending << ",\n";
  js << "  \"max_propagation_seconds\": " << fmt("%.3f", m.max_propagation_seconds) << ",\n";
  js << "  \"mean_propagation_seconds\": " << fmt("%.3f", m.mean_propagation_seconds) << ",\n";
  js << "  \"windows_executed\": " << m.windows_executed << ",\n";
  js << "  \"sync_sessions\": " << m.sync_sessions << ",\n";
  js << "  \"sync_aborts\": " << m.sync_aborts << ",\n";
  js << "  \"records_transferred\": " << m.records_transferred << ",\n";
  js << "  \"quarantined\": " << m.quarantined << ",\n";
  js << "  \"bytes_on_wire\": " << m.bytes_on_wire << ",\n";
  js << "  \"max_window_utilization\": " << fmt("%.6f", m.max_window_utilization) << ",\n";
  js << "  \"all_links_converged\": " << (m.all_links_converged ? "true" : "false") << ",\n";
  js << "  \"energy_joules\": {";
  bool first = true;
  for (const auto& [name, joules] : m.energy_joules) {
    js << (first ? "\n" : ",\n") << "    \"" << name << "\": " << fmt("%.3f", joules);
    first = false;
  }
  js << (first ? "" : "\n  ") << "}\n";
  js << "}\n";
  m.json = js.str();

  return run.metrics;
}

}  // namespace slh
