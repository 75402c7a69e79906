#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>

#include "../oracles/aabb_oracle.hpp"
#include "../oracles/graph_oracle.hpp"
#include "../oracles/sm_oracle.hpp"
#include "../support/cubesat.hpp"
#include "../support/random_model.hpp"
#include "../support/temp_dir.hpp"
#include "dthread/core/digest.hpp"
#include "dthread/docpipe/document.hpp"
#include "dthread/docpipe/extract.hpp"
#include "dthread/geom/link.hpp"
#include "dthread/service/workspace.hpp"
#include "dthread/store/project_file.hpp"
#include "dthread/synth/dsm.hpp"
#include "dthread/verify/behavior.hpp"
#include "dthread/verify/report.hpp"

using namespace dthread;
namespace fs = std::filesystem;
using dthread::testing::CubeSatFault;
using dthread::testing::TempDir;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

void require(Outcome& o, bool cond, const std::string& what) {
  if (!cond && o.pass) {
    o.pass = false;
    o.detail = what;
  }
}

int failures = 0;

void criterion(const std::string& name, double limit_s, const std::function<Outcome()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const bool in_time = secs < limit_s;
  const bool pass = o.pass && in_time;
  if (!pass) ++failures;
  char timing[64];
  std::snprintf(timing, sizeof timing, "%.3f s, limit %.0f s", secs, limit_s);
  std::cout << (pass ? "PASS" : "FAIL") << "  " << name << ": " << o.detail << " (" << timing
            << (in_time ? "" : ", too slow") << ")" << std::endl;
}

std::string read(const fs::path& p) { return service::read_file(p); }

// --- extraction -----------------------------------------------------------------

Outcome extraction() {
  Outcome o;
  const auto labels = nlohmann::json::parse(read(dthread::testing::cubesat_dir() / "labels.json"))["requirements"];
  core::Model model;
  std::size_t sentences = 0, gold_total = 0;
  std::set<std::pair<std::string, std::string>> gold, got;
  std::map<core::Uid, std::string> raw_by_doc;
  for (const auto& name : dthread::testing::cubesat_documents()) {
    const std::string raw = read(dthread::testing::cubesat_dir() / name);
    const auto doc = docpipe::ingest_document(model, name, raw, docpipe::format_from_path(name));
    raw_by_doc[doc.uid] = raw;
    sentences += doc.sentences.size();
    for (const auto& t : labels.at(name)) gold.insert({name, t.get<std::string>()});
    gold_total += labels.at(name).size();
  }
  docpipe::BaselineAdapter adapter;
  std::vector<docpipe::CandidateSpan> candidates;
  for (const auto& [uid, doc] : model.documents()) {
    auto c = docpipe::annotate_candidates(doc, adapter);
    candidates.insert(candidates.end(), c.begin(), c.end());
  }
  docpipe::extract_requirements(model, candidates);
  std::size_t verbatim = 0;
  for (const auto& [uid, req] : model.requirements()) {
    const auto& doc = model.documents().at(req.source->doc);
    got.insert({doc.title, req.text});
    const bool in_doc = doc.text.substr(req.source->span.start, req.source->span.end - req.source->span.start) == req.text;
    const bool in_raw = raw_by_doc[doc.uid].find(req.text) != std::string::npos;
    verbatim += in_doc && in_raw;
  }
  std::size_t tp = 0;
  for (const auto& g : got) tp += gold.count(g);
  const double precision = got.empty() ? 0 : 100.0 * static_cast<double>(tp) / static_cast<double>(got.size());
  const double recall = gold.empty() ? 0 : 100.0 * static_cast<double>(tp) / static_cast<double>(gold.size());
  const bool camera = gold.count({"system_requirements.md", "The camera shall send data to the processing unit."}) > 0;
  require(o, model.documents().size() >= 3, "fewer than 3 documents");
  require(o, sentences >= 60, "fewer than 60 sentences");
  require(o, gold_total >= 20 && gold.size() == gold_total, "fewer than 20 distinct labels");
  require(o, camera, "camera sentence missing from labels");
  require(o, tp == got.size() && tp == gold.size(), "precision/recall below 100%");
  require(o, verbatim == got.size(), "extracted text not verbatim");
  std::ostringstream d;
  d.setf(std::ios::fixed);
  d.precision(1);
  d << "precision " << precision << "%, recall " << recall << "% on " << gold.size() << " labelled requirements, "
    << sentences << " sentences, " << model.documents().size() << " documents; " << verbatim << "/" << got.size()
    << " verbatim";
  if (o.pass) o.detail = d.str();
  return o;
}

// --- round trips ----------------------------------------------------------------

Outcome round_trips() {
  Outcome o;
  std::mt19937_64 rng(77);
  std::size_t models = 0, files = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const auto project = dthread::testing::random_project(rng, 20);
    const auto& m = project.model();
    require(o, m.components().size() <= 20, "random model too large");
    const auto dsm = synth::graph_to_dsm(m);
    const auto graph = synth::dsm_to_graph(dsm);
    require(o, synth::graph_to_dsm(graph) == dsm, "graph->DSM->graph changed trial " + std::to_string(trial));
    require(o, synth::dsm_to_graph(synth::graph_to_dsm(graph)) == graph, "DSM->graph->DSM changed");
    ++models;
    const std::string text = store::serialize_project(project);
    const auto back = store::parse_project(text);
    require(o, back == project, "load(save(p)) != p on trial " + std::to_string(trial));
    require(o, store::serialize_project(back) == text, "re-save not byte-identical on trial " + std::to_string(trial));
    ++files;
  }
  for (auto fault : {CubeSatFault::kNone, CubeSatFault::kBudget, CubeSatFault::kSupply, CubeSatFault::kRelational,
                     CubeSatFault::kContact, CubeSatFault::kInvariant}) {
    TempDir dir;
    const auto path = dthread::testing::build_cubesat(dir.path(), fault);
    const std::string bytes = read(path);
    const auto project = store::load_project(path);
    const auto again = dir / "again.thread.json";
    store::save_project(project, again);
    require(o, store::parse_project(bytes) == project, "fixture load mismatch");
    require(o, read(again) == bytes, "fixture re-save differs (" + dthread::testing::fault_name(fault) + ")");
    ++files;
  }
  if (o.pass) {
    o.detail = std::to_string(models) + " random models graph<->DSM identical; " + std::to_string(files) +
               " project files load equal and re-save byte-identical";
  }
  return o;
}

// --- oracle equivalence ---------------------------------------------------------

Outcome oracles() {
  Outcome o;
  std::mt19937 rng(2024);
  for (int trial = 0; trial < 200; ++trial) {
    core::Model m;
    const int n = 1 + static_cast<int>(rng() % 50);
    std::vector<core::Uid> nodes;
    for (int i = 0; i < n; ++i) nodes.push_back(m.register_uid(rng() % 2 ? "cmp" : "req"));
    std::vector<core::TraceEdge> edges;
    const int edge_count = static_cast<int>(rng() % (2 * n + 1));
    for (int i = 0; i < edge_count; ++i) {
      core::TraceEdge e{nodes[rng() % n], static_cast<core::TraceKind>(rng() % 6), nodes[rng() % n]};
      if (m.has_trace(e)) continue;
      m.add_trace(e.src, e.kind, e.dst);
      edges.push_back(e);
    }
    std::set<core::TraceKind> kinds;
    for (int k = 0; k < 6; ++k) {
      if (rng() % 2) kinds.insert(static_cast<core::TraceKind>(k));
    }
    const auto dir = static_cast<core::Direction>(rng() % 3);
    const auto& start = nodes[rng() % n];
    require(o, m.impact_set(start, kinds, dir) == oracle::reachable(edges, start, kinds, dir),
            "impact_set differs on graph " + std::to_string(trial));
  }

  std::mt19937_64 rng64(2025);
  std::uniform_int_distribution<int> coord(-6, 6);
  for (int i = 0; i < 200; ++i) {
    oracle::Box ob[2];
    geom::Aabb boxes[2];
    for (int k = 0; k < 2; ++k) {
      for (int d = 0; d < 3; ++d) {
        const int x = coord(rng64), y = coord(rng64);
        ob[k].lo[d] = std::min(x, y) * 0.5;
        ob[k].hi[d] = std::max(x, y) * 0.5;
      }
      boxes[k] = geom::Aabb({ob[k].lo[0], ob[k].lo[1], ob[k].lo[2]}, {ob[k].hi[0], ob[k].hi[1], ob[k].hi[2]});
    }
    require(o, boxes[0].intersects(boxes[1]) == oracle::boxes_meet(ob[0], ob[1]), "AABB differs on pair " + std::to_string(i));
  }

  std::mt19937_64 smrng(4243);
  std::size_t max_configs = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const auto om = oracle::random_machine(smrng);
    const auto def = oracle::to_def(om);
    std::size_t configs = om.states;
    for (const auto& v : om.vars) configs *= static_cast<std::size_t>(v.hi - v.lo + 1);
    max_configs = std::max(max_configs, configs);
    require(o, configs <= 1000, "machine exceeds 1000 configurations");
    const auto expected = oracle::brute_force(om);
    std::map<std::string, int> want, got;
    std::map<int, int> dead;
    std::set<int> unreachable;
    for (const auto& [k, d] : expected.violated) {
      const auto label = def.invariants[k].state + ": " + def.invariants[k].expr;
      if (!want.contains(label) || d < want[label]) want[label] = d;
    }
    for (const auto& f : verify::check_state_machine(def)) {
      if (f.rule == "behavior.invariant") {
        got[f.evidence["invariant"].get<std::string>()] = static_cast<int>(f.evidence["trace"].size()) - 1;
        require(o, verify::replay_trace(def, f.evidence["trace"]).has_value(), "trace does not replay");
      } else if (f.rule == "behavior.deadlock") {
        dead[std::stoi(f.evidence["configuration"]["state"].get<std::string>().substr(1))] =
            static_cast<int>(f.evidence["trace"].size()) - 1;
      } else if (f.rule == "behavior.unreachable") {
        unreachable.insert(std::stoi(f.evidence["state"].get<std::string>().substr(1)));
      } else {
        require(o, false, "unexpected finding " + f.rule);
      }
    }
    require(o, got == want && dead == expected.deadlocked && unreachable == expected.unreachable,
            "state-machine findings differ on machine " + std::to_string(trial));
  }
  if (o.pass) {
    o.detail = "impact_set = BFS on 200 graphs (<= 50 nodes); AABB = point sampling on 200 pairs; "
               "invariant/deadlock/reachability = brute force on 200 machines (<= " +
               std::to_string(max_configs) + " configurations)";
  }
  return o;
}

// --- STEP -----------------------------------------------------------------------

bool box_is(const geom::Aabb& b, geom::Vec3 lo, geom::Vec3 hi) {
  if (b.is_empty()) return false;
  for (int i = 0; i < 3; ++i) {
    if (std::abs(b.min()[i] - lo[i]) > 1e-9 || std::abs(b.max()[i] - hi[i]) > 1e-9) return false;
  }
  return true;
}

template <typename Pred>
bool fails_with(const std::string& file, Errc code, Pred&& pred) {
  try {
    geom::parse_step(read(fs::path(DTHREAD_FIXTURES) / "step" / file));
  } catch (const Error& e) {
    return e.code() == code && pred(e);
  }
  return false;
}

Outcome step_parsing() {
  Outcome o;
  const fs::path dir = fs::path(DTHREAD_FIXTURES) / "step";
  auto cube = geom::parse_step(read(dir / "cube.stp"));
  require(o, cube.products.size() == 1 && cube.roots().size() == 1, "cube tree");
  require(o, box_is(geom::world_aabb(cube, cube.products[0].id), {0, 0, 0}, {1, 1, 1}), "cube AABB");

  auto two = geom::parse_step(read(dir / "two_part.stp"));
  const auto& plate = two.product_named("PLATE");
  const auto& pin = two.product_named("PIN");
  require(o, two.roots() == std::vector<std::uint64_t>{plate.id} && plate.children.size() == 1 &&
                 plate.children[0].child == pin.id && pin.children.empty(),
          "two-part tree");
  require(o, box_is(geom::world_aabb(two, pin.id), {10, 0, 0}, {11, 1, 1}), "pin AABB");
  require(o, box_is(geom::world_aabb(two, plate.id), {0, 0, 0}, {11, 1, 1}), "plate AABB");

  auto rot = geom::parse_step(read(dir / "rotated.stp"));
  const auto& root = rot.product_named("ROOT");
  const auto& sub = rot.product_named("SUB");
  const auto& leaf = rot.product_named("LEAF");
  require(o, rot.roots() == std::vector<std::uint64_t>{root.id} && root.children.size() == 1 &&
                 root.children[0].child == sub.id && sub.children.size() == 1 && sub.children[0].child == leaf.id,
          "rotated tree");
  require(o, box_is(geom::world_aabb(rot, sub.id), {99, 0, 0}, {100, 7, 1}), "sub-assembly AABB");
  require(o, box_is(geom::world_aabb(rot, leaf.id), {99, 5, 0}, {100, 7, 1}), "leaf AABB");
  require(o, box_is(geom::world_aabb(rot, root.id), {0, 0, -1}, {120, 10, 1}), "root AABB");

  require(o, fails_with("fault_lexical.stp", Errc::kSyntax, [](const Error& e) {
            const auto* s = dynamic_cast<const geom::StepSyntaxError*>(&e);
            return s && s->line() == 28 && s->column() == 37;
          }), "lexical fault position");
  require(o, fails_with("fault_unresolved.stp", Errc::kUnresolvedReference, [](const Error& e) {
            return std::string(e.what()).find("#99 referenced by #77 (line 84)") != std::string::npos;
          }), "unresolved reference position");
  require(o, fails_with("fault_cycle.stp", Errc::kCyclicAssembly, [](const Error& e) {
            return std::string(e.what()).find("ALPHA -> BETA -> ALPHA") != std::string::npos;
          }), "cycle report");
  require(o, fails_with("fault_missing_header.stp", Errc::kMissingHeader, [](const Error&) { return true; }),
          "missing header");
  if (o.pass) o.detail = "cube, two-part and rotated trees and AABBs exact to 1e-9 mm; 4 fault files rejected with position";
  return o;
}

// --- CubeSat verification -------------------------------------------------------

verify::VerificationReport verify_fixture(const fs::path& project) {
  const auto ws = service::Workspace::open(project);
  const auto specs = verify::parse_constraint_file(read(dthread::testing::cubesat_dir() / "cubesat.constraints"));
  return ws.verify({}, specs);
}

Outcome cubesat(const std::vector<std::pair<CubeSatFault, fs::path>>& projects) {
  Outcome o;
  const auto& clean = projects.front().second;
  const auto model = store::load_project(clean).model();
  std::set<std::string> roles;
  for (const auto& [uid, c] : model.components()) roles.insert(c.function_tags.begin(), c.function_tags.end());
  for (const char* role : {"structure", "power", "comms", "adcs", "payload", "obc"}) {
    require(o, roles.contains(role), std::string("no component with role ") + role);
  }
  require(o, model.components().size() >= 6, "fewer than 6 components");

  const auto t0 = std::chrono::steady_clock::now();
  const auto r1 = verify_fixture(clean);
  const auto r2 = verify_fixture(clean);
  const verify::VerifyPolicy policy;
  require(o, r1.errors() == 0, "clean fixture has " + std::to_string(r1.errors()) + " Error(s)");
  require(o, verify::report_digest(r1, policy) == verify::report_digest(r2, policy), "report digest unstable");
  std::size_t mass = 0, power = 0;
  for (const auto& f : r1.findings) {
    if (f.rule != "constraint.satisfied") continue;
    mass += f.message.find("mass") != std::string::npos;
    power += f.message.find("power") != std::string::npos;
  }
  require(o, mass > 0 && power > 0, "mass and power budgets not evaluated");

  const std::map<CubeSatFault, std::string> expected{{CubeSatFault::kBudget, "constraint.violated"},
                                                     {CubeSatFault::kSupply, "functional.supply-demand"},
                                                     {CubeSatFault::kRelational, "relational.forbidden"},
                                                     {CubeSatFault::kContact, "geometric.missing-contact"},
                                                     {CubeSatFault::kInvariant, "behavior.invariant"}};
  std::string seen;
  for (const auto& [fault, path] : projects) {
    if (fault == CubeSatFault::kNone) continue;
    const auto r = verify_fixture(path);
    std::vector<std::string> errors;
    for (const auto& f : r.findings) {
      if (f.severity == verify::Severity::kError) errors.push_back(f.rule);
    }
    require(o, errors == std::vector<std::string>{expected.at(fault)},
            dthread::testing::fault_name(fault) + " fault gave " + std::to_string(errors.size()) + " Error(s)");
    seen += (seen.empty() ? "" : ", ") + dthread::testing::fault_name(fault) + " -> " + expected.at(fault);
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  require(o, secs < 5.0, "verification slower than 5 s");
  if (o.pass) {
    o.detail = "clean: 0 Errors, digest " + verify::report_digest(r1, policy).substr(0, 12) + " stable over 2 runs; " +
               seen + " (exactly one Error each)";
  }
  return o;
}

// --- end to end -----------------------------------------------------------------

int sh(const std::string& cmd) {
  const int status = std::system((cmd + " >/dev/null 2>&1").c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

Outcome end_to_end() {
  Outcome o;
  const std::string cli = DTHREAD_CLI;
  const fs::path src = dthread::testing::cubesat_dir();
  std::vector<std::string> bytes;
  int verify_code = -1;
  for (int run = 0; run < 2; ++run) {
    TempDir dir;
    for (const auto& d : dthread::testing::cubesat_documents()) fs::copy_file(src / d, dir / d);
    fs::copy_file(src / "cubesat.stp", dir / "cubesat.stp");
    const std::string p = "'" + (dir / "cubesat.thread.json").string() + "'";
    const std::string base = "'" + cli + "' -p " + p + " ";
    std::vector<std::string> steps{"'" + cli + "' init " + p};
    for (const auto& d : dthread::testing::cubesat_documents()) steps.push_back(base + "ingest '" + (dir / d).string() + "'");
    steps.push_back(base + "extract --adapter baseline");
    steps.push_back(base + "synthesize");
    steps.push_back(base + "ingest '" + (dir / "cubesat.stp").string() + "'");
    steps.push_back(base + "edit --json '@" + (src / "edits.jsonl").string() + "'");
    for (const auto& s : steps) {
      const int code = sh(s);
      require(o, code == 0, "step exited " + std::to_string(code) + ": " + s);
    }
    verify_code = sh(base + "verify --constraints '" + (src / "cubesat.constraints").string() + "'");
    require(o, verify_code == 0, "verify exited " + std::to_string(verify_code));
    bytes.push_back(read(dir / "cubesat.thread.json"));
  }
  require(o, bytes[0] == bytes[1], "project files differ between runs");
  if (o.pass) {
    o.detail = "init, ingest x4, extract, synthesize, edit, verify all exit 0; project file (" +
               std::to_string(bytes[0].size()) + " bytes, sha256 " + sha256_hex(bytes[0]).substr(0, 12) + ") identical across 2 runs";
  }
  return o;
}

}  // namespace

int main() {
  criterion("Extraction fidelity", 1, extraction);
  criterion("Round-trip suite", 5, round_trips);
  criterion("Oracle equivalence", 30, oracles);
  criterion("STEP parsing", 1, step_parsing);

  std::vector<TempDir> dirs(6);
  std::vector<std::pair<CubeSatFault, fs::path>> projects;
  int i = 0;
  for (auto fault : {CubeSatFault::kNone, CubeSatFault::kBudget, CubeSatFault::kSupply, CubeSatFault::kRelational,
                     CubeSatFault::kContact, CubeSatFault::kInvariant}) {
    projects.emplace_back(fault, dthread::testing::build_cubesat(dirs[i++].path(), fault));
  }
  criterion("CubeSat verification", 5, [&] { return cubesat(projects); });
  criterion("End-to-end CLI pipeline", 10, end_to_end);

  std::cout << (failures == 0 ? "all primary criteria passed" : std::to_string(failures) + " criterion(s) failed")
            << std::endl;
  return failures == 0 ? 0 : 1;
}
