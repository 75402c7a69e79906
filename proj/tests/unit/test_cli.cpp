#include <gtest/gtest.h>

#include <fstream>

#include "../support/cubesat.hpp"
#include "../support/temp_dir.hpp"
#include "dthread/docpipe/extract.hpp"
#include "dthread/service/workspace.hpp"
#include "dthread/store/project_file.hpp"
#include "dthread/synth/dsm.hpp"

using dthread::testing::build_cubesat;
using dthread::testing::cubesat_dir;
using dthread::testing::CubeSatFault;
using dthread::testing::run_cli;
using dthread::testing::TempDir;

namespace {

std::string slurp(const std::filesystem::path& p) { return dthread::service::read_file(p); }

std::string constraints() { return (cubesat_dir() / "cubesat.constraints").string(); }

}  // namespace

TEST(Cli, UsageErrorsExitTwo) {
  auto r = run_cli({});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("Usage"), std::string::npos);
  EXPECT_EQ(run_cli({"frobnicate"}).code, 2);
  EXPECT_EQ(run_cli({"impact"}).code, 2);
  EXPECT_EQ(run_cli({"extract", "--adapter", "oracle"}).code, 2);
}

TEST(Cli, HelpExitsZero) { EXPECT_EQ(run_cli({"--help"}).code, 0); }

TEST(Cli, ToolFailuresExitTwo) {
  TempDir dir;
  const auto p = (dir / "x.thread.json").string();
  EXPECT_EQ(run_cli({"-p", p, "synthesize"}).code, 2);  // missing project
  ASSERT_EQ(run_cli({"init", p}).code, 0);
  auto again = run_cli({"init", p});
  EXPECT_EQ(again.code, 2);
  EXPECT_NE(again.err.find("already exists"), std::string::npos);
  EXPECT_EQ(run_cli({"-p", p, "edit", "--json", "{\"op\": \"Nope\"}"}).code, 2);
  EXPECT_EQ(run_cli({"-p", p, "impact", "cmp-0"}).code, 2);
  EXPECT_EQ(run_cli({"-p", p, "extract", "--adapter", "replay"}).code, 2);  // no fixture
}

TEST(Cli, PipelineOnCubeSatIsCleanAndReproducible) {
  TempDir a, b;
  std::vector<int> codes;
  const auto pa = build_cubesat(a.path(), CubeSatFault::kNone, &codes);
  for (int c : codes) EXPECT_EQ(c, 0);
  const auto pb = build_cubesat(b.path());
  EXPECT_EQ(slurp(pa), slurp(pb));

  auto v = run_cli({"-p", pa.string(), "verify", "--constraints", constraints()});
  EXPECT_EQ(v.code, 0) << v.out;
  EXPECT_NE(v.out.find("0 error(s)"), std::string::npos);

  // verify does not touch the project
  EXPECT_EQ(slurp(pa), slurp(pb));
  auto project = dthread::store::load_project(pa);
  EXPECT_EQ(project.model().components().size(), 6u);
  EXPECT_EQ(project.model().state_machines().size(), 1u);
}

TEST(Cli, SeededBudgetViolationExitsOne) {
  TempDir dir;
  const auto p = build_cubesat(dir.path(), CubeSatFault::kBudget);
  const auto report = (dir / "report.json").string();
  auto v = run_cli({"-p", p.string(), "verify", "--constraints", constraints(), "--report", report});
  EXPECT_EQ(v.code, 1);
  EXPECT_NE(v.out.find("Error\tconstraint.violated"), std::string::npos);
  auto j = nlohmann::json::parse(slurp(report));
  EXPECT_EQ(j["totals"]["Error"], 1);
}

TEST(Cli, ImpactMatchesLibrary) {
  TempDir dir;
  const auto p = build_cubesat(dir.path());
  auto r = run_cli({"-p", p.string(), "impact", "req-0", "--kinds", "satisfies", "--direction", "backward"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto model = dthread::store::load_project(p).model();
  std::string expected;
  for (const auto& u : model.impact_set(dthread::core::Uid::parse("req-0"), {dthread::core::TraceKind::kSatisfies},
                                        dthread::core::Direction::kBackward)) {
    expected += u.str() + "\n";
  }
  EXPECT_EQ(r.out, expected);
  EXPECT_NE(expected.find("cmp-0"), std::string::npos);  // the structure satisfies req-0
}

TEST(Cli, DsmExport) {
  TempDir dir;
  const auto p = build_cubesat(dir.path());
  const auto csv = (dir / "dsm.csv").string();
  const auto js = (dir / "dsm.json").string();
  ASSERT_EQ(run_cli({"-p", p.string(), "dsm", "export", "--csv", csv, "--json", js}).code, 0);
  const auto model = dthread::store::load_project(p).model();
  const auto dsm = dthread::synth::graph_to_dsm(model);
  EXPECT_EQ(slurp(csv), dthread::synth::dsm_to_csv(dsm, model));
  EXPECT_EQ(dthread::synth::dsm_from_json(nlohmann::json::parse(slurp(js))), dsm);
  EXPECT_TRUE(slurp(csv).starts_with(",Structure,Battery,Processing Unit,Radio,Attitude Controller,Camera\n"));
}

TEST(Cli, EditsAreJournaledWithAuthorAndTimestamp) {
  TempDir dir;
  const auto p = build_cubesat(dir.path());
  auto r = run_cli({"-p", p.string(), "edit", "--author", "jo", "--timestamp", "1700000000", "--json",
                    R"({"op": "RenameComponent", "uid": "@Radio", "name": "UHF Radio"})"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto project = dthread::store::load_project(p);
  const auto& last = std::get<dthread::synth::RefinementEdit>(project.journal().entries.back());
  EXPECT_EQ(last.author, "jo");
  EXPECT_EQ(last.timestamp, 1700000000);
  EXPECT_NE(project.model().find_component_by_name("UHF Radio"), nullptr);
}

TEST(Cli, FailedEditBatchChangesNothing) {
  TempDir dir;
  const auto p = build_cubesat(dir.path());
  const std::string before = slurp(p);
  auto r = run_cli({"-p", p.string(), "edit", "--json",
                    R"([{"op": "RenameComponent", "uid": "@Radio", "name": "X"}, {"op": "RemoveComponent", "uid": "cmp-99"}])"});
  EXPECT_EQ(r.code, 2);
  EXPECT_EQ(slurp(p), before);
}

TEST(Cli, VerifyJsonCarriesDigest) {
  TempDir dir;
  const auto p = build_cubesat(dir.path());
  auto a = run_cli({"-p", p.string(), "verify", "--json"});
  auto b = run_cli({"-p", p.string(), "verify", "--json"});
  ASSERT_EQ(a.code, 0);
  EXPECT_EQ(a.out, b.out);
  EXPECT_EQ(nlohmann::json::parse(a.out)["digest"].get<std::string>().size(), 64u);
}

TEST(Cli, ReplayAdapterReproducesRecordedExtraction) {
  TempDir dir;
  const auto p = (dir / "r.thread.json").string();
  ASSERT_EQ(run_cli({"init", p}).code, 0);
  for (const auto& d : dthread::testing::cubesat_documents()) {
    ASSERT_EQ(run_cli({"-p", p, "ingest", (cubesat_dir() / d).string()}).code, 0);
  }
  // record what the baseline proposes, in replay format
  const auto model = dthread::store::load_project(p).model();
  std::ofstream fixture(dir / "replay.jsonl");
  dthread::docpipe::BaselineAdapter baseline;
  for (const auto& [uid, doc] : model.documents()) {
    nlohmann::json candidates = nlohmann::json::array();
    for (const auto& c : baseline.propose(doc)) {
      candidates.push_back({{"start", c.span.start}, {"end", c.span.end}, {"trigger", c.trigger}, {"confidence", "0.9"}});
    }
    const auto request = dthread::docpipe::adapter_request(doc);
    fixture << nlohmann::json{{"request_digest", dthread::docpipe::request_digest(request)},
                              {"response", {{"candidates", candidates}}}}
                   .dump()
            << "\n";
  }
  fixture.close();
  const auto copy = (dir / "b.thread.json").string();
  std::filesystem::copy_file(p, copy);

  auto r = run_cli({"-p", p, "extract", "--adapter", "replay", "--replay-fixture", (dir / "replay.jsonl").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  ASSERT_EQ(run_cli({"-p", copy, "extract"}).code, 0);
  const auto replayed = dthread::store::load_project(p).model().requirements();
  const auto direct = dthread::store::load_project(copy).model().requirements();
  ASSERT_EQ(replayed.size(), 25u);
  ASSERT_EQ(replayed.size(), direct.size());
  for (const auto& [uid, req] : direct) EXPECT_EQ(replayed.at(uid).text, req.text);

  // a document the fixture has never seen fails the stage and changes nothing
  std::ofstream(dir / "new.txt") << "The radio shall relay beacons to the processing unit.\n";
  ASSERT_EQ(run_cli({"-p", p, "ingest", (dir / "new.txt").string()}).code, 0);
  const std::string before = slurp(p);
  auto miss = run_cli({"-p", p, "extract", "--adapter", "replay", "--replay-fixture", (dir / "replay.jsonl").string()});
  EXPECT_EQ(miss.code, 2);
  EXPECT_NE(miss.err.find("adapter-failure"), std::string::npos) << miss.err;
  EXPECT_EQ(slurp(p), before);
}
