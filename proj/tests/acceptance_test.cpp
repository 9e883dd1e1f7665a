// Acceptance suite: one test per shipping criterion, each printing a
// PASS/FAIL line. Run via ctest or directly as ./bpce_acceptance.

#include <gtest/gtest.h>

#include <array>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "bpce/bpce.hpp"
#include "testutil.hpp"

using namespace bpce;
using namespace bpce::testutil;
namespace fs = std::filesystem;

namespace {

const char* kFixtures = BPCE_FIXTURE_DIR;
const char* kCli = BPCE_CLI_PATH;

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  EXPECT_TRUE(in) << p;
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

struct RunResult {
  int exit_code = -1;
  std::string output;
};

RunResult run_cli(const std::string& args) {
  std::string cmd = std::string(kCli) + " " + args + " 2>&1";
  std::array<char, 4096> buf{};
  RunResult r;
  FILE* pipe = popen(cmd.c_str(), "r");
  EXPECT_NE(pipe, nullptr);
  while (std::size_t n = std::fread(buf.data(), 1, buf.size(), pipe)) r.output.append(buf.data(), n);
  int status = pclose(pipe);
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

class Criterion : public ::testing::Test {
 protected:
  void verdict(int number, const std::string& name) {
    std::printf("[CRITERION %d] %-24s %s\n", number, name.c_str(),
                HasFailure() ? "FAIL" : "PASS");
    std::fflush(stdout);
  }
  fs::path temp_dir(const std::string& tag) {
    fs::path p = fs::temp_directory_path() / ("bpce-acc-" + tag + "-" + std::to_string(::getpid()));
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
  }
};

ProcessGraph load_fixture_variant(const std::string& name) {
  ModelValue m = parse_model_json(slurp(fs::path(kFixtures) / "excel" / name));
  return std::get<ProcessGraph>(m);
}

ConfigurableProcessGraph load_fixture_cg(const std::string& name) {
  ModelValue m = parse_model_json(slurp(fs::path(kFixtures) / "excel" / name));
  return std::get<ConfigurableProcessGraph>(m);
}

// 1. The worked example: merging the two variants, editing variant 1 and
// co-evolving reproduces the frozen merged model and leaves variant 2 at its
// frozen state, with the documented 1 append / 1 add / 4 delete judgment.
TEST_F(Criterion, GoldenWalkthrough) {
  fs::path fx = fs::path(kFixtures) / "excel";
  fs::path fam = temp_dir("walkthrough");
  fs::remove_all(fam);  // merge wants to create it

  RunResult merged = run_cli("merge " + (fx / "variant1.json").string() + " " +
                             (fx / "variant2.json").string() + " -o " + fam.string());
  ASSERT_EQ(merged.exit_code, 0) << merged.output;
  EXPECT_EQ(slurp(fam / "cg.json"), slurp(fx / "golden-cg-initial.json"));

  ProcessGraph old_v1 = load_fixture_variant("variant1.json");
  ProcessGraph new_v1 = load_fixture_variant("variant1-edited.json");
  ChangeSequence ops = detect_change_sequence(old_v1, new_v1);
  std::map<std::string, int> counts;
  for (const auto& op : ops) ++counts[op_name(op)];
  EXPECT_EQ(counts["AppendNode"], 1);
  EXPECT_EQ(counts["AddNode"], 1);
  EXPECT_EQ(counts["DeleteEdge"], 4);
  EXPECT_EQ(ops.size(), 6u);

  auto t0 = std::chrono::steady_clock::now();
  RunResult evolved = run_cli("coevolve " + fam.string() + " " +
                              (fx / "variant1-edited.json").string());
  auto t1 = std::chrono::steady_clock::now();
  ASSERT_EQ(evolved.exit_code, 0) << evolved.output;
  EXPECT_LT(std::chrono::duration<double>(t1 - t0).count(), 1.0);

  // byte-stable against the goldens, and isomorphic as graphs
  EXPECT_EQ(slurp(fam / "cg.json"), slurp(fx / "golden-cg-evolved.json"));
  EXPECT_EQ(slurp(fam / "variant-2.json"), slurp(fx / "golden-variant2-evolved.json"));
  ConfigurableProcessGraph got_cg = [&] {
    ModelValue m = parse_model_json(slurp(fam / "cg.json"));
    return std::get<ConfigurableProcessGraph>(m);
  }();
  EXPECT_TRUE(isomorphic(got_cg, load_fixture_cg("golden-cg-evolved.json")));
  ProcessGraph got_v2 = [&] {
    ModelValue m = parse_model_json(slurp(fam / "variant-2.json"));
    return std::get<ProcessGraph>(m);
  }();
  EXPECT_TRUE(isomorphic(got_v2, load_fixture_variant("golden-variant2-evolved.json")));
  EXPECT_TRUE(isomorphic(got_v2, load_fixture_variant("variant2.json")));

  fs::remove_all(fam);
  verdict(1, "golden-walkthrough");
}

// 2. Projection round-trip over random families and random single-op
// co-evolutions: every variant equals the projection of the evolved merged
// graph, without exception.
TEST_F(Criterion, ProjectionRoundTrip) {
  auto t0 = std::chrono::steady_clock::now();
  GraphGenerator gen(20250809);
  int families = 0, coevolutions = 0, checks = 0;
  while (families < 200 || coevolutions < 500) {
    GenParams p;
    p.variant_count = 2 + int(gen.pick(3));       // 2..4
    p.node_count = 10 + int(gen.pick(26));        // up to ~40 nodes
    p.edit_count = 1 + int(gen.pick(3));
    Family family = gen.random_family(p);
    ++families;
    for (int edit = 0; edit < 3 && coevolutions < 510; ++edit) {
      Pid pid = std::to_string(1 + gen.pick(family.variants.size()));
      ProcessGraph edited =
          replay_sequence(family.variants.at(pid), gen.random_script(family.variants.at(pid), 1));
      CoevolveResult r;
      try {
        r = coevolve(family, edited);
      } catch (const Error& e) {
        ADD_FAILURE() << "coevolve failed: " << e.what();
        continue;
      }
      ++coevolutions;
      for (const auto& [vp, g] : r.family.variants) {
        ProcessGraph projected = project(r.family.cg, vp);
        EXPECT_TRUE(isomorphic(projected, g)) << "family " << families << " pid " << vp;
        ++checks;
      }
      family = std::move(r.family);  // keep evolving the same family
    }
  }
  auto t1 = std::chrono::steady_clock::now();
  double seconds = std::chrono::duration<double>(t1 - t0).count();
  EXPECT_GE(families, 200);
  EXPECT_GE(coevolutions, 500);
  EXPECT_LT(seconds, 120.0);
  std::printf("  families=%d coevolutions=%d projection-checks=%d in %.1fs\n", families,
              coevolutions, checks, seconds);
  verdict(2, "projection-round-trip");
}

// 3. Per-operation coverage: each propagation case runs at least 20 times
// across the random suite and every instance passes the projection and
// well-formedness checks.
TEST_F(Criterion, PerOperationCoverage) {
  GraphGenerator gen(424242);
  std::map<std::string, int> g2cg_counts, cg2g_counts;

  auto tally = [](std::map<std::string, int>& into, const PropagationReport& report) {
    for (const auto& [key, count] : report.case_counts) {
      std::string base = key.substr(0, key.find(':'));
      into[base] += count;
    }
  };

  // variant-side ops, driven through full co-evolution
  const std::array<int, 7> op_kinds{0, 1, 2, 3, 4, 5, 6};
  for (int round = 0; round < 240; ++round) {
    GenParams p;
    p.variant_count = 2;
    p.node_count = 12 + int(gen.pick(8));
    p.edit_count = 2;
    Family family = gen.random_family(p);
    const ProcessGraph& g1 = family.variants.at("1");
    int kind = op_kinds[round % op_kinds.size()];
    ChangeOp op;
    bool found = false;
    for (int attempt = 0; attempt < 32 && !found; ++attempt) {
      op = gen.random_variant_op(g1);
      found = int(op.index()) == kind;
    }
    if (!found) continue;
    ProcessGraph edited = replay_sequence(g1, {op});
    CoevolveResult r;
    try {
      r = coevolve(family, edited);
    } catch (const Error& e) {
      ADD_FAILURE() << "round " << round << ": " << e.what();
      continue;
    }
    tally(g2cg_counts, r.report);
    EXPECT_TRUE(check_well_formed(r.family.cg).empty()) << "round " << round;
    for (const auto& [vp, g] : r.family.variants)
      EXPECT_TRUE(isomorphic(project(r.family.cg, vp), g))
          << "round " << round << " pid " << vp;
  }

  // configurable-graph-side ops, driven through direct propagation
  for (int round = 0; round < 400; ++round) {
    GenParams p;
    p.variant_count = 2;
    p.node_count = 12 + int(gen.pick(8));
    p.edit_count = 2;
    Family family = gen.random_family(p);
    ConfigurableProcessGraph& cg = family.cg;
    ChangeSequence ops;
    auto pids = cg.known_pids();
    switch (round % 8) {
      case 0: {  // DeleteEdge
        Edge e = gen.pick_edge(cg.base);
        ops.push_back(DeleteEdge{e.source, e.target});
        break;
      }
      case 1: {  // AppendNode annotated for every pid through the anchor
        NodeId anchor = gen.pick_node(cg.base);
        Node v{cg.base.fresh_id("w"), "appended step", NodeType::event()};
        ops.push_back(AppendNode{anchor, v});
        for (const auto& pid : pids)
          ops.push_back(InsertEdgeAnnotation{Edge{anchor, v.id}, pid});
        break;
      }
      case 2: {  // PrependNode
        NodeId anchor = gen.pick_node(cg.base);
        Node v{cg.base.fresh_id("w"), "prepended step", NodeType::event()};
        ops.push_back(PrependNode{v, anchor});
        for (const auto& pid : pids)
          ops.push_back(InsertEdgeAnnotation{Edge{v.id, anchor}, pid});
        break;
      }
      case 3: {  // AddNode over an existing edge, inheriting its coverage
        Edge e = gen.pick_edge(cg.base);
        Node v{cg.base.fresh_id("v"), "added step", NodeType::function()};
        ops.push_back(AddNode{v, e.source, e.target});
        for (const auto& pid : cg.edge_alpha(e)) {
          ops.push_back(InsertEdgeAnnotation{Edge{e.source, v.id}, pid});
          ops.push_back(InsertEdgeAnnotation{Edge{v.id, e.target}, pid});
        }
        break;
      }
      case 4: {  // InsertNode
        Edge e = gen.pick_edge(cg.base);
        Node v{cg.base.fresh_id("v"), "inserted step", NodeType::function()};
        ops.push_back(InsertNode{v, e.source, e.target});
        break;
      }
      case 5: {  // ModifyNodeAnnotation
        std::vector<NodeId> labelled;
        for (const auto& [id, n] : cg.base.nodes)
          if (!n.is_connector()) labelled.push_back(id);
        ops.push_back(ModifyNodeAnnotation{labelled[gen.pick(labelled.size())],
                                           "renamed step"});
        break;
      }
      case 6: {  // InsertEdgeAnnotation widening coverage
        Edge e = gen.pick_edge(cg.base);
        for (const auto& pid : pids)
          if (!cg.edge_alpha(e).count(pid)) {
            ops.push_back(InsertEdgeAnnotation{e, pid});
            break;
          }
        if (ops.empty()) ops.push_back(InsertEdgeAnnotation{e, *pids.begin()});
        break;
      }
      case 7: {  // DeleteEdgeAnnotation
        std::vector<Edge> shared;
        for (const auto& e : cg.base.edges)
          if (cg.edge_alpha(e).size() > 1) shared.push_back(e);
        if (shared.empty()) continue;
        Edge e = shared[gen.pick(shared.size())];
        ops.push_back(DeleteEdgeAnnotation{e, *cg.edge_alpha(e).begin()});
        break;
      }
    }
    ConfigurableProcessGraph cg_new;
    Cg2GResult r;
    try {
      cg_new = replay_sequence(cg, ops);
      r = propagate_cg2g(family.variants, cg, cg_new, family.mappings, ops, {});
    } catch (const Error&) {
      continue;
    }
    tally(cg2g_counts, r.report);
    CgCleanResult cleaned = clean_cg(r.cg, r.mappings);
    EXPECT_TRUE(check_well_formed(cleaned.cg).empty()) << "round " << round;
    for (const auto& [vp, g] : r.variants) {
      ProcessGraph expected = clean_variant(g).graph;
      EXPECT_TRUE(isomorphic(project(cleaned.cg, vp), expected))
          << "round " << round << " pid " << vp;
    }
  }

  std::printf("  variant->merged-graph case counts:\n");
  for (const auto& name : {"DeleteEdge", "AppendNode", "PrependNode", "AddNode",
                           "InsertNode", "ModifyNodeAnnotation"}) {
    std::printf("    %-22s %4d\n", name, g2cg_counts[name]);
    EXPECT_GE(g2cg_counts[name], 20) << name;
  }
  std::printf("  merged-graph->variant case counts:\n");
  for (const auto& name :
       {"DeleteEdge", "AppendNode", "PrependNode", "AddNode", "InsertNode",
        "ModifyNodeAnnotation", "InsertEdgeAnnotation", "DeleteEdgeAnnotation"}) {
    std::printf("    %-22s %4d\n", name, cg2g_counts[name]);
    EXPECT_GE(cg2g_counts[name], 20) << name;
  }
  verdict(3, "per-operation-coverage");
}

// 4. Detected change sequences replay exactly and never exceed the raw
// primitive count, over a thousand random edit scripts.
TEST_F(Criterion, DiffReplay) {
  auto t0 = std::chrono::steady_clock::now();
  GraphGenerator gen(777);
  for (int round = 0; round < 1000; ++round) {
    ProcessGraph s = gen.random_graph("1", 8 + int(gen.pick(20)));
    ChangeSequence script = gen.random_script(s, 1 + int(gen.pick(10)));
    ProcessGraph s2 = replay_sequence(s, script);
    ChangeSequence detected = detect_change_sequence(s, s2);
    EXPECT_EQ(replay_sequence(s, detected), s2) << "round " << round;
    EXPECT_LE(detected.size(), raw_delta(s, s2).primitive_count()) << "round " << round;
  }
  double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  EXPECT_LT(seconds, 30.0);
  std::printf("  1000 scripts replayed in %.1fs\n", seconds);
  verdict(4, "diff-replay");
}

// 5. Cleaning reaches a violation-free fixpoint, idempotently, within the
// pass bound, on a thousand samples of each illegal pattern.
TEST_F(Criterion, Cleaning) {
  GraphGenerator gen(31337);
  auto viol = [](const auto& g) { return check_well_formed(g); };

  auto expect_clean = [&](const ProcessGraph& bad, int which, int round) {
    int bound = int(bad.nodes.size() + bad.edges.size());
    VariantCleanResult first = clean_variant(bad);
    EXPECT_TRUE(viol(first.graph).empty()) << "pattern " << which << " round " << round;
    EXPECT_LE(first.passes, bound) << "pattern " << which << " round " << round;
    VariantCleanResult second = clean_variant(first.graph);
    EXPECT_EQ(second.graph, first.graph) << "pattern " << which << " round " << round;
  };

  for (int round = 0; round < 1000; ++round) {
    {  // split-join connector
      ProcessGraph g = gen.random_graph("1", 8 + int(gen.pick(6)));
      g.add_node(make_connector("bad", ConnectorKind::And));
      std::vector<NodeId> ids;
      for (const auto& [id, n] : g.nodes)
        if (id != "bad") ids.push_back(id);
      g.add_edge(ids[0], "bad");
      g.add_edge(ids[1], "bad");
      g.add_edge("bad", ids[2]);
      g.add_edge("bad", ids[3]);
      expect_clean(g, 1, round);
    }
    {  // redundant connector
      ProcessGraph g = gen.random_graph("1", 8);
      Edge e = *g.edges.begin();
      ConnectorKind kind = ConnectorKind::And;
      for (ConnectorKind k : {ConnectorKind::And, ConnectorKind::Or, ConnectorKind::Xor}) {
        bool clashes = false;
        for (const NodeId& end : {e.source, e.target})
          if (g.node(end).is_connector() && g.node(end).type.connector_kind == k)
            clashes = true;
        if (!clashes) {
          kind = k;
          break;
        }
      }
      expect_clean(apply_change(g, InsertNode{make_connector("bad", kind), e.source, e.target}),
                   2, round);
    }
    {  // continuous same-kind connectors
      ProcessGraph g = gen.random_graph("1", 8);
      Edge e = *g.edges.begin();
      g = apply_change(g, InsertNode{make_connector("bad1", ConnectorKind::Xor), e.source,
                                     e.target});
      g.add_node(make_connector("bad2", ConnectorKind::Xor));
      g.add_node(make_event("leafa", "first tail"));
      g.add_node(make_event("leafb", "second tail"));
      g.add_node(make_event("leafc", "third tail"));
      g.add_edge("bad1", "bad2");
      g.add_edge("bad1", "leafa");
      g.add_edge("bad2", "leafb");
      g.add_edge("bad2", "leafc");
      expect_clean(g, 3, round);
    }
    {  // empty edge annotation on a merged graph
      ProcessGraph g1 = gen.random_graph("1", 8);
      ProcessGraph g2 = g1;
      g2.pid = "2";
      ConfigurableProcessGraph cg = merge(g1, g2, compute_mapping(g1, g2)).cg;
      cg.alpha[*cg.base.edges.begin()] = {};
      int bound = int(cg.base.nodes.size() + cg.base.edges.size());
      CgCleanResult first = clean_cg(cg, FamilyMappings{});
      EXPECT_TRUE(viol(first.cg).empty()) << "pattern 4 round " << round;
      EXPECT_LE(first.passes, bound) << "pattern 4 round " << round;
      CgCleanResult second = clean_cg(first.cg, first.mappings);
      EXPECT_EQ(second.cg, first.cg) << "pattern 4 round " << round;
    }
    {  // orphan node
      ProcessGraph g = gen.random_graph("1", 8);
      g.add_node(make_event("stray", "left alone"));
      expect_clean(g, 5, round);
    }
  }
  verdict(5, "cleaning-fixpoint");
}

// 6. Efficiency shape: co-evolving through the merged graph beats mapping
// the edited variant against every sibling, on eight-variant families.
TEST_F(Criterion, EfficiencyShape) {
  GraphGenerator gen(9001);
  const int reps = 20;
  std::vector<double> via_medians, pairwise_medians;
  for (int fam_idx = 0; fam_idx < 3; ++fam_idx) {
    GenParams p;
    p.seed = 9001 + std::uint64_t(fam_idx);
    p.variant_count = 8;
    p.node_count = 20;
    p.edit_count = 3;
    Family family = gen.random_family(p);
    ProcessGraph edited =
        replay_sequence(family.variants.at("1"), gen.random_script(family.variants.at("1"), 3));
    std::vector<double> via, pairwise;
    volatile double sink = 0;
    for (int rep = 0; rep < reps; ++rep) {
      auto t0 = std::chrono::steady_clock::now();
      CoevolveResult r = coevolve(family, edited);
      auto t1 = std::chrono::steady_clock::now();
      via.push_back(std::chrono::duration<double, std::milli>(t1 - t0).count());
      sink = sink + double(r.family.cg.base.nodes.size());

      auto t2 = std::chrono::steady_clock::now();
      ChangeSequence ops = detect_change_sequence(family.variants.at("1"), edited);
      for (const auto& [pid, other] : family.variants) {
        if (pid == "1") continue;
        sink = sink + compute_mapping(edited, other).score + double(ops.size());
      }
      auto t3 = std::chrono::steady_clock::now();
      pairwise.push_back(std::chrono::duration<double, std::milli>(t3 - t2).count());
    }
    auto median = [](std::vector<double> v) {
      std::sort(v.begin(), v.end());
      return v[v.size() / 2];
    };
    via_medians.push_back(median(via));
    pairwise_medians.push_back(median(pairwise));
  }
  double via_total = 0, pw_total = 0;
  for (std::size_t i = 0; i < via_medians.size(); ++i) {
    std::printf("  family %zu: via-cg %.3f ms, pairwise %.3f ms\n", i + 1, via_medians[i],
                pairwise_medians[i]);
    EXPECT_LT(via_medians[i], pairwise_medians[i]) << "family " << i;
    via_total += via_medians[i];
    pw_total += pairwise_medians[i];
  }
  double ratio = via_total / pw_total;
  std::printf("  ratio(via-cg / pairwise) = %.3f\n", ratio);
  EXPECT_LT(ratio, 1.0);
  verdict(6, "efficiency-shape");
}

// 7. Propagation agrees with the expensive alternative: re-merging the
// updated variants yields the same projections.
TEST_F(Criterion, RemergeOracle) {
  GraphGenerator gen(515151);
  int done = 0;
  for (int round = 0; round < 100; ++round) {
    GenParams p;
    p.variant_count = 2;
    p.node_count = 12 + int(gen.pick(8));
    p.edit_count = 2;
    Family family = gen.random_family(p);
    ProcessGraph edited =
        replay_sequence(family.variants.at("1"), gen.random_script(family.variants.at("1"), 1));
    CoevolveResult r;
    try {
      r = coevolve(family, edited);
    } catch (const Error& e) {
      ADD_FAILURE() << "round " << round << ": " << e.what();
      continue;
    }
    ++done;
    const ProcessGraph& v1 = r.family.variants.at("1");
    const ProcessGraph& v2 = r.family.variants.at("2");
    MergeResult fresh = merge(v1, v2, compute_mapping(v1, v2));
    for (const auto& pid : {"1", "2"})
      EXPECT_TRUE(isomorphic(project(r.family.cg, pid), project(fresh.cg, pid)))
          << "round " << round << " pid " << pid;
  }
  EXPECT_EQ(done, 100);
  std::printf("  %d single-op changes cross-checked against re-merging\n", done);
  verdict(7, "re-merge-oracle");
}

// 8. Deterministic formats: canonical serialization is byte-stable across
// the fixture corpus and generation is reproducible byte for byte.
TEST_F(Criterion, FormatDeterminism) {
  for (const auto& entry : fs::directory_iterator(fs::path(kFixtures) / "excel")) {
    if (entry.path().extension() != ".json") continue;
    std::string bytes = slurp(entry.path());
    if (entry.path().filename().string().find("ops") != std::string::npos) {
      ChangeSequence ops = parse_ops(bytes);
      EXPECT_EQ(serialize_ops(ops), bytes) << entry.path();
    } else if (entry.path().filename().string().find("mappings") != std::string::npos) {
      FamilyMappings m = parse_mappings(bytes);
      EXPECT_EQ(serialize_mappings(m), bytes) << entry.path();
    } else {
      ModelValue m = parse_model_json(bytes);
      EXPECT_EQ(serialize_model(m), bytes) << entry.path();
    }
  }
  fs::path a = temp_dir("gen-a");
  fs::path b = temp_dir("gen-b");
  fs::remove_all(a);
  fs::remove_all(b);
  RunResult ra = run_cli("gen -o " + a.string() + " --seed 42 -k 3 -n 18 -e 3");
  RunResult rb = run_cli("gen -o " + b.string() + " --seed 42 -k 3 -n 18 -e 3");
  ASSERT_EQ(ra.exit_code, 0) << ra.output;
  ASSERT_EQ(rb.exit_code, 0) << rb.output;
  int compared = 0;
  for (const auto& entry : fs::recursive_directory_iterator(a)) {
    if (!entry.is_regular_file()) continue;
    fs::path rel = fs::relative(entry.path(), a);
    EXPECT_EQ(slurp(entry.path()), slurp(b / rel)) << rel;
    ++compared;
  }
  EXPECT_GE(compared, 6);
  std::printf("  %d generated files byte-identical across two runs\n", compared);
  fs::remove_all(a);
  fs::remove_all(b);
  verdict(8, "format-determinism");
}

}  // namespace
