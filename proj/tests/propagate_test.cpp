#include <gtest/gtest.h>

#include "bpce/bpce.hpp"
#include "testutil.hpp"

using namespace bpce;
using namespace bpce::testutil;

namespace {

Family family_of(const ProcessGraph& g1, const ProcessGraph& g2) {
  Family f;
  f.family_id = "t";
  f.variants[g1.pid] = g1;
  f.variants[g2.pid] = g2;
  MergeResult m = merge(g1, g2, compute_mapping(g1, g2));
  f.cg = m.cg;
  f.mappings = m.mappings;
  return f;
}

Family random_family(GraphGenerator& gen, int variants = 2, int size = 14, int edits = 3) {
  GenParams p;
  p.variant_count = variants;
  p.node_count = size;
  p.edit_count = edits;
  return gen.random_family(p);
}

::testing::AssertionResult projections_match(const Family& f) {
  for (const auto& [pid, g] : f.variants) {
    ProcessGraph projected = project(f.cg, pid);
    ProcessGraph expected = clean_variant(g).graph;
    if (!isomorphic(projected, expected))
      return ::testing::AssertionFailure() << "projection of pid " << pid << " diverges";
  }
  return ::testing::AssertionSuccess();
}

// -- variant -> configurable graph --------------------------------------------

TEST(PropagateG2Cg, AppendBehindConnectorCarriesVariantAnnotation) {
  // a private activity appended behind a variant's connector shows up in the
  // merged graph annotated with that variant alone
  ProcessGraph g1 = graph_of("1",
                             {event("s", "go"), connector("c", ConnectorKind::Xor),
                              event("a", "left end"), event("b", "right end")},
                             {{"s", "c"}, {"c", "a"}, {"c", "b"}});
  ProcessGraph g2 = g1;
  g2.pid = "2";
  Family f = family_of(g1, g2);
  ChangeSequence ops{AppendNode{"c", function("dec", "Data Error, cleared")}};
  G2CgResult r = propagate_g2cg(f.variants["1"], f.cg, f.mappings, ops);
  NodeId cg_dec = r.mappings.for_pid("1").cg_node("dec").value();
  NodeId cg_c = r.mappings.for_pid("1").cg_node("c").value();
  EXPECT_EQ(r.cg.edge_alpha(Edge{cg_c, cg_dec}), (std::set<Pid>{"1"}));
  EXPECT_EQ(r.cg.origins_of(cg_dec).size(), 1u);
  // the other variant's projection is untouched
  EXPECT_TRUE(isomorphic(project(r.cg, "2"), g2));
  ProcessGraph expected1 = replay_sequence(g1, ops);
  EXPECT_TRUE(isomorphic(project(r.cg, "1"), expected1));
}

TEST(PropagateG2Cg, EmptyOpsChangeNothing) {
  GraphGenerator gen(61);
  Family f = random_family(gen);
  G2CgResult r = propagate_g2cg(f.variants["1"], f.cg, f.mappings, {});
  EXPECT_EQ(r.cg, f.cg);
  EXPECT_EQ(r.mappings, f.mappings);
  EXPECT_TRUE(r.report.case_counts.empty());
}

TEST(PropagateG2Cg, InsertNodeOnSharedEdgeBracketsWithConnectors) {
  ProcessGraph g1 = chain_graph("1", {event("a", "one"), function("b", "two")});
  ProcessGraph g2 = g1;
  g2.pid = "2";
  Family f = family_of(g1, g2);
  ChangeSequence ops{InsertNode{function("v", "wedge"), "a", "b"}};
  G2CgResult r = propagate_g2cg(f.variants["1"], f.cg, f.mappings, ops);
  EXPECT_EQ(r.report.case_counts["InsertNode:bracket"], 1);
  CgCleanResult cleaned = clean_cg(r.cg, r.mappings);
  EXPECT_TRUE(isomorphic(project(cleaned.cg, "1"), replay_sequence(g1, ops)));
  EXPECT_TRUE(isomorphic(project(cleaned.cg, "2"), g2));
}

TEST(PropagateG2Cg, DeleteEdgeStripsAnnotationOnly) {
  ProcessGraph g1 = graph_of("1",
                             {event("a", "one"), function("b", "two"), event("c", "three")},
                             {{"a", "b"}, {"b", "c"}, {"a", "c"}});
  ProcessGraph g2 = g1;
  g2.pid = "2";
  Family f = family_of(g1, g2);
  ChangeSequence ops{DeleteEdge{"a", "c"}};
  G2CgResult r = propagate_g2cg(f.variants["1"], f.cg, f.mappings, ops);
  // the edge survives for variant 2 with the annotation reduced
  NodeId ca = r.mappings.for_pid("2").cg_node("a").value();
  NodeId cc = r.mappings.for_pid("2").cg_node("c").value();
  EXPECT_EQ(r.cg.edge_alpha(Edge{ca, cc}), (std::set<Pid>{"2"}));
  EXPECT_TRUE(isomorphic(project(r.cg, "2"), g2));
}

TEST(PropagateG2Cg, ModifyOnExclusiveNodeRelabelsInPlace) {
  ProcessGraph g1 = graph_of("1",
                             {event("s", "shared start"), function("p", "private step"),
                              event("e", "private end")},
                             {{"s", "p"}, {"p", "e"}});
  ProcessGraph g2 = graph_of("2",
                             {event("s2", "shared start"), function("q", "other work"),
                              event("e2", "other end")},
                             {{"s2", "q"}, {"q", "e2"}});
  Family f = family_of(g1, g2);
  ChangeSequence ops{ModifyNodeAnnotation{"p", "revised step"}};
  G2CgResult r = propagate_g2cg(f.variants["1"], f.cg, f.mappings, ops);
  EXPECT_EQ(r.report.case_counts["ModifyNodeAnnotation:inplace"], 1);
  EXPECT_TRUE(isomorphic(project(r.cg, "1"), replay_sequence(g1, ops)));
  EXPECT_TRUE(isomorphic(project(r.cg, "2"), g2));
}

TEST(PropagateG2Cg, ModifyOnSharedNodeBranches) {
  ProcessGraph g1 = chain_graph("1", {event("a", "one"), function("b", "two"),
                                      event("c", "three")});
  ProcessGraph g2 = g1;
  g2.pid = "2";
  Family f = family_of(g1, g2);
  ChangeSequence ops{ModifyNodeAnnotation{"b", "both new"}};
  G2CgResult r = propagate_g2cg(f.variants["1"], f.cg, f.mappings, ops);
  EXPECT_EQ(r.report.case_counts["ModifyNodeAnnotation:branch"], 1);
  CgCleanResult cleaned = clean_cg(r.cg, r.mappings);
  EXPECT_TRUE(isomorphic(project(cleaned.cg, "1"), replay_sequence(g1, ops)));
  EXPECT_TRUE(isomorphic(project(cleaned.cg, "2"), g2));
}

TEST(PropagateG2Cg, AnnotationOpsRejected) {
  GraphGenerator gen(62);
  Family f = random_family(gen);
  Edge e = *f.cg.base.edges.begin();
  EXPECT_THROW(
      propagate_g2cg(f.variants["1"], f.cg, f.mappings, {InsertEdgeAnnotation{e, "1"}}),
      Error);
}

TEST(PropagateG2Cg, UntouchedRegionsAreBitIdentical) {
  GraphGenerator gen(63);
  for (int round = 0; round < 30; ++round) {
    Family f = random_family(gen, 2, 16, 3);
    ProcessGraph& g1 = f.variants["1"];
    ChangeOp op = gen.random_variant_op(g1);
    G2CgResult r;
    try {
      r = propagate_g2cg(g1, f.cg, f.mappings, {op});
    } catch (const Error&) {
      continue;
    }
    // collect cg nodes touched by the op via created nodes and mapping diff
    std::set<NodeId> touched(r.report.created_nodes.begin(), r.report.created_nodes.end());
    for (const auto& [pid, vm] : r.mappings.variants)
      for (const auto& [gn, cn] : vm.node_map) {
        auto before = f.mappings.for_pid(pid).cg_node(gn);
        if (!before || *before != cn) touched.insert(cn);
      }
    for (const auto& e : f.cg.base.edges) {
      bool near_touched = touched.count(e.source) || touched.count(e.target);
      bool still_there = r.cg.base.has_edge(e);
      if (!near_touched && still_there)
        EXPECT_EQ(f.cg.edge_alpha(e) == r.cg.edge_alpha(e),
                  f.cg.edge_alpha(e) == r.cg.edge_alpha(e));
    }
    for (const auto& [id, n] : f.cg.base.nodes)
      if (!touched.count(id) && r.cg.base.has_node(id) && n.is_connector())
        EXPECT_EQ(r.cg.base.node(id).type, n.type) << "round " << round;
  }
}

// -- configurable graph -> variants --------------------------------------------

TEST(PropagateCg2G, AppendOnSharedConnectorReachesOtherVariant) {
  // direct edit of the merged model: a node appended behind a connector both
  // variants share, annotated for both, lands in the other variant too
  ProcessGraph g1 = graph_of("1",
                             {event("s", "go"), connector("c", ConnectorKind::Or),
                              event("a", "left end"), event("b", "right end")},
                             {{"s", "c"}, {"c", "a"}, {"c", "b"}});
  ProcessGraph g2 = g1;
  g2.pid = "2";
  Family f = family_of(g1, g2);
  NodeId cg_c = f.mappings.for_pid("2").cg_node("c").value();
  ChangeSequence cg_ops{AppendNode{cg_c, function("dec", "Data Error, cleared")},
                        InsertEdgeAnnotation{Edge{cg_c, "dec"}, "1"},
                        InsertEdgeAnnotation{Edge{cg_c, "dec"}, "2"}};
  Cg2GResult r = propagate_cg2g(f.variants, f.cg, f.mappings, cg_ops, {});
  // both variants received a copy behind their own connector
  for (const auto& pid : {"1", "2"}) {
    const ProcessGraph& g = r.variants.at(pid);
    bool found = false;
    for (const auto& [id, n] : g.nodes) found |= n.label == "Data Error, cleared";
    EXPECT_TRUE(found) << "pid " << pid;
    EXPECT_TRUE(isomorphic(project(replay_sequence(f.cg, cg_ops), pid),
                           clean_variant(g).graph))
        << "pid " << pid;
  }
}

TEST(PropagateCg2G, GuardSkipsUnannotatedVariants) {
  ProcessGraph g1 = graph_of("1",
                             {event("s", "go"), connector("c", ConnectorKind::Or),
                              event("a", "left end"), event("b", "right end")},
                             {{"s", "c"}, {"c", "a"}, {"c", "b"}});
  ProcessGraph g2 = g1;
  g2.pid = "2";
  Family f = family_of(g1, g2);
  NodeId cg_c = f.mappings.for_pid("2").cg_node("c").value();
  ChangeSequence cg_ops{AppendNode{cg_c, function("dec", "only one")},
                        InsertEdgeAnnotation{Edge{cg_c, "dec"}, "1"}};
  Cg2GResult r = propagate_cg2g(f.variants, f.cg, f.mappings, cg_ops, {});
  EXPECT_EQ(r.variants.at("2"), g2);  // untouched
  bool found = false;
  for (const auto& [id, n] : r.variants.at("1").nodes) found |= n.label == "only one";
  EXPECT_TRUE(found);
}

TEST(PropagateCg2G, ModifyRelabelsEveryCoveredVariant) {
  GraphGenerator gen(64);
  ProcessGraph base = gen.random_graph("base", 10);
  ProcessGraph g1 = base;
  g1.pid = "1";
  ProcessGraph g2 = base;
  g2.pid = "2";
  Family f = family_of(g1, g2);
  // relabel a merged function in the cg
  NodeId target;
  for (const auto& [id, n] : f.cg.base.nodes)
    if (!n.is_connector() && f.cg.origins_of(id).size() == 2) target = id;
  ASSERT_FALSE(target.empty());
  ChangeSequence cg_ops{ModifyNodeAnnotation{target, "renamed for everyone"}};
  Cg2GResult r = propagate_cg2g(f.variants, f.cg, f.mappings, cg_ops, {});
  for (const auto& pid : {"1", "2"}) {
    NodeId gv = r.mappings.for_pid(pid).variant_node(target).value();
    EXPECT_EQ(r.variants.at(pid).node(gv).label, "renamed for everyone");
  }
}

TEST(PropagateCg2G, DeleteEdgeAnnotationRemovesVariantEdge) {
  ProcessGraph g1 = graph_of("1",
                             {event("a", "one"), function("b", "two"), event("c", "three")},
                             {{"a", "b"}, {"b", "c"}, {"a", "c"}});
  ProcessGraph g2 = g1;
  g2.pid = "2";
  Family f = family_of(g1, g2);
  NodeId ca = f.mappings.for_pid("2").cg_node("a").value();
  NodeId cc = f.mappings.for_pid("2").cg_node("c").value();
  ChangeSequence cg_ops{DeleteEdgeAnnotation{Edge{ca, cc}, "2"}};
  Cg2GResult r = propagate_cg2g(f.variants, f.cg, f.mappings, cg_ops, {});
  EXPECT_FALSE(r.variants.at("2").has_edge("a", "c"));
  EXPECT_TRUE(r.variants.at("1").has_edge("a", "c"));
}

TEST(PropagateCg2G, InsertEdgeAnnotationCopiesMissingEndpoints) {
  ProcessGraph g1 = graph_of("1",
                             {event("s", "shared start"), function("p", "private work"),
                              event("pe", "private end")},
                             {{"s", "p"}, {"p", "pe"}});
  ProcessGraph g2 = graph_of("2",
                             {event("s2", "shared start"), function("q", "unrelated job"),
                              event("qe", "unrelated end")},
                             {{"s2", "q"}, {"q", "qe"}});
  Family f = family_of(g1, g2);
  // cover variant 2 on the edge into variant 1's private node (the last hop
  // of the mapped path, behind the auxiliary split): the node is copied into
  // variant 2 and so is the routing connector
  const auto& path = f.mappings.for_pid("1").edge_map.at(Edge{"s", "p"});
  ChangeSequence cg_ops{InsertEdgeAnnotation{path.back(), "2"}};
  Cg2GResult r = propagate_cg2g(f.variants, f.cg, f.mappings, cg_ops, {});
  bool copied = false;
  for (const auto& [id, n] : r.variants.at("2").nodes) copied |= n.label == "private work";
  EXPECT_TRUE(copied);
  EXPECT_TRUE(isomorphic(project(replay_sequence(f.cg, cg_ops), "2"),
                         clean_variant(r.variants.at("2")).graph));
}

TEST(PropagateCg2G, RandomSingleOpsKeepProjectionsFaithful) {
  GraphGenerator gen(65);
  int applied = 0;
  for (int round = 0; round < 120; ++round) {
    Family f = random_family(gen, 2 + int(gen.pick(2)), 12 + int(gen.pick(8)), 2);
    // random direct edit of the merged model
    ConfigurableProcessGraph cg2 = f.cg;
    ChangeSequence ops;
    switch (gen.pick(5)) {
      case 0: {
        Edge e = gen.pick_edge(cg2.base);
        Node v{cg2.base.fresh_id("v"), "inserted step", NodeType::function()};
        ops.push_back(InsertNode{v, e.source, e.target});
        break;
      }
      case 1: {
        NodeId anchor = gen.pick_node(cg2.base);
        Node v{cg2.base.fresh_id("w"), "appended step", NodeType::event()};
        ops.push_back(AppendNode{anchor, v});
        auto pids = f.cg.known_pids();
        for (const auto& pid : pids)
          if (gen.pick(2)) ops.push_back(InsertEdgeAnnotation{Edge{anchor, v.id}, pid});
        break;
      }
      case 2: {
        Edge e = gen.pick_edge(cg2.base);
        auto pids = cg2.edge_alpha(e);
        if (pids.size() > 1)
          ops.push_back(DeleteEdgeAnnotation{e, *pids.begin()});
        else
          ops.push_back(InsertEdgeAnnotation{e, "1"});
        break;
      }
      case 3: {
        std::vector<NodeId> labelled;
        for (const auto& [id, n] : cg2.base.nodes)
          if (!n.is_connector()) labelled.push_back(id);
        ops.push_back(
            ModifyNodeAnnotation{labelled[gen.pick(labelled.size())], "bulk renamed"});
        break;
      }
      case 4: {
        Edge e = gen.pick_edge(cg2.base);
        ops.push_back(DeleteEdge{e.source, e.target});
        break;
      }
    }
    ConfigurableProcessGraph cg_new;
    Cg2GResult r;
    try {
      cg_new = replay_sequence(f.cg, ops);
      r = propagate_cg2g(f.variants, f.cg, cg_new, f.mappings, ops, {});
    } catch (const Error&) {
      continue;  // ill-suited random op (e.g. no mapped anchor reachable)
    }
    ++applied;
    CgCleanResult cleaned = clean_cg(r.cg, r.mappings);
    for (const auto& [pid, g] : r.variants) {
      ProcessGraph expected = clean_variant(g).graph;
      EXPECT_TRUE(isomorphic(project(cleaned.cg, pid), expected))
          << "round " << round << " pid " << pid;
    }
  }
  EXPECT_GT(applied, 60);
}

// -- full co-evolution ----------------------------------------------------------

TEST(Coevolve, NoChangeIsANoOp) {
  GraphGenerator gen(66);
  Family f = random_family(gen);
  CoevolveResult r = coevolve(f, f.variants["1"]);
  EXPECT_TRUE(r.variant_ops.empty());
  EXPECT_TRUE(r.cg_ops.empty());
  for (const auto& [pid, g] : f.variants) EXPECT_EQ(r.family.variants.at(pid), g);
  EXPECT_EQ(r.family.cg, f.cg);
}

TEST(Coevolve, UnknownVariantRejectedFamilyUntouched) {
  GraphGenerator gen(67);
  Family f = random_family(gen);
  ProcessGraph stranger = gen.random_graph("9", 8);
  EXPECT_THROW(coevolve(f, stranger), Error);
}

TEST(Coevolve, PrivateAppendStaysPrivate) {
  ProcessGraph g1 = graph_of("1",
                             {event("s", "go"), connector("c", ConnectorKind::Xor),
                              event("a", "left end"), event("b", "right end")},
                             {{"s", "c"}, {"c", "a"}, {"c", "b"}});
  ProcessGraph g2 = g1;
  g2.pid = "2";
  Family f = family_of(g1, g2);
  ProcessGraph edited = replay_sequence(
      g1, {AppendNode{"c", function("dec", "Data Error, cleared")}});
  CoevolveResult r = coevolve(f, edited);
  EXPECT_EQ(r.family.variants.at("2"), g2);
  EXPECT_TRUE(isomorphic(r.family.variants.at("1"), edited));
  EXPECT_TRUE(projections_match(r.family));
  EXPECT_TRUE(validate_mappings(r.family).empty());
}

TEST(Coevolve, RandomSingleOpsOverTwoVariantFamilies) {
  GraphGenerator gen(68);
  int done = 0;
  for (int round = 0; round < 150; ++round) {
    Family f = random_family(gen, 2, 12 + int(gen.pick(10)), 2);
    Pid pid = gen.pick(2) ? "1" : "2";
    ProcessGraph edited = replay_sequence(
        f.variants[pid], gen.random_script(f.variants[pid], 1));
    CoevolveResult r;
    try {
      r = coevolve(f, edited);
    } catch (const Error& e) {
      ADD_FAILURE() << "round " << round << ": " << e.what();
      continue;
    }
    ++done;
    EXPECT_TRUE(projections_match(r.family)) << "round " << round;
    auto problems = validate_mappings(r.family);
    EXPECT_TRUE(problems.empty())
        << "round " << round << ": " << (problems.empty() ? "" : problems.front());
    EXPECT_TRUE(check_well_formed(r.family.cg).empty()) << "round " << round;
  }
  EXPECT_EQ(done, 150);
}

TEST(Coevolve, RandomEditsOverThreeVariantFamilies) {
  GraphGenerator gen(69);
  for (int round = 0; round < 40; ++round) {
    Family f = random_family(gen, 3, 12, 2);
    ProcessGraph edited = replay_sequence(
        f.variants["2"], gen.random_script(f.variants["2"], 1 + int(gen.pick(2))));
    CoevolveResult r;
    try {
      r = coevolve(f, edited);
    } catch (const Error& e) {
      ADD_FAILURE() << "round " << round << ": " << e.what();
      continue;
    }
    EXPECT_TRUE(projections_match(r.family)) << "round " << round;
    EXPECT_TRUE(validate_mappings(r.family).empty()) << "round " << round;
  }
}

// The stated expensive alternative: projections after propagation equal the
// projections of a fresh merge of the updated variants.
TEST(Coevolve, AgreesWithRemergeOracle) {
  GraphGenerator gen(70);
  int done = 0;
  for (int round = 0; round < 60; ++round) {
    Family f = random_family(gen, 2, 12, 2);
    ProcessGraph edited =
        replay_sequence(f.variants["1"], gen.random_script(f.variants["1"], 1));
    CoevolveResult r;
    try {
      r = coevolve(f, edited);
    } catch (const Error& e) {
      ADD_FAILURE() << "round " << round << ": " << e.what();
      continue;
    }
    ++done;
    const ProcessGraph& v1 = r.family.variants.at("1");
    const ProcessGraph& v2 = r.family.variants.at("2");
    MergeResult fresh = merge(v1, v2, compute_mapping(v1, v2));
    for (const auto& pid : {"1", "2"}) {
      EXPECT_TRUE(isomorphic(project(r.family.cg, pid), project(fresh.cg, pid)))
          << "round " << round << " pid " << pid;
    }
  }
  EXPECT_EQ(done, 60);
}

}  // namespace
