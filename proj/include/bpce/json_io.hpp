#pragma once

#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "bpce/change_ops.hpp"
#include "bpce/graph.hpp"
#include "bpce/mappings.hpp"

namespace bpce {

using ModelValue = std::variant<ProcessGraph, ConfigurableProcessGraph>;

struct FamilyManifest {
  int format_version = 1;
  std::string family_id;
  std::vector<std::pair<Pid, std::string>> variants;  // pid -> relative path
  std::string cg_path;
  std::string mappings_path;
};

namespace io_detail {

using json = nlohmann::ordered_json;

inline NodeKind parse_kind(const std::string& s, const std::string& where) {
  if (s == "event") return NodeKind::Event;
  if (s == "function") return NodeKind::Function;
  if (s == "connector") return NodeKind::Connector;
  fail(ErrorKind::SchemaError, where + ": unknown node type '" + s + "'");
}

inline ConnectorKind parse_connector_kind(const std::string& s, const std::string& where) {
  if (s == "AND") return ConnectorKind::And;
  if (s == "OR") return ConnectorKind::Or;
  if (s == "XOR") return ConnectorKind::Xor;
  fail(ErrorKind::SchemaError, where + ": unknown connector kind '" + s + "'");
}

inline json node_to_json(const Node& n, const ConfigurableProcessGraph* cg) {
  json j;
  j["id"] = n.id;
  j["label"] = n.label;
  j["type"] = to_string(n.type.kind);
  if (n.type.connector_kind) j["connectorKind"] = to_string(*n.type.connector_kind);
  if (cg) {
    if (cg->configurable(n.id)) j["configurable"] = true;
    auto origins = cg->origins_of(n.id);
    if (!origins.empty()) {
      json arr = json::array();
      for (const auto& o : origins) {
        json oj;
        oj["pid"] = o.pid;
        oj["id"] = o.node_id;
        oj["label"] = o.label;
        if (o.connector_kind) oj["connectorKind"] = to_string(*o.connector_kind);
        arr.push_back(oj);
      }
      j["origins"] = arr;
    }
  }
  return j;
}

inline json graph_to_json(const ProcessGraph& g, const ConfigurableProcessGraph* cg) {
  json j;
  j["formatVersion"] = 1;
  j["pid"] = g.pid;
  json nodes = json::array();
  for (const auto& [id, n] : g.nodes) nodes.push_back(node_to_json(n, cg));
  j["nodes"] = nodes;
  json edges = json::array();
  for (const auto& e : g.edges) {
    json ej;
    ej["source"] = e.source;
    ej["target"] = e.target;
    if (cg) {
      json alpha = json::array();
      for (const auto& pid : cg->edge_alpha(e)) alpha.push_back(pid);
      ej["alpha"] = alpha;
    }
    edges.push_back(ej);
  }
  j["edges"] = edges;
  return j;
}

inline std::string dump_canonical(const json& j) { return j.dump(2) + "\n"; }

template <typename F>
auto expect(const json& j, const char* key, const std::string& where, F&& get) {
  if (!j.contains(key)) fail(ErrorKind::SchemaError, where + ": missing '" + key + "'");
  try {
    return get(j.at(key));
  } catch (const json::exception& e) {
    fail(ErrorKind::SchemaError, where + ": bad '" + std::string(key) + "': " + e.what());
  }
}

inline std::string expect_string(const json& j, const char* key, const std::string& where) {
  return expect(j, key, where, [](const json& v) { return v.get<std::string>(); });
}

}  // namespace io_detail

/// Serializes a model to its canonical byte form: fixed key order, nodes
/// sorted by id, edges by (source, target), two-space indentation and a
/// trailing newline. Equal graphs produce byte-equal output.
inline std::string serialize_model(const ProcessGraph& g) {
  return io_detail::dump_canonical(io_detail::graph_to_json(g, nullptr));
}

inline std::string serialize_model(const ConfigurableProcessGraph& cg) {
  return io_detail::dump_canonical(io_detail::graph_to_json(cg.base, &cg));
}

inline std::string serialize_model(const ModelValue& m) {
  return std::visit([](const auto& g) { return serialize_model(g); }, m);
}

/// Parses a canonical JSON model. A file carrying any alpha, origins or
/// configurable field is read as a configurable graph, anything else as a
/// plain variant. All structural invariants are enforced here: unique ids,
/// resolvable edge endpoints, no self loops, labels on events/functions,
/// connector kinds exactly on connectors, non-empty annotations on every
/// configurable edge, and origin-less nodes only when they are connectors.
inline ModelValue parse_model_json(const std::string& bytes) {
  io_detail::json j;
  try {
    j = io_detail::json::parse(bytes);
  } catch (const io_detail::json::parse_error& e) {
    fail(ErrorKind::SyntaxError, e.what());
  }
  using io_detail::expect_string;
  if (!j.is_object()) fail(ErrorKind::SchemaError, "top level must be an object");
  int version = io_detail::expect(j, "formatVersion", "top level",
                                  [](const io_detail::json& v) { return v.get<int>(); });
  if (version != 1)
    fail(ErrorKind::SchemaError, "unsupported formatVersion " + std::to_string(version));

  bool configurable = false;
  if (j.contains("edges"))
    for (const auto& e : j.at("edges"))
      if (e.contains("alpha")) configurable = true;
  if (j.contains("nodes"))
    for (const auto& n : j.at("nodes"))
      if (n.contains("origins") || n.contains("configurable")) configurable = true;

  ProcessGraph g;
  ConfigurableProcessGraph cg;
  g.pid = expect_string(j, "pid", "top level");

  if (!j.contains("nodes") || !j.at("nodes").is_array())
    fail(ErrorKind::SchemaError, "top level: missing 'nodes' array");
  std::size_t idx = 0;
  for (const auto& nj : j.at("nodes")) {
    std::string where = "nodes[" + std::to_string(idx++) + "]";
    Node n;
    n.id = expect_string(nj, "id", where);
    n.label = expect_string(nj, "label", where);
    n.type.kind = io_detail::parse_kind(expect_string(nj, "type", where), where);
    if (nj.contains("connectorKind"))
      n.type.connector_kind =
          io_detail::parse_connector_kind(expect_string(nj, "connectorKind", where), where);
    if (n.is_connector() != n.type.connector_kind.has_value())
      fail(ErrorKind::SchemaError, where + ": connectorKind present iff type is connector");
    if (!n.is_connector() && n.label.empty())
      fail(ErrorKind::SchemaError, where + ": event/function needs a non-empty label");
    if (g.has_node(n.id)) fail(ErrorKind::SchemaError, where + ": duplicate id '" + n.id + "'");
    if (configurable) {
      if (nj.contains("configurable") && nj.at("configurable").get<bool>())
        cg.eta[n.id] = true;
      if (nj.contains("origins")) {
        for (const auto& oj : nj.at("origins")) {
          NodeOrigin o;
          o.pid = expect_string(oj, "pid", where + ".origins");
          o.node_id = expect_string(oj, "id", where + ".origins");
          o.label = expect_string(oj, "label", where + ".origins");
          if (oj.contains("connectorKind"))
            o.connector_kind = io_detail::parse_connector_kind(
                expect_string(oj, "connectorKind", where + ".origins"), where);
          cg.beta[n.id].push_back(o);
        }
        std::sort(cg.beta[n.id].begin(), cg.beta[n.id].end());
      }
      if (!cg.beta.count(n.id) && !n.is_connector())
        fail(ErrorKind::SchemaError,
             where + ": only connectors may lack origins in a configurable model");
    } else if (nj.contains("configurable") || nj.contains("origins")) {
      fail(ErrorKind::SchemaError, where + ": configurable fields on a variant");
    }
    g.add_node(std::move(n));
  }

  if (!j.contains("edges") || !j.at("edges").is_array())
    fail(ErrorKind::SchemaError, "top level: missing 'edges' array");
  idx = 0;
  for (const auto& ej : j.at("edges")) {
    std::string where = "edges[" + std::to_string(idx++) + "]";
    std::string s = expect_string(ej, "source", where);
    std::string t = expect_string(ej, "target", where);
    if (!g.has_node(s)) fail(ErrorKind::SchemaError, where + ": dangling edge source '" + s + "'");
    if (!g.has_node(t)) fail(ErrorKind::SchemaError, where + ": dangling edge target '" + t + "'");
    if (s == t) fail(ErrorKind::SchemaError, where + ": self loop on '" + s + "'");
    if (g.has_edge(s, t)) fail(ErrorKind::SchemaError, where + ": duplicate edge");
    g.add_edge(s, t);
    if (configurable) {
      if (!ej.contains("alpha"))
        fail(ErrorKind::SchemaError, where + ": configurable edge without alpha");
      std::set<Pid> pids;
      for (const auto& p : ej.at("alpha")) pids.insert(p.get<std::string>());
      if (pids.empty()) fail(ErrorKind::SchemaError, where + ": empty alpha");
      cg.alpha[Edge{s, t}] = std::move(pids);
    } else if (ej.contains("alpha")) {
      fail(ErrorKind::SchemaError, where + ": alpha on a variant");
    }
  }

  if (!configurable) return g;
  cg.base = std::move(g);
  return cg;
}

// -- change sequences ---------------------------------------------------------

namespace io_detail {

inline json node_spec_to_json(const Node& n) {
  json j;
  j["id"] = n.id;
  j["label"] = n.label;
  j["type"] = to_string(n.type.kind);
  if (n.type.connector_kind) j["connectorKind"] = to_string(*n.type.connector_kind);
  return j;
}

inline Node node_spec_from_json(const json& j, const std::string& where) {
  Node n;
  n.id = expect_string(j, "id", where);
  n.label = expect_string(j, "label", where);
  n.type.kind = parse_kind(expect_string(j, "type", where), where);
  if (j.contains("connectorKind"))
    n.type.connector_kind =
        parse_connector_kind(expect_string(j, "connectorKind", where), where);
  if (n.is_connector() != n.type.connector_kind.has_value())
    fail(ErrorKind::SchemaError, where + ": connectorKind present iff type is connector");
  return n;
}

}  // namespace io_detail

inline std::string serialize_ops(const ChangeSequence& ops) {
  using io_detail::json;
  json arr = json::array();
  for (const auto& op : ops) {
    json j;
    j["op"] = op_name(op);
    std::visit(
        [&](const auto& o) {
          using T = std::decay_t<decltype(o)>;
          if constexpr (std::is_same_v<T, InsertEdge> || std::is_same_v<T, DeleteEdge>) {
            j["source"] = o.source;
            j["target"] = o.target;
          } else if constexpr (std::is_same_v<T, InsertNode> || std::is_same_v<T, AddNode>) {
            j["node"] = io_detail::node_spec_to_json(o.node);
            j["source"] = o.source;
            j["target"] = o.target;
          } else if constexpr (std::is_same_v<T, AppendNode>) {
            j["anchor"] = o.anchor;
            j["node"] = io_detail::node_spec_to_json(o.node);
          } else if constexpr (std::is_same_v<T, PrependNode>) {
            j["node"] = io_detail::node_spec_to_json(o.node);
            j["anchor"] = o.anchor;
          } else if constexpr (std::is_same_v<T, ModifyNodeAnnotation>) {
            j["node"] = o.node;
            j["label"] = o.label;
          } else {
            j["edge"] = {o.edge.source, o.edge.target};
            j["pid"] = o.pid;
          }
        },
        op);
    arr.push_back(j);
  }
  return io_detail::dump_canonical(arr);
}

inline ChangeSequence parse_ops(const std::string& bytes) {
  io_detail::json arr;
  try {
    arr = io_detail::json::parse(bytes);
  } catch (const io_detail::json::parse_error& e) {
    fail(ErrorKind::SyntaxError, e.what());
  }
  if (!arr.is_array()) fail(ErrorKind::SchemaError, "ops file must be an array");
  ChangeSequence ops;
  std::size_t idx = 0;
  for (const auto& j : arr) {
    std::string where = "ops[" + std::to_string(idx++) + "]";
    std::string name = io_detail::expect_string(j, "op", where);
    using io_detail::expect_string;
    if (name == "InsertEdge")
      ops.push_back(InsertEdge{expect_string(j, "source", where), expect_string(j, "target", where)});
    else if (name == "DeleteEdge")
      ops.push_back(DeleteEdge{expect_string(j, "source", where), expect_string(j, "target", where)});
    else if (name == "InsertNode")
      ops.push_back(InsertNode{io_detail::node_spec_from_json(j.at("node"), where),
                               expect_string(j, "source", where),
                               expect_string(j, "target", where)});
    else if (name == "AddNode")
      ops.push_back(AddNode{io_detail::node_spec_from_json(j.at("node"), where),
                            expect_string(j, "source", where),
                            expect_string(j, "target", where)});
    else if (name == "AppendNode")
      ops.push_back(AppendNode{expect_string(j, "anchor", where),
                               io_detail::node_spec_from_json(j.at("node"), where)});
    else if (name == "PrependNode")
      ops.push_back(PrependNode{io_detail::node_spec_from_json(j.at("node"), where),
                                expect_string(j, "anchor", where)});
    else if (name == "ModifyNodeAnnotation")
      ops.push_back(ModifyNodeAnnotation{expect_string(j, "node", where),
                                         expect_string(j, "label", where)});
    else if (name == "InsertEdgeAnnotation" || name == "DeleteEdgeAnnotation") {
      if (!j.contains("edge") || !j.at("edge").is_array() || j.at("edge").size() != 2)
        fail(ErrorKind::SchemaError, where + ": edge must be [source, target]");
      Edge e{j.at("edge")[0].get<std::string>(), j.at("edge")[1].get<std::string>()};
      Pid pid = expect_string(j, "pid", where);
      if (name == "InsertEdgeAnnotation")
        ops.push_back(InsertEdgeAnnotation{e, pid});
      else
        ops.push_back(DeleteEdgeAnnotation{e, pid});
    } else {
      fail(ErrorKind::SchemaError, where + ": unknown op '" + name + "'");
    }
  }
  return ops;
}

// -- mappings ------------------------------------------------------------------

inline std::string serialize_mappings(const FamilyMappings& m) {
  using io_detail::json;
  json j;
  json variants = json::array();
  for (const auto& [pid, vm] : m.variants) {
    json vj;
    vj["pid"] = pid;
    json nodes = json::array();
    for (const auto& [g, c] : vm.node_map) nodes.push_back({g, c});
    vj["nodeMap"] = nodes;
    json edges = json::array();
    for (const auto& [ge, path] : vm.edge_map) {
      json ej;
      ej["edge"] = {ge.source, ge.target};
      json pj = json::array();
      for (const auto& e : path) pj.push_back({e.source, e.target});
      ej["path"] = pj;
      edges.push_back(ej);
    }
    vj["edgeMap"] = edges;
    variants.push_back(vj);
  }
  j["variants"] = variants;
  return io_detail::dump_canonical(j);
}

inline FamilyMappings parse_mappings(const std::string& bytes) {
  io_detail::json j;
  try {
    j = io_detail::json::parse(bytes);
  } catch (const io_detail::json::parse_error& e) {
    fail(ErrorKind::SyntaxError, e.what());
  }
  FamilyMappings m;
  if (!j.contains("variants") || !j.at("variants").is_array())
    fail(ErrorKind::SchemaError, "mappings: missing 'variants' array");
  for (const auto& vj : j.at("variants")) {
    Pid pid = io_detail::expect_string(vj, "pid", "mappings variant");
    VariantMaps vm;
    for (const auto& pair : vj.at("nodeMap")) {
      if (!pair.is_array() || pair.size() != 2)
        fail(ErrorKind::SchemaError, "mappings: nodeMap entries are [gId, cgId]");
      vm.node_map[pair[0].get<std::string>()] = pair[1].get<std::string>();
    }
    for (const auto& ej : vj.at("edgeMap")) {
      const auto& ge = ej.at("edge");
      Edge key{ge[0].get<std::string>(), ge[1].get<std::string>()};
      std::vector<Edge> path;
      for (const auto& pe : ej.at("path"))
        path.push_back(Edge{pe[0].get<std::string>(), pe[1].get<std::string>()});
      vm.edge_map[key] = std::move(path);
    }
    m.variants[pid] = std::move(vm);
  }
  return m;
}

// -- manifest and whole families ------------------------------------------------

inline std::string serialize_manifest(const FamilyManifest& m) {
  using io_detail::json;
  json j;
  j["formatVersion"] = m.format_version;
  j["familyId"] = m.family_id;
  json variants = json::array();
  for (const auto& [pid, path] : m.variants) {
    json vj;
    vj["pid"] = pid;
    vj["path"] = path;
    variants.push_back(vj);
  }
  j["variants"] = variants;
  j["cgPath"] = m.cg_path;
  j["mappingsPath"] = m.mappings_path;
  return io_detail::dump_canonical(j);
}

inline FamilyManifest parse_manifest(const std::string& bytes) {
  io_detail::json j;
  try {
    j = io_detail::json::parse(bytes);
  } catch (const io_detail::json::parse_error& e) {
    fail(ErrorKind::SyntaxError, e.what());
  }
  FamilyManifest m;
  m.format_version = io_detail::expect(j, "formatVersion", "manifest",
                                       [](const io_detail::json& v) { return v.get<int>(); });
  if (m.format_version != 1) fail(ErrorKind::ManifestError, "unsupported formatVersion");
  m.family_id = io_detail::expect_string(j, "familyId", "manifest");
  if (!j.contains("variants") || !j.at("variants").is_array() || j.at("variants").empty())
    fail(ErrorKind::ManifestError, "manifest needs a non-empty variants array");
  std::set<Pid> pids;
  for (const auto& vj : j.at("variants")) {
    Pid pid = io_detail::expect_string(vj, "pid", "manifest variant");
    if (!pids.insert(pid).second)
      fail(ErrorKind::ManifestError, "duplicate pid '" + pid + "' in manifest");
    m.variants.emplace_back(pid, io_detail::expect_string(vj, "path", "manifest variant"));
  }
  m.cg_path = io_detail::expect_string(j, "cgPath", "manifest");
  m.mappings_path = io_detail::expect_string(j, "mappingsPath", "manifest");
  return m;
}

namespace io_detail {

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) fail(ErrorKind::ManifestError, "cannot read " + p.string());
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

inline void write_file(const std::filesystem::path& p, const std::string& bytes) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorKind::ManifestError, "cannot write " + p.string());
  out << bytes;
}

}  // namespace io_detail

/// Cross-checks that every annotation, origin and mapping entry of a loaded
/// family resolves: alpha and origin pids come from the manifest set, mapped
/// nodes exist on both sides. Returns problems; empty means consistent.
inline std::vector<std::string> validate_family_cross_refs(const Family& family) {
  std::vector<std::string> problems;
  std::set<Pid> pids;
  for (const auto& [pid, g] : family.variants) pids.insert(pid);
  for (const auto& [e, alpha] : family.cg.alpha)
    for (const auto& pid : alpha)
      if (!pids.count(pid))
        problems.push_back("alpha of (" + e.source + "," + e.target +
                           ") names unknown pid " + pid);
  for (const auto& [n, origins] : family.cg.beta)
    for (const auto& o : origins) {
      if (!pids.count(o.pid)) {
        problems.push_back("origin of " + n + " names unknown pid " + o.pid);
        continue;
      }
      if (!family.variants.at(o.pid).has_node(o.node_id))
        problems.push_back("origin of " + n + " names missing node " + o.pid + ":" +
                           o.node_id);
    }
  for (const auto& p : validate_mappings(family, /*strict=*/true)) problems.push_back(p);
  return problems;
}

/// Loads a family directory (manifest plus referenced files) and validates
/// all cross-references.
inline Family load_family(const std::filesystem::path& dir) {
  FamilyManifest manifest = parse_manifest(io_detail::read_file(dir / "manifest.json"));
  Family family;
  family.family_id = manifest.family_id;
  for (const auto& [pid, rel] : manifest.variants) {
    ModelValue m = parse_model_json(io_detail::read_file(dir / rel));
    auto* g = std::get_if<ProcessGraph>(&m);
    if (!g) fail(ErrorKind::ManifestError, rel + " is not a variant model");
    if (g->pid != pid)
      fail(ErrorKind::ManifestError, rel + " has pid '" + g->pid +
                                         "', manifest says '" + pid + "'");
    family.variants[pid] = std::move(*g);
  }
  ModelValue cg = parse_model_json(io_detail::read_file(dir / manifest.cg_path));
  auto* c = std::get_if<ConfigurableProcessGraph>(&cg);
  if (!c) fail(ErrorKind::ManifestError, manifest.cg_path + " is not a configurable model");
  family.cg = std::move(*c);
  family.mappings = parse_mappings(io_detail::read_file(dir / manifest.mappings_path));
  auto problems = validate_family_cross_refs(family);
  if (!problems.empty()) fail(ErrorKind::CrossRefError, problems.front());
  return family;
}

/// Writes a family atomically: everything goes into a staging directory that
/// is renamed over the target, so an interrupted run never leaves a
/// half-written family behind.
inline void store_family(const Family& family, const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  FamilyManifest manifest;
  manifest.family_id = family.family_id;
  for (const auto& [pid, g] : family.variants)
    manifest.variants.emplace_back(pid, "variant-" + pid + ".json");
  manifest.cg_path = "cg.json";
  manifest.mappings_path = "mappings.json";

  fs::path staging = dir;
  staging += ".staging";
  fs::remove_all(staging);
  fs::create_directories(staging);
  for (const auto& [pid, g] : family.variants)
    io_detail::write_file(staging / ("variant-" + pid + ".json"), serialize_model(g));
  io_detail::write_file(staging / "cg.json", serialize_model(family.cg));
  io_detail::write_file(staging / "mappings.json", serialize_mappings(family.mappings));
  io_detail::write_file(staging / "manifest.json", serialize_manifest(manifest));

  if (fs::exists(dir)) {
    fs::path old = dir;
    old += ".old";
    fs::remove_all(old);
    fs::rename(dir, old);
    fs::rename(staging, dir);
    fs::remove_all(old);
  } else {
    if (dir.has_parent_path()) fs::create_directories(dir.parent_path());
    fs::rename(staging, dir);
  }
}

}  // namespace bpce
