// bpce: co-evolve families of process model variants through a merged
// configurable model. Subcommands: merge, diff, apply, coevolve, check, gen,
// bench, cluster.

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "bpce/bpce.hpp"

namespace fs = std::filesystem;
using njson = nlohmann::ordered_json;
using namespace bpce;

namespace {

enum ExitCode {
  kOk = 0,
  kUsage = 1,
  kParseError = 2,
  kPropagationError = 3,
  kValidationError = 4,
};

int log_level() {
  static int level = [] {
    const char* env = std::getenv("BPCE_LOG");
    std::string v = env ? env : "warn";
    if (v == "debug") return 3;
    if (v == "info") return 2;
    if (v == "warn") return 1;
    return 0;
  }();
  return level;
}

void log_info(const std::string& msg) {
  if (log_level() >= 2) std::cerr << "bpce: " << msg << "\n";
}
void log_warn(const std::string& msg) {
  if (log_level() >= 1) std::cerr << "bpce: warning: " << msg << "\n";
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) fail(ErrorKind::ManifestError, "cannot read " + p.string());
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

void write_file(const fs::path& p, const std::string& bytes) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorKind::ManifestError, "cannot write " + p.string());
  out << bytes;
}

bool looks_like_epml(const fs::path& p) {
  std::string ext = p.extension().string();
  return ext == ".epml" || ext == ".xml";
}

ModelValue load_model(const fs::path& p, const std::string& format) {
  std::string bytes = read_file(p);
  if (format == "epml" || (format == "auto" && looks_like_epml(p)))
    return parse_model_epml(bytes);
  return parse_model_json(bytes);
}

ProcessGraph load_variant(const fs::path& p, const std::string& format) {
  ModelValue m = load_model(p, format);
  if (auto* g = std::get_if<ProcessGraph>(&m)) return *g;
  fail(ErrorKind::KindMismatch, p.string() + " holds a configurable model, not a variant");
}

int exit_code_for(const Error& e) {
  switch (e.kind()) {
    case ErrorKind::SyntaxError:
    case ErrorKind::SchemaError:
    case ErrorKind::ManifestError:
      return kParseError;
    case ErrorKind::CrossRefError:
      return kValidationError;
    default:
      return kPropagationError;
  }
}

njson violations_json(const std::vector<Violation>& vs) {
  njson arr = njson::array();
  for (const auto& v : vs) {
    njson j;
    j["case"] = to_string(v.tag);
    j["node"] = v.node;
    if (!v.other.empty()) j["target"] = v.other;
    arr.push_back(j);
  }
  return arr;
}

njson report_json(const PropagationReport& r) {
  njson j;
  njson counts;
  for (const auto& [k, v] : r.case_counts) counts[k] = v;
  j["caseCounts"] = counts;
  j["createdNodes"] = r.created_nodes;
  j["mappingEntriesAdded"] = r.mapping_entries_added;
  j["mappingEntriesRemoved"] = r.mapping_entries_removed;
  njson cleaning = njson::array();
  for (const auto& a : r.cleaning) {
    njson c;
    c["rule"] = a.rule;
    c["detail"] = a.detail;
    cleaning.push_back(c);
  }
  j["cleaning"] = cleaning;
  j["notes"] = r.notes;
  return j;
}

// ---------------------------------------------------------------------------

struct MergeArgs {
  std::string v1, v2, out;
  std::string format = "auto";
  MatchParams params;
  bool json = false;
};

int cmd_merge(const MergeArgs& a) {
  ProcessGraph g1 = load_variant(a.v1, a.format);
  ProcessGraph g2 = load_variant(a.v2, a.format);
  if (g1.pid == g2.pid) {
    log_warn("both variants carry pid '" + g1.pid + "'; renaming the second");
    g2.pid += "_2";
  }
  VariantMapping mapping = compute_mapping(g1, g2, a.params);
  MergeResult merged = merge(g1, g2, mapping);
  Family family;
  family.family_id = fs::path(a.out).filename().string();
  family.variants[g1.pid] = g1;
  family.variants[g2.pid] = g2;
  family.cg = std::move(merged.cg);
  family.mappings = std::move(merged.mappings);
  store_family(family, a.out);
  if (a.json) {
    njson j;
    j["score"] = mapping.score;
    j["pairs"] = mapping.pairs.size();
    j["out"] = a.out;
    std::cout << j.dump(2) << "\n";
  } else {
    std::cout << "matching score: " << mapping.score << "\n";
    std::cout << "family written to " << a.out << "\n";
  }
  return kOk;
}

struct DiffArgs {
  std::string old_path, new_path, out;
  std::string format = "auto";
  bool raw = false;
  bool json = false;
};

template <typename G>
std::pair<ChangeSequence, std::vector<std::string>> diff_models(const G& old_g,
                                                                const G& new_g, bool raw) {
  RawDelta delta = raw_delta(old_g, new_g);
  if (!raw) {
    JudgmentResult judged = operation_judgment(delta, old_g, new_g);
    return {std::move(judged.ops), std::move(judged.warnings)};
  }
  // primitives only: the plain set differences, without node classification
  ChangeSequence ops;
  for (const auto& e : delta.edges_deleted) ops.push_back(DeleteEdge{e.source, e.target});
  for (const auto& id : delta.nodes_relabeled)
    ops.push_back(ModifyNodeAnnotation{id, structure(new_g).node(id).label});
  for (const auto& e : delta.edges_added) ops.push_back(InsertEdge{e.source, e.target});
  for (const auto& [e, d] : delta.annotation_deltas) {
    for (const auto& pid : d.removed) ops.push_back(DeleteEdgeAnnotation{e, pid});
    for (const auto& pid : d.added) ops.push_back(InsertEdgeAnnotation{e, pid});
  }
  return {std::move(ops), {}};
}

int cmd_diff(const DiffArgs& a) {
  ModelValue old_m = load_model(a.old_path, a.format);
  ModelValue new_m = load_model(a.new_path, a.format);
  if (old_m.index() != new_m.index())
    fail(ErrorKind::KindMismatch, "old and new model are of different kinds");
  ChangeSequence ops;
  std::vector<std::string> warnings;
  std::visit(
      [&](const auto& old_g) {
        const auto& new_g = std::get<std::decay_t<decltype(old_g)>>(new_m);
        std::tie(ops, warnings) = diff_models(old_g, new_g, a.raw);
      },
      old_m);
  for (const auto& w : warnings) log_warn(w);
  std::string bytes = serialize_ops(ops);
  if (!a.out.empty()) write_file(a.out, bytes);
  if (a.json || a.out.empty()) {
    std::cout << bytes;
  } else {
    std::map<std::string, int> counts;
    for (const auto& op : ops) ++counts[op_name(op)];
    std::cout << ops.size() << " operations";
    for (const auto& [name, count] : counts) std::cout << " " << name << "=" << count;
    std::cout << "\n";
  }
  return kOk;
}

struct ApplyArgs {
  std::string model_path, ops_path, out;
  std::string format = "auto";
  bool clean = false;
};

int cmd_apply(const ApplyArgs& a) {
  ModelValue m = load_model(a.model_path, a.format);
  ChangeSequence ops = parse_ops(read_file(a.ops_path));
  std::string bytes = std::visit(
      [&](auto g) {
        g = replay_sequence(g, ops);
        if (a.clean) {
          if constexpr (std::is_same_v<std::decay_t<decltype(g)>, ProcessGraph>) {
            g = clean_variant(g).graph;
          } else {
            g = clean_cg(g, FamilyMappings{}).cg;
          }
        }
        return serialize_model(g);
      },
      m);
  if (a.out.empty())
    std::cout << bytes;
  else
    write_file(a.out, bytes);
  return kOk;
}

struct CoevolveArgs {
  std::string family_dir, changed_path, out;
  std::string format = "auto";
  bool dry_run = false;
  bool json = false;
};

int cmd_coevolve(const CoevolveArgs& a) {
  Family family = load_family(a.family_dir);
  ProcessGraph edited = load_variant(a.changed_path, a.format);
  if (!family.variants.count(edited.pid))
    fail(ErrorKind::UnknownPid, "variant '" + edited.pid + "' is not in the family");
  CoevolveResult result = coevolve(family, edited);
  if (result.variant_ops.empty()) {
    std::cout << "no changes detected\n";
    return kOk;
  }
  if (a.dry_run) {
    if (a.json) {
      njson j;
      j["variantOps"] = njson::parse(serialize_ops(result.variant_ops));
      j["cgOps"] = njson::parse(serialize_ops(result.cg_ops));
      j["report"] = report_json(result.report);
      std::cout << j.dump(2) << "\n";
    } else {
      std::cout << "variant ops:\n" << serialize_ops(result.variant_ops);
      std::cout << "configurable-graph ops:\n" << serialize_ops(result.cg_ops);
    }
    return kOk;
  }
  std::string out_dir = a.out.empty() ? a.family_dir : a.out;
  store_family(result.family, out_dir);
  if (a.json) {
    njson j;
    j["out"] = out_dir;
    j["variantOps"] = result.variant_ops.size();
    j["cgOps"] = result.cg_ops.size();
    j["report"] = report_json(result.report);
    std::cout << j.dump(2) << "\n";
  } else {
    std::cout << "co-evolved family written to " << out_dir << "\n";
    std::cout << "variant ops: " << result.variant_ops.size()
              << ", configurable-graph ops: " << result.cg_ops.size()
              << ", cleaning actions: " << result.report.cleaning.size() << "\n";
    for (const auto& [name, count] : result.report.case_counts)
      std::cout << "  " << name << ": " << count << "\n";
  }
  return kOk;
}

struct CheckArgs {
  std::string path;
  std::string family_dir;
  std::string format = "auto";
  bool json = false;
};

int cmd_check(const CheckArgs& a) {
  std::vector<Violation> violations;
  if (!a.family_dir.empty()) {
    Family family = load_family(a.family_dir);  // includes cross-ref validation
    for (const auto& v : check_well_formed(family.cg)) violations.push_back(v);
    for (const auto& [pid, g] : family.variants)
      for (const auto& v : check_well_formed(g)) violations.push_back(v);
  } else {
    if (a.path.empty()) {
      std::cerr << "bpce check: give a model file or --family\n";
      return kUsage;
    }
    ModelValue m = load_model(a.path, a.format);
    std::visit([&](const auto& g) { violations = check_well_formed(g); }, m);
  }
  if (a.json) {
    njson j;
    j["violations"] = violations_json(violations);
    std::cout << j.dump(2) << "\n";
  } else {
    for (const auto& v : violations) std::cout << v.describe() << "\n";
    if (violations.empty()) std::cout << "ok\n";
  }
  return violations.empty() ? kOk : kValidationError;
}

struct GenArgs {
  std::string out;
  std::uint64_t seed = 42;
  int variants = 2;
  int size = 12;
  int edits = 3;
};

int cmd_gen(const GenArgs& a) {
  if (a.variants < 2 || a.size < 4) {
    std::cerr << "bpce gen: need at least 2 variants and size 4\n";
    return kUsage;
  }
  GraphGenerator gen(a.seed);
  GenParams params;
  params.seed = a.seed;
  params.variant_count = a.variants;
  params.node_count = a.size;
  params.edit_count = a.edits;
  Family family = gen.random_family(params);
  family.family_id = "gen-" + std::to_string(a.seed);
  store_family(family, a.out);
  // per-variant edit scripts for benchmarking and replay experiments
  for (const auto& [pid, g] : family.variants) {
    ChangeSequence script = gen.random_script(g, a.edits);
    write_file(fs::path(a.out) / "edits" / ("ops-" + pid + ".json"), serialize_ops(script));
  }
  std::cout << "family with " << family.variants.size() << " variants written to "
            << a.out << "\n";
  return kOk;
}

struct BenchArgs {
  std::string corpus_dir;
  std::string out;
  std::string mode = "both";
  bool generated = false;
  int families = 5;
  int variants = 8;
  int size = 20;
  int edits = 3;
  std::uint64_t seed = 42;
  int reps = 20;
  int jobs = 1;
  bool json = false;
};

double median_of(std::vector<double> xs) {
  std::sort(xs.begin(), xs.end());
  std::size_t n = xs.size();
  return n % 2 ? xs[n / 2] : (xs[n / 2 - 1] + xs[n / 2]) / 2.0;
}

struct BenchRow {
  std::string family;
  double via_cg_ms = 0;
  double pairwise_ms = 0;
  int reps = 0;
};

int cmd_bench(const BenchArgs& a) {
  std::vector<std::pair<std::string, Family>> families;
  if (a.generated) {
    for (int i = 0; i < a.families; ++i) {
      GraphGenerator gen(a.seed + std::uint64_t(i));
      GenParams p;
      p.seed = a.seed + std::uint64_t(i);
      p.variant_count = a.variants;
      p.node_count = a.size;
      p.edit_count = a.edits;
      families.emplace_back("gen-" + std::to_string(p.seed), gen.random_family(p));
    }
  } else {
    if (a.corpus_dir.empty()) {
      std::cerr << "bpce bench: give a corpus directory or --generated\n";
      return kUsage;
    }
    std::vector<fs::path> dirs;
    for (const auto& entry : fs::directory_iterator(a.corpus_dir))
      if (entry.is_directory() && fs::exists(entry.path() / "manifest.json"))
        dirs.push_back(entry.path());
    std::sort(dirs.begin(), dirs.end());
    for (const auto& d : dirs) families.emplace_back(d.filename().string(), load_family(d));
  }
  if (families.empty()) {
    std::cerr << "bpce bench: no families found\n";
    return kUsage;
  }

  std::vector<BenchRow> rows(families.size());
  auto run_family = [&](std::size_t idx) {
    const auto& [name, family] = families[idx];
    GraphGenerator gen(a.seed ^ (idx * 0x9e3779b97f4a7c15ULL));
    Pid pid = family.variants.begin()->first;
    ProcessGraph edited = replay_sequence(family.variants.at(pid),
                                          gen.random_script(family.variants.at(pid), a.edits));
    std::vector<double> via, pairwise;
    volatile double sink = 0;
    for (int rep = 0; rep < a.reps; ++rep) {
      if (a.mode != "pairwise") {
        auto t0 = std::chrono::steady_clock::now();
        CoevolveResult r = coevolve(family, edited);
        auto t1 = std::chrono::steady_clock::now();
        via.push_back(std::chrono::duration<double, std::milli>(t1 - t0).count());
        sink = sink + double(r.family.cg.base.nodes.size());
      }
      if (a.mode != "via-cg") {
        // the alternative: map the edited variant against every sibling and
        // replay the detected ops on each of them directly
        auto t0 = std::chrono::steady_clock::now();
        ChangeSequence ops = detect_change_sequence(family.variants.at(pid), edited);
        for (const auto& [other_pid, other] : family.variants) {
          if (other_pid == pid) continue;
          VariantMapping m = compute_mapping(edited, other);
          sink = sink + m.score + double(ops.size());
        }
        auto t1 = std::chrono::steady_clock::now();
        pairwise.push_back(std::chrono::duration<double, std::milli>(t1 - t0).count());
      }
    }
    BenchRow row;
    row.family = name;
    row.reps = a.reps;
    if (!via.empty()) row.via_cg_ms = median_of(via);
    if (!pairwise.empty()) row.pairwise_ms = median_of(pairwise);
    rows[idx] = row;
  };

  if (a.jobs > 1) {
    std::vector<std::thread> pool;
    std::size_t next = 0;
    std::mutex mu;
    for (int t = 0; t < a.jobs; ++t)
      pool.emplace_back([&] {
        for (;;) {
          std::size_t idx;
          {
            std::lock_guard<std::mutex> lock(mu);
            if (next >= families.size()) return;
            idx = next++;
          }
          run_family(idx);
        }
      });
    for (auto& t : pool) t.join();
  } else {
    for (std::size_t i = 0; i < families.size(); ++i) run_family(i);
  }

  njson jrows = njson::array();
  std::string csv = "family,mode,median_ms,reps\n";
  std::cout << "family             via-cg ms   pairwise ms   reps\n";
  for (const auto& row : rows) {
    std::printf("%-16s %11.3f   %11.3f   %4d\n", row.family.c_str(), row.via_cg_ms,
                row.pairwise_ms, row.reps);
    if (a.mode != "pairwise")
      csv += row.family + ",via-cg," + std::to_string(row.via_cg_ms) + "," +
             std::to_string(row.reps) + "\n";
    if (a.mode != "via-cg")
      csv += row.family + ",pairwise," + std::to_string(row.pairwise_ms) + "," +
             std::to_string(row.reps) + "\n";
    njson j;
    j["family"] = row.family;
    j["viaCgMs"] = row.via_cg_ms;
    j["pairwiseMs"] = row.pairwise_ms;
    j["reps"] = row.reps;
    jrows.push_back(j);
  }
  if (a.mode == "both") {
    double via_total = 0, pw_total = 0;
    for (const auto& row : rows) {
      via_total += row.via_cg_ms;
      pw_total += row.pairwise_ms;
    }
    std::cout << "ratio(via-cg / pairwise) = " << (via_total / pw_total) << "\n";
  }
  if (!a.out.empty()) write_file(a.out, csv);
  if (a.json) std::cout << jrows.dump(2) << "\n";
  return kOk;
}

struct ClusterArgs {
  std::string corpus_dir;
  double threshold = 0.5;
  std::string format = "auto";
  bool json = false;
};

int cmd_cluster(const ClusterArgs& a) {
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(a.corpus_dir)) {
    if (!entry.is_regular_file()) continue;
    std::string ext = entry.path().extension().string();
    if (ext == ".json" || ext == ".epml" || ext == ".xml") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  std::vector<ProcessGraph> corpus;
  std::vector<std::string> names;
  for (const auto& f : files) {
    ModelValue m = load_model(f, a.format);
    if (auto* g = std::get_if<ProcessGraph>(&m)) {
      corpus.push_back(*g);
      names.push_back(f.filename().string());
    } else {
      log_info("skipping configurable model " + f.string());
    }
  }
  if (corpus.size() < 2) {
    std::cerr << "bpce cluster: need at least two variant models in " << a.corpus_dir << "\n";
    return kUsage;
  }
  ClusterResult r = cluster_corpus(corpus, a.threshold);
  if (a.json) {
    njson j;
    njson clusters = njson::array();
    for (const auto& c : r.clusters) {
      njson names_arr = njson::array();
      for (auto i : c) names_arr.push_back(names[i]);
      clusters.push_back(names_arr);
    }
    j["clusters"] = clusters;
    njson single = njson::array();
    for (auto i : r.unclustered) single.push_back(names[i]);
    j["unclustered"] = single;
    std::cout << j.dump(2) << "\n";
  } else {
    for (std::size_t c = 0; c < r.clusters.size(); ++c) {
      std::cout << "cluster " << (c + 1) << ":";
      for (auto i : r.clusters[c]) std::cout << " " << names[i];
      std::cout << "\n";
    }
    std::cout << r.unclustered.size() << " unclustered\n";
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"co-evolution of business process variants through a configurable model"};
  app.require_subcommand(1);

  MergeArgs merge_args;
  auto* merge_cmd = app.add_subcommand("merge", "merge two variants into a family");
  merge_cmd->add_option("v1", merge_args.v1, "first variant model")->required();
  merge_cmd->add_option("v2", merge_args.v2, "second variant model")->required();
  merge_cmd->add_option("-o,--out", merge_args.out, "output family directory")->required();
  merge_cmd->add_option("--format", merge_args.format, "input format (auto|json|epml)");
  merge_cmd->add_option("--threshold", merge_args.params.threshold, "mapping threshold");
  merge_cmd->add_option("--w-skip-node", merge_args.params.weight_skip_node,
                        "weight of unmapped nodes");
  merge_cmd->add_option("--w-skip-edge", merge_args.params.weight_skip_edge,
                        "weight of unmapped edges");
  merge_cmd->add_option("--w-sub", merge_args.params.weight_substitution,
                        "weight of label substitution");
  merge_cmd->add_flag("--json", merge_args.json, "machine-readable output");

  DiffArgs diff_args;
  auto* diff_cmd = app.add_subcommand("diff", "detect change operations between two versions");
  diff_cmd->add_option("old", diff_args.old_path, "old model")->required();
  diff_cmd->add_option("new", diff_args.new_path, "new model")->required();
  diff_cmd->add_option("-o,--out", diff_args.out, "write the ops file here");
  diff_cmd->add_option("--format", diff_args.format, "input format (auto|json|epml)");
  diff_cmd->add_flag("--raw", diff_args.raw, "emit set differences without classification");
  diff_cmd->add_flag("--json", diff_args.json, "print the ops to stdout");

  ApplyArgs apply_args;
  auto* apply_cmd = app.add_subcommand("apply", "replay an ops file onto a model");
  apply_cmd->add_option("model", apply_args.model_path, "input model")->required();
  apply_cmd->add_option("ops", apply_args.ops_path, "ops file")->required();
  apply_cmd->add_option("-o,--out", apply_args.out, "output model path (default stdout)");
  apply_cmd->add_option("--format", apply_args.format, "input format (auto|json|epml)");
  apply_cmd->add_flag("--clean", apply_args.clean, "clean the result");

  CoevolveArgs co_args;
  auto* co_cmd =
      app.add_subcommand("coevolve", "propagate one variant's edit through the family");
  co_cmd->add_option("family", co_args.family_dir, "family directory")->required();
  co_cmd->add_option("changed", co_args.changed_path, "edited variant model")->required();
  co_cmd->add_option("-o,--out", co_args.out, "output directory (default: in place)");
  co_cmd->add_option("--format", co_args.format, "input format (auto|json|epml)");
  co_cmd->add_flag("--dry-run", co_args.dry_run, "print the op lists without writing");
  co_cmd->add_flag("--json", co_args.json, "machine-readable output");

  CheckArgs check_args;
  auto* check_cmd = app.add_subcommand("check", "report illegal patterns and broken references");
  check_cmd->add_option("path", check_args.path, "model file");
  check_cmd->add_option("--family", check_args.family_dir, "check a whole family directory");
  check_cmd->add_option("--format", check_args.format, "input format (auto|json|epml)");
  check_cmd->add_flag("--json", check_args.json, "machine-readable output");

  GenArgs gen_args;
  auto* gen_cmd = app.add_subcommand("gen", "generate a synthetic family with edit scripts");
  gen_cmd->add_option("-o,--out", gen_args.out, "output family directory")->required();
  gen_cmd->add_option("--seed", gen_args.seed, "random seed");
  gen_cmd->add_option("-k,--variants", gen_args.variants, "number of variants");
  gen_cmd->add_option("-n,--size", gen_args.size, "approximate base graph size");
  gen_cmd->add_option("-e,--edits", gen_args.edits, "edits per variant");

  BenchArgs bench_args;
  auto* bench_cmd =
      app.add_subcommand("bench", "compare via-cg co-evolution with pairwise mapping");
  bench_cmd->add_option("corpus", bench_args.corpus_dir, "directory of family directories");
  bench_cmd->add_flag("--generated", bench_args.generated,
                      "benchmark generated families instead");
  bench_cmd->add_option("--families", bench_args.families, "number of generated families");
  bench_cmd->add_option("-k,--variants", bench_args.variants, "variants per generated family");
  bench_cmd->add_option("-n,--size", bench_args.size, "generated base graph size");
  bench_cmd->add_option("-e,--edits", bench_args.edits, "edit script length");
  bench_cmd->add_option("--seed", bench_args.seed, "random seed");
  bench_cmd->add_option("--reps", bench_args.reps, "repetitions per family");
  bench_cmd->add_option("--mode", bench_args.mode, "via-cg|pairwise|both");
  bench_cmd->add_option("--jobs", bench_args.jobs, "parallel workers across families");
  bench_cmd->add_option("-o,--out", bench_args.out, "write plot data (csv)");
  bench_cmd->add_flag("--json", bench_args.json, "machine-readable output");

  ClusterArgs cluster_args;
  auto* cluster_cmd =
      app.add_subcommand("cluster", "cluster a corpus of variants by matching score");
  cluster_cmd->add_option("corpus", cluster_args.corpus_dir, "directory of model files")
      ->required();
  cluster_cmd->add_option("--threshold", cluster_args.threshold, "clustering threshold");
  cluster_cmd->add_option("--format", cluster_args.format, "input format (auto|json|epml)");
  cluster_cmd->add_flag("--json", cluster_args.json, "machine-readable output");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }

  try {
    if (merge_cmd->parsed()) return cmd_merge(merge_args);
    if (diff_cmd->parsed()) return cmd_diff(diff_args);
    if (apply_cmd->parsed()) return cmd_apply(apply_args);
    if (co_cmd->parsed()) return cmd_coevolve(co_args);
    if (check_cmd->parsed()) return cmd_check(check_args);
    if (gen_cmd->parsed()) return cmd_gen(gen_args);
    if (bench_cmd->parsed()) return cmd_bench(bench_args);
    if (cluster_cmd->parsed()) return cmd_cluster(cluster_args);
  } catch (const Error& e) {
    std::cerr << "bpce: " << e.what() << "\n";
    return exit_code_for(e);
  } catch (const std::exception& e) {
    std::cerr << "bpce: " << e.what() << "\n";
    return kPropagationError;
  }
  return kUsage;
}
