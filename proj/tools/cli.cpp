#include "cli.hpp"

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "spchar/bench.hpp"
#include "spchar/cache_sim.hpp"
#include "spchar/dataset.hpp"
#include "spchar/digest.hpp"
#include "spchar/dtree.hpp"
#include "spchar/manifest.hpp"
#include "spchar/matgen.hpp"
#include "spchar/metrics.hpp"
#include "spchar/mtx_io.hpp"
#include "spchar/parallel.hpp"
#include "spchar/profile.hpp"

namespace spchar::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr int kItemFailure = 1;
constexpr int kUsageError = 2;

class UsageError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

struct ItemError {
  std::string item;
  std::string message;
};

// Collects per-item failures from concurrent workers.
class ErrorList {
public:
  void add(std::string item, std::string message) {
    std::lock_guard lock(mu_);
    errors_.push_back({std::move(item), std::move(message)});
  }
  [[nodiscard]] bool empty() const { return errors_.empty(); }
  [[nodiscard]] json to_json() const {
    json arr = json::array();
    for (const auto& e : errors_) arr.push_back({{"item", e.item}, {"error", e.message}});
    return arr;
  }
  // Sorted by item so the report does not depend on completion order.
  void sort() {
    std::stable_sort(errors_.begin(), errors_.end(), [](const ItemError& a, const ItemError& b) { return a.item < b.item; });
  }

private:
  std::mutex mu_;
  std::vector<ItemError> errors_;
};

int finish(ErrorList& errors, std::ostream& err) {
  if (errors.empty()) return 0;
  errors.sort();
  err << json{{"spchar_schema", "spchar.errors.v1"}, {"errors", errors.to_json()}}.dump() << '\n';
  return kItemFailure;
}

unsigned default_jobs() {
  if (const char* env = std::getenv("SPCHAR_JOBS")) {
    try {
      const auto v = std::stoul(env);
      if (v > 0) return static_cast<unsigned>(v);
    } catch (const std::exception&) {
    }
  }
  return 1;
}

void write_text_file(const fs::path& path, const std::string& body) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  f << body;
  if (!f) throw std::runtime_error("write to '" + path.string() + "' failed");
}

std::string read_text_file(const fs::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

json read_json_file(const fs::path& path) {
  try {
    return json::parse(read_text_file(path));
  } catch (const json::exception& e) {
    throw std::runtime_error("'" + path.string() + "': " + e.what());
  }
}

// A matrix loaded from disk with its join key.
struct LoadedMatrix {
  std::string id;
  std::optional<std::string> category;
  CsrMatrix matrix;
  std::string digest;
};

// The sidecar <stem>.json written by `generate`, when present, supplies the
// id and category; otherwise the file stem is the id.
LoadedMatrix load_matrix(const fs::path& path) {
  LoadedMatrix lm;
  lm.matrix = read_matrix_market_file(path);
  lm.digest = matrix_digest(lm.matrix);
  lm.id = path.stem().string();
  fs::path sidecar = path;
  sidecar.replace_extension(".json");
  if (fs::exists(sidecar)) {
    const json meta = read_json_file(sidecar);
    lm.id = meta.value("matrix_id", lm.id);
    if (meta.contains("category")) lm.category = meta.at("category").get<std::string>();
  }
  return lm;
}

std::vector<fs::path> expand_inputs(const std::vector<std::string>& inputs, ErrorList& errors) {
  std::vector<fs::path> out;
  for (const auto& in : inputs) {
    const fs::path p(in);
    if (fs::is_directory(p)) {
      std::vector<fs::path> found;
      for (const auto& entry : fs::directory_iterator(p)) {
        if (entry.is_regular_file() && entry.path().extension() == ".mtx") found.push_back(entry.path());
      }
      std::sort(found.begin(), found.end());
      out.insert(out.end(), found.begin(), found.end());
    } else if (fs::exists(p)) {
      out.push_back(p);
    } else {
      errors.add(in, "no such file or directory");
    }
  }
  return out;
}

std::vector<index_t> parse_thread_list(const std::string& s) {
  std::vector<index_t> out;
  std::stringstream ss(s);
  std::string part;
  while (std::getline(ss, part, ',')) {
    std::size_t used = 0;
    unsigned long v = 0;
    try {
      v = std::stoul(part, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != part.size() || v == 0) throw UsageError("--threads: invalid thread count '" + part + "'");
    out.push_back(static_cast<index_t>(v));
  }
  if (out.empty()) throw UsageError("--threads: empty list");
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

bool has_extension(const fs::path& p, const char* ext) { return p.extension() == ext; }

RunManifest make_manifest(const std::vector<std::string>& args) {
  RunManifest m;
  m.command_line = args;
  m.stamp("started");
  return m;
}

// ---------------------------------------------------------------- generate

struct GenerateArgs {
  std::string category = "all";
  index_t n = 10000;
  std::uint64_t seed = 0;
  std::uint32_t replicates = 1;
  index_t stride_max_row_nnz = 0;
  std::string out;
  unsigned jobs = 1;
};

int cmd_generate(const GenerateArgs& a, const std::vector<std::string>& argv, std::ostream& out, std::ostream& err) {
  std::vector<Category> cats;
  if (a.category == "all") {
    cats.assign(kAllCategories.begin(), kAllCategories.end());
  } else {
    const auto c = parse_category(a.category);
    if (!c) throw UsageError("unknown category '" + a.category + "'");
    cats.push_back(*c);
  }
  if (a.replicates < 1) throw UsageError("--replicates must be >= 1");

  const fs::path dir(a.out);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw std::runtime_error("cannot create output directory '" + a.out + "'");

  GenParams params;
  params.stride_max_row_nnz = a.stride_max_row_nnz;

  RunManifest manifest = make_manifest(argv);
  manifest.seeds["suite"] = a.seed;

  struct Job {
    Category category;
    std::uint32_t replicate;
  };
  std::vector<Job> jobs;
  for (auto c : cats) {
    for (std::uint32_t r = 0; r < a.replicates; ++r) jobs.push_back({c, r});
  }

  // Each item is generated and written independently.
  std::vector<std::optional<GeneratedMatrix>> done(jobs.size());
  ErrorList errors;
  parallel_for_each_index(jobs.size(), a.jobs, [&](std::size_t i) {
    const auto& j = jobs[i];
    GeneratedMatrix g;
    g.spec = GenSpec{j.category, a.n, suite_subseed(a.seed, j.category, j.replicate), params};
    g.suite_seed = a.seed;
    g.replicate = j.replicate;
    g.id = std::string(category_name(j.category)) + "_n" + std::to_string(a.n) + "_s" + std::to_string(a.seed) + "_r" +
           std::to_string(j.replicate);
    try {
      g.matrix = generate(g.spec);
      done[i] = std::move(g);
    } catch (const std::exception& e) {
      errors.add(g.id, e.what());
    }
  });

  for (const auto& g : done) {
    if (g) manifest.seeds[g->id] = g->spec.seed;
  }
  const std::string mdigest = manifest.digest();
  for (const auto& g : done) {
    if (!g) continue;
    try {
      write_matrix_market_file(g->matrix, dir / (g->id + ".mtx"), "spchar generate " + g->id + " manifest=" + mdigest);
      json meta = generation_metadata(*g);
      meta["manifest"] = mdigest;
      write_text_file(dir / (g->id + ".json"), meta.dump(2) + "\n");
      out << g->id << ' ' << g->matrix.nnz() << ' ' << matrix_digest(g->matrix) << '\n';
    } catch (const std::exception& e) {
      errors.add(g->id, e.what());
    }
  }
  manifest.stamp("finished");
  write_text_file(dir / "manifest.json", manifest_to_json(manifest).dump(2) + "\n");
  return finish(errors, err);
}

// ----------------------------------------------------------------- analyze

struct AnalyzeArgs {
  std::vector<std::string> inputs;
  std::string threads = "2,4,16,32,48,64,128";
  std::string out;
  unsigned jobs = 1;
};

int cmd_analyze(const AnalyzeArgs& a, const std::vector<std::string>& argv, std::ostream& out, std::ostream& err) {
  const auto threads = parse_thread_list(a.threads);
  ErrorList errors;
  const auto paths = expand_inputs(a.inputs, errors);

  std::vector<std::optional<MetricRecord>> records(paths.size());
  std::vector<std::string> digests(paths.size());
  parallel_for_each_index(paths.size(), a.jobs, [&](std::size_t i) {
    try {
      auto lm = load_matrix(paths[i]);
      digests[i] = lm.digest;
      records[i] = analyze(lm.matrix, threads, lm.id, lm.category);
    } catch (const std::exception& e) {
      errors.add(paths[i].string(), e.what());
    }
  });

  RunManifest manifest = make_manifest(argv);
  std::vector<MetricRecord> ok;
  std::set<std::string> seen;
  for (std::size_t i = 0; i < paths.size(); ++i) {
    if (!records[i]) continue;
    if (!seen.insert(records[i]->matrix_id).second) {
      errors.add(paths[i].string(), "duplicate matrix_id '" + records[i]->matrix_id + "'");
      continue;
    }
    manifest.input_digests[records[i]->matrix_id] = digests[i];
    ok.push_back(std::move(*records[i]));
  }
  manifest.stamp("finished");

  std::ostringstream body;
  if (!a.out.empty() && has_extension(a.out, ".json")) {
    json arr = json::array();
    for (const auto& r : ok) arr.push_back(metric_to_json(r));
    body << json{{"spchar_schema", "spchar.metrics.v1"},
                 {"manifest", manifest_to_json(manifest)},
                 {"records", arr},
                 {"errors", errors.to_json()}}
                .dump(2)
         << '\n';
  } else {
    write_metrics_csv(ok, body, manifest.csv_preamble("spchar.metrics.v1"));
  }
  if (a.out.empty()) {
    out << body.str();
  } else {
    write_text_file(a.out, body.str());
    out << ok.size() << " records written to " << a.out << '\n';
  }
  return finish(errors, err);
}

// ------------------------------------------------------------------- bench

struct BenchArgs {
  std::string kernel;
  std::string phase = "both";
  std::vector<std::string> operands;
  BenchConfig cfg;
  std::string proxy_profile;
  std::string profile_out;
  std::string out;
};

int cmd_bench(const BenchArgs& a, const std::vector<std::string>& argv, std::ostream& out, std::ostream& err) {
  const auto kernel = parse_kernel(a.kernel);
  if (!kernel) throw UsageError("unknown kernel '" + a.kernel + "' (expected spmv|spadd|spgemm)");
  const auto phase = parse_phase(a.phase);
  if (!phase) throw UsageError("unknown phase '" + a.phase + "' (expected symbolic|numeric|both)");
  const std::size_t want = is_binary(*kernel) ? 2 : 1;
  if (a.operands.size() != want) {
    throw UsageError(std::string(kernel_name(*kernel)) + " takes " + std::to_string(want) + " matrix operand(s), got " +
                     std::to_string(a.operands.size()));
  }
  a.cfg.validate();

  const LoadedMatrix A = load_matrix(a.operands[0]);
  std::optional<LoadedMatrix> B;
  if (want == 2) B = load_matrix(a.operands[1]);

  RunManifest manifest = make_manifest(argv);
  manifest.input_digests["A"] = A.digest;
  if (B) manifest.input_digests["B"] = B->digest;

  const KernelInputs in{A.matrix, B ? &B->matrix : nullptr, {}};
  const KernelResult r = run_benchmark(*kernel, *phase, in, a.cfg);

  std::optional<ProfileRecord> prof;
  if (!a.proxy_profile.empty()) {
    const CacheConfig cc = a.proxy_profile == "default" ? CacheConfig::graviton3_default()
                                                        : cache_config_from_json(read_json_file(a.proxy_profile));
    manifest.config_digests["cache"] = cc.digest();
    prof = proxy_profile(*kernel, in, cc, ProxyOptions{a.cfg.threads, a.cfg.team_work_size, A.id});
  }
  manifest.stamp("finished");

  json result = result_to_json(r);
  result["matrix_id"] = A.id;
  if (B) result["matrix_id_b"] = B->id;
  result["manifest"] = manifest_to_json(manifest);
  if (!a.out.empty()) write_text_file(a.out, result.dump(2) + "\n");

  out << kernel_name(*kernel) << ' ' << A.id << (B ? " " + B->id : std::string()) << " timings_ns";
  for (auto t : r.timings_ns) out << ' ' << t;
  out << " flops " << r.op_counts.flops << '\n';

  if (prof) {
    const std::string preamble = manifest.csv_preamble("spchar.profile.v1");
    if (a.profile_out.empty()) {
      write_profile_csv({*prof}, out, preamble);
    } else {
      // Append by re-reading so all rows share one header.
      std::vector<ProfileRecord> rows;
      if (fs::exists(a.profile_out)) {
        std::ifstream f(a.profile_out);
        rows = ingest_perf_csv(f, prof->platform);
      }
      rows.push_back(*prof);
      std::ostringstream body;
      write_profile_csv(rows, body, preamble);
      write_text_file(a.profile_out, body.str());
    }
  }
  (void)err;
  return 0;
}

// ------------------------------------------------------------------- train

struct TrainArgs {
  std::string metrics;
  std::string profiles;
  std::string target = "gflops";
  std::string platform;
  std::string kernel;
  std::uint32_t kfold = 10;
  std::uint64_t seed = 0;
  TreeHyperparams hp;
  std::string out;
  std::string report_out;
};

int cmd_train(const TrainArgs& a, const std::vector<std::string>& argv, std::ostream& out, std::ostream&) {
  const auto target = parse_target(a.target);
  if (!target) throw UsageError("unknown target '" + a.target + "' (expected gflops|bandwidth|throughput)");

  std::vector<MetricRecord> metrics;
  {
    std::ifstream f(a.metrics);
    if (!f) throw std::runtime_error("cannot open '" + a.metrics + "'");
    metrics = read_metrics_csv(f);
  }
  std::vector<ProfileRecord> profiles;
  {
    std::ifstream f(a.profiles);
    if (!f) throw std::runtime_error("cannot open '" + a.profiles + "'");
    profiles = ingest_perf_csv(f, a.platform);
  }

  const Dataset full = build_dataset(metrics, profiles, *target, a.platform, a.kernel);
  const auto [data, removed] = exclude_leakage(full);

  RunManifest manifest = make_manifest(argv);
  manifest.seeds["kfold"] = a.seed;
  manifest.input_digests["metrics"] = digest_text(read_text_file(a.metrics));
  manifest.input_digests["profiles"] = digest_text(read_text_file(a.profiles));
  manifest.input_digests["dataset"] = data.digest();

  RegressionTree tree = fit(data, a.hp);
  std::optional<KFoldReport> kf;
  if (a.kfold > 0) kf = kfold_validate(data, a.kfold, a.hp, a.seed);
  manifest.stamp("finished");

  tree.metadata = {{"platform", a.platform},
                   {"kernel", a.kernel},
                   {"rows", data.rows.size()},
                   {"leakage_removed", removed},
                   {"manifest", manifest_to_json(manifest)}};
  if (kf) tree.metadata["validation"] = kfold_to_json(*kf);

  const std::string model = tree_to_json(tree).dump(2) + "\n";
  if (a.out.empty()) out << model;
  else write_text_file(a.out, model);

  if (kf) {
    json val = {{"spchar_schema", "spchar.validation.v1"},
                {"platform", a.platform},
                {"kernel", a.kernel},
                {"target", data.target_name},
                {"dataset_digest", data.digest()},
                {"leakage_removed", removed},
                {"kfold", kfold_to_json(*kf)},
                {"manifest", manifest.digest()}};
    if (!a.report_out.empty()) write_text_file(a.report_out, val.dump(2) + "\n");
    if (!a.out.empty()) {
      out << "rows " << data.rows.size() << " features " << data.feature_names.size() << " kfold " << kf->k
          << " mean_mape " << kf->mean_mape << " r2 " << kf->r2 << '\n';
    }
  }
  return 0;
}

// ------------------------------------------------------------------ report

struct ReportArgs {
  std::vector<std::string> models;
  double min_importance = 0.05;
  std::string out;
};

int cmd_report(const ReportArgs& a, const std::vector<std::string>& argv, std::ostream& out, std::ostream& err) {
  std::vector<ModelEntry> entries;
  ErrorList errors;
  RunManifest manifest = make_manifest(argv);
  for (const auto& path : a.models) {
    try {
      const json j = read_json_file(path);
      ModelEntry e;
      e.tree = tree_from_json(j);
      e.platform = e.tree.metadata.value("platform", fs::path(path).stem().string());
      e.kernel = e.tree.metadata.value("kernel", std::string("?"));
      // Same platform/kernel from two files: keep labels unique via the file stem.
      const auto clash = [&](const ModelEntry& o) { return o.label() == e.label(); };
      if (std::any_of(entries.begin(), entries.end(), clash)) e.platform += "[" + fs::path(path).stem().string() + "]";
      manifest.input_digests[path] = digest_text(j.dump());
      entries.push_back(std::move(e));
    } catch (const std::exception& ex) {
      errors.add(path, ex.what());
    }
  }
  if (entries.empty()) return finish(errors, err);

  const ImportanceReport rep = importance_report(entries, a.min_importance);
  manifest.stamp("finished");
  json j = report_to_json(rep);
  j["manifest"] = manifest_to_json(manifest);
  if (!a.out.empty()) write_text_file(a.out, j.dump(2) + "\n");
  out << report_to_text(rep);
  return finish(errors, err);
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  std::vector<const char*> argv{"spchar"};
  for (const auto& s : args) argv.push_back(s.c_str());
  return run(static_cast<int>(argv.size()), argv.data(), out, err);
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"spchar: sparse workload characterization toolkit"};
  app.require_subcommand(1);
  app.set_version_flag("--version", SPCHAR_VERSION);

  const std::vector<std::string> recorded(argv + 1, argv + argc);

  GenerateArgs gen;
  gen.jobs = default_jobs();
  auto* g = app.add_subcommand("generate", "Write seeded synthetic matrices (.mtx plus .json metadata)");
  g->add_option("--category", gen.category, "Category name or 'all'")->capture_default_str();
  g->add_option("--n", gen.n, "Rows and columns")->capture_default_str();
  g->add_option("--seed", gen.seed, "Suite seed")->capture_default_str();
  g->add_option("--replicates", gen.replicates, "Replicates per category")->capture_default_str();
  g->add_option("--stride-max-row-nnz", gen.stride_max_row_nnz, "Cap on nonzeros per Stride row (0 = none)");
  g->add_option("--out", gen.out, "Output directory")->required();
  g->add_option("--jobs", gen.jobs, "Concurrent items (default $SPCHAR_JOBS or 1)")->check(CLI::PositiveNumber);

  AnalyzeArgs an;
  an.jobs = default_jobs();
  auto* z = app.add_subcommand("analyze", "Compute static metrics for matrices");
  z->add_option("inputs", an.inputs, ".mtx files or directories")->required();
  z->add_option("--threads", an.threads, "Comma-separated thread counts")->capture_default_str();
  z->add_option("--out", an.out, "metrics.csv or metrics.json (stdout if omitted)");
  z->add_option("--jobs", an.jobs, "Concurrent items (default $SPCHAR_JOBS or 1)")->check(CLI::PositiveNumber);

  BenchArgs be;
  auto* b = app.add_subcommand("bench", "Time a CSR kernel, optionally with a proxy profile");
  b->add_option("--kernel", be.kernel, "spmv|spadd|spgemm")->required();
  b->add_option("--phase", be.phase, "symbolic|numeric|both")->capture_default_str();
  b->add_option("--warmup", be.cfg.warmup_runs, "Untimed warmup runs")->capture_default_str();
  b->add_option("--reps", be.cfg.measured_runs, "Timed runs")->capture_default_str();
  b->add_option("--threads", be.cfg.threads, "Worker threads")->capture_default_str();
  b->add_option("--team-work-size", be.cfg.team_work_size, "Rows per scheduling batch")->capture_default_str();
  b->add_option("--proxy-profile", be.proxy_profile, "Cache config JSON, or 'default'");
  b->add_option("--profile-out", be.profile_out, "Profile CSV to append the proxy row to");
  b->add_option("--out", be.out, "Result JSON");
  b->add_option("operands", be.operands, "A.mtx [B.mtx]")->required();

  TrainArgs tr;
  auto* t = app.add_subcommand("train", "Fit a regression tree on joined metrics and profiles");
  t->add_option("--metrics", tr.metrics, "Metrics CSV")->required();
  t->add_option("--profiles", tr.profiles, "Profile CSV")->required();
  t->add_option("--target", tr.target, "gflops|bandwidth|throughput")->capture_default_str();
  t->add_option("--platform", tr.platform, "Platform label to select")->required();
  t->add_option("--kernel", tr.kernel, "Kernel id to select")->required();
  t->add_option("--kfold", tr.kfold, "Folds for cross-validation (0 disables)")->capture_default_str();
  t->add_option("--seed", tr.seed, "Fold shuffle seed")->capture_default_str();
  t->add_option("--max-depth", tr.hp.max_depth, "Tree depth limit")->capture_default_str();
  t->add_option("--min-samples-leaf", tr.hp.min_samples_leaf, "Minimum rows per leaf")->capture_default_str();
  t->add_option("--out", tr.out, "Model JSON (stdout if omitted)");
  t->add_option("--report-out", tr.report_out, "Validation report JSON");

  ReportArgs re;
  auto* r = app.add_subcommand("report", "Compare feature importances across models");
  r->add_option("models", re.models, "Model JSON files")->required();
  r->add_option("--min-importance", re.min_importance, "Importance threshold")->capture_default_str();
  r->add_option("--out", re.out, "Report JSON");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : kUsageError;
  }

  try {
    if (g->parsed()) return cmd_generate(gen, recorded, out, err);
    if (z->parsed()) return cmd_analyze(an, recorded, out, err);
    if (b->parsed()) return cmd_bench(be, recorded, out, err);
    if (t->parsed()) return cmd_train(tr, recorded, out, err);
    if (r->parsed()) return cmd_report(re, recorded, out, err);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return kUsageError;
  } catch (const std::exception& e) {
    err << json{{"spchar_schema", "spchar.errors.v1"}, {"errors", json::array({{{"item", "*"}, {"error", e.what()}}})}}
               .dump()
        << '\n';
    return kItemFailure;
  }
  return kUsageError;
}

}  // namespace spchar::cli
