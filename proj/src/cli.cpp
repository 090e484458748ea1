#include "zoomout/cli.hpp"

#include <fstream>
#include <numeric>
#include <functional>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "zoomout/error.hpp"
#include "zoomout/fmap.hpp"
#include "zoomout/kernels.hpp"
#include "zoomout/mesh.hpp"
#include "zoomout/metrics.hpp"
#include "zoomout/refine.hpp"
#include "zoomout/spectral.hpp"
#include "zoomout/testbed.hpp"

namespace zoomout {

namespace {

using nlohmann::json;

void write_json(const json& j, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write JSON file: " + path);
  out << j.dump(2) << '\n';
  if (!out) throw IoError("failed writing JSON file: " + path);
}

json with_header(json body, const std::string& command, json config) {
  body["command"] = command;
  body["config"] = std::move(config);
  body["version"] = kVersion;
  return body;
}

void strip_timing(json& j) {
  if (j.is_object()) {
    for (auto it = j.begin(); it != j.end(); ++it) {
      if (it.key() == "millis" || it.key().ends_with("_millis")) {
        it.value() = 0.0;
      } else {
        strip_timing(it.value());
      }
    }
  } else if (j.is_array()) {
    for (auto& v : j) strip_timing(v);
  }
}

struct Shape {
  TriangleMesh mesh;
  LaplacianPair lap;
  SpectralBasis basis;
};

Shape load_shape(const std::string& mesh_path, const std::string& basis_path, int k, std::ostream& err) {
  std::vector<std::string> warnings;
  Shape s;
  s.mesh = load_mesh(mesh_path, &warnings);
  for (const auto& w : warnings) err << "warning: " << w << '\n';
  s.lap = cotan_laplacian(s.mesh);
  if (!basis_path.empty()) {
    s.basis = load_basis(basis_path, s.lap.mass);
    if (s.basis.size() < k) {
      throw IoError(basis_path + ": basis has " + std::to_string(s.basis.size()) + " functions, need " +
                    std::to_string(k));
    }
  } else if (k > 0) {
    s.basis = spectral_basis(s.lap, k);
  }
  return s;
}

// Options shared by every command that loads a source/target pair.
struct PairOptions {
  std::string source, target, basis_source, basis_target;

  void add(CLI::App* app) {
    app->add_option("--source", source, "source mesh M (.off/.obj)")->required();
    app->add_option("--target", target, "target mesh N (.off/.obj)")->required();
    app->add_option("--basis-source", basis_source, "cached basis file for M");
    app->add_option("--basis-target", basis_target, "cached basis file for N");
  }
  json to_json() const {
    return {{"source", source}, {"target", target}, {"basis_source", basis_source}, {"basis_target", basis_target}};
  }
};

struct Context {
  std::ostream& out;
  std::ostream& err;
  bool timing = false;

  void write(json j, const std::string& path) const {
    if (path.empty()) return;
    if (!timing) strip_timing(j);
    write_json(j, path);
  }
};

// ---- basis -------------------------------------------------------------------

struct BasisCommand {
  std::string mesh, out;
  int k = 120;

  void add(CLI::App& root, std::function<void()>& run, const Context& ctx) {
    auto* app = root.add_subcommand("basis", "compute and cache the Laplacian eigenbasis of a mesh");
    app->add_option("--mesh", mesh, "input mesh")->required();
    app->add_option("--k", k, "number of eigenpairs")->check(CLI::PositiveNumber);
    app->add_option("--out", out, "basis file to write")->required();
    app->callback([this, &run, &ctx] { run = [this, &ctx] { exec(ctx); }; });
  }
  void exec(const Context& ctx) {
    const Shape s = load_shape(mesh, "", k, ctx.err);
    save_basis(s.basis, out);
    ctx.out << "wrote " << s.basis.size() << " eigenpairs for " << s.mesh.num_vertices() << " vertices to " << out
            << '\n';
  }
};

// ---- convert -----------------------------------------------------------------

struct ConvertCommand {
  PairOptions pair;
  std::string p2p, fmap, out_p2p, out_fmap;
  int k_source = 0, k_target = 0;
  std::string nn = "exact";

  void add(CLI::App& root, std::function<void()>& run, const Context& ctx) {
    auto* app = root.add_subcommand("convert", "convert between point maps (M->N) and functional maps (N->M)");
    pair.add(app);
    auto* p = app->add_option("--p2p", p2p, "input point map");
    auto* f = app->add_option("--fmap", fmap, "input functional map");
    p->excludes(f);
    app->add_option("--k-source", k_source, "k_M of the output functional map");
    app->add_option("--k-target", k_target, "k_N of the output functional map");
    app->add_option("--out-p2p", out_p2p, "write the point map here");
    app->add_option("--out-fmap", out_fmap, "write the functional map here");
    app->add_option("--nn", nn, "nearest-neighbor mode")->check(CLI::IsMember({"exact", "approx"}));
    app->callback([this, &run, &ctx] { run = [this, &ctx] { exec(ctx); }; });
  }
  void exec(const Context& ctx) {
    if (p2p.empty() == fmap.empty()) throw IoError("convert: give exactly one of --p2p or --fmap");
    if (!p2p.empty()) {
      if (out_fmap.empty()) throw IoError("convert: --p2p needs --out-fmap");
      if (k_source < 1 || k_target < 1) throw IoError("convert: --k-source and --k-target are required");
      const Shape M = load_shape(pair.source, pair.basis_source, k_source, ctx.err);
      const Shape N = load_shape(pair.target, pair.basis_target, k_target, ctx.err);
      save_fmap(pointmap_to_fmap(load_pointmap(p2p), M.basis, N.basis, k_source, k_target), out_fmap);
      if (!out_p2p.empty()) throw IoError("convert: --out-p2p is not valid with --p2p");
    } else {
      if (out_p2p.empty()) throw IoError("convert: --fmap needs --out-p2p");
      const FunctionalMap C = load_fmap(fmap);
      const Shape M = load_shape(pair.source, pair.basis_source, C.rows(), ctx.err);
      const Shape N = load_shape(pair.target, pair.basis_target, C.cols(), ctx.err);
      save_pointmap(fmap_to_pointmap(C, M.basis, N.basis, nn_mode_from_string(nn)), out_p2p);
    }
  }
};

// ---- zoomout -----------------------------------------------------------------

struct ZoomoutCommand {
  PairOptions pair;
  std::string init_fmap, init_p2p, out_p2p, out_fmap, trace, report;
  RefineConfig cfg;
  int k0 = 20, kmax = 120;
  std::optional<int> k0_target, kmax_target;
  std::string nn = "exact";

  void add(CLI::App& root, std::function<void()>& run, const Context& ctx) {
    auto* app = root.add_subcommand("zoomout", "refine a map by iterative spectral upsampling");
    pair.add(app);
    auto* f = app->add_option("--init-fmap", init_fmap, "initial functional map");
    auto* p = app->add_option("--init-p2p", init_p2p, "initial point map M->N");
    f->excludes(p);
    app->add_option("--k0", k0, "initial size")->check(CLI::PositiveNumber);
    app->add_option("--kmax", kmax, "final size")->check(CLI::PositiveNumber);
    app->add_option("--k0-target", k0_target, "initial k_N when different from --k0");
    app->add_option("--kmax-target", kmax_target, "final k_N when different from --kmax");
    app->add_option("--step", cfg.step, "size increment per iteration")->check(CLI::PositiveNumber);
    app->add_flag("--rectangular", cfg.rectangular, "grow k_N with the rank-based rule");
    app->add_option("--rank-probe", cfg.rank_estimate_K, "eigenvalue count for the rank estimate");
    app->add_option("--samples", cfg.sample_count, "farthest-point samples on the source (0 = dense)");
    app->add_flag("--sample-target", cfg.sample_target, "restrict target candidates to farthest-point samples too");
    app->add_option("--nn", nn, "nearest-neighbor mode")->check(CLI::IsMember({"exact", "approx"}));
    app->add_option("--nn-width", cfg.nn_width, "leaves visited by approximate search");
    app->add_option("--probe", cfg.probe_size, "map size for trace energies (0 = min kmax)");
    app->add_option("--seed", cfg.seed, "random seed");
    app->add_option("--out-p2p", out_p2p, "final point map M->N");
    app->add_option("--out-fmap", out_fmap, "final functional map");
    app->add_option("--trace", trace, "per-iteration trace JSON");
    app->add_option("--report", report, "run summary JSON");
    app->callback([this, &run, &ctx] { run = [this, &ctx] { exec(ctx); }; });
  }
  void exec(const Context& ctx) {
    if (init_fmap.empty() == init_p2p.empty()) throw IoError("zoomout: give exactly one of --init-fmap or --init-p2p");
    cfg.k0_M = k0;
    cfg.kmax_M = kmax;
    cfg.k0_N = k0_target.value_or(k0);
    cfg.kmax_N = kmax_target.value_or(kmax);
    cfg.nn_mode = nn_mode_from_string(nn);
    cfg.validate();
    const int need = std::max(cfg.kmax_M, cfg.resolved_probe());
    const Shape M = load_shape(pair.source, pair.basis_source, std::max(need, cfg.kmax_M), ctx.err);
    const Shape N = load_shape(pair.target, pair.basis_target, std::max(need, cfg.kmax_N), ctx.err);

    MapInit init;
    if (!init_fmap.empty()) {
      init = load_fmap(init_fmap);
    } else {
      PointMap pm = load_pointmap(init_p2p);
      if (static_cast<int>(pm.size()) != M.mesh.num_vertices()) {
        throw IoError(init_p2p + ": point map has " + std::to_string(pm.size()) + " lines, source has " +
                      std::to_string(M.mesh.num_vertices()) + " vertices");
      }
      validate(pm, N.mesh.num_vertices());
      init = std::move(pm);
    }
    const RefineResult res = zoomout(init, M.mesh, M.basis, N.mesh, N.basis, cfg);
    if (!out_p2p.empty()) save_pointmap(res.map, out_p2p);
    if (!out_fmap.empty()) save_fmap(res.fmap, out_fmap);
    ctx.write(trace_to_json(res.trace), trace);

    json config = cfg;
    config.update(pair.to_json());
    config["init_fmap"] = init_fmap;
    config["init_p2p"] = init_p2p;
    const auto& last = res.trace.records.back();
    ctx.write(with_header({{"levels", res.trace.records.size()},
                           {"final_kM", res.fmap.rows()},
                           {"final_kN", res.fmap.cols()},
                           {"final_energy", last.energy}},
                          "zoomout", config),
              report);
    ctx.out << "zoomout: " << res.trace.records.size() << " levels, final map " << res.fmap.rows() << "x"
            << res.fmap.cols() << ", energy " << last.energy << '\n';
  }
};

// ---- icp ---------------------------------------------------------------------

struct IcpCommand {
  PairOptions pair;
  std::string init_fmap, init_p2p, out_p2p, out_fmap, trace;
  int k = 120, iters = 15, probe = 0;
  std::string nn = "exact";

  void add(CLI::App& root, std::function<void()>& run, const Context& ctx) {
    auto* app = root.add_subcommand("icp", "fixed-size spectral ICP refinement (baseline)");
    pair.add(app);
    auto* f = app->add_option("--init-fmap", init_fmap, "initial square functional map");
    auto* p = app->add_option("--init-p2p", init_p2p, "initial point map M->N (converted at --k)");
    f->excludes(p);
    app->add_option("--k", k, "map size when starting from a point map")->check(CLI::PositiveNumber);
    app->add_option("--iters", iters, "iterations")->check(CLI::NonNegativeNumber);
    app->add_option("--probe", probe, "map size for trace energies (0 = k)");
    app->add_option("--nn", nn, "nearest-neighbor mode")->check(CLI::IsMember({"exact", "approx"}));
    app->add_option("--out-p2p", out_p2p, "final point map M->N");
    app->add_option("--out-fmap", out_fmap, "final functional map");
    app->add_option("--trace", trace, "per-iteration trace JSON");
    app->callback([this, &run, &ctx] { run = [this, &ctx] { exec(ctx); }; });
  }
  void exec(const Context& ctx) {
    if (init_fmap.empty() == init_p2p.empty()) throw IoError("icp: give exactly one of --init-fmap or --init-p2p");
    std::optional<FunctionalMap> C;
    if (!init_fmap.empty()) {
      C = load_fmap(init_fmap);
      k = C->rows();
    }
    const int need = std::max(k, probe);
    const Shape M = load_shape(pair.source, pair.basis_source, need, ctx.err);
    const Shape N = load_shape(pair.target, pair.basis_target, need, ctx.err);
    if (!C) C = pointmap_to_fmap(load_pointmap(init_p2p), M.basis, N.basis, k, k);
    const RefineResult res = icp_refine(*C, M.basis, N.basis, iters, nn_mode_from_string(nn), probe);
    if (!out_p2p.empty()) save_pointmap(res.map, out_p2p);
    if (!out_fmap.empty()) save_fmap(res.fmap, out_fmap);
    ctx.write(trace_to_json(res.trace), trace);
    ctx.out << "icp: " << iters << " iterations at " << k << "x" << k << '\n';
  }
};

// ---- eval --------------------------------------------------------------------

struct EvalCommand {
  std::string source, target, map, map_reverse, gt, report;
  std::optional<double> normalizer;
  bool area_uncoverage = false;

  void add(CLI::App& root, std::function<void()>& run, const Context& ctx) {
    auto* app = root.add_subcommand("eval", "measure map quality");
    app->add_option("--source", source, "source mesh M")->required();
    app->add_option("--target", target, "target mesh N")->required();
    app->add_option("--map", map, "point map M->N")->required();
    app->add_option("--map-reverse", map_reverse, "point map N->M (enables bijectivity)");
    app->add_option("--gt", gt, "ground-truth point map M->N (enables accuracy)");
    app->add_option("--normalizer", normalizer, "error normalizer (default sqrt(area(N)))");
    app->add_flag("--area-uncoverage", area_uncoverage, "area-weighted uncoverage instead of vertex count");
    app->add_option("--report", report, "report JSON");
    app->callback([this, &run, &ctx] { run = [this, &ctx] { exec(ctx); }; });
  }
  void exec(const Context& ctx) {
    const Shape M = load_shape(source, "", 0, ctx.err);
    const Shape N = load_shape(target, "", 0, ctx.err);
    const PointMap T = load_pointmap(map);
    if (static_cast<int>(T.size()) != M.mesh.num_vertices()) {
      throw IoError(map + ": point map has " + std::to_string(T.size()) + " lines, source has " +
                    std::to_string(M.mesh.num_vertices()) + " vertices");
    }
    validate(T, N.mesh.num_vertices());
    const double norm_N = normalizer.value_or(area_normalizer(N.mesh));
    const double norm_M = normalizer.value_or(area_normalizer(M.mesh));
    const EdgeSet edges_M = edge_set(M.mesh);
    const EdgeSet edges_N = edge_set(N.mesh);

    // Geodesics on N from every mapped endpoint (and gt targets when present).
    std::vector<int> sources_N = T.targets;
    std::optional<PointMap> G;
    if (!gt.empty()) {
      G = load_pointmap(gt);
      validate(*G, N.mesh.num_vertices());
      sources_N.insert(sources_N.end(), G->targets.begin(), G->targets.end());
    }
    const GeodesicTable geo_N = dijkstra_geodesics(N.mesh, edges_N, sources_N);

    MapReport r;
    if (G) r.accuracy_mean = accuracy(T, *G, geo_N, norm_N);
    r.uncoverage_percent = area_uncoverage ? uncoverage_area(T, N.lap.mass) : uncoverage(T, N.mesh);
    r.edge_distortion_mean = edge_distortion(T, edges_M, geo_N);
    r.dirichlet = dirichlet_energy(T, M.lap, N.mesh);
    if (!map_reverse.empty()) {
      const PointMap R = load_pointmap(map_reverse);
      if (static_cast<int>(R.size()) != N.mesh.num_vertices()) throw IoError(map_reverse + ": wrong length");
      validate(R, M.mesh.num_vertices());
      std::vector<int> sources_M(M.mesh.num_vertices());
      std::iota(sources_M.begin(), sources_M.end(), 0);
      const GeodesicTable geo_M = dijkstra_geodesics(M.mesh, edges_M, sources_M);
      r.bijectivity_mean = bijectivity(T, R, geo_M, norm_M);
    }

    json body = to_json(r);
    json config = {{"source", source}, {"target", target}, {"map", map}, {"map_reverse", map_reverse},
                   {"gt", gt},         {"normalizer", norm_N}, {"area_uncoverage", area_uncoverage}};
    ctx.write(with_header(body, "eval", config), report);
    ctx.out << to_json(r).dump(2) << '\n';
  }
};

// ---- synth -------------------------------------------------------------------

struct SynthCommand {
  std::string kind = "perm", out_prefix;
  int n = 642;
  std::uint64_t seed = 0;
  double bend = 0.3;

  void add(CLI::App& root, std::function<void()>& run, const Context& ctx) {
    auto* app = root.add_subcommand("synth", "generate a synthetic shape pair with ground truth");
    app->add_option("--kind", kind, "pair kind")->check(CLI::IsMember({"perm", "bend"}));
    app->add_option("--n", n, "approximate vertex count")->check(CLI::Range(50, 200000));
    app->add_option("--seed", seed, "random seed");
    app->add_option("--bend", bend, "bend amount (kind=bend)")->check(CLI::NonNegativeNumber);
    app->add_option("--out-prefix", out_prefix, "output prefix")->required();
    app->callback([this, &run, &ctx] { run = [this, &ctx] { exec(ctx); }; });
  }
  void exec(const Context& ctx) {
    const TriangleMesh blob = make_asymmetric_blob(n, seed);
    const SyntheticPair pair =
        kind == "perm" ? make_permutation_pair(blob, derive_seed(seed, 1)) : make_bent_pair(blob, bend, seed);
    save_mesh(pair.mesh_M, out_prefix + "_M.off");
    save_mesh(pair.mesh_N, out_prefix + "_N.off");
    save_pointmap(pair.gt_map, out_prefix + "_gt.txt");
    save_pointmap(pair.gt_map_rev, out_prefix + "_gt_rev.txt");
    ctx.out << "wrote " << to_string(pair.kind) << " pair with " << blob.num_vertices() << " vertices to "
            << out_prefix << "_{M,N}.off\n";
  }
};

// ---- experiment --------------------------------------------------------------

struct ExperimentCommand {
  std::string name, kind = "perm", report;
  bool sample_target = false;
  int n = 642, trials = 10, k0 = 4, kmax = 50, step = 1, samples = 300, icp_iters = 15;
  std::uint64_t seed = 0;
  double sigma = 0.0, bend = 0.3;
  std::string nn = "exact";

  void add(CLI::App& root, std::function<void()>& run, const Context& ctx) {
    auto* app = root.add_subcommand("experiment", "run a testbed experiment on a synthetic pair");
    app->add_option("--name", name, "experiment")
        ->required()
        ->check(CLI::IsMember({"stability", "energy-trace", "subsample"}));
    app->add_option("--kind", kind, "pair kind")->check(CLI::IsMember({"perm", "bend"}));
    app->add_option("--n", n, "approximate vertex count")->check(CLI::Range(50, 200000));
    app->add_option("--bend", bend, "bend amount (kind=bend)")->check(CLI::NonNegativeNumber);
    app->add_option("--seed", seed, "random seed");
    app->add_option("--sigma", sigma, "noise on the initial functional map")->check(CLI::NonNegativeNumber);
    app->add_option("--trials", trials, "stability trials")->check(CLI::PositiveNumber);
    app->add_option("--k0", k0, "initial size")->check(CLI::PositiveNumber);
    app->add_option("--kmax", kmax, "final size")->check(CLI::PositiveNumber);
    app->add_option("--step", step, "size increment")->check(CLI::PositiveNumber);
    app->add_option("--samples", samples, "samples (subsample experiment)")->check(CLI::PositiveNumber);
    app->add_flag("--sample-target", sample_target, "sample the target too (subsample experiment)");
    app->add_option("--icp-iters", icp_iters, "ICP iterations (energy-trace)")->check(CLI::NonNegativeNumber);
    app->add_option("--nn", nn, "nearest-neighbor mode")->check(CLI::IsMember({"exact", "approx"}));
    app->add_option("--report", report, "report JSON")->required();
    app->callback([this, &run, &ctx] { run = [this, &ctx] { exec(ctx); }; });
  }
  void exec(const Context& ctx) {
    RefineConfig cfg = RefineConfig::square(k0, kmax, step);
    cfg.nn_mode = nn_mode_from_string(nn);
    cfg.seed = seed;
    cfg.sample_target = sample_target;
    cfg.validate();
    const TriangleMesh blob = make_asymmetric_blob(n, seed);
    SyntheticPair pair =
        kind == "perm" ? make_permutation_pair(blob, derive_seed(seed, 1)) : make_bent_pair(blob, bend, seed);
    const PreparedPair pp = prepare_pair(std::move(pair), kmax);

    ExperimentResult res;
    if (name == "stability") {
      res = run_stability_experiment(pp, {sigma, trials, seed}, cfg);
    } else if (name == "energy-trace") {
      res = run_energy_trace_experiment(pp, cfg, {icp_iters, sigma, seed});
    } else {
      res = run_subsample_experiment(pp, cfg, samples, sigma, seed);
    }
    json config = {{"name", name}, {"kind", kind},   {"n", blob.num_vertices()}, {"bend", bend},
                   {"seed", seed}, {"sigma", sigma}, {"trials", trials},         {"samples", samples},
                   {"icp_iters", icp_iters}, {"refine", cfg}};
    ctx.write(with_header(res.to_json(), "experiment", config), report);
    json summary = res.summary;
    if (!ctx.timing) strip_timing(summary);
    ctx.out << name << ": " << summary.dump() << '\n';
  }
};

}  // namespace

int dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  Context ctx{out, err};
  CLI::App app{"Iterative spectral upsampling for shape correspondence", "zoomout"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_version_flag("--version", std::string("zoomout ") + kVersion);
  int threads = 0;
  app.add_option("--threads", threads, "OpenMP threads (0 = default)")->check(CLI::NonNegativeNumber);
  app.add_flag("--timing", ctx.timing, "record wall-clock times in JSON output (otherwise 0, so reruns are byte-identical)");

  std::function<void()> run;
  BasisCommand basis;
  ConvertCommand convert;
  ZoomoutCommand zoom;
  IcpCommand icp;
  EvalCommand eval;
  SynthCommand synth;
  ExperimentCommand experiment;
  basis.add(app, run, ctx);
  convert.add(app, run, ctx);
  zoom.add(app, run, ctx);
  icp.add(app, run, ctx);
  eval.add(app, run, ctx);
  synth.add(app, run, ctx);
  experiment.add(app, run, ctx);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForVersion&) {
    out << "zoomout " << kVersion << '\n';
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }

  try {
    kernels::set_num_threads(threads);
    if (run) run();
    return 0;
  } catch (const IoError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace zoomout
