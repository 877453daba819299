// Reproducible pipelines: a serializable config drives generate -> shell ->
// cusp -> certify -> unwrap -> audit -> report; every report embeds the
// config hash and the constant profile, and identical configs produce
// byte-identical bundles.

#ifndef DRILL_PIPELINE_HPP_
#define DRILL_PIPELINE_HPP_

#include <filesystem>
#include <fstream>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "drill/boundary.hpp"
#include "drill/drilling.hpp"
#include "drill/graph_io.hpp"
#include "drill/spaces.hpp"

namespace drill {

struct PipelineConfig {
  json raw;
  std::string name = "pipeline";
  std::uint64_t seed = 1;
  unsigned workers = 1;
  std::string profile = "surrogate";
  std::string space_kind = "tiling:7,3";
  int radius = 8;
  std::string axis_word = "12";
  int axis_window = 3;
  int shell_k = 2;
  int scale_s = 3;
  int scale_d = 8;
  int cusp_depth = 2;
  int drill_window = 2;
  int drill_depth = 1;
  int sigma = 1;
  std::vector<std::string> stages;

  std::string canonical() const { return raw.dump(); }
  std::string hash() const { return fnv1a64_hex(canonical()); }
};

inline Rat rat_from_json(const json& j) {
  if (j.is_number_integer()) return Rat(j.get<long long>());
  if (j.is_string()) {
    std::string s = j.get<std::string>();
    auto slash = s.find('/');
    if (slash == std::string::npos) return Rat(Int(s));
    return Rat(Int(s.substr(0, slash)), Int(s.substr(slash + 1)));
  }
  throw std::invalid_argument("expected an integer or \"p/q\" string");
}

inline PipelineConfig parse_pipeline_config(const json& j) {
  PipelineConfig cfg;
  cfg.raw = j;
  auto require = [&](const char* key) {
    if (!j.contains(key)) throw std::invalid_argument(std::string("config: missing field '") + key + "'");
  };
  require("space");
  require("stages");
  cfg.name = j.value("name", cfg.name);
  cfg.seed = j.value("seed", cfg.seed);
  cfg.workers = j.value("workers", cfg.workers);
  cfg.profile = j.value("profile", cfg.profile);
  if (cfg.profile != "exact" && cfg.profile != "surrogate")
    throw std::invalid_argument("config: profile must be 'exact' or 'surrogate'");
  const auto& space = j.at("space");
  if (!space.contains("kind")) throw std::invalid_argument("config: missing field 'space.kind'");
  cfg.space_kind = space.at("kind").get<std::string>();
  SpaceGenerator::parse(cfg.space_kind);  // validates the kind early
  cfg.radius = space.value("radius", cfg.radius);
  if (j.contains("axis")) {
    cfg.axis_word = j.at("axis").value("word", cfg.axis_word);
    cfg.axis_window = j.at("axis").value("window", cfg.axis_window);
  }
  if (j.contains("shell")) {
    cfg.shell_k = j.at("shell").value("K", cfg.shell_k);
    cfg.scale_s = j.at("shell").value("s", cfg.scale_s);
  }
  cfg.scale_d = j.value("scale_d", cfg.scale_d);
  if (j.contains("cusp")) cfg.cusp_depth = j.at("cusp").value("depth", cfg.cusp_depth);
  if (j.contains("drill")) {
    cfg.drill_window = j.at("drill").value("window", cfg.drill_window);
    cfg.drill_depth = j.at("drill").value("depth", cfg.drill_depth);
    cfg.sigma = j.at("drill").value("sigma", cfg.sigma);
  }
  for (const auto& stage : j.at("stages")) cfg.stages.push_back(stage.get<std::string>());
  static const std::set<std::string> known{
      "gen-space", "measure-delta", "shell", "cusp", "certify",
      "unwrap",    "audit-balls",   "audit-models", "boundary-report", "constants", "vtc"};
  for (const auto& stage : cfg.stages)
    if (!known.count(stage)) throw std::invalid_argument("config: unknown stage '" + stage + "'");
  return cfg;
}

struct PipelineResult {
  Verdict verdict = Verdict::Pass;
  std::vector<std::pair<std::string, json>> reports;  // stage name -> report

  void add(const std::string& stage, json report) {
    reports.emplace_back(stage, std::move(report));
  }
};

// Executes the declared stages in order; failures halt with the stage name.
inline PipelineResult run_pipeline(const PipelineConfig& cfg) {
  PipelineResult result;
  auto stamp = [&](json j) {
    j["config_hash"] = cfg.hash();
    j["profile"] = cfg.profile;
    j["seed"] = cfg.seed;
    return j;
  };
  auto note_verdict = [&](const Report& rep) {
    if (rep.verdict == Verdict::Fail) result.verdict = Verdict::Fail;
    else if (rep.verdict == Verdict::Inconclusive && result.verdict == Verdict::Pass)
      result.verdict = Verdict::Inconclusive;
  };

  worker_count() = std::max(1u, cfg.workers);
  SpaceGenerator gen = SpaceGenerator::parse(cfg.space_kind);

  std::optional<Axis> axis;
  std::optional<PointedBall> ball;
  std::optional<CuspedSpace> cusped;
  std::optional<UnwrappedSpace> unwrapped;
  auto need_axis = [&]() -> Axis& {
    if (!axis) axis = axis_in(gen, cfg.axis_word, cfg.axis_window, cfg.radius);
    return *axis;
  };
  auto need_graph = [&]() -> const Graph& {
    if (axis) return axis->ball.graph;
    if (!ball) ball = generate_ball(gen, cfg.radius);
    return ball->graph;
  };

  for (const auto& stage : cfg.stages) {
    try {
      if (stage == "gen-space") {
        const Graph& g = need_graph();
        json j;
        j["graph"] = graph_to_json(g);
        j["kind"] = cfg.space_kind;
        j["radius"] = cfg.radius;
        result.add(stage, stamp(std::move(j)));
      } else if (stage == "measure-delta") {
        const Graph& g = need_graph();
        DeltaEstimate est;
        if (g.num_vertices() <= 120) {
          est = four_point_delta(g, DeltaPolicy::exact_policy());
        } else {
          est = four_point_delta(g, DeltaPolicy::sampled(50000, cfg.seed));
        }
        json j;
        j["estimate"] = est.to_json();
        j["central_ball_delta"] =
            rat_double(measured_delta_ball(g, axis ? axis->ball.center : ball->center, 4));
        result.add(stage, stamp(std::move(j)));
      } else if (stage == "shell") {
        Axis& ax = need_axis();
        auto cs = completed_shell(ax.ball.graph, ax.vertex_set(), cfg.shell_k, cfg.scale_s);
        Report rep = shell_connectivity_audit(cs);
        note_verdict(rep);
        json j = rep.to_json();
        j["axis"] = ax.trace;
        j["lambda0"] = rat_double(ax.lambda0);
        result.add(stage, stamp(std::move(j)));
      } else if (stage == "cusp") {
        Axis& ax = need_axis();
        cusped = cusp(ax.ball.graph, ax.vertex_set(), cfg.shell_k, cfg.scale_s, cfg.cusp_depth);
        json j;
        j["vertices"] = cusped->graph.num_vertices();
        j["edges"] = cusped->graph.num_edges();
        j["shell_vertices"] = cusped->n_cs();
        result.add(stage, stamp(std::move(j)));
      } else if (stage == "certify") {
        Axis& ax = need_axis();
        if (!cusped) cusped = cusp(ax.ball.graph, ax.vertex_set(), cfg.shell_k, cfg.scale_s, cfg.cusp_depth);
        auto cert = certify_cusp(*cusped, ax.ball.graph, ax.vertex_set());
        if (!cert.certificate.ok) result.verdict = Verdict::Fail;
        json j;
        j["certificate"] = cert.certificate.to_json();
        j["h_used"] = rat_double(cert.h_used);
        result.add(stage, stamp(std::move(j)));
      } else if (stage == "unwrap") {
        Axis& ax = need_axis();
        unwrapped = unwrap_and_glue(ax.ball.graph, ax.vertex_set(), cfg.shell_k, cfg.scale_s,
                                    cfg.scale_d, cfg.drill_window, cfg.drill_depth);
        json j;
        j["vertices"] = unwrapped->graph.num_vertices();
        j["classification"] = unwrapped->ctc_classification.to_json();
        j["deck_displacement"] = measured_deck_displacement(*unwrapped);
        result.add(stage, stamp(std::move(j)));
      } else if (stage == "audit-balls") {
        if (!unwrapped) throw std::domain_error("audit-balls requires the unwrap stage");
        Report rep = ball_isometry_audit(*unwrapped, cfg.sigma);
        note_verdict(rep);
        result.add(stage, stamp(rep.to_json()));
      } else if (stage == "audit-models") {
        if (!unwrapped) throw std::domain_error("audit-models requires the unwrap stage");
        Axis& ax = need_axis();
        VertexSet horo_part;
        for (Vertex v = 0; v < unwrapped->base.graph.num_vertices(); ++v)
          if (unwrapped->base.cs_id_of(v) != -1) horo_part.push_back(v);
        normalize_set(horo_part);
        auto [horo_graph, horo_ids] = induced_subgraph(unwrapped->base.graph, horo_part);
        std::vector<LocalModel> models{{"cusp", &unwrapped->base.graph},
                                       {"ambient", &ax.ball.graph},
                                       {"horoball", &horo_graph}};
        Report rep = local_model_audit(*unwrapped, cfg.sigma, models);
        note_verdict(rep);
        result.add(stage, stamp(rep.to_json()));
      } else if (stage == "boundary-report") {
        const Graph& g = need_graph();
        Vertex centre = axis ? axis->ball.center : ball->center;
        DistanceField d(g, centre);
        VertexSet sphere;
        for (Vertex v = 0; v < g.num_vertices(); ++v)
          if (d.reachable(v) && d.at(v) == cfg.radius) sphere.push_back(v);
        std::mt19937_64 rng(cfg.seed);
        std::shuffle(sphere.begin(), sphere.end(), rng);
        sphere.resize(std::min<std::size_t>(sphere.size(), 64));
        normalize_set(sphere);
        json j;
        if (sphere.size() >= 2) {
          auto sample = boundary_sample(g, centre, sphere, Rat(7, 10));
          auto chains = linear_connectedness_estimate(sample, 50);
          j["chains"] = chains.to_json();
          Report sph = spherical_connectivity_check(g, centre, std::min(cfg.radius, 4), 3, 1);
          j["spherical"] = sph.to_json();
        } else {
          j["chains"] = nullptr;
        }
        result.add(stage, stamp(std::move(j)));
      } else if (stage == "constants") {
        LedgerInputs in;
        in.delta0 = cfg.profile == "exact" ? Rat(1) : Rat(1, 2000);
        in.lambda0 = 1;
        in.l0 = 2;
        in.phi = [](const Rat& x) { return x; };
        in.exact_profile = cfg.profile == "exact";
        in.delta1_override = in.delta0;
        in.sigma_zero_input = 10;
        auto led = constants_ledger(in);
        result.add(stage, stamp(led.to_json()));
      } else if (stage == "vtc") {
        if (!unwrapped) throw std::domain_error("vtc requires the unwrap stage");
        auto probe = very_translating_check(*unwrapped, 0, {1, -1}, {});
        int mu = probe.details["min_displacement"].is_null()
                     ? -1
                     : probe.details["min_displacement"].get<int>();
        Report rep = very_translating_check(*unwrapped, mu > 0 ? Rat(mu, 10000) : Rat(0), {1, -1}, {});
        note_verdict(rep);
        result.add(stage, stamp(rep.to_json()));
      }
    } catch (const std::exception& e) {
      json j;
      j["error"] = e.what();
      result.add(stage, stamp(std::move(j)));
      result.verdict = Verdict::Fail;
      throw std::runtime_error("pipeline stage '" + stage + "' failed: " + e.what());
    }
  }
  return result;
}

// Writes one JSON file per stage plus a manifest; byte-identical across runs
// of the same config.
inline json write_bundle(const PipelineConfig& cfg, const PipelineResult& result,
                         const std::filesystem::path& outdir) {
  std::filesystem::create_directories(outdir);
  json manifest;
  manifest["name"] = cfg.name;
  manifest["config_hash"] = cfg.hash();
  manifest["profile"] = cfg.profile;
  manifest["verdict"] = to_string(result.verdict);
  auto files = json::array();
  int index = 0;
  for (const auto& [stage, report] : result.reports) {
    std::string fname = std::to_string(index++) + "-" + stage + ".json";
    std::ofstream out(outdir / fname, std::ios::binary);
    out << report.dump(2) << "\n";
    files.push_back(fname);
  }
  manifest["reports"] = files;
  std::ofstream out(outdir / "manifest.json", std::ios::binary);
  out << manifest.dump(2) << "\n";
  return manifest;
}

}  // namespace drill

#endif  // DRILL_PIPELINE_HPP_
