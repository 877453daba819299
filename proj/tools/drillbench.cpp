// drillbench: command-line front end for the drilling workbench.
// Subcommands mirror the pipeline stages; all reports are JSON with
// pass/fail/inconclusive verdicts and exit codes 0/1/2.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>

#include <CLI11.hpp>

#include "drill/pipeline.hpp"

using namespace drill;

namespace {

json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  json j;
  in >> j;
  return j;
}

void write_json(const std::string& path, const json& j) {
  if (path.empty() || path == "-") {
    std::cout << j.dump(2) << "\n";
    return;
  }
  std::ofstream out(path, std::ios::binary);
  out << j.dump(2) << "\n";
}

Graph load_graph(const std::string& path) { return graph_from_json(load_json(path)); }

VertexSet json_vertex_set(const json& j) {
  VertexSet out;
  for (const auto& v : j) out.push_back(v.get<int>());
  normalize_set(out);
  return out;
}

std::function<Rat(const Rat&)> parse_phi(const std::string& path) {
  if (path.empty()) return [](const Rat& x) { return x; };
  json j = load_json(path);
  std::string kind = j.value("kind", "identity");
  if (kind == "identity") return [](const Rat& x) { return x; };
  if (kind == "affine") {
    Rat scale = rat_from_json(j.at("scale"));
    Rat offset = rat_from_json(j.at("offset"));
    return [scale, offset](const Rat& x) { return scale * x + offset; };
  }
  if (kind == "table") {
    std::map<Rat, Rat> table;
    for (auto& [k, v] : j.at("values").items()) table[Rat(Int(k))] = rat_from_json(v);
    return [table](const Rat& x) {
      auto it = table.lower_bound(x);  // ceiling semantics on the argument
      if (it == table.end()) throw std::domain_error("phi table does not cover the argument");
      return it->second;
    };
  }
  throw std::invalid_argument("phi kind must be identity, affine, or table");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"drillbench: shells, cusps, covers, and drilling audits on finite graphs"};
  app.set_help_flag("--help", "print help");
  app.require_subcommand(1);
  unsigned workers = 1;
  app.add_option("--workers", workers, "worker threads for parallel sweeps");

  auto* gen_cmd = app.add_subcommand("gen-space", "generate a model-space ball");
  std::string gen_kind = "tiling:7,3", gen_out = "-", gen_axis_word;
  int gen_radius = 6, gen_axis_window = 0;
  gen_cmd->add_option("--kind", gen_kind, "tree:V | grid | tiling:P,Q | surface:G")->required();
  gen_cmd->add_option("--radius", gen_radius)->required();
  gen_cmd->add_option("--axis-word", gen_axis_word, "embed an axis trace");
  gen_cmd->add_option("--axis-window", gen_axis_window);
  gen_cmd->add_option("--out", gen_out);

  auto* delta_cmd = app.add_subcommand("measure-delta", "exact or sampled four-point delta");
  std::string delta_in, delta_mode = "exact", delta_out = "-";
  delta_cmd->add_option("--in", delta_in)->required();
  delta_cmd->add_option("--mode", delta_mode, "exact | sample:N:SEED");
  delta_cmd->add_option("--out", delta_out);

  auto* cert_cmd = app.add_subcommand("certify", "guessing-geodesics certificate");
  cert_cmd->set_help_flag("--help", "print help");
  std::string cert_in, cert_paths, cert_out = "-";
  double cert_h = 1;
  cert_cmd->add_option("--in", cert_in)->required();
  cert_cmd->add_option("--paths", cert_paths, "path family JSON; geodesics when omitted");
  cert_cmd->add_option("--h", cert_h)->required();
  cert_cmd->add_option("--out", cert_out);

  auto* shell_cmd = app.add_subcommand("shell", "completed shell around an axis");
  std::string shell_in, shell_axis, shell_out = "-";
  int shell_k = 2, shell_s = 3;
  shell_cmd->add_option("--in", shell_in)->required();
  shell_cmd->add_option("--axis", shell_axis, "axis JSON (defaults to the graph's axis field)");
  shell_cmd->add_option("--K", shell_k)->required();
  shell_cmd->add_option("--s", shell_s)->required();
  shell_cmd->add_option("--out", shell_out);

  auto* cusp_cmd = app.add_subcommand("cusp", "glue a horoball over the completed shell");
  std::string cusp_in, cusp_axis, cusp_out = "-";
  int cusp_k = 2, cusp_s = 3, cusp_depth = 2;
  cusp_cmd->add_option("--in", cusp_in)->required();
  cusp_cmd->add_option("--axis", cusp_axis);
  cusp_cmd->add_option("--K", cusp_k)->required();
  cusp_cmd->add_option("--s", cusp_s)->required();
  cusp_cmd->add_option("--depth", cusp_depth)->required();
  cusp_cmd->add_option("--out", cusp_out);

  auto* drill_cmd = app.add_subcommand("drill", "unwrap-and-glue, optionally iterated");
  std::string drill_in, drill_axis, drill_out = "-", drill_schedule;
  int drill_k = 2, drill_s = 3, drill_d = 8, drill_window = 2, drill_depth = 1, drill_steps = 0;
  drill_cmd->add_option("--in", drill_in)->required();
  drill_cmd->add_option("--axis", drill_axis);
  drill_cmd->add_option("--K", drill_k)->required();
  drill_cmd->add_option("--s", drill_s)->required();
  drill_cmd->add_option("--D", drill_d)->required();
  drill_cmd->add_option("--window", drill_window)->required();
  drill_cmd->add_option("--depth", drill_depth)->required();
  drill_cmd->add_option("--steps", drill_steps);
  drill_cmd->add_option("--schedule", drill_schedule, "schedule JSON for iterated drilling");
  drill_cmd->add_option("--out", drill_out);

  auto* bnd_cmd = app.add_subcommand("boundary-report", "chain and sphere connectivity testers");
  std::string bnd_in, bnd_out = "-", bnd_eps = "7/10";
  int bnd_radius = 8, bnd_count = 64, bnd_lmax = 50;
  std::uint64_t bnd_seed = 1;
  bnd_cmd->add_option("--in", bnd_in)->required();
  bnd_cmd->add_option("--radius", bnd_radius)->required();
  bnd_cmd->add_option("--count", bnd_count);
  bnd_cmd->add_option("--epsilon", bnd_eps, "rational exponent p/q");
  bnd_cmd->add_option("--Lmax", bnd_lmax);
  bnd_cmd->add_option("--seed", bnd_seed);
  bnd_cmd->add_option("--out", bnd_out);

  auto* const_cmd = app.add_subcommand("constants", "the constant cascade ledger");
  std::string const_profile = "surrogate", const_phi, const_out = "-";
  std::string const_delta0 = "1/2000", const_lambda0 = "1", const_l0 = "2";
  const_cmd->add_option("--profile", const_profile, "exact | surrogate")->required();
  const_cmd->add_option("--phi", const_phi, "phi JSON (identity when omitted)");
  const_cmd->add_option("--delta0", const_delta0);
  const_cmd->add_option("--lambda0", const_lambda0);
  const_cmd->add_option("--L0", const_l0);
  const_cmd->add_option("--out", const_out);

  auto* audit_cmd = app.add_subcommand("audit", "balls | models | separation | vtc audits");
  std::string audit_kind, audit_in, audit_axis, audit_out = "-", audit_theta = "0";
  int audit_k = 2, audit_s = 3, audit_d = 8, audit_window = 2, audit_depth = 1, audit_sigma = 1;
  audit_cmd->add_option("--kind", audit_kind, "balls | models | separation | vtc")->required();
  audit_cmd->add_option("--in", audit_in)->required();
  audit_cmd->add_option("--axis", audit_axis);
  audit_cmd->add_option("--K", audit_k);
  audit_cmd->add_option("--s", audit_s);
  audit_cmd->add_option("--D", audit_d);
  audit_cmd->add_option("--window", audit_window);
  audit_cmd->add_option("--depth", audit_depth);
  audit_cmd->add_option("--sigma", audit_sigma);
  audit_cmd->add_option("--theta", audit_theta, "rational threshold scale");
  audit_cmd->add_option("--out", audit_out);

  auto* run_cmd = app.add_subcommand("run", "execute a pipeline config");
  std::string run_config, run_out = "bundle";
  run_cmd->add_option("--config", run_config)->required();
  run_cmd->add_option("--out", run_out);

  CLI11_PARSE(app, argc, argv);
  worker_count() = std::max(1u, workers);

  auto axis_of = [](const json& graph_json, const std::string& axis_path) {
    if (!axis_path.empty()) return json_vertex_set(load_json(axis_path).at("trace"));
    if (graph_json.contains("axis")) return json_vertex_set(graph_json.at("axis"));
    throw std::runtime_error("no axis: pass --axis or embed one via gen-space --axis-word");
  };

  try {
    if (*gen_cmd) {
      SpaceGenerator gen = SpaceGenerator::parse(gen_kind);
      json j;
      if (!gen_axis_word.empty()) {
        Axis axis = axis_in(gen, gen_axis_word, gen_axis_window > 0 ? gen_axis_window : 3, gen_radius);
        j = graph_to_json(axis.ball.graph);
        j["axis"] = axis.trace;
        j["center"] = axis.ball.center;
        j["lambda0"] = rat_double(axis.lambda0);
        j["max_stretch"] = rat_double(axis.max_stretch);
      } else {
        PointedBall ball = generate_ball(gen, gen_radius);
        j = graph_to_json(ball.graph);
        j["center"] = ball.center;
      }
      j["kind"] = gen_kind;
      j["radius"] = gen_radius;
      write_json(gen_out, j);
      return 0;
    }
    if (*delta_cmd) {
      Graph g = load_graph(delta_in);
      DeltaPolicy policy = DeltaPolicy::exact_policy();
      if (delta_mode != "exact") {
        auto c1 = delta_mode.find(':');
        auto c2 = delta_mode.find(':', c1 + 1);
        if (delta_mode.substr(0, c1) != "sample" || c2 == std::string::npos)
          throw std::invalid_argument("mode must be exact or sample:N:SEED");
        policy = DeltaPolicy::sampled(std::stoull(delta_mode.substr(c1 + 1, c2 - c1 - 1)),
                                      std::stoull(delta_mode.substr(c2 + 1)));
      }
      write_json(delta_out, four_point_delta(g, policy).to_json());
      return 0;
    }
    if (*cert_cmd) {
      Graph g = load_graph(cert_in);
      PathFamily fam = geodesic_family(g);
      if (!cert_paths.empty()) {
        json pj = load_json(cert_paths);
        PathFamily custom(g.num_vertices());
        for (const auto& entry : pj.at("paths")) {
          std::vector<Vertex> path;
          for (const auto& v : entry.at("path")) path.push_back(v.get<int>());
          custom.set(entry.at("x").get<int>(), entry.at("y").get<int>(), std::move(path));
        }
        fam = std::move(custom);
      }
      long num = std::lround(cert_h * 2);
      Certificate cert = certify_guess_geodesics(g, fam, Rat(num, 2));
      write_json(cert_out, cert.to_json());
      return cert.ok ? 0 : 1;
    }
    if (*shell_cmd) {
      json gj = load_json(shell_in);
      Graph g = graph_from_json(gj);
      VertexSet w = axis_of(gj, shell_axis);
      auto cs = completed_shell(g, w, shell_k, shell_s);
      Report rep = shell_connectivity_audit(cs);
      json j = graph_to_json(cs.graph);
      j["report"] = rep.to_json();
      j["shell_ambient"] = cs.shell_ambient;
      write_json(shell_out, j);
      return exit_code(rep.verdict);
    }
    if (*cusp_cmd) {
      json gj = load_json(cusp_in);
      Graph g = graph_from_json(gj);
      VertexSet w = axis_of(gj, cusp_axis);
      auto c = cusp(g, w, cusp_k, cusp_s, cusp_depth);
      json j = graph_to_json(c.graph);
      j["shell_vertices"] = c.n_cs();
      // Horoball structure: depth per vertex and the base (shell) vertex map.
      auto depth = json::array();
      auto base_map = json::array();
      for (Vertex v = 0; v < c.graph.num_vertices(); ++v) {
        depth.push_back(c.depth_of(v));
        base_map.push_back(c.cs_id_of(v));
      }
      j["depth"] = std::move(depth);
      j["base"] = std::move(base_map);
      write_json(cusp_out, j);
      return 0;
    }
    if (*drill_cmd) {
      json gj = load_json(drill_in);
      Graph g = graph_from_json(gj);
      VertexSet w = axis_of(gj, drill_axis);
      if (drill_steps <= 0) {
        auto u = unwrap_and_glue(g, w, drill_k, drill_s, drill_d, drill_window, drill_depth);
        json j = graph_to_json(u.graph);
        j["classification"] = u.ctc_classification.to_json();
        j["deck_displacement"] = measured_deck_displacement(u);
        // Cover structure: fiber per cover vertex and the projection map.
        auto fiber = json::array();
        auto projection = json::array();
        for (Vertex v = 0; v < u.graph.num_vertices(); ++v) {
          fiber.push_back(v < u.n_cover ? json(u.cover.fiber_of[v]) : json(nullptr));
          projection.push_back(u.q_map[v]);
        }
        j["fiber"] = std::move(fiber);
        j["projection"] = std::move(projection);
        write_json(drill_out, j);
        return 0;
      }
      std::vector<int> schedule;
      if (!drill_schedule.empty())
        for (const auto& v : load_json(drill_schedule).at("schedule")) schedule.push_back(v.get<int>());
      DrillState base;
      base.graph = g;
      base.family.chi = 2;
      base.family.tube_k = drill_k;
      FamilyMember tube;
      tube.kind = FamilyMember::Kind::Tube;
      tube.core.assign(w.begin(), w.end());
      tube.vertices = sphere_and_tube(g, w, drill_k).open_tube;
      base.family.members = {tube};
      if (schedule.empty()) schedule.assign(drill_steps, 0);
      auto it = iterate_unwrap(base, schedule, drill_steps, drill_window, drill_s, drill_d, drill_depth);
      json j;
      j["steps"] = it.steps.size();
      j["stabilization"] = it.stabilization.to_json();
      j["final_vertices"] = it.states.back().graph.num_vertices();
      write_json(drill_out, j);
      return exit_code(it.stabilization.verdict);
    }
    if (*bnd_cmd) {
      json gj = load_json(bnd_in);
      Graph g = graph_from_json(gj);
      Vertex centre = gj.value("center", 0);
      DistanceField d(g, centre);
      VertexSet sphere;
      for (Vertex v = 0; v < g.num_vertices(); ++v)
        if (d.reachable(v) && d.at(v) == bnd_radius) sphere.push_back(v);
      std::mt19937_64 rng(bnd_seed);
      std::shuffle(sphere.begin(), sphere.end(), rng);
      sphere.resize(std::min<std::size_t>(sphere.size(), bnd_count));
      normalize_set(sphere);
      auto sample = boundary_sample(g, centre, sphere, rat_from_json(json(bnd_eps)));
      json j;
      j["sample"] = json{{"basepoint", sample.basepoint}, {"points", sample.points}};
      auto matrix = json::array();
      for (const auto& row : sample.gromov) {
        auto r = json::array();
        for (const auto& value : row) r.push_back(rat_double(value));
        matrix.push_back(std::move(r));
      }
      j["sample"]["gromov_matrix"] = std::move(matrix);
      j["chains"] = linear_connectedness_estimate(sample, bnd_lmax).to_json();
      j["spherical"] = spherical_connectivity_check(g, centre, std::min(bnd_radius, 4), 3, 1).to_json();
      write_json(bnd_out, j);
      return 0;
    }
    if (*const_cmd) {
      LedgerInputs in;
      in.delta0 = rat_from_json(json(const_delta0));
      in.lambda0 = rat_from_json(json(const_lambda0));
      in.l0 = rat_from_json(json(const_l0));
      in.phi = parse_phi(const_phi);
      in.exact_profile = const_profile == "exact";
      in.delta1_override = in.exact_profile ? Rat(0) : in.delta0;
      in.sigma_zero_input = 10;
      write_json(const_out, constants_ledger(in).to_json());
      return 0;
    }
    if (*audit_cmd) {
      json gj = load_json(audit_in);
      Graph g = graph_from_json(gj);
      VertexSet w = axis_of(gj, audit_axis);
      auto u = unwrap_and_glue(g, w, audit_k, audit_s, audit_d, audit_window, audit_depth);
      Report rep;
      if (audit_kind == "balls") {
        rep = ball_isometry_audit(u, audit_sigma);
      } else if (audit_kind == "models") {
        VertexSet horo_part;
        for (Vertex v = 0; v < u.base.graph.num_vertices(); ++v)
          if (u.base.cs_id_of(v) != -1) horo_part.push_back(v);
        normalize_set(horo_part);
        auto [horo_graph, horo_ids] = induced_subgraph(u.base.graph, horo_part);
        std::vector<LocalModel> models{{"cusp", &u.base.graph}, {"ambient", &g}, {"horoball", &horo_graph}};
        rep = local_model_audit(u, audit_sigma, models);
      } else if (audit_kind == "vtc") {
        rep = very_translating_check(u, rat_from_json(json(audit_theta)), {1, -1}, {});
      } else if (audit_kind == "separation") {
        SeparatedFamily fam;
        fam.chi = 2;
        fam.tube_k = audit_k;
        FamilyMember tube;
        tube.kind = FamilyMember::Kind::Tube;
        tube.core.assign(w.begin(), w.end());
        tube.vertices = sphere_and_tube(g, w, audit_k).open_tube;
        fam.members = {tube};
        ReferenceInstance ref{&g, w};
        rep = separated_family_audit(g, fam, ref);
      } else {
        throw std::invalid_argument("audit kind must be balls, models, separation, or vtc");
      }
      write_json(audit_out, rep.to_json());
      return exit_code(rep.verdict);
    }
    if (*run_cmd) {
      auto cfg = parse_pipeline_config(load_json(run_config));
      auto result = run_pipeline(cfg);
      auto manifest = write_bundle(cfg, result, run_out);
      std::cout << manifest.dump(2) << "\n";
      return exit_code(result.verdict);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
