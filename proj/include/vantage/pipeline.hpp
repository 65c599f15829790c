#pragma once

#include <chrono>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "vantage/allocation.hpp"
#include "vantage/optimizer.hpp"
#include "vantage/scene.hpp"

namespace vantage {

struct PipelineConfig {
  std::size_t sample_count = 800;
  double c_single = 0.5;
  double c_single_target = 0.4;
  double coverage_threshold = 0.97;
  Nsga2Params nsga;
  std::optional<double> epsilon;       ///< default_epsilon(voxel_resolution) when unset
  double alpha_threshold = deg2rad(60.0);
  double voxel_resolution = 0.05;
  double base_spacing = 0.25;
  std::size_t target_points = 200;
  std::optional<double> env_density;   ///< surface samples per m^2; 8 / resolution^2 when unset
  double grid_margin = 0.5;
  double grid_headroom = 1.0;
  std::uint64_t seed = 0;

  double resolved_epsilon() const { return epsilon.value_or(default_epsilon(voxel_resolution)); }
  double resolved_density() const { return env_density.value_or(8.0 / (voxel_resolution * voxel_resolution)); }

  void validate() const {
    for (double t : {c_single, c_single_target, coverage_threshold})
      if (t < 0.0 || t > 1.0) throw Error("config: thresholds must lie in [0, 1]");
    if (sample_count == 0 || target_points == 0) throw Error("config: counts must be positive");
    if (!(voxel_resolution > 0.0) || !(base_spacing > 0.0)) throw Error("config: resolution and spacing must be positive");
    if (!(alpha_threshold > 0.0)) throw Error("config: alpha threshold must be positive");
    if (!(resolved_epsilon() >= 0.0)) throw Error("config: epsilon must be non-negative");
    if (!(resolved_density() > 0.0)) throw Error("config: env density must be positive");
    if (grid_margin < 0.0 || grid_headroom < 0.0) throw Error("config: grid margins must be non-negative");
    nsga.validate();
  }

  Json to_json() const {
    return {{"sample_count", sample_count},
            {"c_single", c_single},
            {"c_single_target", c_single_target},
            {"coverage_threshold", coverage_threshold},
            {"nsga",
             {{"population", nsga.population},
              {"generations", nsga.generations},
              {"crossover_probability", nsga.crossover_probability},
              {"mutation_probability", nsga.mutation_probability},
              {"tournament_size", nsga.tournament_size},
              {"slots", nsga.slots}}},
            {"epsilon", resolved_epsilon()},
            {"alpha_threshold_deg", rad2deg(alpha_threshold)},
            {"voxel_resolution", voxel_resolution},
            {"base_spacing", base_spacing},
            {"target_points", target_points},
            {"env_density", resolved_density()},
            {"grid_margin", grid_margin},
            {"grid_headroom", grid_headroom},
            {"seed", seed}};
  }

  /// Reads any subset of the to_json() keys over the defaults.
  static PipelineConfig from_json(const Json& j) {
    PipelineConfig c;
    io::at_path("/config", [&] {
      c.sample_count = j.value("sample_count", c.sample_count);
      c.c_single = j.value("c_single", c.c_single);
      c.c_single_target = j.value("c_single_target", c.c_single_target);
      c.coverage_threshold = j.value("coverage_threshold", c.coverage_threshold);
      if (j.contains("nsga")) {
        const Json& n = j.at("nsga");
        c.nsga.population = n.value("population", c.nsga.population);
        c.nsga.generations = n.value("generations", c.nsga.generations);
        c.nsga.crossover_probability = n.value("crossover_probability", c.nsga.crossover_probability);
        c.nsga.mutation_probability = n.value("mutation_probability", c.nsga.mutation_probability);
        c.nsga.tournament_size = n.value("tournament_size", c.nsga.tournament_size);
        c.nsga.slots = n.value("slots", c.nsga.slots);
      }
      if (j.contains("epsilon") && !j.at("epsilon").is_null()) c.epsilon = j.at("epsilon").get<double>();
      if (j.contains("alpha_threshold_deg")) c.alpha_threshold = deg2rad(j.at("alpha_threshold_deg").get<double>());
      c.voxel_resolution = j.value("voxel_resolution", c.voxel_resolution);
      c.base_spacing = j.value("base_spacing", c.base_spacing);
      c.target_points = j.value("target_points", c.target_points);
      if (j.contains("env_density") && !j.at("env_density").is_null())
        c.env_density = j.at("env_density").get<double>();
      c.grid_margin = j.value("grid_margin", c.grid_margin);
      c.grid_headroom = j.value("grid_headroom", c.grid_headroom);
      c.seed = j.value("seed", c.seed);
      return 0;
    });
    c.validate();
    return c;
  }
};

/// Independent, reproducible stream per pipeline stage (splitmix64 finaliser).
inline std::uint64_t stage_seed(std::uint64_t seed, std::uint64_t stage) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stage + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

struct Environment {
  VoxelGrid3 grid;                ///< M(E)
  OccupancyGrid2 floor_grid;      ///< M(E) projected over the supervisors' height band
  std::vector<Polygon2> floor;    ///< operational area
  std::size_t surface_points = 0;
  double band_min = 0.0;
  double band_max = 0.0;
};

namespace detail {

inline double band_min(const Scene& s) {
  double z = std::numeric_limits<double>::infinity();
  for (const auto& e : s.supervisors) z = std::min(z, e.model.ground_clearance);
  return std::isfinite(z) ? z : 0.0;
}

inline double band_max(const Scene& s) {
  double z = 0.0;
  for (const auto& e : s.supervisors) z = std::max(z, e.model.collision_height);
  return z > 0.0 ? z : 1.0;
}

inline AxisBox environment_bounds(const Scene& scene, const PipelineConfig& config) {
  AxisBox box = scene.floor.mesh.bounds();
  for (const auto& o : scene.as_built) box.extend(o.mesh.bounds());
  for (const auto& m : scene.materials) box.extend(m.world_mesh().bounds());
  // Every trajectory must fit so the per-state overlays are never clipped.
  for (const auto& tr : scene.trajectories) {
    const auto attached = scene.target(tr.target).installed ? std::nullopt : scene.attached_object(tr);
    box.extend(motion_envelope(scene.construction, tr.expand(), attached ? &*attached : nullptr).bounds());
  }
  box.min().array() -= config.grid_margin;
  box.max().array() += config.grid_margin;
  box.max().z() += config.grid_headroom;
  return box;
}

}  // namespace detail

/// Surface-samples the as-built and material layers into M(E), projects it to 2D
/// over the supervisors' height band and extracts the floor boundary. Materials
/// named in `exclude` (an object being carried) are left out.
inline Environment build_environment(const Scene& scene, const PipelineConfig& config,
                                     const std::vector<std::string>& exclude = {}) {
  config.validate();
  std::vector<Vec3> points;
  std::uint64_t stream = 0;
  auto add = [&](const TriMesh& mesh) {
    auto pts = sample_mesh_surface(mesh, config.resolved_density(), stage_seed(config.seed, 100 + stream++));
    points.insert(points.end(), pts.begin(), pts.end());
  };
  for (const auto& o : scene.as_built) add(o.mesh);
  for (const auto& m : scene.materials)
    if (std::find(exclude.begin(), exclude.end(), m.name) == exclude.end()) add(m.world_mesh());

  Environment env;
  env.grid = build_from_points(points, config.voxel_resolution, detail::environment_bounds(scene, config)).grid;
  env.surface_points = points.size();
  env.band_min = detail::band_min(scene);
  env.band_max = detail::band_max(scene);
  env.floor_grid = project_to_2d(env.grid, env.band_min, env.band_max);
  env.floor = extract_floor_boundary(scene.floor.mesh, scene.floor.surface_height);
  return env;
}

struct FunnelCounts {
  std::size_t sampled = 0;
  std::size_t orientation_kept = 0;
  std::size_t coverage_kept = 0;
  std::size_t target_coverage_kept = 0;
  std::size_t collision_free = 0;

  std::vector<std::size_t> as_vector() const {
    return {sampled, orientation_kept, coverage_kept, target_coverage_kept, collision_free};
  }
};

struct SelectedViewpoint {
  CandidateViewpoint candidate;
  std::optional<std::size_t> robot;  ///< supervisor index when assigned
  double d_envelope = 0.0;
  std::optional<double> d_object;
  std::optional<double> path_cost;
};

struct RobotAssignment {
  std::string robot;
  std::optional<std::size_t> viewpoint;  ///< index into RunReport::viewpoints
  std::optional<double> path_cost;
};

struct RunReport {
  Operation operation = Operation::Pick;
  int target = 1;
  std::uint64_t seed = 0;
  SelectionOutcome::Kind kind = SelectionOutcome::Kind::Single;
  bool below_threshold = false;
  std::vector<SelectedViewpoint> viewpoints;  ///< ordered by assigned robot index
  double coverage = 0.0;
  double distance_objective = 0.0;
  std::optional<double> avg_visibility;
  std::vector<RobotAssignment> assignment;
  double total_path_cost = 0.0;
  FunnelCounts funnel;
  std::size_t pareto_size = 0;
  std::size_t single_solutions = 0;
  PipelineConfig config;
  std::vector<std::pair<std::string, double>> timing;  ///< seconds per stage

  Json to_json(bool include_timing = false) const;
};

/// Geometry behind a report, kept for export.
struct RunArtifacts {
  MotionEnvelope envelope;
  std::vector<CameraView> views;                       ///< same order as the report's viewpoints
  std::optional<TargetPointSet> target_points;
  std::vector<boost::dynamic_bitset<>> visible;        ///< per state, union over views
};

struct RunResult {
  RunReport report;
  RunArtifacts artifacts;
};

namespace detail {

inline double round2(double v) { return std::round(v * 100.0) / 100.0; }

inline Json optional_json(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

class StageTimer {
 public:
  explicit StageTimer(std::vector<std::pair<std::string, double>>& out) : out_(&out), last_(clock::now()) {}
  void mark(const std::string& stage) {
    const auto now = clock::now();
    out_->emplace_back(stage, std::chrono::duration<double>(now - last_).count());
    last_ = now;
  }

 private:
  using clock = std::chrono::steady_clock;
  std::vector<std::pair<std::string, double>>* out_;
  clock::time_point last_;
};

inline void require_nonempty(std::size_t count, const char* stage, const FunnelCounts& f) {
  if (count != 0) return;
  auto v = f.as_vector();
  std::string counts;
  for (std::size_t i = 0; i < v.size(); ++i) counts += (i ? " -> " : "") + std::to_string(v[i]);
  throw Error(std::string("no candidates left after ") + stage + " (funnel " + counts + ")");
}

/// Per-candidate, per-state visibility bitmasks, computed on first use.
class VisibilityCache {
 public:
  VisibilityCache(std::span<const CandidateViewpoint> candidates, std::span<const VoxelGrid3> grids,
                  const TargetPointSet& targets, double epsilon)
      : candidates_(candidates), grids_(grids), targets_(&targets), epsilon_(epsilon) {}

  const std::vector<boost::dynamic_bitset<>>& masks(int candidate) {
    auto it = cache_.find(candidate);
    if (it != cache_.end()) return it->second;
    std::vector<boost::dynamic_bitset<>> per_state;
    per_state.reserve(grids_.size());
    for (std::size_t s = 0; s < grids_.size(); ++s)
      per_state.push_back(visibility_mask(candidates_[static_cast<std::size_t>(candidate)].view, grids_[s],
                                          targets_->per_state[s], epsilon_));
    return cache_.emplace(candidate, std::move(per_state)).first->second;
  }

  std::vector<boost::dynamic_bitset<>> union_masks(const Chromosome& genes) {
    std::vector<boost::dynamic_bitset<>> out(grids_.size(), boost::dynamic_bitset<>(targets_->local_points.size()));
    for (int g : genes) {
      const auto& m = masks(g);
      for (std::size_t s = 0; s < out.size(); ++s) out[s] |= m[s];
    }
    return out;
  }

  /// Equal to avg_visibility() over the same views, grids and points.
  double average(const Chromosome& genes) {
    double sum = 0.0;
    for (const auto& m : union_masks(genes))
      sum += static_cast<double>(m.count()) / static_cast<double>(m.size());
    return sum / static_cast<double>(grids_.size());
  }

 private:
  std::span<const CandidateViewpoint> candidates_;
  std::span<const VoxelGrid3> grids_;
  const TargetPointSet* targets_;
  double epsilon_;
  std::map<int, std::vector<boost::dynamic_bitset<>>> cache_;
};

}  // namespace detail

/// One pick or place viewpoint-selection run for the trajectory serving `target_order`.
inline RunResult run_selection(const Scene& scene, const PipelineConfig& config, Operation operation,
                               int target_order) {
  config.validate();
  if (scene.supervisors.empty()) throw Error("scene has no supervising robots");
  RunResult result;
  RunReport& report = result.report;
  report.operation = operation;
  report.target = target_order;
  report.seed = config.seed;
  report.config = config;
  detail::StageTimer timer(report.timing);

  const TrajectorySpec& spec = scene.trajectory(operation, target_order);
  const Trajectory traj = spec.expand();
  const auto attached = operation == Operation::Place ? scene.attached_object(spec) : std::nullopt;
  const AttachedObject* object = attached ? &*attached : nullptr;
  const SupervisorModel& model = scene.supervisors.front().model;

  std::vector<std::string> carried;
  if (spec.attached) carried.push_back(spec.attached->material);
  const Environment env = build_environment(scene, config, carried);
  timer.mark("environment");

  const MotionEnvelope envelope = motion_envelope(scene.construction, traj, object);
  std::optional<MotionEnvelope> obj_envelope;
  std::optional<TargetPointSet> targets;
  std::vector<VoxelGrid3> state_grids;
  if (object) {
    obj_envelope = object_envelope(scene.construction, traj, object);
    targets = target_points_at_states(sample_target_points(*object, config.target_points, stage_seed(config.seed, 1)),
                                      scene.construction, traj, *object);
    state_grids.reserve(traj.size());
    for (const auto& s : traj.states) state_grids.push_back(state_occupancy(env.grid, scene.construction, s, object));
  }
  timer.mark("envelope");

  const auto bases = sample_base_positions(env.floor, config.base_spacing);
  auto candidates = sample_candidates(model, config.sample_count, bases, stage_seed(config.seed, 2));
  FunnelCounts& funnel = report.funnel;
  funnel.sampled = candidates.size();
  candidates = prefilter_orientation(candidates, envelope, config.alpha_threshold);
  funnel.orientation_kept = candidates.size();
  detail::require_nonempty(candidates.size(), "orientation prefilter", funnel);
  candidates = filter_coverage(candidates, envelope, config.c_single);
  funnel.coverage_kept = candidates.size();
  detail::require_nonempty(candidates.size(), "coverage filter", funnel);
  candidates = filter_target_coverage(candidates, obj_envelope ? &*obj_envelope : nullptr, config.c_single_target);
  funnel.target_coverage_kept = candidates.size();
  detail::require_nonempty(candidates.size(), "target coverage filter", funnel);
  candidates = filter_collision(candidates, env.grid, envelope, state_grids, model);
  funnel.collision_free = candidates.size();
  detail::require_nonempty(candidates.size(), "collision filter", funnel);
  timer.mark("filters");

  // Views already meeting the final threshold alone are carried as single
  // solutions; the genetic search combines the rest.
  const TargetPointSet* target_ptr = targets ? &*targets : nullptr;
  const CombinationEvaluator evaluator(candidates, envelope, target_ptr);
  std::vector<Individual> singles;
  std::vector<int> pool;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    if (candidates[i].coverage >= config.coverage_threshold) {
      Individual ind;
      ind.genes = {static_cast<int>(i)};
      ind.objectives = evaluator(ind.genes);
      singles.push_back(std::move(ind));
    } else {
      pool.push_back(static_cast<int>(i));
    }
  }
  Nsga2Params nsga = config.nsga;
  nsga.seed = stage_seed(config.seed, 3);
  nsga.slots = std::min(nsga.slots, scene.supervisors.size());
  std::vector<Individual> pareto;
  if (pool.size() >= nsga.slots) {
    auto to_candidates = [&](const Chromosome& genes) {
      Chromosome out;
      for (int g : genes) out.push_back(pool[static_cast<std::size_t>(g)]);
      std::sort(out.begin(), out.end());
      return out;
    };
    pareto = nsga2_run(pool.size(), nsga, [&](const Chromosome& genes) { return evaluator(to_candidates(genes)); });
    for (auto& ind : pareto) ind.genes = to_candidates(ind.genes);
  }
  report.pareto_size = pareto.size();
  report.single_solutions = singles.size();
  timer.mark("optimizer");

  std::optional<detail::VisibilityCache> vis;
  VisibilityFn vis_fn;
  if (targets) {
    vis.emplace(candidates, state_grids, *targets, config.resolved_epsilon());
    vis_fn = [&](const Chromosome& genes) { return vis->average(genes); };
  }
  if (pareto.empty() && singles.empty()) {
    // Too few candidates to combine and none good enough alone: offer each one.
    for (std::size_t i = 0; i < candidates.size(); ++i) {
      Individual ind;
      ind.genes = {static_cast<int>(i)};
      ind.objectives = evaluator(ind.genes);
      singles.push_back(std::move(ind));
    }
  }
  const SelectionOutcome outcome = select_final(pareto, singles, config.coverage_threshold, vis_fn);
  report.kind = outcome.kind;
  report.below_threshold = outcome.below_threshold;
  report.coverage = outcome.objectives.coverage;
  report.distance_objective = outcome.objectives.distance;
  report.avg_visibility = outcome.avg_visibility;
  timer.mark("selection");

  // Navigation: the environment plus the construction robot at its first state.
  const VoxelGrid3 start_grid = state_occupancy(env.grid, scene.construction, traj.states.front(), object);
  const OccupancyGrid2 nav = inflate(project_to_2d(start_grid, env.band_min, env.band_max),
                                     scene.supervisors.front().model.footprint_radius);
  constexpr double inf = std::numeric_limits<double>::infinity();
  CostMatrix costs(scene.supervisors.size(), std::vector<double>(outcome.genes.size(), inf));
  std::vector<std::optional<Cell>> goals;
  for (int g : outcome.genes) {
    const auto c = nav.cell_of({candidates[static_cast<std::size_t>(g)].config.x,
                                candidates[static_cast<std::size_t>(g)].config.y});
    goals.push_back(nav.in_bounds(c[0], c[1]) && !nav.occupied(c[0], c[1]) ? std::optional<Cell>(Cell{c[0], c[1]})
                                                                           : std::nullopt);
  }
  for (std::size_t r = 0; r < scene.supervisors.size(); ++r) {
    const auto& start = scene.supervisors[r].start;
    const auto sc = nav.cell_of({start.x, start.y});
    if (!nav.in_bounds(sc[0], sc[1]) || nav.occupied(sc[0], sc[1]))
      throw Error("supervisor '" + scene.supervisors[r].name + "' starts on a blocked cell");
    for (std::size_t v = 0; v < goals.size(); ++v)
      if (goals[v])
        if (auto path = shortest_path(nav, {sc[0], sc[1]}, *goals[v]))
          costs[r][v] = path_length(path->cells, nav.resolution());
  }
  const Assignment assignment = assign(costs);
  report.total_path_cost = assignment.total_cost;
  timer.mark("allocation");

  const Vec3 env_centroid = centroid(envelope.points);
  const auto obj_centroids = targets ? state_centroids(*targets) : std::vector<Vec3>{};
  for (std::size_t r = 0; r < scene.supervisors.size(); ++r) {
    RobotAssignment ra;
    ra.robot = scene.supervisors[r].name;
    const int v = assignment.robot_to_viewpoint[r];
    if (v >= 0) {
      const auto& cand = candidates[static_cast<std::size_t>(outcome.genes[static_cast<std::size_t>(v)])];
      SelectedViewpoint sv;
      sv.candidate = cand;
      sv.robot = r;
      sv.d_envelope = (env_centroid - cand.view.position()).norm();
      if (targets) sv.d_object = object_distance(cand.view, obj_centroids);
      sv.path_cost = costs[r][static_cast<std::size_t>(v)];
      ra.viewpoint = report.viewpoints.size();
      ra.path_cost = sv.path_cost;
      report.viewpoints.push_back(sv);
      result.artifacts.views.push_back(cand.view);
    }
    report.assignment.push_back(ra);
  }

  result.artifacts.envelope = envelope;
  if (targets) {
    result.artifacts.target_points = targets;
    result.artifacts.visible = vis->union_masks(outcome.genes);
  }
  return result;
}

inline Json RunReport::to_json(bool include_timing) const {
  const bool place = operation == Operation::Place;
  Json vps = Json::array();
  Json d_env = Json::array();
  Json d_obj = Json::array();
  for (const auto& v : viewpoints) {
    const auto& c = v.candidate;
    Json j{{"candidate_id", c.id},
           {"robot", v.robot ? Json(assignment[*v.robot].robot) : Json(nullptr)},
           {"camera", io::pose_json(c.view.pose)},
           {"base", Json::array({c.config.x, c.config.y, c.config.yaw})},
           {"joints", c.config.joints},
           {"single_coverage", c.coverage},
           {"d_envelope", v.d_envelope},
           {"path_cost", detail::optional_json(v.path_cost)}};
    if (place) {
      j["single_target_coverage"] = c.target_coverage;
      j["d_object"] = *v.d_object;
    }
    vps.push_back(j);
    d_env.push_back(v.d_envelope);
    if (place) d_obj.push_back(*v.d_object);
  }

  Json metrics{{"coverage", coverage}, {"distance_objective", distance_objective}, {"d_envelope", d_env}};
  Json table{{"coverage", detail::round2(coverage)}};
  for (std::size_t i = 0; i < viewpoints.size(); ++i)
    table["d_envelope_v" + std::to_string(i + 1)] = detail::round2(viewpoints[i].d_envelope);
  if (place) {
    metrics["d_object"] = d_obj;
    metrics["avg_visibility"] = *avg_visibility;
    for (std::size_t i = 0; i < viewpoints.size(); ++i)
      table["d_object_v" + std::to_string(i + 1)] = detail::round2(*viewpoints[i].d_object);
    table["avg_visibility"] = detail::round2(*avg_visibility);
  }

  Json robots = Json::array();
  for (const auto& a : assignment)
    robots.push_back({{"robot", a.robot},
                      {"viewpoint", a.viewpoint ? Json(*a.viewpoint) : Json(nullptr)},
                      {"path_cost", detail::optional_json(a.path_cost)}});

  Json doc{{"operation", to_string(operation)},
           {"target", target},
           {"seed", seed},
           {"outcome",
            {{"kind", kind == SelectionOutcome::Kind::Single ? "single" : "combination"},
             {"below_threshold", below_threshold},
             {"viewpoints", vps}}},
           {"metrics", metrics},
           {"table", table},
           {"assignment", {{"robots", robots}, {"total_path_cost", total_path_cost}}},
           {"funnel",
            {{"sampled", funnel.sampled},
             {"orientation_kept", funnel.orientation_kept},
             {"coverage_kept", funnel.coverage_kept},
             {"target_coverage_kept", funnel.target_coverage_kept},
             {"collision_free", funnel.collision_free}}},
           {"search", {{"pareto_size", pareto_size}, {"single_solutions", single_solutions}}},
           {"config", config.to_json()}};
  if (include_timing) {
    Json t = Json::object();
    for (const auto& [stage, seconds] : timing) t[stage] = seconds;
    doc["timing"] = t;
  }
  return doc;
}

}  // namespace vantage
