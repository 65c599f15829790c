// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <chrono>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>

#include "oracles.hpp"
#include "support.hpp"

using namespace vantage;
using testing_support::look_at;
using testing_support::uniform_in;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Verdict {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& why) {
    if (!ok) {
      pass = false;
      detail << " [" << why << "]";
    }
  }
};

Verdict coverage_oracle() {
  Verdict v;
  const auto t0 = Clock::now();
  std::mt19937_64 rng(101);
  std::vector<MotionEnvelope> envs;
  for (int e = 0; e < 20; ++e) envs.push_back(testing_support::random_envelope(rng, 200, Vec3(-2, -2, 0), Vec3(2, 2, 2)));
  int mismatches = 0;
  for (int f = 0; f < 50; ++f) {
    std::uniform_real_distribution<double> fov(0.3, 2.5);
    std::uniform_real_distribution<double> range(1.0, 8.0);
    const CameraView view = look_at(uniform_in(rng, Vec3(-6, -6, 0), Vec3(6, 6, 3)),
                                    uniform_in(rng, Vec3(-1, -1, 0), Vec3(1, 1, 2)),
                                    CameraIntrinsics{fov(rng), fov(rng), range(rng)});
    const std::vector<CameraView> views{view};
    for (const auto& env : envs)
      if (coverage(views, env) != oracle::brute_coverage(views, env.points)) ++mismatches;
  }
  const double t = seconds_since(t0);
  v.detail << "1000 frustum/envelope pairs, " << mismatches << " mismatches, " << t << " s";
  v.require(mismatches == 0, "mismatch");
  v.require(t < 5.0, "too slow");
  return v;
}

Verdict ray_traversal() {
  Verdict v;
  const auto t0 = Clock::now();
  std::mt19937_64 rng(202);
  int mismatches = 0;
  for (int c = 0; c < 1000; ++c) {
    std::uniform_int_distribution<int> dim(3, 20);
    std::uniform_real_distribution<double> res(0.05, 0.6);
    std::uniform_real_distribution<double> fill(0.02, 0.3);
    VoxelGrid3 g(uniform_in(rng, Vec3::Constant(-3), Vec3::Constant(3)), res(rng), {dim(rng), dim(rng), dim(rng)});
    std::bernoulli_distribution occ(fill(rng));
    for (std::size_t n = 0; n < g.size(); ++n)
      if (occ(rng)) g.set(g.unravel(n));
    const AxisBox b = g.bounds();
    const Vec3 pad = 0.3 * b.sizes();
    const Vec3 a = uniform_in(rng, b.min() - pad, b.max() + pad);
    const Vec3 t = uniform_in(rng, b.min() - pad, b.max() + pad);
    const auto got = raycast_first_hit(g, a, t);
    const auto want = oracle::march_first_hit(g, a, t);
    if (got.has_value() != want.has_value() || (got && !(got->index == *want))) ++mismatches;
  }
  const double t = seconds_since(t0);
  v.detail << "1000 grid/segment cases, " << mismatches << " mismatches, " << t << " s";
  v.require(mismatches == 0, "mismatch");
  v.require(t < 30.0, "too slow");
  return v;
}

Verdict visibility_extremes() {
  Verdict v;
  const double res = 0.05;
  const double eps = default_epsilon(res);
  const VoxelGrid3 empty(Vec3::Constant(-3), res, {120, 120, 120});

  // Open scene: a thin plate facing the camera, voxelized as its own shell.
  OrientedBox plate;
  plate.center = Vec3(1.0, 0, 0);
  plate.axes = {Vec3::UnitY(), Vec3::UnitZ(), Vec3::UnitX()};
  plate.half_extents = Vec3(0.4, 0.4, 0.0);
  const VoxelGrid3 plate_grid = overlay_state(empty, std::vector<OrientedBox>{plate});
  const auto plate_pts = sample_mesh_surface_count(
      transform_mesh(Pose3(plate.center, Mat3::Identity()),
                     TriMesh{{Vec3(0, -0.4, -0.4), Vec3(0, 0.4, -0.4), Vec3(0, 0.4, 0.4), Vec3(0, -0.4, 0.4)},
                             {{0, 1, 2}, {0, 2, 3}}}),
      300, 5);
  const std::vector<CameraView> front{look_at(Vec3(-2.0, 0, 0), plate.center)};
  const std::vector<VoxelGrid3> grids{plate_grid, plate_grid};
  const std::vector<std::vector<Vec3>> states{plate_pts, plate_pts};
  const double open = avg_visibility(front, grids, states, eps);

  // A solid wall, 0.3 m thick, between the camera and the plate.
  VoxelGrid3 walled = plate_grid;
  for (int ix = 40; ix < 46; ++ix)
    for (int iy = 0; iy < 120; ++iy)
      for (int iz = 0; iz < 120; ++iz) walled.set({ix, iy, iz});
  const std::vector<VoxelGrid3> wgrids{walled, walled};
  const double blocked = avg_visibility(front, wgrids, states, eps);

  // Split view: a unit cube seen from two opposite diagonal corners.
  OrientedBox cube;
  cube.half_extents = Vec3::Constant(0.5);
  const VoxelGrid3 cube_grid = overlay_state(empty, std::vector<OrientedBox>{cube});
  const auto cube_pts = sample_mesh_surface_count(box_mesh(Vec3::Ones()), 1200, 6);
  const CameraView a = look_at(Vec3::Constant(-2.2), Vec3::Zero());
  const CameraView b = look_at(Vec3::Constant(2.2), Vec3::Zero());
  int face_a = 0, face_b = 0;
  for (const auto& p : cube_pts) {
    Eigen::Index axis;
    p.cwiseAbs().maxCoeff(&axis);
    Vec3 n = Vec3::Zero();
    n[axis] = p[axis] > 0 ? 1.0 : -1.0;
    face_a += oracle::face_visible(a, p, n) ? 1 : 0;
    face_b += oracle::face_visible(b, p, n) ? 1 : 0;
  }
  const double n = static_cast<double>(cube_pts.size());
  const double sa = object_visibility(std::vector<CameraView>{a}, cube_grid, cube_pts, eps);
  const double sb = object_visibility(std::vector<CameraView>{b}, cube_grid, cube_pts, eps);
  const double both = object_visibility(std::vector<CameraView>{a, b}, cube_grid, cube_pts, eps);

  v.detail << "open " << open << ", walled " << blocked << ", split A " << sa << " (faces " << face_a / n << "), B "
           << sb << " (faces " << face_b / n << "), combined " << both;
  v.require(open == 1.0, "open scene below 1.0");
  v.require(blocked == 0.0, "wall leaks");
  v.require(sa >= 0.45 && sa <= 0.55 && sb >= 0.45 && sb <= 0.55, "single camera outside [0.45, 0.55]");
  v.require(face_a / n >= 0.45 && face_a / n <= 0.55 && face_b / n >= 0.45 && face_b / n <= 0.55,
            "face oracle outside [0.45, 0.55]");
  v.require(std::abs(sa - face_a / n) <= 0.05 && std::abs(sb - face_b / n) <= 0.05, "disagrees with the face oracle");
  v.require(both >= 0.95, "combined below 0.95");
  return v;
}

Verdict nsga_vs_exhaustive() {
  Verdict v;
  const auto t0 = Clock::now();
  double worst_ratio = 1.0;
  int foreign = 0;
  for (int seed = 0; seed < 10; ++seed) {
    std::mt19937_64 rng(300 + seed);
    const int n = 20 + seed;
    std::vector<CandidateViewpoint> cands;
    std::uniform_real_distribution<double> ang(0.0, 2 * kPi);
    std::uniform_real_distribution<double> rad(2.0, 8.0);
    for (int i = 0; i < n; ++i) {
      const double phi = ang(rng), r = rad(rng);
      CandidateViewpoint c;
      c.id = i;
      c.view = look_at(Vec3(r * std::cos(phi), r * std::sin(phi), 1.2), uniform_in(rng, Vec3(-1, -1, 0), Vec3(1, 1, 1.5)),
                       CameraIntrinsics{deg2rad(45), deg2rad(60), 10.0});
      cands.push_back(c);
    }
    const MotionEnvelope env = testing_support::random_envelope(rng, 320, Vec3(-1.2, -1.2, 0), Vec3(1.2, 1.2, 1.8));
    const CombinationEvaluator eval(cands, env);
    std::vector<ObjectiveVector> all;
    double max_d = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) {
        all.push_back(eval({i, j}));
        max_d = std::max(max_d, all.back().distance);
      }
    std::vector<ObjectiveVector> true_front;
    const auto fronts = oracle::peel_fronts(all);
    for (auto i : fronts[0]) true_front.push_back(all[i]);

    Nsga2Params p;
    p.seed = stage_seed(seed, 3);
    const auto front = nsga2_run(cands.size(), p, eval);
    std::vector<ObjectiveVector> found;
    for (const auto& ind : front) {
      bool dominated = false;
      for (const auto& o : all) dominated = dominated || oracle::pareto_dominates(o, ind.objectives);
      foreign += dominated ? 1 : 0;
      found.push_back(ind.objectives);
    }
    const double ref = max_d + 1.0;
    worst_ratio = std::min(worst_ratio, oracle::hypervolume(found, ref) / oracle::hypervolume(true_front, ref));
  }
  const double t = seconds_since(t0);
  v.detail << "10 seeds, dominated members " << foreign << ", worst hypervolume ratio " << worst_ratio << ", " << t
           << " s";
  v.require(foreign == 0, "front member dominated by an exhaustive pair");
  v.require(worst_ratio >= 0.95, "hypervolume below 95%");
  v.require(t < 60.0, "too slow");
  return v;
}

Verdict sorting_and_crowding() {
  Verdict v;
  std::mt19937_64 rng(404);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int sort_mismatch = 0, crowd_mismatch = 0, boundary_miss = 0;
  for (int pop = 0; pop < 100; ++pop) {
    std::vector<ObjectiveVector> objs;
    for (int i = 0; i < 200; ++i) objs.push_back({u(rng), 10.0 * u(rng)});
    const auto fronts = fast_nondominated_sort(objs);
    const auto ref = oracle::peel_fronts(objs);
    if (fronts.size() != ref.size()) {
      ++sort_mismatch;
      continue;
    }
    for (std::size_t f = 0; f < ref.size(); ++f) {
      if (std::set<std::size_t>(fronts[f].begin(), fronts[f].end()) != ref[f]) ++sort_mismatch;
      std::vector<ObjectiveVector> members;
      for (auto i : fronts[f]) members.push_back(objs[i]);
      const auto got = crowding_distance(members);
      const auto want = oracle::scan_crowding(members);
      double lo_c = 2, hi_c = -1, lo_d = 1e9, hi_d = -1;
      for (const auto& m : members) {
        lo_c = std::min(lo_c, m.coverage);
        hi_c = std::max(hi_c, m.coverage);
        lo_d = std::min(lo_d, m.distance);
        hi_d = std::max(hi_d, m.distance);
      }
      for (std::size_t i = 0; i < members.size(); ++i) {
        const bool same = std::isinf(want[i]) ? std::isinf(got[i]) : std::abs(got[i] - want[i]) <= 1e-12;
        crowd_mismatch += same ? 0 : 1;
        const bool boundary = members[i].coverage == lo_c || members[i].coverage == hi_c ||
                              members[i].distance == lo_d || members[i].distance == hi_d;
        if (boundary && !std::isinf(got[i])) ++boundary_miss;
      }
    }
  }
  v.detail << "100 populations of 200: sort mismatches " << sort_mismatch << ", crowding mismatches "
           << crowd_mismatch << ", finite boundary values " << boundary_miss;
  v.require(sort_mismatch == 0, "sort");
  v.require(crowd_mismatch == 0, "crowding");
  v.require(boundary_miss == 0, "boundary");
  return v;
}

Verdict paths_and_assignment() {
  Verdict v;
  std::mt19937_64 rng(505);
  int path_mismatch = 0, reachable = 0;
  for (int trial = 0; trial < 20; ++trial) {
    OccupancyGrid2 g(Vec2::Zero(), 0.25, 50, 50);
    std::bernoulli_distribution occ(0.3);
    for (int y = 0; y < 50; ++y)
      for (int x = 0; x < 50; ++x)
        if (occ(rng)) g.set(x, y);
    std::uniform_int_distribution<int> cell(0, 49);
    const Cell s{cell(rng), cell(rng)}, t{cell(rng), cell(rng)};
    g.set(s.x, s.y, false);
    g.set(t.x, t.y, false);
    const auto got = shortest_path(g, s, t);
    const auto want = oracle::ucs(g, s.x, s.y, t.x, t.y);
    if (got.has_value() != want.has_value()) {
      ++path_mismatch;
      continue;
    }
    if (!got) continue;
    ++reachable;
    if (got->steps.cardinal != want->a || got->steps.diagonal != want->b) ++path_mismatch;
  }

  int assign_mismatch = 0, cases = 0;
  std::uniform_real_distribution<double> u(-10.0, 10.0);
  for (int robots = 1; robots <= 4; ++robots)
    for (int vps = 1; vps <= robots; ++vps)
      for (int trial = 0; trial < 250; ++trial) {
        CostMatrix c(robots, std::vector<double>(vps));
        for (auto& row : c)
          for (auto& x : row) x = u(rng);
        ++cases;
        if (std::abs(assign(c).total_cost - oracle::brute_assignment(c)) > 1e-9) ++assign_mismatch;
      }

  int sign_mismatch = 0;
  for (int mask = 0; mask < 16; ++mask)
    for (int mag = 0; mag < 5; ++mag) {
      CostMatrix c(2, std::vector<double>(2));
      for (int k = 0; k < 4; ++k) c[k / 2][k % 2] = ((mask >> k) & 1 ? 1.0 : -1.0) * (1.0 + 0.7 * ((k + mag) % 4));
      const auto a = assign(c);
      const double keep = c[0][0] + c[1][1];
      const double swap = c[0][1] + c[1][0];
      const std::vector<int> expect = keep <= swap ? std::vector<int>{0, 1} : std::vector<int>{1, 0};
      if (a.robot_to_viewpoint != expect || std::abs(a.total_cost - std::min(keep, swap)) > 1e-12) ++sign_mismatch;
    }

  v.detail << "20 grids (" << reachable << " reachable) path mismatches " << path_mismatch << "; " << cases
           << " assignments mismatches " << assign_mismatch << "; 2x2 sign patterns mismatches " << sign_mismatch;
  v.require(path_mismatch == 0, "path");
  v.require(assign_mismatch == 0, "assignment");
  v.require(sign_mismatch == 0, "2x2");
  return v;
}

Verdict case_study() {
  Verdict v;
  const auto t0 = Clock::now();
  const Scene scene = load_scene(testing_support::scene_path("single_room"));
  PipelineConfig base;
  v.require(base.sample_count == 800 && base.c_single == 0.5 && base.c_single_target == 0.4 &&
                base.nsga.population == 200 && base.nsga.generations == 70 && base.coverage_threshold == 0.97,
            "defaults differ from the case-study parameters");
  for (std::uint64_t seed : {1, 2, 3})
    for (Operation op : {Operation::Pick, Operation::Place}) {
      PipelineConfig c = base;
      c.seed = seed;
      const RunReport r = run_selection(scene, c, op, 1).report;
      double max_d = 0.0;
      for (const auto& vp : r.viewpoints) max_d = std::max(max_d, vp.d_envelope);
      v.detail << " " << to_string(op) << "/s" << seed << ": C=" << r.coverage;
      if (r.avg_visibility) v.detail << " vis=" << *r.avg_visibility;
      v.detail << " dmax=" << max_d << ";";
      const std::string tag = to_string(op) + " seed " + std::to_string(seed);
      v.require(r.kind == SelectionOutcome::Kind::Combination && r.viewpoints.size() == 2, tag + " not a pair");
      v.require(!r.below_threshold && r.coverage >= 0.97, tag + " coverage");
      v.require(max_d <= 10.0, tag + " distance");
      if (op == Operation::Place) v.require(r.avg_visibility && *r.avg_visibility >= 0.70, tag + " visibility");
    }
  const double t = seconds_since(t0);
  v.detail << " " << t << " s";
  v.require(t < 300.0, "too slow");
  return v;
}

Verdict funnel_and_determinism() {
  Verdict v;
  int runs = 0;
  for (const auto& name : testing_support::bundled_scenes()) {
    const Scene s = load_scene(testing_support::scene_path(name));
    for (const auto& tr : s.trajectories) {
      PipelineConfig c;
      c.seed = 11;
      const RunReport a = run_selection(s, c, tr.operation, tr.target).report;
      const RunReport b = run_selection(s, c, tr.operation, tr.target).report;
      ++runs;
      v.require(a.to_json().dump() == b.to_json().dump(), name + "/" + tr.name + " not byte-identical");
      const auto f = a.funnel.as_vector();
      for (std::size_t i = 1; i < f.size(); ++i) v.require(f[i] <= f[i - 1], name + "/" + tr.name + " funnel grows");
    }
  }
  v.detail << runs << " trajectories run twice each";
  return v;
}

Verdict kinematics() {
  Verdict v;
  using testing_support::link;
  const double l1 = 0.8, l2 = 0.55;
  const KinematicChain planar({
      link("l1", -1, Pose3::identity(), JointKind::Revolute, Vec3::UnitZ(), -kPi, kPi, box_mesh(Vec3(l1, 0.1, 0.1))),
      link("l2", 0, Pose3::translation(Vec3(l1, 0, 0)), JointKind::Revolute, Vec3::UnitZ(), -kPi, kPi),
      link("tip", 1, Pose3::translation(Vec3(l2, 0, 0))),
  });
  std::mt19937_64 rng(909);
  std::uniform_real_distribution<double> a(-kPi, kPi);
  double planar_err = 0.0;
  for (int i = 0; i < 500; ++i) {
    const double t1 = a(rng), t2 = a(rng);
    const Vec3 tip = forward_kinematics(planar, JointConfig{0, 0, 0, {t1, t2}}).links[2].position();
    const Vec3 expect(l1 * std::cos(t1) + l2 * std::cos(t1 + t2), l1 * std::sin(t1) + l2 * std::sin(t1 + t2), 0);
    planar_err = std::max(planar_err, (tip - expect).norm());
  }

  double chain_err = 0.0;
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int c = 0; c < 50; ++c) {
    std::vector<Link> links;
    std::uniform_int_distribution<int> kind(0, 2);
    std::uniform_int_distribution<int> n_links(2, 9);
    const int n = n_links(rng);
    for (int i = 0; i < n; ++i) {
      const int k = kind(rng);
      const JointKind jk = k == 0 ? JointKind::Revolute : k == 1 ? JointKind::Prismatic : JointKind::Fixed;
      std::uniform_int_distribution<int> parent(-1, i - 1);
      links.push_back(link("j" + std::to_string(i), parent(rng),
                           Pose3::from_xyz_rpy(Vec3(u(rng), u(rng), u(rng)), 3.0 * Vec3(u(rng), u(rng), u(rng))), jk,
                           Vec3(u(rng), u(rng), u(rng)).normalized(), -3.0, 3.0));
    }
    const KinematicChain chain(std::move(links));
    for (int s = 0; s < 20; ++s) {
      JointConfig st{3 * u(rng), 3 * u(rng), 3 * u(rng), {}};
      for (std::size_t q = 0; q < chain.movable_count(); ++q) st.joints.push_back(3 * u(rng));
      const auto fk = forward_kinematics(chain, st);
      const auto ref = oracle::matrix_fk(chain, st);
      for (std::size_t i = 0; i < chain.size(); ++i) {
        chain_err = std::max(chain_err, (fk.links[i].position() - ref[i].topRightCorner<3, 1>()).norm());
        chain_err = std::max(chain_err, (fk.links[i].rotation() - ref[i].topLeftCorner<3, 3>()).cwiseAbs().maxCoeff());
      }
    }
  }

  int count_mismatch = 0, trajectories = 0;
  for (const auto& name : testing_support::bundled_scenes()) {
    const Scene s = load_scene(testing_support::scene_path(name));
    for (const auto& tr : s.trajectories) {
      const Trajectory traj = tr.expand();
      const auto obj = s.attached_object(tr);
      const std::size_t l = s.construction.geometric_count() + (obj ? 1 : 0);
      const MotionEnvelope env = motion_envelope(s.construction, traj, obj ? &*obj : nullptr);
      ++trajectories;
      if (env.size() != 8 * traj.size() * l) ++count_mismatch;
    }
  }
  v.detail << "planar max error " << planar_err << ", random-chain max error " << chain_err << ", |G(s)| = 8KL on "
           << trajectories - count_mismatch << "/" << trajectories << " trajectories";
  v.require(planar_err <= 1e-9, "planar");
  v.require(chain_err <= 1e-9, "chain");
  v.require(count_mismatch == 0, "envelope size");
  return v;
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria{
      {"coverage equals per-point frustum oracle", coverage_oracle},
      {"ray traversal equals dense march", ray_traversal},
      {"visibility extremes", visibility_extremes},
      {"NSGA-II front against exhaustive pairs", nsga_vs_exhaustive},
      {"non-dominated sort and crowding", sorting_and_crowding},
      {"pathfinding and assignment", paths_and_assignment},
      {"single-room case study", case_study},
      {"funnel monotone and deterministic reports", funnel_and_determinism},
      {"kinematics and envelope size", kinematics},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Verdict v;
    try {
      v = criteria[i].second();
    } catch (const std::exception& e) {
      v.pass = false;
      v.detail << "exception: " << e.what();
    }
    std::printf("%s %zu: %s -- %s\n", v.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(),
                v.detail.str().c_str());
    std::fflush(stdout);
    failed += v.pass ? 0 : 1;
  }
  return failed == 0 ? 0 : 1;
}
