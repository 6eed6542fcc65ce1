#pragma once

#include <chrono>
#include <optional>
#include <string>
#include <vector>

#include "realpoints/start_system.hpp"
#include "realpoints/witness.hpp"

namespace realpoints {

/// Parameters (z, gamma, y, alpha) of the critical-point homotopy. z and y
/// are real; gamma and alpha are generically complex. Invariants: every z_i
/// is nonzero, y is not a real root of f, alpha has N-d+1 entries.
struct CriticalConfig {
  RVec z;
  Complex gamma{1.0, 0.0};
  RVec y;
  CVec alpha;
  std::uint64_t seed = 0;
};

/// Partially pinned configuration; unset fields are drawn by draw_generic.
struct ConfigTemplate {
  std::optional<RVec> z;
  std::optional<Complex> gamma;
  std::optional<RVec> y;
  std::optional<CVec> alpha;
};

inline void validate_critical_config(const PolynomialSystem& f, int d,
                                     const CriticalConfig& cfg) {
  const int N = f.var_count();
  if (!(N > d && d > 0))
    throw ConfigError("need N > d > 0 (N=" + std::to_string(N) +
                      ", d=" + std::to_string(d) + ")");
  const int n = N - d;
  if (f.size() != n)
    throw ConfigError("system must have N-d = " + std::to_string(n) +
                      " equations, got " + std::to_string(f.size()) +
                      " (apply the sum-of-squares reduction first)");
  if (cfg.z.size() != n)
    throw ConfigError("z must have length N-d = " + std::to_string(n));
  for (int i = 0; i < n; ++i)
    if (cfg.z[i] == 0.0) throw ConfigError("z entries must be nonzero");
  if (cfg.y.size() != N)
    throw ConfigError("y must have length N = " + std::to_string(N));
  CVec yc(N);
  for (int v = 0; v < N; ++v) yc[v] = cfg.y[v];
  if (f.eval(yc).norm() <= 1e-8)
    throw ConfigError("y must not be a real root of f (||f(y)|| <= 1e-8)");
  if (cfg.alpha.size() != n + 1)
    throw ConfigError("alpha must have length N-d+1 = " + std::to_string(n + 1));
  if (cfg.gamma == 0.0) throw ConfigError("gamma must be nonzero");
}

/// Draw the unset parameters: complex scalars uniform on the unit circle,
/// complex vectors unit-norm with uniform phases, real vectors uniform in
/// [-1,1] normalized, re-drawn until the config invariants hold.
inline CriticalConfig draw_generic(const PolynomialSystem& f, int d,
                                   const ConfigTemplate& tmpl,
                                   std::uint64_t seed) {
  const int N = f.var_count();
  const int n = N - d;
  Rng rng(mix_seed(seed, 0x636f6e66ULL));
  CriticalConfig cfg;
  cfg.seed = seed;
  if (tmpl.z) {
    cfg.z = *tmpl.z;
  } else {
    for (int tries = 0;; ++tries) {
      cfg.z = rng.unit_real_vector(n);
      if (cfg.z.cwiseAbs().minCoeff() > 1e-6) break;
      if (tries >= 100) throw ConfigError("could not draw z with nonzero entries");
    }
  }
  cfg.gamma = tmpl.gamma ? *tmpl.gamma : rng.unit_complex();
  if (tmpl.y) {
    cfg.y = *tmpl.y;
  } else {
    for (int tries = 0;; ++tries) {
      cfg.y = rng.unit_real_vector(N);
      CVec yc(N);
      for (int v = 0; v < N; ++v) yc[v] = cfg.y[v];
      if (f.eval(yc).norm() > 1e-8) break;
      if (tries >= 100)
        throw ConfigError("could not draw y off the real variety");
    }
  }
  cfg.alpha = tmpl.alpha ? *tmpl.alpha : rng.unit_complex_vector(n + 1);
  validate_critical_config(f, d, cfg);
  return cfg;
}

/// The critical-point homotopy: unknowns (x, lambda), equations
///   f(x) - t*gamma*z
///   lambda_0 (x - y) + lambda_1 grad f_1(x)^T + ... + lambda_{N-d} grad f_{N-d}(x)^T
///   alpha_0 lambda_0 + ... + alpha_{N-d} lambda_{N-d} - 1
/// At t=0 this is the patched Fritz John system of the distance function
/// from y; at t=1 the first block is f - gamma*z.
inline Homotopy build_critical_homotopy(const PolynomialSystem& f, int d,
                                        const CriticalConfig& cfg) {
  validate_critical_config(f, d, cfg);
  const int N = f.var_count();
  const int n = N - d;
  const int M = 2 * N - d + 1;  // unknowns: N x's and N-d+1 lambdas
  const int T = M;              // index of t in homotopy variable space

  auto lift = [&](const Polynomial& p) { return lift_to_homotopy(p, M); };
  auto var = [&](int idx, Complex c = 1.0) {
    return Polynomial::variable(M + 1, idx, c);
  };
  const int lam0 = N;

  std::vector<Polynomial> rows;
  rows.reserve(M);
  for (int i = 0; i < n; ++i)
    rows.push_back(lift(f[i]) - var(T, cfg.gamma * cfg.z[i]));
  for (int j = 0; j < N; ++j) {
    Polynomial row =
        var(lam0) * (var(j) - Polynomial::constant(M + 1, cfg.y[j]));
    for (int i = 0; i < n; ++i)
      row = row + var(lam0 + 1 + i) * lift(f.gradient(i, j));
    rows.push_back(std::move(row));
  }
  Polynomial patch = Polynomial::constant(M + 1, -1.0);
  for (int k = 0; k <= n; ++k) patch = patch + var(lam0 + k, cfg.alpha[k]);
  rows.push_back(std::move(patch));

  std::vector<std::string> vars = f.variables();
  for (int k = 0; k <= n; ++k) vars.push_back("_l" + std::to_string(k));
  vars.push_back("_t");

  Homotopy h;
  h.sys = PolynomialSystem(std::move(vars), std::move(rows));
  std::vector<int> xg(N), lg(n + 1);
  for (int v = 0; v < N; ++v) xg[v] = v;
  for (int k = 0; k <= n; ++k) lg[k] = N + k;
  h.groups = {xg, lg};
  h.params = HomotopyParams{cfg.z, cfg.gamma, cfg.y, cfg.alpha};
  return h;
}

// --- point-set utilities -----------------------------------------------

struct PointClusters {
  std::vector<CVec> reps;                 // pairwise distances >= tol
  std::vector<std::vector<int>> members;  // input indices per cluster
};

/// Greedy clustering by Euclidean distance with running-mean representatives,
/// followed by merge passes until all representatives are tol-separated.
inline PointClusters cluster_points(const std::vector<CVec>& pts, double tol) {
  PointClusters c;
  for (int i = 0; i < int(pts.size()); ++i) {
    bool placed = false;
    for (std::size_t k = 0; k < c.reps.size(); ++k) {
      if ((pts[i] - c.reps[k]).norm() < tol) {
        c.members[k].push_back(i);
        CVec sum = CVec::Zero(pts[i].size());
        for (int idx : c.members[k]) sum += pts[idx];
        c.reps[k] = sum / double(c.members[k].size());
        placed = true;
        break;
      }
    }
    if (!placed) {
      c.reps.push_back(pts[i]);
      c.members.push_back({i});
    }
  }
  // merge clusters whose means drifted within tol of each other
  bool merged = true;
  while (merged) {
    merged = false;
    for (std::size_t a = 0; a < c.reps.size() && !merged; ++a) {
      for (std::size_t b = a + 1; b < c.reps.size() && !merged; ++b) {
        if ((c.reps[a] - c.reps[b]).norm() < tol) {
          for (int idx : c.members[b]) c.members[a].push_back(idx);
          CVec sum = CVec::Zero(c.reps[a].size());
          for (int idx : c.members[a]) sum += pts[idx];
          c.reps[a] = sum / double(c.members[a].size());
          c.reps.erase(c.reps.begin() + b);
          c.members.erase(c.members.begin() + b);
          merged = true;
        }
      }
    }
  }
  return c;
}

/// Collapse coincident points; representatives are component-wise means.
inline std::vector<CVec> dedup_points(const std::vector<CVec>& pts,
                                      double tol) {
  return cluster_points(pts, tol).reps;
}

/// Set equality up to tolerance via greedy bijection.
inline bool set_match(const std::vector<CVec>& a, const std::vector<CVec>& b,
                      double tol) {
  if (a.size() != b.size()) return false;
  std::vector<bool> used(b.size(), false);
  for (const auto& p : a) {
    bool found = false;
    for (std::size_t j = 0; j < b.size(); ++j) {
      if (!used[j] && (p - b[j]).norm() < tol) {
        used[j] = true;
        found = true;
        break;
      }
    }
    if (!found) return false;
  }
  return true;
}

// --- reality classification ---------------------------------------------

/// A candidate endpoint with two independent numerical approximations
/// (the endgame's last two radius estimates).
struct TwoApprox {
  CVec first;
  CVec second;
};

struct RealClassification {
  std::vector<RVec> real_points;        // real parts, same order as indices
  std::vector<int> real_indices;
  std::vector<int> borderline_indices;  // real in exactly one approximation
};

inline double max_imag(const CVec& v) {
  double m = 0.0;
  for (Eigen::Index i = 0; i < v.size(); ++i)
    m = std::max(m, std::abs(v[i].imag()));
  return m;
}

/// A point is real exactly when every imaginary part is below tol in both
/// approximations; points real in only one approximation are borderline.
inline RealClassification classify_real(const std::vector<TwoApprox>& pts,
                                        double tol) {
  RealClassification rc;
  for (int i = 0; i < int(pts.size()); ++i) {
    bool r1 = max_imag(pts[i].first) < tol;
    bool r2 = max_imag(pts[i].second) < tol;
    if (r1 && r2) {
      rc.real_indices.push_back(i);
      rc.real_points.push_back(pts[i].first.real());
    } else if (r1 || r2) {
      rc.borderline_indices.push_back(i);
    }
  }
  return rc;
}

// --- Procedure Real -------------------------------------------------------

struct RealOptions {
  double tol_dedup = 1e-6;
  double tol_real = 1e-6;
  double tol_member = 1e-6;
  int jobs = 1;
  bool check_start_count = false;  // re-solve the start stage with seed+1
};

/// Full output of one run: the verification flag v, the computed sets S, E,
/// E1, R, per-path results, and the configuration echo.
struct RealRunReport {
  bool verified = false;
  std::string failure_reason;

  std::vector<CVec> S;           // nonsingular solutions of H(.,1)=0
  std::vector<CVec> E;           // deduplicated full (x,lambda) endpoints
  std::vector<CVec> E1;          // deduplicated x-space limit points
  std::vector<bool> e1_real;     // per E1 point
  std::vector<bool> e1_on_v;     // per E1 point; false unless tested and on V
  std::vector<RVec> R;           // real points on V
  std::vector<CVec> borderline;  // real in exactly one approximation

  std::vector<PathResult> paths;  // stage-3 path results, by start index
  StartSolveDiag start_diag;
  CriticalConfig config;
  int dimension = 0;
  int start_paths = 0;
  int membership_inconclusive = 0;
  bool start_count_warning = false;
  double time_start_s = 0, time_track_s = 0, time_member_s = 0;
};

/// Procedure Real. Steps: (1) build the critical-point homotopy H;
/// (2) solve H(.,1)=0 through a 2-homogeneous linear-product start and
/// verify the solutions are finite and nonsingular; (3) track every path to
/// t=0, assemble E and E1, and check pi(E) = E1; (4) keep the real points of
/// E1 and, when a witness set is given, filter them by the homotopy
/// membership test. Any verification failure returns verified=false, R empty.
inline RealRunReport run_real(const PolynomialSystem& f,
                              const std::optional<WitnessSet>& witness, int d,
                              const CriticalConfig& cfg,
                              const TrackOptions& topts = {},
                              const RealOptions& ropts = {}) {
  using clock = std::chrono::steady_clock;
  auto seconds = [](clock::time_point a, clock::time_point b) {
    return std::chrono::duration<double>(b - a).count();
  };

  validate_critical_config(f, d, cfg);
  if (witness) {
    if (witness->f.var_count() != f.var_count())
      throw ConfigError("witness set is over a different variable count");
  }

  RealRunReport rep;
  rep.config = cfg;
  rep.dimension = d;

  // Step 1: the homotopy and its 2-homogeneous structure
  Homotopy H = build_critical_homotopy(f, d, cfg);
  MultiHomStructure st = multihom_structure(H.at_t(1.0), H.groups);
  rep.start_paths = int(multihomog_bezout(st));

  // Step 2: start solutions S
  auto t0 = clock::now();
  rep.S = solve_start(H, st, mix_seed(cfg.seed, 1), topts, ropts.jobs,
                      &rep.start_diag);
  rep.time_start_s = seconds(t0, clock::now());
  if (rep.start_diag.failures > 0) {
    rep.failure_reason = "start stage: " +
                         std::to_string(rep.start_diag.failures) +
                         " path(s) failed, S cannot be certified complete";
    return rep;
  }
  if (rep.start_diag.singular_discarded > 0) {
    rep.failure_reason =
        "start stage: H(.,1)=0 has singular solutions, the start solutions "
        "are not all nonsingular";
    return rep;
  }
  if (ropts.check_start_count) {
    StartSolveDiag diag2;
    auto S2 = solve_start(H, st, mix_seed(cfg.seed, 1) + 1, topts, ropts.jobs,
                          &diag2);
    rep.start_count_warning = (S2.size() != rep.S.size());
  }

  // Step 3: track each start solution to t=0
  auto t1 = clock::now();
  Rng patch_rng(mix_seed(cfg.seed, 2));
  TrackContext ctx(H, patch_rng, topts);
  const int ns = int(rep.S.size());
  rep.paths.resize(ns);
  parallel_for(ns, ropts.jobs, [&](int i) {
    PathTracker tracker(ctx);
    rep.paths[i] = tracker.track(rep.S[i], i);
  });
  rep.time_track_s = seconds(t1, clock::now());

  int failed = 0;
  std::vector<CVec> e_points, e1_points;
  std::vector<TwoApprox> e1_approx;
  for (const auto& r : rep.paths) {
    if (r.status == PathStatus::failed) {
      ++failed;
      continue;
    }
    if (r.status == PathStatus::converged ||
        r.status == PathStatus::converged_singular) {
      e_points.push_back(r.endpoint);
      e1_points.push_back(r.x_endpoint);
      e1_approx.push_back({r.x_endpoint, r.x_endpoint_prev});
    } else if (r.status == PathStatus::x_converged_lambda_diverged) {
      e1_points.push_back(r.x_endpoint);
      e1_approx.push_back({r.x_endpoint, r.x_endpoint_prev});
    }
  }
  if (failed > 0) {
    rep.failure_reason =
        "tracking stage: " + std::to_string(failed) + " path(s) failed";
    return rep;
  }

  PointClusters e_clusters = cluster_points(e_points, ropts.tol_dedup);
  rep.E = e_clusters.reps;
  PointClusters e1_clusters = cluster_points(e1_points, ropts.tol_dedup);
  rep.E1 = e1_clusters.reps;

  // pi(E) vs E1, both as deduplicated sets
  const int N = f.var_count();
  std::vector<CVec> pi_e;
  for (const auto& e : rep.E) pi_e.push_back(e.head(N));
  pi_e = dedup_points(pi_e, ropts.tol_dedup);
  if (!set_match(pi_e, rep.E1, 1e-6)) {
    rep.failure_reason = "pi(E) != E1";
    return rep;
  }

  // reality classification with the two endgame approximations of the
  // first path landing in each cluster
  std::vector<TwoApprox> cluster_approx;
  for (const auto& members : e1_clusters.members)
    cluster_approx.push_back(e1_approx[members.front()]);
  RealClassification rc = classify_real(cluster_approx, ropts.tol_real);
  rep.e1_real.assign(rep.E1.size(), false);
  for (int idx : rc.real_indices) rep.e1_real[idx] = true;
  for (int idx : rc.borderline_indices) rep.borderline.push_back(rep.E1[idx]);

  // Step 4: membership filter against the witness set (skipped for the
  // full-variety marker, where R = E1 intersect R^N)
  auto t2 = clock::now();
  rep.e1_on_v.assign(rep.E1.size(), false);
  for (std::size_t k = 0; k < rc.real_indices.size(); ++k) {
    int idx = rc.real_indices[k];
    const RVec& rp = rc.real_points[k];
    bool on_v = true;
    if (witness) {
      CVec pc(rp.size());
      for (Eigen::Index v = 0; v < rp.size(); ++v) pc[v] = rp[v];
      MembershipResult mr =
          membership_test(*witness, pc, ropts.tol_member,
                          mix_seed(cfg.seed, 1000 + idx), topts, ropts.jobs);
      if (mr.verdict == MembershipVerdict::inconclusive) {
        ++rep.membership_inconclusive;
        on_v = false;
      } else {
        on_v = (mr.verdict == MembershipVerdict::member);
      }
    }
    rep.e1_on_v[idx] = on_v;
    if (on_v) rep.R.push_back(rp);
  }
  rep.time_member_s = seconds(t2, clock::now());

  rep.verified = true;
  return rep;
}

}  // namespace realpoints
