#pragma once

#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <vector>

#include "realpoints/homotopy.hpp"

namespace realpoints {

struct TrackOptions {
  double initial_step = 0.1;
  double min_step = 1e-14;
  double corrector_tol = 1e-10;
  int max_corrector_iters = 3;
  double step_expand = 2.0;
  double step_contract = 0.5;
  double endgame_t = 0.01;        // hand off to the endgame at this t
  double endgame_shrink = 0.5;    // radius factor between endgame estimates
  int max_endgame_cycles = 8;     // max winding number the endgame resolves
  double infinity_threshold = 1e12;  // in normalized patch coordinates

  // engineering knobs, not part of the core contract
  int successes_before_expand = 5;
  int endgame_samples_per_cycle = 16;
  int max_endgame_shrinks = 30;
  double endgame_agreement_tol = 1e-9;
  double endpoint_residual_tol = 1e-8;
  double nonsingular_smin = 1e-8;
  double endpoint_infinity_tol = 1e-6;  // normalized homogenizer at endpoints
  int max_steps_per_path = 100000;
};

enum class PathStatus {
  converged,
  converged_singular,
  at_infinity,
  x_converged_lambda_diverged,
  failed
};

inline const char* to_string(PathStatus s) {
  switch (s) {
    case PathStatus::converged: return "converged";
    case PathStatus::converged_singular: return "converged-singular";
    case PathStatus::at_infinity: return "at-infinity";
    case PathStatus::x_converged_lambda_diverged:
      return "x-converged-lambda-diverged";
    case PathStatus::failed: return "failed";
  }
  return "?";
}

/// Outcome of tracking one solution path. For converged statuses `endpoint`
/// holds the affine limit of all unknowns; `x_endpoint` holds the limit of
/// the first variable group whenever that limit exists. The `*_prev` fields
/// are the endgame's previous-radius estimates and serve as the second,
/// independent numerical approximation of the same point.
struct PathResult {
  PathStatus status = PathStatus::failed;
  CVec endpoint;
  CVec endpoint_prev;
  CVec x_endpoint;
  CVec x_endpoint_prev;
  int winding = 0;
  double residual = std::numeric_limits<double>::quiet_NaN();
  double smin = 0.0;  // row-scaled smallest singular value at the endpoint
  int steps = 0;
  int start_index = -1;
};

struct NewtonResult {
  CVec point;
  bool converged = false;
  double residual = std::numeric_limits<double>::quiet_NaN();
};

/// Undamped Newton iteration on a square system. Converged means the update
/// norm dropped below tol within maxit iterations; a singular linear solve
/// reports converged=false at the triggering iterate.
inline NewtonResult newton_correct(const PolynomialSystem& sys, const CVec& x0,
                                   double tol, int maxit) {
  if (sys.size() != sys.var_count())
    throw std::invalid_argument("newton_correct: system is not square");
  NewtonResult r;
  r.point = x0;
  for (int it = 0; it < maxit; ++it) {
    CVec f = sys.eval(r.point);
    Eigen::FullPivLU<CMat> lu(sys.jacobian(r.point));
    if (!lu.isInvertible()) {
      r.converged = false;
      r.residual = f.norm();
      return r;
    }
    CVec dx = lu.solve(-f);
    if (!is_finite(dx)) {
      r.converged = false;
      r.residual = f.norm();
      return r;
    }
    r.point += dx;
    if (dx.norm() < tol) {
      r.converged = true;
      break;
    }
  }
  r.residual = sys.eval(r.point).norm();
  return r;
}

/// Shared immutable state for tracking many paths of one homotopy: the
/// affine homotopy, its group-homogenized form, the t=0 and t=1 affine
/// specializations, and a prototype evaluator threads copy from.
struct TrackContext {
  Homotopy affine;
  CompactHomotopy compact;
  PolynomialSystem at0;
  PolynomialSystem at1;
  TrackOptions opts;
  SystemEvaluator eval_prototype;
  int rows = 0;  // polynomial rows in the compact system

  TrackContext(const Homotopy& h, Rng& patch_rng, const TrackOptions& o)
      : affine(h), opts(o) {
    if (!affine.is_square())
      throw std::invalid_argument("TrackContext: homotopy is not square");
    if (affine.groups.empty()) {
      std::vector<int> all(affine.unknowns());
      for (int v = 0; v < affine.unknowns(); ++v) all[v] = v;
      affine.groups = {all};
    }
    compact = compactify(affine, patch_rng);
    at0 = affine.at_t(0.0);
    at1 = affine.at_t(1.0);
    rows = compact.sys.size();
    int cm = compact.layout.compact_unknowns();
    // evaluator order: H rows, then the Jacobian row-major over the compact
    // unknowns, then the t-partials
    std::vector<const Polynomial*> polys;
    for (int i = 0; i < rows; ++i) polys.push_back(&compact.sys[i]);
    for (int i = 0; i < rows; ++i)
      for (int j = 0; j < cm; ++j) polys.push_back(&compact.sys.gradient(i, j));
    for (int i = 0; i < rows; ++i) polys.push_back(&compact.sys.gradient(i, cm));
    eval_prototype = SystemEvaluator(polys, cm + 1);
  }
};

namespace detail {

/// Path of the parameter t over one tracked segment: a straight line in the
/// complex plane or a circular arc around the origin.
struct TSegment {
  bool arc = false;
  Complex t0, t1;                 // line endpoints
  double radius = 0, th0 = 0, th1 = 0;  // arc

  static TSegment line(Complex a, Complex b) {
    TSegment s;
    s.t0 = a;
    s.t1 = b;
    return s;
  }
  static TSegment circle_arc(double r, double a, double b) {
    TSegment s;
    s.arc = true;
    s.radius = r;
    s.th0 = a;
    s.th1 = b;
    return s;
  }
  Complex t_at(double s) const {
    if (!arc) return t0 + s * (t1 - t0);
    double th = th0 + s * (th1 - th0);
    return radius * Complex(std::cos(th), std::sin(th));
  }
  Complex dt_ds(double s) const {
    if (!arc) return t1 - t0;
    return Complex(0, th1 - th0) * t_at(s);
  }
  /// Length of the segment in t-space; step sizes are relative to this.
  double t_length() const {
    if (!arc) return std::abs(t1 - t0);
    return radius * std::abs(th1 - th0);
  }
};

}  // namespace detail

/// Tracks single paths of a compactified homotopy. One instance per thread;
/// holds mutable scratch and per-path patch state.
class PathTracker {
 public:
  explicit PathTracker(const TrackContext& ctx)
      : ctx_(ctx),
        eval_(ctx.eval_prototype),
        patches_(ctx.compact.default_patch) {
    const int cm = ctx_.compact.layout.compact_unknowns();
    buf_.resize(ctx_.rows * (cm + 2));
    H_.resize(cm);
    Ht_.resize(cm);
    J_.resize(cm, cm);
    point_.resize(cm + 1);
  }

  PathResult track(const CVec& start_affine, int start_index) {
    PathResult res;
    res.start_index = start_index;
    steps_ = 0;
    patches_ = ctx_.compact.default_patch;

    CVec W;
    try {
      W = ctx_.compact.embed(start_affine, patches_);
    } catch (const std::exception&) {
      return res;
    }
    if (!correct(W, Complex(1.0))) {
      res.steps = steps_;
      return res;  // start is not an adequate root of H(.,1)
    }

    // main phase: t from 1 down to the endgame boundary
    SegOut so =
        track_segment(W, detail::TSegment::line(1.0, ctx_.opts.endgame_t),
                      true, 1.0 / ctx_.opts.infinity_threshold);
    res.steps = steps_;
    if (so.kind == SegOut::Kind::diverged)
      return classify_truncated(res, W, so.group);
    if (so.kind != SegOut::Kind::ok) return res;  // failed

    // endgame phase from t_e
    EndOut eo = run_endgame(W);
    res.steps = steps_;
    res.winding = eo.winding;
    if (eo.diverged) return classify_truncated(res, eo.last, eo.group);
    if (!eo.ok) return res;
    return classify_endpoint(res, eo.est, eo.est_prev);
  }

  /// Cheap tracking mode for start stages, where only nonsingular finite
  /// endpoints matter: run straight to a tiny t, then Newton-polish against
  /// H(.,0). Divergent paths are cut off by a loose infinity tolerance or by
  /// step collapse while their coordinates are already large; no endgame.
  PathResult track_rush(const CVec& start_affine, int start_index) {
    const double t_small = 1e-8;
    const double inf_tol = 1e-6;
    PathResult res;
    res.start_index = start_index;
    steps_ = 0;
    patches_ = ctx_.compact.default_patch;

    CVec W;
    try {
      W = ctx_.compact.embed(start_affine, patches_);
    } catch (const std::exception&) {
      return res;
    }
    if (!correct(W, Complex(1.0))) {
      res.steps = steps_;
      return res;
    }
    SegOut so = track_segment(W, detail::TSegment::line(1.0, t_small), true,
                              inf_tol);
    res.steps = steps_;
    if (so.kind == SegOut::Kind::diverged)
      return classify_truncated(res, W, so.group);
    bool stalled = false;
    if (so.kind == SegOut::Kind::min_step) {
      // step collapse with clearly escaping coordinates counts as divergence
      double worst = 1.0;
      int worst_g = -1;
      for (int g = 0; g < ctx_.compact.layout.group_count(); ++g) {
        double h = ctx_.compact.normalized_hom(g, W);
        if (h < worst) {
          worst = h;
          worst_g = g;
        }
      }
      if (worst < 1e-3) return classify_truncated(res, W, worst_g);
      stalled = true;  // stalled near t=0 with healthy coordinates
    } else if (so.kind != SegOut::Kind::ok) {
      return res;
    }

    for (int g = 0; g < ctx_.compact.layout.group_count(); ++g)
      if (ctx_.compact.normalized_hom(g, W) < inf_tol)
        return classify_truncated(res, W, g);
    const auto& lay = ctx_.compact.layout;
    CVec w(lay.affine_unknowns);
    for (int g = 0; g < lay.group_count(); ++g)
      ctx_.compact.extract_group(g, W, w);
    // residual-based polish acceptance: the update norm stagnates above any
    // fixed tolerance on ill-conditioned systems even at machine-exact roots
    NewtonResult nr = newton_correct(ctx_.at0, w, 1e-11, 10);
    double scaled_res = nr.residual / (1.0 + nr.point.norm());
    double move = (nr.point - w).norm();
    double move_cap = (stalled ? 1e-1 : 1e-2) * (1.0 + w.norm());
    if (!(scaled_res < ctx_.opts.endpoint_residual_tol) || move > move_cap) {
      res.steps = steps_;
      return res;  // no clean finite endpoint
    }
    res.endpoint = nr.point;
    res.endpoint_prev = w;
    res.x_endpoint = group_block(0, nr.point);
    res.x_endpoint_prev = group_block(0, w);
    res.residual = scaled_res;
    res.smin = smin_row_scaled(ctx_.at0.jacobian(nr.point));
    res.steps = steps_;
    if (res.smin > ctx_.opts.nonsingular_smin) {
      res.winding = 1;
      res.status = PathStatus::converged;
    } else {
      res.status = PathStatus::converged_singular;
    }
    return res;
  }

  /// Endgame entry for callers that already sit on a path at t = t_e.
  struct EndgameOutcome {
    CVec endpoint, endpoint_prev;
    int winding = 0;
    bool ok = false;
  };
  EndgameOutcome endgame_from(const CVec& approach_affine, double t_e) {
    steps_ = 0;
    patches_ = ctx_.compact.default_patch;
    EndgameOutcome out;
    CVec W;
    try {
      W = ctx_.compact.embed(approach_affine, patches_);
    } catch (const std::exception&) {
      return out;
    }
    if (!correct(W, Complex(t_e))) return out;
    EndOut eo = run_endgame_at(W, t_e);
    if (!eo.ok || eo.diverged) return out;
    out.winding = eo.winding;
    const auto& lay = ctx_.compact.layout;
    CVec w(lay.affine_unknowns), wp(lay.affine_unknowns);
    for (int g = 0; g < lay.group_count(); ++g) {
      if (ctx_.compact.normalized_hom(g, eo.est) <
          ctx_.opts.endpoint_infinity_tol)
        return out;  // not a finite endpoint
      ctx_.compact.extract_group(g, eo.est, w);
      ctx_.compact.extract_group(g, eo.est_prev, wp);
    }
    out.endpoint = w;
    out.endpoint_prev = wp;
    out.ok = true;
    return out;
  }

 private:
  struct SegOut {
    enum class Kind { ok, min_step, diverged, max_steps } kind = Kind::ok;
    int group = -1;
  };

  struct EndOut {
    CVec est, est_prev, last;
    int winding = 0;
    bool ok = false;
    bool diverged = false;
    int group = -1;
  };

  // --- evaluation -----------------------------------------------------

  void eval_all(const CVec& W, Complex t) {
    const auto& lay = ctx_.compact.layout;
    const int cm = lay.compact_unknowns();
    point_.head(cm) = W;
    point_[cm] = t;
    eval_.eval(point_.data(), buf_.data());
    const int rows = ctx_.rows;
    for (int i = 0; i < rows; ++i) H_[i] = buf_[i];
    for (int i = 0; i < rows; ++i)
      for (int j = 0; j < cm; ++j) J_(i, j) = buf_[rows + i * cm + j];
    for (int i = 0; i < rows; ++i) Ht_[i] = buf_[rows * (1 + cm) + i];
    // patch rows
    for (int g = 0; g < lay.group_count(); ++g) {
      int r = rows + g;
      H_[r] = CompactHomotopy::patch_value(lay, patches_[g], g, W) - 1.0;
      J_.row(r).setZero();
      const auto& grp = lay.groups[g];
      for (std::size_t k = 0; k < grp.size(); ++k)
        J_(r, grp[k]) = patches_[g][k];
      J_(r, lay.hom_index[g]) = patches_[g][grp.size()];
      Ht_[r] = 0.0;
    }
    // row equilibration: near group infinities, high-degree homogenized rows
    // shrink like hom^(deg-1) and would otherwise sink the LU accuracy
    for (Eigen::Index i = 0; i < J_.rows(); ++i) {
      double m = J_.row(i).cwiseAbs().maxCoeff();
      if (m > 1e-300 && (m < 1e-2 || m > 1e2)) {
        double inv = 1.0 / m;
        J_.row(i) *= inv;
        H_[i] *= inv;
        Ht_[i] *= inv;
      }
    }
  }

  bool correct(CVec& W, Complex t) {
    for (int it = 0; it < ctx_.opts.max_corrector_iters; ++it) {
      eval_all(W, t);
      lu_.compute(J_);
      CVec dx = lu_.solve(-H_);
      if (!is_finite(dx)) return false;
      W += dx;
      if (dx.norm() < ctx_.opts.corrector_tol) return true;
    }
    return false;
  }

  /// Davidenko right-hand side dW/ds at (W, s); false on singular data.
  bool velocity(const CVec& W, const detail::TSegment& seg, double s,
                CVec& out) {
    eval_all(W, seg.t_at(s));
    lu_.compute(J_);
    out = lu_.solve(-(Ht_ * seg.dt_ds(s)));
    return is_finite(out);
  }

  bool rk4_predict(const CVec& W, const detail::TSegment& seg, double s,
                   double h, CVec& out) {
    CVec k1, k2, k3, k4;
    if (!velocity(W, seg, s, k1)) return false;
    if (!velocity(W + 0.5 * h * k1, seg, s + 0.5 * h, k2)) return false;
    if (!velocity(W + 0.5 * h * k2, seg, s + 0.5 * h, k3)) return false;
    if (!velocity(W + h * k3, seg, s + h, k4)) return false;
    out = W + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    return is_finite(out);
  }

  /// Adaptive predictor-corrector over one segment. Step sizes live in the
  /// segment's s in [0,1]; the initial step spans opts.initial_step in
  /// t-space and min step is relative to the segment.
  SegOut track_segment(CVec& W, const detail::TSegment& seg,
                       bool allow_repatch, double inf_tol, double h_cap = 1.0) {
    const TrackOptions& o = ctx_.opts;
    const double tlen = std::max(seg.t_length(), 1e-300);
    double s = 0.0;
    double h = std::min(h_cap, o.initial_step / tlen);
    int successes = 0;
    while (s < 1.0) {
      if (steps_++ > o.max_steps_per_path) return {SegOut::Kind::max_steps, -1};
      h = std::min(h, 1.0 - s);
      CVec pred;
      bool ok = rk4_predict(W, seg, s, h, pred);
      if (ok) {
        ok = correct(pred, seg.t_at(s + h));
      }
      if (ok) {
        W = pred;
        s += h;
        if (++successes >= o.successes_before_expand) {
          h = std::min(h * o.step_expand, h_cap);
          successes = 0;
        }
        if (inf_tol > 0) {
          for (int g = 0; g < ctx_.compact.layout.group_count(); ++g)
            if (ctx_.compact.normalized_hom(g, W) < inf_tol)
              return {SegOut::Kind::diverged, g};
        }
        if (allow_repatch) repatch_if_needed(W);
      } else {
        h *= o.step_contract;
        successes = 0;
        if (h < o.min_step) {
          static const bool trace = std::getenv("RP_TRACE") != nullptr;
          if (trace) {
            double hmin = 1.0;
            for (int g = 0; g < ctx_.compact.layout.group_count(); ++g)
              hmin = std::min(hmin, ctx_.compact.normalized_hom(g, W));
            std::fprintf(stderr,
                         "    MINSTEP arc=%d s=%.6g |t|=%.3g normW=%.3g minhom=%.3g\n",
                         int(seg.arc), s, std::abs(seg.t_at(s)), W.norm(), hmin);
          }
          return {SegOut::Kind::min_step, -1};
        }
      }
    }
    return {SegOut::Kind::ok, -1};
  }

  /// Rescale drifting groups back to unit norm and move their normalization
  /// patch to the conjugate chart; polynomial rows are group-homogeneous so
  /// the projective path is unchanged. Keeping groups near unit norm keeps
  /// high-degree homogeneous rows from wrecking the Jacobian scaling.
  void repatch_if_needed(CVec& W) {
    const auto& lay = ctx_.compact.layout;
    for (int g = 0; g < lay.group_count(); ++g) {
      double n2 = std::norm(W[lay.hom_index[g]]);
      for (int k : lay.groups[g]) n2 += std::norm(W[k]);
      double n = std::sqrt(n2);
      if (n > 1.5 || n < 0.67) {
        for (int k : lay.groups[g]) W[k] /= n;
        W[lay.hom_index[g]] /= n;
        const auto& grp = lay.groups[g];
        for (std::size_t k = 0; k < grp.size(); ++k)
          patches_[g][k] = std::conj(W[grp[k]]);
        patches_[g][grp.size()] = std::conj(W[lay.hom_index[g]]);
      }
    }
  }

  // --- endgame ----------------------------------------------------------

  struct LoopOut {
    enum class Kind { closed, no_closure, track_failed, diverged } kind;
    CVec mean;
    int winding = 0;
    int group = -1;
  };

  /// Track circles of the given radius until the loop closes, sampling at a
  /// uniform angle grid; the mean of the samples approximates the t->0 limit.
  LoopOut cauchy_loops(CVec& W, double radius) {
    static const bool trace = std::getenv("RP_TRACE") != nullptr;
    const TrackOptions& o = ctx_.opts;
    const int m = o.endgame_samples_per_cycle;
    CVec loop_start = W;
    CVec sum = CVec::Zero(W.size());
    int count = 0;
    for (int cycle = 1; cycle <= o.max_endgame_cycles; ++cycle) {
      for (int k = 0; k < m; ++k) {
        double a = 2.0 * M_PI * (k) / m;
        double b = 2.0 * M_PI * (k + 1) / m;
        // at least two predictor steps per arc so sheets stay separated
        SegOut so = track_segment(W, detail::TSegment::circle_arc(radius, a, b),
                                  false, 1.0 / o.infinity_threshold, 0.5);
        if (so.kind == SegOut::Kind::diverged)
          return {LoopOut::Kind::diverged, CVec(), 0, so.group};
        if (so.kind != SegOut::Kind::ok) {
          if (trace)
            std::fprintf(stderr, "    loop r=%.3g cycle=%d arc %d FAILED kind=%d\n",
                         radius, cycle, k, int(so.kind));
          return {LoopOut::Kind::track_failed, CVec(), 0, -1};
        }
        sum += W;
        ++count;
      }
      if (trace)
        std::fprintf(stderr, "    loop r=%.3g cycle=%d gap=%.3g\n", radius,
                     cycle, (W - loop_start).norm());
      if ((W - loop_start).norm() <= 1e-7 * (1.0 + loop_start.norm())) {
        return {LoopOut::Kind::closed, sum / double(count), cycle, -1};
      }
    }
    return {LoopOut::Kind::no_closure, CVec(), 0, -1};
  }

  EndOut run_endgame(CVec& W) { return run_endgame_at(W, ctx_.opts.endgame_t); }

  /// Repeats Cauchy loop sets at shrinking radius until two consecutive
  /// estimates agree. A closed loop set whose estimate sits at a group's
  /// infinity decides divergence immediately; when loops repeatedly fail to
  /// close, divergence is hunted by tracking t down through decades.
  EndOut run_endgame_at(CVec& W, double t_start) {
    static const bool trace = std::getenv("RP_TRACE") != nullptr;
    const TrackOptions& o = ctx_.opts;
    EndOut out;
    double radius = t_start;
    bool have_prev = false;
    CVec prev;
    int prev_winding = 0;
    int sets_without_closure = 0;
    for (int iter = 0; iter <= o.max_endgame_shrinks; ++iter) {
      repatch_if_needed(W);
      CVec loop_w = W;
      LoopOut lo = cauchy_loops(loop_w, radius);
      if (lo.kind == LoopOut::Kind::diverged) {
        out.diverged = true;
        out.group = lo.group;
        out.last = W;
        return out;
      }
      if (trace && lo.kind == LoopOut::Kind::closed)
        std::fprintf(stderr, "  set r=%.3g closed w=%d mean_gap=%.3g\n", radius,
                     lo.winding, have_prev ? (lo.mean - prev).norm() : -1.0);
      if (trace && lo.kind != LoopOut::Kind::closed)
        std::fprintf(stderr, "  set r=%.3g kind=%d\n", radius, int(lo.kind));
      if (lo.kind == LoopOut::Kind::closed) {
        sets_without_closure = 0;
        for (int g = 0; g < ctx_.compact.layout.group_count(); ++g) {
          if (ctx_.compact.normalized_hom(g, lo.mean) <
              o.endpoint_infinity_tol) {
            // the limit itself is at infinity for group g
            out.diverged = true;
            out.group = g;
            out.last = lo.mean;
            out.winding = lo.winding;
            return out;
          }
        }
        if (have_prev && prev_winding == lo.winding &&
            (lo.mean - prev).norm() <=
                o.endgame_agreement_tol * (1.0 + lo.mean.norm())) {
          out.est = lo.mean;
          out.est_prev = prev;
          out.winding = lo.winding;
          out.ok = true;
          return out;
        }
        prev = lo.mean;
        prev_winding = lo.winding;
        have_prev = true;
      } else {
        if (++sets_without_closure >= 3) return hunt_divergence(W, radius);
      }
      // shrink the radius and continue
      SegOut so = track_segment(
          W, detail::TSegment::line(radius, radius * o.endgame_shrink), false,
          1.0 / o.infinity_threshold);
      if (so.kind == SegOut::Kind::diverged) {
        out.diverged = true;
        out.group = so.group;
        out.last = W;
        return out;
      }
      if (so.kind != SegOut::Kind::ok) {
        out.last = W;
        return out;
      }
      radius *= o.endgame_shrink;
    }
    // estimates never stabilized
    out.last = W;
    return out;
  }

  /// Fallback for paths whose winding exceeds the endgame budget: track t
  /// down decade by decade. A homogenizer collapsing like t^(1/c) shrinks by
  /// a steady ratio per decade, so a sustained geometric downward trend below
  /// 1e-4 decides divergence; everything else is reported as failed.
  EndOut hunt_divergence(CVec& W, double radius) {
    EndOut out;
    const int ng = ctx_.compact.layout.group_count();
    std::vector<double> prev_hom(ng);
    std::vector<int> trend(ng, 0);
    for (int g = 0; g < ng; ++g)
      prev_hom[g] = ctx_.compact.normalized_hom(g, W);
    double t = radius;
    for (int decade = 0; decade < 40; ++decade) {
      repatch_if_needed(W);
      SegOut so = track_segment(W, detail::TSegment::line(t, t * 0.1), false,
                                1.0 / ctx_.opts.infinity_threshold);
      if (so.kind == SegOut::Kind::diverged) {
        out.diverged = true;
        out.group = so.group;
        out.last = W;
        return out;
      }
      if (so.kind != SegOut::Kind::ok) break;
      t *= 0.1;
      for (int g = 0; g < ng; ++g) {
        double h = ctx_.compact.normalized_hom(g, W);
        trend[g] = (h < 0.85 * prev_hom[g]) ? trend[g] + 1 : 0;
        prev_hom[g] = h;
        if (trend[g] >= 4 && h < 1e-4) {
          out.diverged = true;
          out.group = g;
          out.last = W;
          return out;
        }
      }
    }
    out.last = W;
    return out;  // not ok: endgame could not resolve this path
  }

  // --- endpoint classification -------------------------------------------

  PathResult& classify_truncated(PathResult& res, const CVec& W, int group) {
    const auto& lay = ctx_.compact.layout;
    if (group == 0 || lay.group_count() == 1) {
      res.status = PathStatus::at_infinity;
      return res;
    }
    if (ctx_.compact.normalized_hom(0, W) < ctx_.opts.endpoint_infinity_tol) {
      res.status = PathStatus::at_infinity;
      return res;
    }
    CVec w(lay.affine_unknowns);
    ctx_.compact.extract_group(0, W, w);
    res.x_endpoint = group_block(0, w);
    res.x_endpoint_prev = res.x_endpoint;
    res.status = PathStatus::x_converged_lambda_diverged;
    return res;
  }

  PathResult& classify_endpoint(PathResult& res, const CVec& est,
                                const CVec& est_prev) {
    const auto& lay = ctx_.compact.layout;
    const TrackOptions& o = ctx_.opts;
    if (ctx_.compact.normalized_hom(0, est) < o.endpoint_infinity_tol) {
      res.status = PathStatus::at_infinity;
      return res;
    }
    CVec w(lay.affine_unknowns), wp(lay.affine_unknowns);
    ctx_.compact.extract_group(0, est, w);
    ctx_.compact.extract_group(0, est_prev, wp);
    bool lambda_diverged = false;
    for (int g = 1; g < lay.group_count(); ++g) {
      if (ctx_.compact.normalized_hom(g, est) < o.endpoint_infinity_tol) {
        lambda_diverged = true;
      } else {
        ctx_.compact.extract_group(g, est, w);
        ctx_.compact.extract_group(g, est_prev, wp);
      }
    }
    res.x_endpoint = group_block(0, w);
    res.x_endpoint_prev = group_block(0, wp);
    if (lambda_diverged) {
      res.status = PathStatus::x_converged_lambda_diverged;
      return res;
    }

    // full affine endpoint available
    res.endpoint = w;
    res.endpoint_prev = wp;
    res.smin = smin_row_scaled(ctx_.at0.jacobian(res.endpoint));
    if (res.winding == 1 && res.smin > o.nonsingular_smin) {
      NewtonResult nr = newton_correct(ctx_.at0, res.endpoint, 1e-11, 8);
      if (nr.residual / (1.0 + nr.point.norm()) < o.endpoint_residual_tol &&
          (nr.point - res.endpoint).norm() < 1e-5 * (1.0 + res.endpoint.norm())) {
        res.endpoint = nr.point;
        res.x_endpoint = group_block(0, nr.point);
      }
    }
    res.residual = ctx_.at0.eval(res.endpoint).norm() /
                   (1.0 + res.endpoint.norm());
    if (!(res.residual < o.endpoint_residual_tol)) {
      res.status = PathStatus::failed;
      return res;
    }
    res.status = (res.winding == 1 && res.smin > o.nonsingular_smin)
                     ? PathStatus::converged
                     : PathStatus::converged_singular;
    return res;
  }

  CVec group_block(int g, const CVec& w_affine) const {
    const auto& grp = ctx_.compact.layout.groups[g];
    CVec b(grp.size());
    for (std::size_t k = 0; k < grp.size(); ++k) b[k] = w_affine[grp[k]];
    return b;
  }

  const TrackContext& ctx_;
  SystemEvaluator eval_;
  std::vector<CVec> patches_;
  std::vector<Complex> buf_;
  CVec H_, Ht_;
  CMat J_;
  CVec point_;
  Eigen::PartialPivLU<CMat> lu_;
  int steps_ = 0;
};

/// Track one path of h from a nonsingular root of H(.,1) down to t=0.
inline PathResult track_path(const TrackContext& ctx, const CVec& start,
                             int start_index = 0) {
  PathTracker tracker(ctx);
  return tracker.track(start, start_index);
}

inline PathResult track_path(const Homotopy& h, const CVec& start,
                             const TrackOptions& opts,
                             std::uint64_t patch_seed = 0,
                             int start_index = 0) {
  Rng rng(mix_seed(patch_seed, 0x7261636bULL));
  TrackContext ctx(h, rng, opts);
  return track_path(ctx, start, start_index);
}

struct EndgameResult {
  CVec endpoint;
  int winding = 0;
  bool ok = false;
};

/// Cauchy endgame from a point on a trackable path at t = t_e: loops around
/// t=0 until closure, averages the loop samples, and shrinks the radius until
/// two consecutive estimates agree.
inline EndgameResult cauchy_endgame(const Homotopy& h, const CVec& approach,
                                    double t_e, const TrackOptions& opts) {
  Rng rng(mix_seed(0, 0x656e6467ULL));
  TrackContext ctx(h, rng, opts);
  PathTracker tracker(ctx);
  auto out = tracker.endgame_from(approach, t_e);
  EndgameResult r;
  r.endpoint = out.endpoint;
  r.winding = out.winding;
  r.ok = out.ok;
  return r;
}

}  // namespace realpoints
