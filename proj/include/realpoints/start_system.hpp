#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "realpoints/parallel.hpp"
#include "realpoints/tracker.hpp"

namespace realpoints {

/// Multihomogeneous structure of a square system: a partition of the
/// unknowns into ordered groups and the degree of each equation in each
/// group. The system is square, so equations = sum of group sizes.
struct MultiHomStructure {
  std::vector<std::vector<int>> groups;   // variable indices per group
  std::vector<std::vector<int>> degrees;  // degrees[i][j]: eq i in group j

  int group_count() const { return int(groups.size()); }
  int equation_count() const { return int(degrees.size()); }

  void validate() const {
    std::size_t total = 0;
    for (const auto& g : groups) total += g.size();
    if (total != degrees.size())
      throw std::invalid_argument(
          "MultiHomStructure: system must be square (equations = unknowns)");
    for (const auto& row : degrees) {
      if (row.size() != groups.size())
        throw std::invalid_argument("MultiHomStructure: ragged degree matrix");
      for (int d : row)
        if (d < 0)
          throw std::invalid_argument("MultiHomStructure: negative degree");
    }
  }
};

/// Read the multihomogeneous structure of a square t-free system.
inline MultiHomStructure multihom_structure(
    const PolynomialSystem& sys, const std::vector<std::vector<int>>& groups) {
  MultiHomStructure st;
  st.groups = groups;
  for (int i = 0; i < sys.size(); ++i) {
    std::vector<int> row;
    row.reserve(groups.size());
    for (const auto& g : groups) row.push_back(sys[i].group_degree(g));
    st.degrees.push_back(std::move(row));
  }
  st.validate();
  return st;
}

namespace detail {

inline std::uint64_t checked_add(std::uint64_t a, std::uint64_t b) {
  std::uint64_t r;
  if (__builtin_add_overflow(a, b, &r) || r > (1ULL << 63))
    throw OverflowError("multihomogeneous count exceeds 2^63");
  return r;
}

inline std::uint64_t checked_mul(std::uint64_t a, std::uint64_t b) {
  std::uint64_t r;
  if (__builtin_mul_overflow(a, b, &r) || r > (1ULL << 63))
    throw OverflowError("multihomogeneous count exceeds 2^63");
  return r;
}

}  // namespace detail

/// Multihomogeneous Bezout count: the coefficient of prod_j a_j^{n_j} in
/// prod_i (sum_j D[i][j] a_j), by exact integer expansion with per-group
/// exponent capping. Counts beyond 2^63 raise OverflowError.
inline std::uint64_t multihomog_bezout(const MultiHomStructure& st) {
  st.validate();
  const int m = st.group_count();
  std::vector<int> caps(m);
  for (int j = 0; j < m; ++j) caps[j] = int(st.groups[j].size());
  // state: per-group degree used so far -> coefficient
  std::map<std::vector<int>, std::uint64_t> dp;
  dp[std::vector<int>(m, 0)] = 1;
  for (const auto& row : st.degrees) {
    std::map<std::vector<int>, std::uint64_t> next;
    for (const auto& [state, coeff] : dp) {
      for (int j = 0; j < m; ++j) {
        if (row[j] == 0 || state[j] >= caps[j]) continue;
        std::vector<int> s = state;
        s[j] += 1;
        std::uint64_t add = detail::checked_mul(coeff, std::uint64_t(row[j]));
        auto it = next.find(s);
        if (it == next.end())
          next.emplace(std::move(s), add);
        else
          it->second = detail::checked_add(it->second, add);
      }
    }
    dp.swap(next);
  }
  auto it = dp.find(caps);
  return it == dp.end() ? 0 : it->second;
}

/// K(N,2k) = N * 2k * (2k-1)^(N-1): the 2-homogeneous count for the
/// critical-point homotopy of a degree-2k hypersurface in N variables.
inline std::uint64_t k_bound(int N, int k) {
  if (N < 1 || k < 1) throw std::invalid_argument("k_bound: need N,k >= 1");
  std::uint64_t r = detail::checked_mul(std::uint64_t(N), std::uint64_t(2 * k));
  for (int i = 0; i < N - 1; ++i)
    r = detail::checked_mul(r, std::uint64_t(2 * k - 1));
  return r;
}

/// Linear-product start system: equation i is the product of degrees[i][j]
/// generic affine-linear forms in group j. Start points are the solutions of
/// square factor selections; there are exactly multihomog_bezout(st) of them.
struct StartSystem {
  // factors[i][j][k]: coefficients over group j's variables plus constant
  std::vector<std::vector<std::vector<CVec>>> factors;
  std::vector<CVec> points;
  PolynomialSystem product;  // expanded, over the same unknowns
  std::uint64_t seed = 0;
};

namespace detail {

/// Enumerate all group allocations (which group supplies the linear factor
/// for each equation) that exactly fill every group's capacity.
inline void enumerate_allocations(const MultiHomStructure& st, int eq,
                                  std::vector<int>& filled,
                                  std::vector<int>& sigma,
                                  std::vector<std::vector<int>>& out) {
  const int m = st.group_count();
  if (eq == st.equation_count()) {
    out.push_back(sigma);
    return;
  }
  for (int j = 0; j < m; ++j) {
    if (st.degrees[eq][j] == 0) continue;
    if (filled[j] >= int(st.groups[j].size())) continue;
    filled[j]++;
    sigma[eq] = j;
    enumerate_allocations(st, eq + 1, filled, sigma, out);
    filled[j]--;
  }
}

}  // namespace detail

/// Build the linear-product start system and enumerate its start points.
/// A degenerate draw (singular factor selection) is retried with the seed
/// incremented, at most five times.
inline StartSystem build_start_system(const MultiHomStructure& st,
                                      std::uint64_t seed,
                                      const PolynomialSystem& shape) {
  st.validate();
  const int m = st.group_count();
  const int neq = st.equation_count();
  const std::uint64_t expected = multihomog_bezout(st);

  for (int attempt = 0; attempt < 5; ++attempt, ++seed) {
    Rng rng(mix_seed(seed, 0x73746172ULL));
    StartSystem ss;
    ss.seed = seed;
    ss.factors.assign(neq, {});
    for (int i = 0; i < neq; ++i) {
      ss.factors[i].assign(m, {});
      for (int j = 0; j < m; ++j) {
        for (int d = 0; d < st.degrees[i][j]; ++d) {
          CVec form(int(st.groups[j].size()) + 1);
          for (Eigen::Index k = 0; k < form.size(); ++k)
            form[k] = rng.unit_complex();
          ss.factors[i][j].push_back(std::move(form));
        }
      }
    }

    // expanded product polynomials, for blending into a homotopy
    const int nvars = shape.var_count();
    std::vector<Polynomial> prod_polys;
    prod_polys.reserve(neq);
    for (int i = 0; i < neq; ++i) {
      Polynomial p = Polynomial::constant(nvars, 1.0);
      for (int j = 0; j < m; ++j) {
        for (const CVec& form : ss.factors[i][j]) {
          Polynomial lin = Polynomial::constant(nvars, form[form.size() - 1]);
          for (std::size_t k = 0; k < st.groups[j].size(); ++k)
            lin = lin + Polynomial::variable(nvars, st.groups[j][k], form[k]);
          p = p * lin;
        }
      }
      prod_polys.push_back(std::move(p));
    }
    ss.product = PolynomialSystem(shape.variables(), std::move(prod_polys));

    // enumerate start points: allocation of equations to groups, then one
    // factor index per equation
    std::vector<std::vector<int>> allocations;
    {
      std::vector<int> filled(m, 0), sigma(neq, -1);
      detail::enumerate_allocations(st, 0, filled, sigma, allocations);
    }

    bool degenerate = false;
    for (const auto& sigma : allocations) {
      std::vector<int> radix(neq), idx(neq, 0);
      for (int i = 0; i < neq; ++i) radix[i] = st.degrees[i][sigma[i]];
      while (true) {
        // solve the per-group square linear systems for this selection
        CVec point = CVec::Zero(nvars);
        bool ok = true;
        for (int j = 0; j < m && ok; ++j) {
          const auto& grp = st.groups[j];
          const int gs = int(grp.size());
          CMat A(gs, gs);
          CVec b(gs);
          int r = 0;
          for (int i = 0; i < neq; ++i) {
            if (sigma[i] != j) continue;
            const CVec& form = ss.factors[i][j][idx[i]];
            for (int k = 0; k < gs; ++k) A(r, k) = form[k];
            b[r] = -form[gs];
            ++r;
          }
          Eigen::FullPivLU<CMat> lu(A);
          if (!lu.isInvertible()) {
            ok = false;
            break;
          }
          CVec sol = lu.solve(b);
          for (int k = 0; k < gs; ++k) point[grp[k]] = sol[k];
        }
        if (!ok) {
          degenerate = true;
          break;
        }
        NewtonResult nr = newton_correct(ss.product, point, 1e-13, 10);
        ss.points.push_back(nr.converged ? nr.point : point);

        // next factor-index combination
        int pos = neq - 1;
        while (pos >= 0) {
          if (++idx[pos] < radix[pos]) break;
          idx[pos] = 0;
          --pos;
        }
        if (pos < 0) break;
      }
      if (degenerate) break;
    }
    if (degenerate) continue;
    if (ss.points.size() != expected)
      throw std::logic_error("build_start_system: enumeration mismatch");
    return ss;
  }
  throw std::runtime_error(
      "build_start_system: degenerate draws in 5 consecutive attempts");
}

/// Diagnostics from solving H(.,1)=0 through the linear-product homotopy.
struct StartSolveDiag {
  int paths = 0;
  int failures = 0;
  int singular_discarded = 0;
  int at_infinity = 0;
  std::vector<PathResult> results;
};

/// Compute the finite nonsingular solutions of H(.,1) = 0: track all start
/// points of the product system through (1-s)H(.,1) + s*gamma0*Product,
/// discard divergent and singular endpoints, deduplicate, and polish.
inline std::vector<CVec> solve_start(const Homotopy& h,
                                     const MultiHomStructure& st,
                                     std::uint64_t seed,
                                     const TrackOptions& opts, int jobs = 1,
                                     StartSolveDiag* diag = nullptr) {
  PolynomialSystem target = h.at_t(1.0);
  StartSystem ss = build_start_system(st, seed, target);
  Rng rng(mix_seed(seed, 0x67616d61ULL));
  Complex gamma0 = rng.unit_complex();
  Homotopy blend = blend_homotopy(target, ss.product, gamma0, st.groups);
  TrackContext ctx(blend, rng, opts);

  const int n = int(ss.points.size());
  std::vector<PathResult> results(n);
  parallel_for(n, jobs, [&](int i) {
    PathTracker tracker(ctx);
    results[i] = tracker.track_rush(ss.points[i], i);
  });

  std::vector<CVec> sols;
  StartSolveDiag local;
  local.paths = n;
  for (const auto& r : results) {
    switch (r.status) {
      case PathStatus::converged:
        sols.push_back(r.endpoint);
        break;
      case PathStatus::converged_singular:
        local.singular_discarded++;
        break;
      case PathStatus::failed:
        local.failures++;
        break;
      default:
        local.at_infinity++;
        break;
    }
  }
  local.results = std::move(results);
  if (diag) *diag = std::move(local);

  // deduplicate (tolerance 1e-8) keeping first representatives, then polish
  std::vector<CVec> dedup;
  for (const auto& s : sols) {
    bool dup = false;
    for (const auto& d : dedup)
      if ((s - d).norm() < 1e-8) {
        dup = true;
        break;
      }
    if (!dup) dedup.push_back(s);
  }
  PolynomialSystem h1 = h.at_t(1.0);
  for (auto& s : dedup) {
    NewtonResult nr = newton_correct(h1, s, 1e-11, 8);
    if (nr.residual < 1e-8 * (1.0 + nr.point.norm())) s = nr.point;
  }
  return dedup;
}

}  // namespace realpoints
