#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "realpoints/polynomial.hpp"

namespace realpoints {

/// Parameters that generated a critical-point homotopy; carried as metadata
/// so reports can echo them.
struct HomotopyParams {
  RVec z;
  Complex gamma{};
  RVec y;
  CVec alpha;
};

/// Square polynomial homotopy H(w, t): equations are polynomials in the
/// unknowns w and the path parameter t, stored as one PolynomialSystem whose
/// last variable is t. Groups partition the unknowns for multihomogeneous
/// bookkeeping and projective compactification.
struct Homotopy {
  PolynomialSystem sys;                   // variables: unknowns..., t
  std::vector<std::vector<int>> groups;   // partition of unknown indices
  std::optional<HomotopyParams> params;

  int unknowns() const { return sys.var_count() - 1; }
  int t_index() const { return sys.var_count() - 1; }

  bool is_square() const { return sys.size() == unknowns(); }

  /// The polynomial system obtained by fixing t.
  PolynomialSystem at_t(Complex t) const {
    return specialize(sys, t_index(), t);
  }

  CVec eval(const CVec& w, Complex t) const {
    CVec full(sys.var_count());
    full.head(unknowns()) = w;
    full[t_index()] = t;
    return sys.eval(full);
  }

  /// Jacobian with respect to the unknowns only (square).
  CMat jacobian_w(const CVec& w, Complex t) const {
    CVec full(sys.var_count());
    full.head(unknowns()) = w;
    full[t_index()] = t;
    CMat m(sys.size(), unknowns());
    for (int i = 0; i < sys.size(); ++i)
      for (int j = 0; j < unknowns(); ++j)
        m(i, j) = sys.gradient(i, j).eval(full);
    return m;
  }
};

/// Lift a t-free system over the unknowns into homotopy variable space.
inline Polynomial lift_to_homotopy(const Polynomial& p, int unknowns) {
  std::vector<int> map(p.var_count());
  for (int v = 0; v < p.var_count(); ++v) map[v] = v;
  return p.remapped(unknowns + 1, map);
}

/// Linear blend (1-t)*target + t*scale*start over shared unknowns; tracking
/// from t=1 (the scaled start system) to t=0 (the target).
inline Homotopy blend_homotopy(const PolynomialSystem& target,
                               const PolynomialSystem& start, Complex scale,
                               std::vector<std::vector<int>> groups) {
  if (target.size() != start.size() ||
      target.var_count() != start.var_count())
    throw std::invalid_argument("blend_homotopy: shape mismatch");
  int m = target.var_count();
  std::vector<std::string> vars = target.variables();
  vars.push_back("_t");
  Polynomial t = Polynomial::variable(m + 1, m);
  Polynomial one_minus_t = Polynomial::constant(m + 1, 1.0) - t;
  std::vector<Polynomial> rows;
  rows.reserve(target.size());
  for (int i = 0; i < target.size(); ++i) {
    Polynomial ti = lift_to_homotopy(target[i], m);
    Polynomial si = lift_to_homotopy(start[i], m);
    rows.push_back(one_minus_t * ti + t * (si * scale));
  }
  Homotopy h;
  h.sys = PolynomialSystem(std::move(vars), std::move(rows));
  h.groups = std::move(groups);
  return h;
}

/// Layout of the compactified coordinate space: original unknowns keep their
/// indices, one homogenizing coordinate is appended per group, t stays last.
struct ProjectiveLayout {
  int affine_unknowns = 0;
  std::vector<std::vector<int>> groups;  // affine indices per group
  std::vector<int> hom_index;            // compact index of each homogenizer

  int compact_unknowns() const {
    return affine_unknowns + int(hom_index.size());
  }
  int group_count() const { return int(groups.size()); }
};

/// Group-homogenized homotopy plus default normalization patches. The
/// polynomial rows are homogeneous per group, so rescaling a group maps
/// solutions to solutions; patch rows pin the scales and live outside the
/// polynomial system because trackers may re-patch per path.
struct CompactHomotopy {
  PolynomialSystem sys;  // homogenized rows only, over compact vars + t
  ProjectiveLayout layout;
  std::vector<CVec> default_patch;  // per group: coeffs over group vars + hom

  /// Patch value for group g at compact point W (excludes the -1 constant).
  static Complex patch_value(const ProjectiveLayout& lay, const CVec& patch,
                             int g, const CVec& W) {
    Complex s = 0.0;
    const auto& grp = lay.groups[g];
    for (std::size_t k = 0; k < grp.size(); ++k) s += patch[k] * W[grp[k]];
    s += patch[grp.size()] * W[lay.hom_index[g]];
    return s;
  }

  /// Embed an affine point: homogenizers set to 1, then each group rescaled
  /// so its patch evaluates to 1.
  CVec embed(const CVec& w, const std::vector<CVec>& patches) const {
    CVec W = CVec::Ones(layout.compact_unknowns());
    W.head(layout.affine_unknowns) = w;
    for (int g = 0; g < layout.group_count(); ++g) {
      Complex pv = patch_value(layout, patches[g], g, W);
      if (pv == 0.0)
        throw std::runtime_error("embed: point lies on the patch hyperplane");
      Complex c = 1.0 / pv;
      for (int k : layout.groups[g]) W[k] *= c;
      W[layout.hom_index[g]] *= c;
    }
    return W;
  }

  /// Normalized homogenizer magnitude of group g: |hom| / ||(group, hom)||.
  double normalized_hom(int g, const CVec& W) const {
    double n2 = std::norm(W[layout.hom_index[g]]);
    double total = n2;
    for (int k : layout.groups[g]) total += std::norm(W[k]);
    if (total == 0.0) return 0.0;
    return std::sqrt(n2 / total);
  }

  /// Extract the affine coordinates of group g (requires finite group).
  void extract_group(int g, const CVec& W, CVec& w_out) const {
    Complex h = W[layout.hom_index[g]];
    for (int k : layout.groups[g]) w_out[k] = W[k] / h;
  }
};

/// Homogenize each variable group of a square homotopy and record layout.
/// Patch coefficients are drawn unit-modulus from the supplied RNG.
inline CompactHomotopy compactify(const Homotopy& h, Rng& rng) {
  int m = h.unknowns();
  int ng = int(h.groups.size());
  ProjectiveLayout lay;
  lay.affine_unknowns = m;
  lay.groups = h.groups;
  for (int g = 0; g < ng; ++g) lay.hom_index.push_back(m + g);

  int cm = m + ng;  // compact unknowns; t goes last
  std::vector<std::string> vars;
  for (int v = 0; v < m; ++v) vars.push_back(h.sys.variables()[v]);
  for (int g = 0; g < ng; ++g) vars.push_back("_h" + std::to_string(g));
  vars.push_back("_t");

  std::vector<Polynomial> rows;
  rows.reserve(h.sys.size());
  for (int i = 0; i < h.sys.size(); ++i) {
    const Polynomial& p = h.sys[i];
    std::vector<int> gdeg(ng, 0);
    for (int g = 0; g < ng; ++g) gdeg[g] = p.group_degree(h.groups[g]);
    Polynomial q(cm + 1);
    for (const auto& [e, c] : p.terms()) {
      Exponents d(cm + 1, 0);
      for (int v = 0; v < m; ++v) d[v] = e[v];
      d[cm] = e[m];  // t exponent
      for (int g = 0; g < ng; ++g) {
        int td = 0;
        for (int v : h.groups[g]) td += e[v];
        d[m + g] = gdeg[g] - td;
      }
      q.add_term(std::move(d), c);
    }
    rows.push_back(std::move(q));
  }

  CompactHomotopy ch;
  ch.sys = PolynomialSystem(std::move(vars), std::move(rows));
  ch.layout = lay;
  for (int g = 0; g < ng; ++g) {
    CVec patch(int(h.groups[g].size()) + 1);
    for (Eigen::Index k = 0; k < patch.size(); ++k)
      patch[k] = rng.unit_complex();
    ch.default_patch.push_back(std::move(patch));
  }
  return ch;
}

}  // namespace realpoints
