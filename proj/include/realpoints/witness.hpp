#pragma once

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "realpoints/parallel.hpp"
#include "realpoints/parser.hpp"
#include "realpoints/start_system.hpp"
#include "realpoints/tracker.hpp"

namespace realpoints {

/// All roots of a univariate polynomial given by ascending coefficients,
/// via the companion matrix, each polished by a few Newton steps.
inline std::vector<Complex> univariate_roots(std::vector<Complex> coeffs) {
  while (!coeffs.empty() && coeffs.back() == 0.0) coeffs.pop_back();
  if (coeffs.size() <= 1) return {};
  const int n = int(coeffs.size()) - 1;  // degree
  CMat comp = CMat::Zero(n, n);
  for (int i = 1; i < n; ++i) comp(i, i - 1) = 1.0;
  for (int i = 0; i < n; ++i) comp(i, n - 1) = -coeffs[i] / coeffs[n];
  Eigen::ComplexEigenSolver<CMat> es(comp);
  std::vector<Complex> roots;
  roots.reserve(n);
  for (int i = 0; i < n; ++i) {
    Complex r = es.eigenvalues()[i];
    for (int it = 0; it < 4; ++it) {
      Complex p = 0.0, dp = 0.0;
      for (int k = n; k >= 0; --k) {
        dp = dp * r + p;
        p = p * r + coeffs[k];
      }
      if (dp == 0.0) break;
      r -= p / dp;
    }
    roots.push_back(r);
  }
  return roots;
}

/// Witness set {f, L, W} for a pure d-dimensional algebraic set: d generic
/// linear slice polynomials and the deg-V points where the slice meets V.
struct WitnessSet {
  PolynomialSystem f;
  std::vector<Polynomial> slice;  // d linear polynomials over f's variables
  std::vector<CVec> points;
  int dimension = 0;
  int degree = 0;

  void validate() const {
    const int N = f.var_count();
    if (int(slice.size()) != dimension)
      throw std::invalid_argument("witness set: slice size != dimension");
    if (int(points.size()) != degree)
      throw std::invalid_argument("witness set: |W| != declared degree");
    CMat coeff(dimension, N);
    for (int k = 0; k < dimension; ++k) {
      if (slice[k].degree() > 1)
        throw std::invalid_argument("witness set: slice entry is not linear");
      for (int v = 0; v < N; ++v)
        coeff(k, v) = slice[k].derivative(v).eval(CVec::Zero(N));
    }
    if (dimension > 0) {
      Eigen::JacobiSVD<CMat> svd(coeff);
      if (svd.singularValues().minCoeff() < 1e-12)
        throw std::invalid_argument("witness set: slice rows are dependent");
    }
    for (const auto& w : points) {
      if (w.size() != N)
        throw std::invalid_argument("witness set: point dimension mismatch");
      if (f.eval(w).norm() >= 1e-8)
        throw std::invalid_argument("witness set: point off the variety");
      for (const auto& l : slice)
        if (std::abs(l.eval(w)) >= 1e-10)
          throw std::invalid_argument("witness set: point off the slice");
    }
  }
};

enum class MembershipVerdict { member, non_member, inconclusive };

struct MembershipResult {
  MembershipVerdict verdict = MembershipVerdict::inconclusive;
  double min_distance = std::numeric_limits<double>::infinity();
  int converged_paths = 0;
  int failed_paths = 0;
  std::vector<PathResult> paths;
};

/// Homotopy membership test: move the witness slice to a generic-slope slice
/// through the query point and track every witness point; the point is on V
/// exactly when some endpoint lands within tol of it.
inline MembershipResult membership_test(const WitnessSet& ws, const CVec& point,
                                        double tol, std::uint64_t seed = 0,
                                        TrackOptions opts = {}, int jobs = 1) {
  const int N = ws.f.var_count();
  if (point.size() != N)
    throw std::invalid_argument("membership_test: point dimension mismatch");
  if (ws.f.size() + ws.dimension != N)
    throw std::invalid_argument(
        "membership_test: system plus slice is not square");

  Rng rng(mix_seed(seed, 0x6d656d62ULL));
  Complex gamma1 = rng.unit_complex();

  // target slice: d generic-slope linear forms vanishing at the point
  const int m = N + 1;  // homotopy variables: x..., t
  std::vector<Polynomial> rows;
  for (int i = 0; i < ws.f.size(); ++i)
    rows.push_back(lift_to_homotopy(ws.f[i], N));
  Polynomial t = Polynomial::variable(m, N);
  Polynomial one_minus_t = Polynomial::constant(m, 1.0) - t;
  for (int k = 0; k < ws.dimension; ++k) {
    Polynomial lp(m);  // c . (x - point)
    for (int v = 0; v < N; ++v) {
      Complex c = rng.unit_complex();
      lp = lp + Polynomial::variable(m, v, c) -
           Polynomial::constant(m, c * point[v]);
    }
    Polynomial lw = lift_to_homotopy(ws.slice[k], N) * gamma1;
    rows.push_back(one_minus_t * lp + t * lw);
  }
  std::vector<std::string> vars = ws.f.variables();
  vars.push_back("_t");
  Homotopy h;
  h.sys = PolynomialSystem(std::move(vars), std::move(rows));
  TrackContext ctx(h, rng, opts);

  const int n = int(ws.points.size());
  MembershipResult res;
  res.paths.resize(n);
  parallel_for(n, jobs, [&](int i) {
    PathTracker tracker(ctx);
    res.paths[i] = tracker.track(ws.points[i], i);
  });
  for (const auto& r : res.paths) {
    if (r.status == PathStatus::converged ||
        r.status == PathStatus::converged_singular) {
      res.converged_paths++;
      res.min_distance = std::min(res.min_distance, (r.endpoint - point).norm());
    } else if (r.status == PathStatus::failed) {
      res.failed_paths++;
    }
  }
  if (res.converged_paths == 0 && res.failed_paths == n) {
    res.verdict = MembershipVerdict::inconclusive;
  } else {
    res.verdict = res.min_distance < tol ? MembershipVerdict::member
                                         : MembershipVerdict::non_member;
  }
  return res;
}

/// Build a witness set for a curve given by a polynomial parameterization
/// s -> (c_1(s), ..., c_N(s)) lying inside Var(f): slice with one generic
/// hyperplane, reduce to a univariate polynomial in s, and take companion-
/// matrix roots back through the parameterization.
inline WitnessSet witness_from_parametrization(
    const std::vector<Polynomial>& curve, const PolynomialSystem& f,
    std::uint64_t seed = 0) {
  const int N = f.var_count();
  if (int(curve.size()) != N)
    throw std::invalid_argument(
        "witness_from_parametrization: curve component count != variables");
  int deg = 0;
  for (const auto& c : curve) {
    if (c.var_count() != 1)
      throw std::invalid_argument(
          "witness_from_parametrization: curve components must be univariate");
    deg = std::max(deg, c.degree());
  }
  if (deg < 1)
    throw std::invalid_argument("witness_from_parametrization: constant curve");

  // validate the image lies in Var(f) at random parameter values
  Rng vrng(mix_seed(seed, 0x76616c69ULL));
  for (int trial = 0; trial < 10; ++trial) {
    Complex s(vrng.uniform(-1, 1), vrng.uniform(-1, 1));
    CVec sv(1);
    sv[0] = s;
    CVec x(N);
    for (int v = 0; v < N; ++v) x[v] = curve[v].eval(sv);
    if (f.eval(x).norm() >= 1e-8)
      throw std::invalid_argument(
          "witness_from_parametrization: curve image is not inside Var(f)");
  }

  Rng rng(mix_seed(seed, 0x736c6963ULL));
  for (int attempt = 0; attempt < 5; ++attempt) {
    CVec a(N);
    for (int v = 0; v < N; ++v) a[v] = rng.unit_complex();
    Complex b = rng.unit_complex();

    Polynomial u = Polynomial::constant(1, b);
    for (int v = 0; v < N; ++v) u = u + curve[v] * a[v];
    if (u.degree() < deg) continue;  // non-generic slice, re-draw

    std::vector<Complex> coeffs(deg + 1, 0.0);
    for (const auto& [e, c] : u.terms()) coeffs[e[0]] = c;
    std::vector<Complex> roots = univariate_roots(coeffs);
    if (int(roots.size()) != deg) continue;

    WitnessSet ws;
    ws.f = f;
    ws.dimension = 1;
    ws.degree = deg;
    Polynomial l(N);
    for (int v = 0; v < N; ++v) l = l + Polynomial::variable(N, v, a[v]);
    l = l + Polynomial::constant(N, b);
    ws.slice.push_back(std::move(l));
    for (Complex r : roots) {
      CVec sv(1);
      sv[0] = r;
      CVec x(N);
      for (int v = 0; v < N; ++v) x[v] = curve[v].eval(sv);
      ws.points.push_back(std::move(x));
    }
    ws.validate();
    return ws;
  }
  throw std::runtime_error(
      "witness_from_parametrization: no generic slice found in 5 attempts");
}

// --- witness file I/O (JSON) -----------------------------------------------

namespace detail {

inline nlohmann::ordered_json complex_to_json(const Complex& c) {
  return nlohmann::ordered_json::array({c.real(), c.imag()});
}

inline Complex complex_from_json(const nlohmann::json& j) {
  return Complex(j.at(0).get<double>(), j.at(1).get<double>());
}

inline nlohmann::ordered_json cvec_to_json(const CVec& v) {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(complex_to_json(v[i]));
  return arr;
}

inline CVec cvec_from_json(const nlohmann::json& j) {
  CVec v(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) v[i] = complex_from_json(j[i]);
  return v;
}

}  // namespace detail

/// Witness file schema:
/// { "system": <system-file text>, "dimension": d, "degree": deg,
///   "slice": [[coeffs..., constant], ...], "points": [[re,im pairs...], ...] }
/// Every coefficient and coordinate is a [re, im] pair.
inline nlohmann::ordered_json witness_to_json(const WitnessSet& ws) {
  nlohmann::ordered_json j;
  j["system"] = ws.f.to_string();
  j["dimension"] = ws.dimension;
  j["degree"] = ws.degree;
  nlohmann::ordered_json slice = nlohmann::ordered_json::array();
  const int N = ws.f.var_count();
  for (const auto& l : ws.slice) {
    CVec row(N + 1);
    for (int v = 0; v < N; ++v)
      row[v] = l.derivative(v).eval(CVec::Zero(N));
    row[N] = l.eval(CVec::Zero(N));
    slice.push_back(detail::cvec_to_json(row));
  }
  j["slice"] = slice;
  nlohmann::ordered_json pts = nlohmann::ordered_json::array();
  for (const auto& w : ws.points) pts.push_back(detail::cvec_to_json(w));
  j["points"] = pts;
  return j;
}

inline WitnessSet witness_from_json(const nlohmann::json& j) {
  WitnessSet ws;
  ws.f = parse_system(j.at("system").get<std::string>());
  ws.dimension = j.at("dimension").get<int>();
  ws.degree = j.at("degree").get<int>();
  const int N = ws.f.var_count();
  for (const auto& row : j.at("slice")) {
    CVec coeffs = detail::cvec_from_json(row);
    if (coeffs.size() != N + 1)
      throw std::invalid_argument("witness file: slice row length != N+1");
    Polynomial l = Polynomial::constant(N, coeffs[N]);
    for (int v = 0; v < N; ++v)
      l = l + Polynomial::variable(N, v, coeffs[v]);
    ws.slice.push_back(std::move(l));
  }
  for (const auto& p : j.at("points"))
    ws.points.push_back(detail::cvec_from_json(p));
  ws.validate();
  return ws;
}

inline WitnessSet load_witness_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open witness file: " + path);
  nlohmann::json j = nlohmann::json::parse(in);
  return witness_from_json(j);
}

inline void save_witness_file(const WitnessSet& ws, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write witness file: " + path);
  out << witness_to_json(ws).dump(2) << "\n";
}

}  // namespace realpoints
