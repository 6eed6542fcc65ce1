#pragma once

#include <algorithm>
#include <charconv>
#include <map>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "realpoints/types.hpp"

namespace realpoints {

using Exponents = std::vector<int>;

/// Graded lexicographic order, descending: higher total degree first, ties
/// broken by the lexicographically larger exponent vector. Map iteration in
/// this order is the canonical term order for printing and hashing.
struct GrlexDesc {
  bool operator()(const Exponents& a, const Exponents& b) const {
    int da = std::accumulate(a.begin(), a.end(), 0);
    int db = std::accumulate(b.begin(), b.end(), 0);
    if (da != db) return da > db;
    return std::lexicographical_compare(b.begin(), b.end(), a.begin(), a.end());
  }
};

/// Sparse multivariate polynomial over complex double coefficients.
/// Invariants: no stored coefficient is zero, no duplicate exponent vectors,
/// every exponent vector has length var_count(). The zero polynomial is the
/// empty term map and has degree -1.
class Polynomial {
 public:
  using TermMap = std::map<Exponents, Complex, GrlexDesc>;

  Polynomial() : nvars_(0) {}
  explicit Polynomial(int nvars) : nvars_(nvars) {}

  static Polynomial constant(int nvars, Complex c) {
    Polynomial p(nvars);
    p.add_term(Exponents(nvars, 0), c);
    return p;
  }

  static Polynomial variable(int nvars, int index, Complex coeff = 1.0) {
    Polynomial p(nvars);
    Exponents e(nvars, 0);
    e[index] = 1;
    p.add_term(std::move(e), coeff);
    return p;
  }

  int var_count() const { return nvars_; }
  const TermMap& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }
  std::size_t term_count() const { return terms_.size(); }

  void add_term(Exponents e, Complex c) {
    if (c == 0.0) return;
    auto [it, inserted] = terms_.emplace(std::move(e), c);
    if (!inserted) {
      it->second += c;
      if (it->second == 0.0) terms_.erase(it);
    }
  }

  /// Max total degree over terms; -1 for the zero polynomial.
  int degree() const {
    int d = -1;
    for (const auto& [e, c] : terms_)
      d = std::max(d, std::accumulate(e.begin(), e.end(), 0));
    return d;
  }

  /// Max degree restricted to a subset of the variables.
  int group_degree(const std::vector<int>& group) const {
    int d = 0;
    for (const auto& [e, c] : terms_) {
      int s = 0;
      for (int v : group) s += e[v];
      d = std::max(d, s);
    }
    return d;
  }

  Complex eval(const CVec& x) const {
    if (x.size() != nvars_)
      throw std::invalid_argument("Polynomial::eval: point has wrong dimension");
    Complex acc = 0.0;
    for (const auto& [e, c] : terms_) {
      Complex t = c;
      for (int v = 0; v < nvars_; ++v)
        for (int k = 0; k < e[v]; ++k) t *= x[v];
      acc += t;
    }
    return acc;
  }

  Polynomial operator+(const Polynomial& o) const {
    Polynomial r = *this;
    for (const auto& [e, c] : o.terms_) r.add_term(e, c);
    return r;
  }

  Polynomial operator-(const Polynomial& o) const {
    Polynomial r = *this;
    for (const auto& [e, c] : o.terms_) r.add_term(e, -c);
    return r;
  }

  Polynomial operator*(const Polynomial& o) const {
    Polynomial r(nvars_);
    for (const auto& [ea, ca] : terms_) {
      for (const auto& [eb, cb] : o.terms_) {
        Exponents e(nvars_);
        for (int v = 0; v < nvars_; ++v) e[v] = ea[v] + eb[v];
        r.add_term(std::move(e), ca * cb);
      }
    }
    return r;
  }

  Polynomial operator*(Complex s) const {
    Polynomial r(nvars_);
    if (s == 0.0) return r;
    for (const auto& [e, c] : terms_) r.terms_.emplace(e, c * s);
    return r;
  }

  Polynomial operator-() const { return *this * Complex(-1.0); }

  Polynomial pow(int k) const {
    if (k < 0) throw std::invalid_argument("Polynomial::pow: negative exponent");
    Polynomial r = constant(nvars_, 1.0);
    for (int i = 0; i < k; ++i) r = r * *this;
    return r;
  }

  Polynomial derivative(int var) const {
    Polynomial r(nvars_);
    for (const auto& [e, c] : terms_) {
      if (e[var] == 0) continue;
      Exponents d = e;
      d[var] -= 1;
      r.add_term(std::move(d), c * double(e[var]));
    }
    return r;
  }

  /// Fold a fixed value for one variable into the coefficients. The variable
  /// slot stays in place with exponent 0 everywhere.
  Polynomial substitute(int var, Complex value) const {
    Polynomial r(nvars_);
    for (const auto& [e, c] : terms_) {
      Complex f = c;
      for (int k = 0; k < e[var]; ++k) f *= value;
      Exponents d = e;
      d[var] = 0;
      r.add_term(std::move(d), f);
    }
    return r;
  }

  /// Re-index into a larger variable space: old variable v becomes new
  /// variable map[v]. Used to lift systems into homotopy variable spaces.
  Polynomial remapped(int new_nvars, const std::vector<int>& map) const {
    Polynomial r(new_nvars);
    for (const auto& [e, c] : terms_) {
      Exponents d(new_nvars, 0);
      for (int v = 0; v < nvars_; ++v) d[map[v]] = e[v];
      r.add_term(std::move(d), c);
    }
    return r;
  }

  /// Drop a variable that no longer appears (exponent 0 in every term).
  Polynomial dropped_var(int var) const {
    Polynomial r(nvars_ - 1);
    for (const auto& [e, c] : terms_) {
      if (e[var] != 0)
        throw std::logic_error("dropped_var: variable still present");
      Exponents d;
      d.reserve(nvars_ - 1);
      for (int v = 0; v < nvars_; ++v)
        if (v != var) d.push_back(e[v]);
      r.add_term(std::move(d), c);
    }
    return r;
  }

  bool operator==(const Polynomial& o) const {
    return nvars_ == o.nvars_ && terms_ == o.terms_;
  }

 private:
  int nvars_;
  TermMap terms_;
};

namespace detail {

inline std::string format_double(double d) {
  char buf[40];
  auto res = std::to_chars(buf, buf + sizeof(buf), d);
  return std::string(buf, res.ptr);
}

inline std::string format_coeff(Complex c) {
  if (c.imag() == 0.0) return format_double(c.real());
  if (c.real() == 0.0) return format_double(c.imag()) + "i";
  std::string s = "(" + format_double(c.real());
  if (c.imag() >= 0) s += "+";
  s += format_double(c.imag()) + "i)";
  return s;
}

}  // namespace detail

/// Square-free ordered list of named variables plus the polynomials over
/// them. Symbolic gradients are computed once at construction; the object is
/// immutable afterwards and safe to share across threads.
class PolynomialSystem {
 public:
  PolynomialSystem() = default;

  PolynomialSystem(std::vector<std::string> vars, std::vector<Polynomial> polys)
      : vars_(std::move(vars)), polys_(std::move(polys)) {
    for (const auto& p : polys_)
      if (p.var_count() != int(vars_.size()))
        throw std::invalid_argument(
            "PolynomialSystem: polynomial variable count mismatch");
    grads_.resize(polys_.size());
    for (std::size_t i = 0; i < polys_.size(); ++i) {
      grads_[i].reserve(vars_.size());
      for (std::size_t j = 0; j < vars_.size(); ++j)
        grads_[i].push_back(polys_[i].derivative(int(j)));
    }
  }

  int var_count() const { return int(vars_.size()); }
  int size() const { return int(polys_.size()); }
  const std::vector<std::string>& variables() const { return vars_; }
  const std::vector<Polynomial>& polynomials() const { return polys_; }
  const Polynomial& operator[](int i) const { return polys_[i]; }
  const Polynomial& gradient(int i, int j) const { return grads_[i][j]; }

  CVec eval(const CVec& x) const {
    if (x.size() != var_count())
      throw std::invalid_argument("PolynomialSystem::eval: dimension mismatch");
    CVec r(size());
    for (int i = 0; i < size(); ++i) r[i] = polys_[i].eval(x);
    return r;
  }

  /// Entry (i,j) is the partial of equation i by variable j at the point.
  CMat jacobian(const CVec& x) const {
    if (x.size() != var_count())
      throw std::invalid_argument(
          "PolynomialSystem::jacobian: dimension mismatch");
    CMat m(size(), var_count());
    for (int i = 0; i < size(); ++i)
      for (int j = 0; j < var_count(); ++j) m(i, j) = grads_[i][j].eval(x);
    return m;
  }

  int max_degree() const {
    int d = -1;
    for (const auto& p : polys_) d = std::max(d, p.degree());
    return d;
  }

  std::string to_string() const {
    std::string out = "variables:";
    for (const auto& v : vars_) out += " " + v;
    out += "\n";
    for (const auto& p : polys_) out += poly_to_string(p) + "\n";
    return out;
  }

  std::string poly_to_string(const Polynomial& p) const {
    if (p.is_zero()) return "0";
    std::string out;
    bool first = true;
    for (const auto& [e, c] : p.terms()) {
      Complex coeff = c;
      std::string sep;
      if (first) {
        first = false;
      } else if (coeff.imag() == 0.0 && coeff.real() < 0) {
        sep = " - ";
        coeff = -coeff;
      } else {
        sep = " + ";
      }
      std::vector<std::string> factors;
      bool has_var = false;
      for (int v = 0; v < p.var_count(); ++v) {
        if (e[v] == 0) continue;
        has_var = true;
        factors.push_back(e[v] == 1 ? vars_[v]
                                    : vars_[v] + "^" + std::to_string(e[v]));
      }
      std::string term;
      if (!has_var || coeff != Complex(1.0)) {
        term = detail::format_coeff(coeff);
        if (has_var) term += "*";
      }
      for (std::size_t k = 0; k < factors.size(); ++k) {
        term += factors[k];
        if (k + 1 < factors.size()) term += "*";
      }
      out += sep + term;
    }
    return out;
  }

 private:
  std::vector<std::string> vars_;
  std::vector<Polynomial> polys_;
  std::vector<std::vector<Polynomial>> grads_;
};

/// g = f_1^2 + ... + f_n^2 as a single-polynomial system on the same
/// variables. Its real zero set equals that of the input system.
inline PolynomialSystem sum_of_squares(const PolynomialSystem& sys) {
  if (sys.size() < 1)
    throw std::invalid_argument("sum_of_squares: empty system");
  Polynomial g(sys.var_count());
  for (int i = 0; i < sys.size(); ++i) g = g + sys[i] * sys[i];
  return PolynomialSystem(sys.variables(), {g});
}

/// Adds one fresh homogenizing variable for the given variable group and
/// makes each polynomial homogeneous in group + {new} with degree equal to
/// its original group-degree. The new variable is appended last.
inline PolynomialSystem homogenize(const PolynomialSystem& sys,
                                   const std::vector<int>& group,
                                   const std::string& hom_name = "_h") {
  if (group.empty()) throw std::invalid_argument("homogenize: empty group");
  int n = sys.var_count();
  std::vector<std::string> vars = sys.variables();
  vars.push_back(hom_name);
  std::vector<Polynomial> out;
  out.reserve(sys.size());
  for (int i = 0; i < sys.size(); ++i) {
    const Polynomial& p = sys[i];
    int gdeg = p.group_degree(group);
    Polynomial q(n + 1);
    for (const auto& [e, c] : p.terms()) {
      Exponents d(n + 1, 0);
      int tdeg = 0;
      for (int v = 0; v < n; ++v) d[v] = e[v];
      for (int v : group) tdeg += e[v];
      d[n] = gdeg - tdeg;
      q.add_term(std::move(d), c);
    }
    out.push_back(std::move(q));
  }
  return PolynomialSystem(std::move(vars), std::move(out));
}

/// Specialize one variable to a value and remove it from the system.
inline PolynomialSystem specialize(const PolynomialSystem& sys, int var,
                                   Complex value) {
  std::vector<std::string> vars;
  for (int v = 0; v < sys.var_count(); ++v)
    if (v != var) vars.push_back(sys.variables()[v]);
  std::vector<Polynomial> polys;
  polys.reserve(sys.size());
  for (int i = 0; i < sys.size(); ++i)
    polys.push_back(sys[i].substitute(var, value).dropped_var(var));
  return PolynomialSystem(std::move(vars), std::move(polys));
}

/// Flattened multi-polynomial evaluator with a shared per-point power table.
/// One instance per thread: eval() reuses internal scratch buffers.
class SystemEvaluator {
 public:
  SystemEvaluator() = default;

  SystemEvaluator(const std::vector<const Polynomial*>& polys, int nvars)
      : nvars_(nvars), npolys_(int(polys.size())), max_deg_(nvars, 0) {
    poly_off_.push_back(0);
    for (const Polynomial* p : polys) {
      for (const auto& [e, c] : p->terms()) {
        coeffs_.push_back(c);
        int fb = int(factors_.size());
        for (int v = 0; v < nvars_; ++v) {
          if (e[v] > 0) {
            factors_.push_back({v, e[v]});
            max_deg_[v] = std::max(max_deg_[v], e[v]);
          }
        }
        factor_off_.push_back(fb);
      }
      poly_off_.push_back(int(coeffs_.size()));
    }
    factor_off_.push_back(int(factors_.size()));
    pow_off_.resize(nvars_ + 1);
    pow_off_[0] = 0;
    for (int v = 0; v < nvars_; ++v)
      pow_off_[v + 1] = pow_off_[v] + max_deg_[v] + 1;
    powers_.resize(pow_off_[nvars_]);
  }

  int poly_count() const { return npolys_; }
  int var_count() const { return nvars_; }

  /// Evaluate all polynomials at x; out must have room for poly_count().
  void eval(const Complex* x, Complex* out) {
    for (int v = 0; v < nvars_; ++v) {
      Complex* pw = powers_.data() + pow_off_[v];
      pw[0] = 1.0;
      for (int k = 1; k <= max_deg_[v]; ++k) pw[k] = pw[k - 1] * x[v];
    }
    for (int p = 0; p < npolys_; ++p) {
      Complex acc = 0.0;
      for (int t = poly_off_[p]; t < poly_off_[p + 1]; ++t) {
        Complex term = coeffs_[t];
        for (int f = factor_off_[t]; f < factor_off_[t + 1]; ++f)
          term *= powers_[pow_off_[factors_[f].var] + factors_[f].exp];
        acc += term;
      }
      out[p] = acc;
    }
  }

 private:
  struct Factor {
    int var;
    int exp;
  };
  int nvars_ = 0;
  int npolys_ = 0;
  std::vector<Complex> coeffs_;
  std::vector<Factor> factors_;
  std::vector<int> poly_off_;    // npolys+1 offsets into coeffs_
  std::vector<int> factor_off_;  // per-term offsets into factors_
  std::vector<int> max_deg_;
  std::vector<int> pow_off_;
  std::vector<Complex> powers_;  // scratch
};

}  // namespace realpoints
