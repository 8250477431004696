#include "coopmine/dilemma.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "coopmine/model.hpp"

namespace coopmine {

namespace {

constexpr double kSnap = 1e-12;

std::string idx(const char* v, std::size_t j) { return std::string(v) + "[" + std::to_string(j) + "]"; }

struct Component {
  bool cooperate;
  std::size_t j;
  double base;  // p^Rep entry
  double gap;   // g^i − g^{−i}
};

std::vector<Component> components(const DilemmaPayoffs& payoffs) {
  const auto g = coplayer_payoffs(payoffs);
  std::vector<Component> out;
  out.reserve(2 * payoffs.n);
  for (std::size_t j = 0; j < payoffs.n; ++j) out.push_back({true, j, 1.0, payoffs.a[j] - g.cooperate[j]});
  for (std::size_t j = 0; j < payoffs.n; ++j) out.push_back({false, j, 0.0, payoffs.b[j] - g.desert[j]});
  return out;
}

std::string label(const Component& c, const char* bound) {
  return idx(c.cooperate ? "p_C" : "p_D", c.j) + " " + bound;
}

}  // namespace

std::vector<std::string> dilemma_violations(const DilemmaPayoffs& p) {
  std::vector<std::string> out;
  if (p.n < 2) out.push_back("n must be at least 2");
  if (p.a.size() != p.n || p.b.size() != p.n) {
    out.push_back("a and b must hold n entries");
    return out;
  }
  for (std::size_t j = 0; j < p.n; ++j)
    if (!std::isfinite(p.a[j]) || !std::isfinite(p.b[j])) out.push_back("payoffs at j=" + std::to_string(j) + " must be finite");
  if (!out.empty()) return out;
  for (std::size_t j = 0; j + 1 < p.n; ++j) {
    if (p.a[j + 1] < p.a[j]) out.push_back("cooperator payoff decreases: " + idx("a", j + 1) + " < " + idx("a", j));
    if (p.b[j + 1] < p.b[j]) out.push_back("deserter payoff decreases: " + idx("b", j + 1) + " < " + idx("b", j));
    if (!(p.b[j + 1] > p.a[j])) out.push_back("desertion does not pay: " + idx("b", j + 1) + " <= " + idx("a", j));
  }
  if (p.n >= 1 && !(p.a[p.n - 1] > p.b[0]))
    out.push_back("mutual cooperation does not beat mutual desertion: " + idx("a", p.n - 1) + " <= b[0]");
  return out;
}

DilemmaPayoffs validate_payoffs(DilemmaPayoffs payoffs) {
  auto issues = dilemma_violations(payoffs);
  if (issues.empty()) return payoffs;
  if (issues.size() > 20) {
    const auto more = issues.size() - 20;
    issues.resize(20);
    issues.push_back("and " + std::to_string(more) + " more");
  }
  throw ValidationError(std::move(issues));
}

DilemmaPayoffs build_payoffs(double a_top, double a_bottom, double b_top, double b_bottom, std::size_t n) {
  if (n < 2) throw ValidationError({"n must be at least 2"});
  DilemmaPayoffs p;
  p.n = n;
  p.a.resize(n);
  p.b.resize(n);
  const double span = static_cast<double>(n - 1);
  for (std::size_t j = 0; j < n; ++j) {
    const double w = static_cast<double>(j) / span;
    p.a[j] = a_bottom + (a_top - a_bottom) * w;
    p.b[j] = b_bottom + (b_top - b_bottom) * w;
  }
  p.a[n - 1] = a_top;
  p.b[n - 1] = b_top;
  return validate_payoffs(std::move(p));
}

CoplayerPayoffs coplayer_payoffs(const DilemmaPayoffs& p) {
  const std::size_t n = p.n;
  const double m = static_cast<double>(n - 1);
  CoplayerPayoffs g;
  g.cooperate.resize(n);
  g.desert.resize(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double jc = static_cast<double>(j);
    const double jd = static_cast<double>(n - j - 1);
    g.cooperate[j] = (jc * p.a[j] + (j + 1 < n ? jd * p.b[j + 1] : 0.0)) / m;
    g.desert[j] = ((j > 0 ? jc * p.a[j - 1] : 0.0) + jd * p.b[j]) / m;
  }
  return g;
}

MemoryOneStrategy constant_strategy(std::size_t n, double p, std::string name) {
  if (!(p >= 0 && p <= 1)) throw ValidationError({"probability must lie in [0, 1]"});
  MemoryOneStrategy s;
  s.p_cooperate.assign(n, p);
  s.p_desert.assign(n, p);
  s.name = std::move(name);
  return s;
}

MemoryOneStrategy fair_strategy(const DilemmaPayoffs& payoffs, double phi) {
  if (!std::isfinite(phi)) throw ValidationError({"phi must be finite"});
  MemoryOneStrategy s;
  s.phi = phi;
  s.name = "fair";
  s.p_cooperate.resize(payoffs.n);
  s.p_desert.resize(payoffs.n);
  for (const auto& c : components(payoffs)) {
    double v = c.base + phi * c.gap;
    if (v < 0) {
      if (v < -kSnap) throw ValidationError({"inadmissible phi: " + label(c, ">= 0") + " fails"});
      v = 0.0;
    } else if (v > 1) {
      if (v > 1 + kSnap) throw ValidationError({"inadmissible phi: " + label(c, "<= 1") + " fails"});
      v = 1.0;
    }
    (c.cooperate ? s.p_cooperate : s.p_desert)[c.j] = v;
  }
  return s;
}

PhiInterval max_phi(const DilemmaPayoffs& payoffs) {
  PhiInterval out;
  out.lower = -std::numeric_limits<double>::infinity();
  out.upper = std::numeric_limits<double>::infinity();
  for (const auto& c : components(payoffs)) {
    if (c.gap == 0) continue;
    // 0 <= base + φ·gap <= 1
    const double to_zero = -c.base / c.gap;
    const double to_one = (1.0 - c.base) / c.gap;
    const double lo = c.gap > 0 ? to_zero : to_one;
    const double hi = c.gap > 0 ? to_one : to_zero;
    const char* lo_name = c.gap > 0 ? ">= 0" : "<= 1";
    const char* hi_name = c.gap > 0 ? "<= 1" : ">= 0";
    if (lo > out.lower) {
      out.lower = lo;
      out.lower_binding = label(c, lo_name);
    }
    if (hi < out.upper) {
      out.upper = hi;
      out.upper_binding = label(c, hi_name);
    }
  }
  out.lower += 0.0;  // no negative zero
  if (out.lower > out.upper) throw NumericError("no admissible phi: " + out.lower_binding + " conflicts with " + out.upper_binding);
  return out;
}

double phi_from_max_gap(const DilemmaPayoffs& payoffs) {
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& c : components(payoffs)) best = std::max(best, c.gap);
  if (!(best > 0)) throw NumericError("payoff gaps are never positive");
  return 1.0 / best;
}

}  // namespace coopmine
