#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace coopmine {

/// Payoffs of an n-player dilemma indexed by j, the number of cooperating
/// co-players: a[j] when cooperating, b[j] when deserting.
struct DilemmaPayoffs {
  std::size_t n = 0;
  std::vector<double> a;
  std::vector<double> b;
};

/// Every violated dilemma property, one message per index.
std::vector<std::string> dilemma_violations(const DilemmaPayoffs& payoffs);

/// Throws ValidationError listing the violations (first 20 spelled out).
DilemmaPayoffs validate_payoffs(DilemmaPayoffs payoffs);

/// a and b interpolated linearly from index 0 to n−1.
DilemmaPayoffs build_payoffs(double a_top, double a_bottom, double b_top, double b_bottom,
                             std::size_t n);

/// Average payoff of the co-players, by own action and j.
struct CoplayerPayoffs {
  std::vector<double> cooperate;  // g^{−i}_{C,j}
  std::vector<double> desert;     // g^{−i}_{D,j}
};

CoplayerPayoffs coplayer_payoffs(const DilemmaPayoffs& payoffs);

/// Memory-one strategy: probability of cooperating next, given own last action
/// and the number j of co-players that cooperated.
struct MemoryOneStrategy {
  std::vector<double> p_cooperate;  // own last action C, indexed by j
  std::vector<double> p_desert;     // own last action D, indexed by j
  double phi = 0.0;                 // fair ZD strategies only
  std::string name;

  std::size_t n() const { return p_cooperate.size(); }
  double p(bool cooperated, std::size_t j) const { return cooperated ? p_cooperate[j] : p_desert[j]; }
};

MemoryOneStrategy constant_strategy(std::size_t n, double p, std::string name);
inline MemoryOneStrategy always_cooperate(std::size_t n) { return constant_strategy(n, 1.0, "all-c"); }
inline MemoryOneStrategy always_defect(std::size_t n) { return constant_strategy(n, 0.0, "all-d"); }

/// p = p^Rep + φ(g^i − g^{−i}). Components within 1e-12 of [0, 1] are snapped;
/// anything further out throws naming the binding component.
MemoryOneStrategy fair_strategy(const DilemmaPayoffs& payoffs, double phi);

struct PhiInterval {
  double lower = 0.0;
  double upper = 0.0;
  std::string lower_binding;  // e.g. "p_D[12] >= 0"
  std::string upper_binding;
};

/// Values of φ keeping every component of the fair strategy in [0, 1].
PhiInterval max_phi(const DilemmaPayoffs& payoffs);

/// 1 / max over all components of (g^i − g^{−i}).
double phi_from_max_gap(const DilemmaPayoffs& payoffs);

}  // namespace coopmine
