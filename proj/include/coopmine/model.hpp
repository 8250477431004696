#pragma once

#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace coopmine {

// Units: money in dollars, power in kWh/min, time in minutes.

/// Global environment of one mining game.
struct GameEnv {
  double r = 0.0;      // fixed block reward (BTC)
  double tau = 1.0;    // conversion rate ($/BTC)
  double beta = 1.0;   // PoW resolution rate (blocks/min)
  double theta = 0.0;  // average fee per transaction (BTC)
  double l = 0.0;      // nonstrategic power (kWh/min)
  double k_l = 1.0;    // nonstrategic average energy efficiency
};

/// Economics of one strategic actor (a miner or a pool).
struct PlayerSpec {
  std::string id;
  double c = 0.0;  // marginal cost ($ per kWh/min per min)
  double k = 1.0;  // energy efficiency factor
  double t = 0.0;  // transactions per block
  double z = 0.0;  // propagation delay factor (min/transaction)
  double lambda = 0.0;
  double mu = 0.0;
  double capacity = std::numeric_limits<double>::infinity();
  // Free-form label grouping identical miners (scenario reporting only).
  std::string profile;
};

/// U ⊇ S ⊇ Ŝ, by player id.
struct GameState {
  std::vector<std::string> registered;
  std::vector<std::string> present;
  std::vector<std::string> active;

  bool consistent() const;
};

class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(std::vector<std::string> issues);
  const std::vector<std::string>& issues() const { return issues_; }

 private:
  std::vector<std::string> issues_;
};

/// Unsolvable numeric instance (non-convergence, empty game, singular system).
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Returns `env` unchanged when every invariant holds; otherwise throws a
/// ValidationError naming each violated field.
GameEnv validate_env(const GameEnv& env);

/// Field-level checks on a player. `context` prefixes the messages.
std::vector<std::string> player_issues(const PlayerSpec& p, const std::string& context = "");
PlayerSpec validate_player(const PlayerSpec& p);

/// (r + θt)·e^{−βzt}: the block value in BTC after fees and orphan risk.
double block_value(const PlayerSpec& p, const GameEnv& env);

/// τ·(r + θt)·e^{−βzt}, in dollars.
double effective_reward(const PlayerSpec& p, const GameEnv& env);

inline double cost_efficiency_ratio(const PlayerSpec& p) { return p.c / p.k; }

}  // namespace coopmine
