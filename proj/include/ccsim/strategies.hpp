#pragma once

/// Agent strategies and the brute-force oracle that certifies the bidding
/// claims: plan choice, the truthful bid, the honest-claim gap, collusion
/// schedules, and the named adversarial deviations.

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "ccsim/auction.hpp"
#include "ccsim/forfeit.hpp"
#include "ccsim/mechanism.hpp"

namespace ccsim {

/// Finite plan menu.
struct FinitePlans {
    std::vector<BusinessPlan> plans;
};

/// Parametric concave value curve evaluated on a cost grid. Two shapes:
///   saturating:  V(C) = base + gain·C / (C + scale)
///   quadratic:   V(C) = base + slope·(C - C² / (2·cost_cap))
/// Both have V'(0) > 0 and V'' < 0; concavity is verified on the grid by
/// second differences, not assumed.
struct ConcaveCurve {
    enum class Shape { Saturating, Quadratic };
    Shape shape = Shape::Saturating;
    Money base_value;          // V(0), per token
    Money gain;                // saturating: asymptotic per-token gain
    Money scale;               // saturating: cost at half gain
    Fraction slope;            // quadratic: per-token value per unit cost
    Money cost_cap;            // grid spans [0, cost_cap]
    int grid_points = 10'000;

    Money value_at(Money cost) const;
    bool concave_on_grid() const;
};

using PlanFamily = std::variant<FinitePlans, ConcaveCurve>;

enum class Behavior {
    Truthful,
    Overbidder,          // value claim above V and/or stays past break-even
    SurplusUnderbidder,  // stays past break-even via a reduced surplus claim
    Colluder,
    ValueDestroyer,
    ToeholdConcealer,
};

Behavior behavior_from_name(const std::string& name);
const char* behavior_name(Behavior b);

struct AgentProfile {
    std::string id;
    PlanFamily plans = FinitePlans{};
    Tokens toehold_tokens = 0;
    Behavior behavior = Behavior::Truthful;

    Money overbid_claim_margin;    // added to S (Overbidder)
    Money overbid_exit_margin;     // added to the exit level (Over/Underbidder)
    std::string collusion_group;   // non-empty for Colluder
    Tokens concealed_tokens = 0;   // ToeholdConcealer: held via the nominee
    std::string nominee_id;        // registry id fronting the concealed tokens

    // ValueDestroyer: executes to destroyed_value, gains short_notional·(P0 -
    // P_end) or fixed_short_gain if set, and spends destroyer_cost doing it.
    Money destroyed_value;
    Tokens short_notional = 0;
    std::optional<Money> fixed_short_gain;
    Money destroyer_cost;
};

struct ChosenPlan {
    BusinessPlan plan;
    Money social_surplus;  // psi* at the given reserve
};

/// Highest-surplus plan that can support a break-even bid under the
/// market-size cap (cost <= t_m·(V - P0)·q). Empty when psi* <= 0.
std::optional<ChosenPlan> best_plan(const PlanFamily& family, Money reserve_price, Tokens q,
                                    const Fraction& t_m);

/// Same search ignoring the cap; the gap against best_plan is the cost of
/// the liquidity constraint.
std::optional<ChosenPlan> best_plan_unconstrained(const PlanFamily& family, Money reserve_price,
                                                  Tokens q);

/// S = V*, R = profit_target + C* - (V* - P0)·t_b·q. The resulting
/// A = psi* - profit_target. Empty if the cap makes the target infeasible.
std::optional<Bid> optimal_bid(const ChosenPlan& chosen, Tokens toehold_tokens,
                               const AuctionTerms& terms, Money profit_target = Money{});

// -- Brute-force oracle ------------------------------------------------------

struct OracleBidPoint {
    Money value_claim;
    Money surplus_claim;
    Tokens freezeout_tokens;
    Money auction_parameter;
    Money payoff_if_win;  // at own level, forfeit expected from executing to V
};

struct OracleReport {
    Money best_a_nonneg_payoff;       // strongest bid with payoff >= 0 on the grid
    OracleBidPoint best_point;
    Money optimal_bid_a;              // A of the strategy under certification
    bool found_overclaim_tie = false; // an S > V bid matching the honest frontier
    std::optional<OracleBidPoint> tie_witness;
    bool frontier_identity_holds = true;  // A + payoff == psi - delta(S,V)·[S>V], exactly
    std::int64_t points_evaluated = 0;
};

/// Exhaustive search over claims and integer freeze-out counts for one plan
/// family. Expected forfeit for a claim S when the plan tops out at V: zero
/// for S <= V (reaching the claim is success), phi(D_v,P0,S,V) otherwise.
/// claim_grid_steps controls the S grid on [P0, 2·Vmax].
OracleReport brute_force_best_response(const AgentProfile& profile, const AuctionTerms& terms,
                                       std::shared_ptr<const DeltaProfile> delta,
                                       int claim_grid_steps = 200);

/// Collusion schedule: everyone but the group's strongest member stays out.
/// Returns the bidder ids that abstain.
std::vector<std::string> collusive_abstentions(
    const std::vector<std::pair<std::string, Money>>& group_exit_levels);

/// Exit level for a profile given its chosen plan (behavior margins applied).
Money strategy_exit_level(const AgentProfile& profile, const ChosenPlan& chosen,
                          const AuctionTerms& terms);

/// Value claim for a profile (overbidders inflate past V*).
Money strategy_value_claim(const AgentProfile& profile, const ChosenPlan& chosen);

}  // namespace ccsim
