#pragma once

/// Scenario configuration: a JSON key-value tree, schema-validated on load.
/// Unknown keys, out-of-range fractions, undefined references and a missing
/// seed are hard errors; a delta profile that fails the positivity grid check
/// is rejected here, before anything runs.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ccsim/forfeit.hpp"
#include "ccsim/market.hpp"
#include "ccsim/strategies.hpp"

namespace ccsim {

class ScenarioError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct DeltaProfileSpec {
    std::string kind = "constant";  // constant | proportional
    Money amount = Money::from_minor(1);
    Fraction rate;                  // proportional only
    std::shared_ptr<const DeltaProfile> build() const;
};

struct PriceProcessSpec {
    std::string kind = "execution_ramp";  // execution_ramp | stochastic | piecewise
    double sigma = 0.0;
    std::vector<std::pair<Tick, Money>> points;  // piecewise, step-held between points

    Money piecewise_at(Tick t, Money fallback) const;
};

struct HolderSpec {
    HolderId id;
    Tokens tokens = 0;
    Money cash;
};

/// Linear demand for the flush-sale token auction: quantity demanded at
/// per-token price p is max(0, intercept - slope·p).
struct DemandCurveSpec {
    Tokens intercept = 0;       // tokens demanded at price zero
    Fraction slope_per_fiat;    // tokens shed per fiat unit of price

    Tokens quantity_at(Money price) const;
    /// Highest price clearing at least `quantity`, floored at zero.
    Money clearing_price(Tokens quantity) const;
};

struct FlushSpec {
    DemandCurveSpec demand;
    std::vector<HolderId> registered;
    std::vector<HolderId> affiliates;   // restricted alongside the winner
    Tick distribution_delay = 1;
    double bounty_detection_probability = 0.0;
};

struct AgentSpec {
    AgentProfile profile;
    Money cash;
    Tokens tokens = 0;                    // genesis registry holding
    std::vector<Tick> initiate_auction_at;
    std::optional<Tick> abandon_at;
    bool participates = true;             // joins auctions opened by others
    bool rebid_on_periodic = false;
    bool rebid_on_challenge = false;
    bool renew_claim = true;              // rebid with the previous value claim
    Money renewal_cost;
    Tick exec_duration = 30;
    Fraction exec_completion = Fraction::one();
};

struct VariantFlags {
    bool flush_sale = false;
    bool winner_r_raise = true;
    bool pool_votes_count_toward_threshold = false;
    bool flush_surplus_redirect_to_winner = false;
    bool periodic_auctions = true;
};

struct ScenarioConfig {
    std::uint64_t seed = 0;

    Tokens q = 0;
    Money initial_price;
    Fraction t_m{1, 2};
    Fraction gamma;
    Fraction epsilon{1, 100};
    DeltaProfileSpec delta;

    Tick success_window = 30;
    Tick success_run = 10;
    Tick control_period_limit = 360;
    Tick auction_duration = 5;
    std::optional<Money> increment;     // defaults to one minor unit per token
    Tick reference_price_window = 1;    // >1 switches P_ref to a trailing mean
    Tick horizon = 0;                   // 0: derived from the period limit

    std::vector<HolderSpec> holders;
    std::vector<AgentSpec> agents;
    Tokens holder_purchase_capacity = 0;
    Tokens market_maker_capacity = 0;
    Money market_maker_cash;

    PriceProcessSpec price_process;
    FlushSpec flush;
    VariantFlags variants;

    Money increment_or_default() const {
        return increment ? *increment : Money::from_minor(q);
    }
    Tick horizon_or_default() const {
        return horizon > 0 ? horizon : control_period_limit + 10 * auction_duration + 20;
    }
    AuctionTerms terms_at(Money reserve_price) const {
        return AuctionTerms{reserve_price, q, t_m, gamma, epsilon};
    }

    const AgentSpec* find_agent(const std::string& id) const;
};

/// Parses and validates; throws ScenarioError listing every violation.
ScenarioConfig load_scenario_text(const std::string& json_text);
ScenarioConfig load_scenario(const std::string& path);

}  // namespace ccsim
