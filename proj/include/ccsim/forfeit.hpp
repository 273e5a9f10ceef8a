#pragma once

/// Value-deposit forfeit family and surety settlement.
///
/// phi(D_v, P0, S, X) = 0                              X > S
///                      (1-t_d)(S-X)q + delta(S,X)     X in [P0, S]
///                      D_v                            X < P0
/// clamped to [0, D_v]. delta is a pluggable profile; the standard profile is
/// a constant one minor unit.

#include <cstdint>
#include <functional>
#include <memory>
#include <string>

#include "ccsim/mechanism.hpp"

namespace ccsim {

/// delta(S, X) -> Money, must be > 0 on [P0, S] for honest value claims to
/// dominate (checked at configuration load, not assumed).
class DeltaProfile {
public:
    virtual ~DeltaProfile() = default;
    virtual Money delta(Money value_claim, Money outcome) const = 0;
    virtual std::string describe() const = 0;
};

std::shared_ptr<const DeltaProfile> constant_delta_profile(Money amount);
/// delta = rate * (S - X) + floor_amount; exercises non-constant profiles.
std::shared_ptr<const DeltaProfile> proportional_delta_profile(Fraction rate, Money floor_amount);
/// Deliberately violates the positivity condition; only reachable from test
/// and verification code, never from a scenario file.
std::shared_ptr<const DeltaProfile> zero_delta_profile();

struct ForfeitParams {
    Money value_deposit;                           // D_v
    Money reserve_price;                           // P0, per token
    Money value_claim;                             // S, per token
    Tokens other_holder_tokens = 0;                // (1-t_d)q
    Tokens q = 0;
    std::shared_ptr<const DeltaProfile> profile;   // delta(S, X)

    static ForfeitParams from_record(const AuctionRecord& record,
                                     std::shared_ptr<const DeltaProfile> profile);
};

struct SettlementOutcome {
    Money forfeit_to_holders;
    Money refund_to_control;

    Money total() const { return forfeit_to_holders + refund_to_control; }
};

/// The piecewise forfeit at reference price X, forfeit + refund == D_v.
SettlementOutcome value_forfeit(const ForfeitParams& fp, Money outcome_price);

/// phi0 = D_v - (1-t_d)(S-P0)q, the jump across X = P0 as delta -> 0.
Money baseline_loss_penalty(const ForfeitParams& fp);

/// Delta-phi: positive part of phi at claim S minus phi at claim S_w, both
/// under the original D_v / P0 / t_d / q.
Money forfeit_differential(const ForfeitParams& fp, Money winning_claim, Money outcome_price);

/// phi*: settlement of the previous value deposit when control ends in a new
/// auction. s_w is the supervening value claim (or the synthetic price of an
/// abandonment / no-bid close); p_tc0 the reference price when that auction
/// began.
SettlementOutcome transitional_forfeit(const ForfeitParams& fp, Money winning_claim,
                                       Money auction_start_price);

struct SuretySettlement {
    Money returned;
    Money forfeited;
    Money value_shortfall;     // H
    Money adjusted_shortfall;  // H*
    Money bid_shortfall;       // B
};

/// H = max{(P0 - P0w)q, 0}; H* = max{H - D_v, 0}; B = max{(P0 - Sw)q, 0};
/// returned = max{D_s - B, D_s - H*, 0}.
SuretySettlement surety_settlement(Money surety_deposit, Money value_deposit,
                                   Money reserve_price, Money new_reserve_price,
                                   Money winning_claim, Tokens q);

/// Positivity of delta on a grid of X in [P0, S]; scenario load rejects
/// profiles that fail.
bool delta_profile_positive_on_grid(const DeltaProfile& profile, Money reserve_price,
                                    Money value_claim, int grid_points = 1000);

/// phi non-decreasing in the claim S at fixed X (what makes Delta-phi >= 0
/// exactly when the renewed claim is lower). Checked per profile at load.
bool forfeit_monotone_in_claim_on_grid(const ForfeitParams& fp, int grid_points = 200);

}  // namespace ccsim
