#pragma once

/// Flush-sale variant: a revised purchase deposit buys every token outside
/// the declared toehold at P0, the deposit is topped up by the freeze-out
/// quantity, and the remaining float is re-auctioned to registered parties
/// with the control party barred. Concealed positions get flushed at P0 like
/// everyone else's, which is the point.

#include <set>
#include <vector>

#include "ccsim/mechanism.hpp"
#include "ccsim/scenario.hpp"

namespace ccsim {

struct RegistrationPredicate {
    std::set<HolderId> registered;
    std::set<HolderId> restricted;  // the winning bidder and its affiliates

    bool eligible(const HolderId& id) const {
        return registered.count(id) != 0 && restricted.count(id) == 0;
    }
};

/// D_p^f = (1 - t_b)·q·P0, covering all tokens outside the reported toehold.
Money revised_purchase_deposit(Tokens declared_toehold, Money reserve_price, Tokens q);

struct FlushPurchase {
    HolderId holder;
    Tokens tokens;
    Money cash;           // tokens · P0
    bool concealed_position = false;
};

struct FlushSaleResult {
    std::vector<FlushPurchase> purchases;
    Tokens purchased_total = 0;
    Money cash_total;
};

/// Buys every registry position except the winner's at P0; affiliates'
/// positions are marked as concealed control-party holdings. The registry
/// plus the declared toehold must account for all q tokens. Mutates the
/// registry (all bought positions go to zero).
FlushSaleResult run_flush_sale(HolderRegistry& registry, const HolderId& winner,
                               Tokens declared_toehold, Tokens q, Money reserve_price,
                               const std::set<HolderId>& affiliates);

struct TokenAuctionResult {
    Money clearing_price;     // uniform price per token
    Tokens quantity = 0;
    Money revenue;            // clearing · quantity
    Money surplus_or_deficit; // revenue - quantity·P0, signed
};

/// Uniform-price clearing of `quantity` tokens against the configured linear
/// demand: the highest price at which demand still takes the full quantity,
/// floored at zero. Restricted parties hold no part of the demand curve.
TokenAuctionResult run_token_auction(Tokens quantity, const DemandCurveSpec& demand,
                                     Money reserve_price);

struct SurplusAllocation {
    HolderId holder;
    Money amount;
};

/// Pro-rata split (largest remainder) of the surplus over registered T1
/// holders by their T1 holdings; restricted identities never receive a
/// share. Empty result when nobody registered (caller escrows and warns).
std::vector<SurplusAllocation> distribute_token_auction_surplus(
    Money surplus, const HolderSnapshot& t1_snapshot, const RegistrationPredicate& registration);

}  // namespace ccsim
