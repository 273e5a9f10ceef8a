#include "ccsim/flush.hpp"

namespace ccsim {

Money revised_purchase_deposit(Tokens declared_toehold, Money reserve_price, Tokens q) {
    return reserve_price * (q - declared_toehold);
}

FlushSaleResult run_flush_sale(HolderRegistry& registry, const HolderId& winner,
                               Tokens declared_toehold, Tokens q, Money reserve_price,
                               const std::set<HolderId>& affiliates) {
    if (registry.total() + declared_toehold != q) {
        throw MoneyError("flush sale: registry plus declared toehold must hold all q tokens");
    }
    FlushSaleResult result;
    auto entries = registry.snapshot_excluding(winner);
    for (const auto& [id, n] : entries) {
        registry.add(id, -n);
        result.purchases.push_back(
            FlushPurchase{id, n, reserve_price * n, affiliates.count(id) != 0});
        result.purchased_total += n;
        result.cash_total += reserve_price * n;
    }
    return result;
}

TokenAuctionResult run_token_auction(Tokens quantity, const DemandCurveSpec& demand,
                                     Money reserve_price) {
    TokenAuctionResult result;
    result.quantity = quantity;
    result.clearing_price = demand.clearing_price(quantity);
    result.revenue = result.clearing_price * quantity;
    result.surplus_or_deficit = result.revenue - reserve_price * quantity;
    return result;
}

std::vector<SurplusAllocation> distribute_token_auction_surplus(
    Money surplus, const HolderSnapshot& t1_snapshot, const RegistrationPredicate& registration) {
    std::vector<HolderId> ids;
    std::vector<Tokens> weights;
    for (std::size_t i = 0; i < t1_snapshot.ids.size(); ++i) {
        if (registration.eligible(t1_snapshot.ids[i]) && t1_snapshot.holdings[i] > 0) {
            ids.push_back(t1_snapshot.ids[i]);
            weights.push_back(t1_snapshot.holdings[i]);
        }
    }
    std::vector<SurplusAllocation> out;
    if (ids.empty() || surplus <= Money{}) return out;
    auto parts = allocate_largest_remainder(surplus.minor(), weights);
    for (std::size_t i = 0; i < ids.size(); ++i) {
        if (parts[i] != 0) out.push_back(SurplusAllocation{ids[i], Money::from_minor(parts[i])});
    }
    return out;
}

}  // namespace ccsim
