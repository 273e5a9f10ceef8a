#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "ccsim/mechanism.hpp"
#include "ccsim/rng.hpp"

using namespace ccsim;

namespace {

AuctionTerms running_terms() {
    // q=1000, P0=10, t_m=1/4, gamma=0, eps=1/100
    return AuctionTerms{Money::from_fiat(10), 1000, Fraction(1, 4), Fraction(0, 1),
                        Fraction(1, 100)};
}

Bid running_bid() {
    // S=15, R=1000, t_b=1/20 of 1000 tokens
    return Bid{Money::from_fiat(15), Money::from_fiat(1000), 50, "alice"};
}

}  // namespace

TEST_CASE("auction parameter: defining formula") {
    AuctionTerms t = running_terms();
    CHECK(auction_parameter(running_bid(), t.reserve_price, t.q) == Money::from_fiat(3750));

    Bid zero_gain{Money::from_fiat(10), Money{}, 0, "b"};
    CHECK(auction_parameter(zero_gain, t.reserve_price, t.q) == Money{});

    Bid full_to_holders{Money::from_fiat(15), Money{}, 0, "b"};
    CHECK(auction_parameter(full_to_holders, t.reserve_price, t.q) == Money::from_fiat(5000));
}

TEST_CASE("freeze-out count and fraction") {
    AuctionTerms t = running_terms();
    CHECK(freezeout_token_count(running_bid(), t.reserve_price) == 200);
    CHECK(freezeout_fraction(running_bid(), t.reserve_price, t.q) == Fraction(1, 5));

    Bid zero{Money::from_fiat(15), Money{}, 50, "b"};
    CHECK(freezeout_token_count(zero, t.reserve_price) == 0);

    // R=-250, S-P0=5, t_b=1/10: offers 50 tokens back at P0
    Bid negative{Money::from_fiat(15), Money::from_fiat(-250), 100, "b"};
    CHECK(freezeout_token_count(negative, t.reserve_price) == -50);
    CHECK(freezeout_fraction(negative, t.reserve_price, t.q) == Fraction(-1, 20));
    CHECK(validate_bid(negative, t) == BidError::None);

    Bid degenerate{Money::from_fiat(10), Money::from_fiat(1), 0, "b"};
    CHECK_THROWS_AS(freezeout_token_count(degenerate, t.reserve_price), MoneyError);
}

TEST_CASE("required deposits: standard case") {
    AuctionTerms t = running_terms();
    DepositSet d = required_deposits(running_bid(), t);
    CHECK(d.token_deposit == 250);
    CHECK(d.value_deposit == Money::parse("3787.5"));
    CHECK(d.purchase_deposit == Money::from_fiat(2000));
    CHECK(d.surety_deposit == Money::parse("6212.5"));

    SUBCASE("gamma=1 disables the surety deposit") {
        t.gamma = Fraction(1, 1);
        CHECK(required_deposits(running_bid(), t).surety_deposit == Money{});
    }
    SUBCASE("negative R needs no purchase deposit") {
        Bid neg{Money::from_fiat(15), Money::from_fiat(-250), 100, "b"};
        CHECK(required_deposits(neg, t).purchase_deposit == Money{});
    }
    SUBCASE("strictly above the bound even at S == P0") {
        Bid flat{Money::from_fiat(10), Money{}, 0, "b"};
        CHECK(required_deposits(flat, t).value_deposit == Money::from_minor(1));
    }
}

TEST_CASE("bid validation reason codes") {
    AuctionTerms t = running_terms();
    CHECK(validate_bid(running_bid(), t) == BidError::None);

    // t_b=1/10 with t_f=1/5 breaches t_m=1/4
    Bid market{Money::from_fiat(15), Money::from_fiat(1000), 100, "b"};
    CHECK(validate_bid(market, t) == BidError::MarketSize);

    // boundary t_b=0, t_f=t_m accepted
    Bid boundary{Money::from_fiat(15), Money::from_fiat(1250), 0, "b"};
    CHECK(validate_bid(boundary, t) == BidError::None);

    Bid below{Money::from_fiat(9), Money{}, 0, "b"};
    CHECK(validate_bid(below, t) == BidError::ValueClaimBelowReserve);

    Bid degenerate{Money::from_fiat(10), Money::from_fiat(-1), 0, "b"};
    CHECK(validate_bid(degenerate, t) == BidError::DegenerateClaim);

    Bid rich{Money::from_fiat(15), Money::parse("1250.000001"), 0, "b"};
    CHECK(validate_bid(rich, t) == BidError::SurplusClaimExceedsCap);

    Bid oversold{Money::from_fiat(15), Money::from_fiat(-500), 50, "b"};
    CHECK(validate_bid(oversold, t) == BidError::NegativeClaimExceedsToehold);

    Bid big_toe{Money::from_fiat(15), Money{}, 600, "b"};
    CHECK(validate_bid(big_toe, t) == BidError::ToeholdExceedsCap);

    CHECK(validate_bid(running_bid(), t, Money::from_fiat(12001)) == BidError::None);
    CHECK(validate_bid(running_bid(), t, Money::from_fiat(11999)) == BidError::InsufficientFunding);
}

TEST_CASE("the two auction parameter forms agree on exact bids") {
    Rng rng(7);
    for (int i = 0; i < 10'000; ++i) {
        Tokens q = rng.range(100, 5000);
        Money p0 = Money::from_minor(rng.range(1, 50) * 1'000'000);
        Money gain = Money::from_minor(rng.range(1, 20) * 500'000);
        Money s = p0 + gain;
        Tokens n_b = rng.range(0, q / 5);
        Tokens n_f = rng.range(0, q / 5);
        Bid bid{s, gain * n_f, n_b, "r"};  // R divisible by construction
        Money lhs = auction_parameter(bid, p0, q);
        Money rhs = gain * (q - n_b - n_f);  // (1 - t_d)(S - P0)q
        CHECK(lhs == rhs);
    }
}

TEST_CASE("deposit monotonicity") {
    AuctionTerms t = running_terms();
    Rng rng(11);
    for (int i = 0; i < 500; ++i) {
        Money r1 = Money::from_minor(rng.range(0, 1'250'000) * 1000);
        Money r2 = r1 + Money::from_minor(rng.range(0, 100) * 1000);
        if (r2 > Money::from_fiat(1250)) continue;
        Bid b1{Money::from_fiat(15), r1, 0, "b"};
        Bid b2{Money::from_fiat(15), r2, 0, "b"};
        auto d1 = required_deposits(b1, t);
        auto d2 = required_deposits(b2, t);
        CHECK(d2.purchase_deposit >= d1.purchase_deposit);  // D_p grows with R
        // D_s shrinks as D_v grows
        if (d2.value_deposit <= d1.value_deposit) {
            CHECK(d2.surety_deposit >= d1.surety_deposit);
        } else {
            CHECK(d2.surety_deposit <= d1.surety_deposit);
        }
    }
    // D_s non-increasing in gamma
    AuctionTerms g1 = t, g2 = t;
    g1.gamma = Fraction(1, 10);
    g2.gamma = Fraction(2, 10);
    CHECK(required_deposits(running_bid(), g2).surety_deposit <=
          required_deposits(running_bid(), g1).surety_deposit);
}

TEST_CASE("holder registry bookkeeping") {
    HolderRegistry reg;
    reg.set("h1", 500);
    reg.set("h2", 450);
    reg.set("winner", 50);
    CHECK(reg.total() == 1000);
    reg.add("h1", -100);
    CHECK(reg.balance("h1") == 400);
    CHECK(reg.total() == 900);
    auto snap = reg.snapshot_excluding("winner");
    CHECK(snap.size() == 2);
    CHECK(snap[0].first == "h1");
    CHECK_THROWS_AS(reg.add("h2", -900), MoneyError);
}
