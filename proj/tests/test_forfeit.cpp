#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "ccsim/forfeit.hpp"
#include "ccsim/rng.hpp"

using namespace ccsim;

namespace {

ForfeitParams running_params() {
    // D_v=3787.5, S=15, P0=10, t_d=1/4, q=1000, delta = 1 minor unit
    return ForfeitParams{Money::parse("3787.5"),
                         Money::from_fiat(10),
                         Money::from_fiat(15),
                         750,
                         1000,
                         constant_delta_profile(Money::from_minor(1))};
}

}  // namespace

TEST_CASE("value forfeit piecewise branches") {
    ForfeitParams fp = running_params();

    auto mid = value_forfeit(fp, Money::from_fiat(12));
    CHECK(mid.forfeit_to_holders == Money::parse("2250.000001"));
    CHECK(mid.refund_to_control == fp.value_deposit - mid.forfeit_to_holders);

    CHECK(value_forfeit(fp, Money::from_fiat(16)).forfeit_to_holders == Money{});
    CHECK(value_forfeit(fp, Money::from_fiat(9)).forfeit_to_holders == fp.value_deposit);

    SUBCASE("forfeit plus refund is the deposit on every branch") {
        for (int x = 0; x <= 20; ++x) {
            auto o = value_forfeit(fp, Money::from_fiat(x));
            CHECK(o.total() == fp.value_deposit);
            CHECK(o.forfeit_to_holders >= Money{});
        }
    }
    SUBCASE("clamped to escrow for exotic profiles") {
        fp.profile = constant_delta_profile(Money::from_fiat(10'000));
        CHECK(value_forfeit(fp, Money::from_fiat(12)).forfeit_to_holders == fp.value_deposit);
    }
}

TEST_CASE("baseline loss penalty") {
    ForfeitParams fp = running_params();
    CHECK(baseline_loss_penalty(fp) == Money::parse("37.5"));

    fp.value_deposit = Money::from_fiat(3750);  // the eps = 0 limit
    CHECK(baseline_loss_penalty(fp) == Money{});

    fp.value_deposit = Money::from_fiat(7575);
    CHECK(baseline_loss_penalty(fp) == Money::from_fiat(3825));
}

TEST_CASE("forfeit differential") {
    ForfeitParams fp = running_params();
    CHECK(forfeit_differential(fp, Money::from_fiat(13), Money::from_fiat(12)) ==
          Money::from_fiat(1500));
    CHECK(forfeit_differential(fp, Money::from_fiat(15), Money::from_fiat(12)) == Money{});
    CHECK(forfeit_differential(fp, Money::from_fiat(16), Money::from_fiat(12)) == Money{});
}

TEST_CASE("transitional forfeit cases") {
    ForfeitParams fp = running_params();

    // renewed commitment, measured at the supervening start price
    CHECK(transitional_forfeit(fp, Money::from_fiat(13), Money::from_fiat(12)).forfeit_to_holders ==
          Money::from_fiat(1500));

    // below P0 with no commitment to restore it: full forfeit
    CHECK(transitional_forfeit(fp, Money::parse("9.5"), Money::from_fiat(9)).forfeit_to_holders ==
          fp.value_deposit);

    // below P0 but the winner commits to at least P0: credit measured at P0
    CHECK(transitional_forfeit(fp, Money::from_fiat(11), Money::from_fiat(9)).forfeit_to_holders ==
          Money::from_fiat(3000));

    // synthetic no-bid close below P0 (Sw == start price) is a full forfeit
    CHECK(transitional_forfeit(fp, Money::from_fiat(9), Money::from_fiat(9)).forfeit_to_holders ==
          fp.value_deposit);

    // re-affirmation: delta cancels, nothing forfeited
    CHECK(transitional_forfeit(fp, Money::from_fiat(15), Money::from_fiat(12)).forfeit_to_holders ==
          Money{});

    SUBCASE("never exceeds the deposit; matches plain forfeit minus credit") {
        Rng rng(3);
        for (int i = 0; i < 2000; ++i) {
            Money p_tc0 = Money::from_fiat(rng.range(8, 16));
            Money s_w = max(p_tc0, Money::from_fiat(rng.range(8, 18)));
            auto o = transitional_forfeit(fp, s_w, p_tc0);
            CHECK(o.forfeit_to_holders <= fp.value_deposit);
            CHECK(o.total() == fp.value_deposit);
            if (p_tc0 >= fp.reserve_price) {
                Money plain = value_forfeit(fp, p_tc0).forfeit_to_holders;
                Money credit = plain - o.forfeit_to_holders;
                ForfeitParams renewed = fp;
                renewed.value_claim = s_w;
                Money credited_phi = min(value_forfeit(renewed, p_tc0).forfeit_to_holders, plain);
                CHECK(credit == credited_phi);
            }
        }
    }
}

TEST_CASE("surety settlement") {
    Money d_s = Money::parse("6212.5");
    Money d_v = Money::parse("3787.5");
    Money p0 = Money::from_fiat(10);

    auto s1 = surety_settlement(d_s, d_v, p0, Money::from_fiat(8), Money::from_fiat(12), 1000);
    CHECK(s1.value_shortfall == Money::from_fiat(2000));
    CHECK(s1.adjusted_shortfall == Money{});
    CHECK(s1.bid_shortfall == Money{});
    CHECK(s1.returned == d_s);
    CHECK(s1.forfeited == Money{});

    // any Sw >= P0 returns everything regardless of H*
    auto s2 = surety_settlement(d_s, Money{}, p0, Money::from_fiat(1), Money::from_fiat(10), 1000);
    CHECK(s2.returned == d_s);

    auto s3 = surety_settlement(d_s, Money::from_fiat(500), p0, Money::from_fiat(2),
                                Money::from_fiat(2), 1000);
    CHECK(s3.value_shortfall == Money::from_fiat(8000));
    CHECK(s3.adjusted_shortfall == Money::from_fiat(7500));
    CHECK(s3.bid_shortfall == Money::from_fiat(8000));
    CHECK(s3.returned == Money{});
    CHECK(s3.forfeited == d_s);
}

TEST_CASE("holder guarantee: X·(1-t_d)q + forfeit strictly exceeds S·(1-t_d)q") {
    ForfeitParams fp = running_params();
    for (std::int64_t x_minor = 10'000'000; x_minor <= 15'000'000; x_minor += 250'000) {
        Money x = Money::from_minor(x_minor);
        Money forfeit = value_forfeit(fp, x).forfeit_to_holders;
        Money holders_get = x * fp.other_holder_tokens + forfeit;
        Money promised = fp.value_claim * fp.other_holder_tokens;
        CHECK(holders_get == promised + fp.profile->delta(fp.value_claim, x));
    }
}

TEST_CASE("value forfeit non-increasing in X on [P0, S]") {
    ForfeitParams fp = running_params();
    Money prev = value_forfeit(fp, fp.reserve_price).forfeit_to_holders;
    for (std::int64_t x = 10'000'001; x <= 15'000'000; x += 12'345) {
        Money cur = value_forfeit(fp, Money::from_minor(x)).forfeit_to_holders;
        CHECK(cur <= prev);
        prev = cur;
    }
}

TEST_CASE("profile guards") {
    Rng rng(17);
    auto standard = constant_delta_profile(Money::from_minor(1));
    auto proportional = proportional_delta_profile(Fraction(1, 1000), Money::from_minor(1));
    auto zero = zero_delta_profile();
    for (int i = 0; i < 20; ++i) {
        Money p0 = Money::from_fiat(rng.range(1, 40));
        Money s = p0 + Money::from_fiat(rng.range(1, 30));
        CHECK(delta_profile_positive_on_grid(*standard, p0, s));
        CHECK(delta_profile_positive_on_grid(*proportional, p0, s));
        CHECK_FALSE(delta_profile_positive_on_grid(*zero, p0, s));
    }
    ForfeitParams fp = running_params();
    CHECK(forfeit_monotone_in_claim_on_grid(fp, 50));
    fp.profile = proportional;
    CHECK(forfeit_monotone_in_claim_on_grid(fp, 50));
}
