#include "ccsim/scenario.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace ccsim {

using ojson = nlohmann::ordered_json;

namespace {

class Checker {
public:
    void fail(const std::string& msg) { violations_.push_back(msg); }

    void expect_keys(const ojson& obj, const std::string& where,
                     const std::set<std::string>& allowed) {
        for (auto it = obj.begin(); it != obj.end(); ++it) {
            if (!allowed.count(it.key())) fail(where + ": unknown key '" + it.key() + "'");
        }
    }

    void finish() const {
        if (violations_.empty()) return;
        std::string all = "scenario invalid:";
        for (const auto& v : violations_) all += "\n  - " + v;
        throw ScenarioError(all);
    }

private:
    std::vector<std::string> violations_;
};

Money parse_money(const ojson& v, const std::string& where, Checker& check) {
    try {
        if (v.is_number_integer()) return Money::from_fiat(v.get<std::int64_t>());
        if (v.is_string()) return Money::parse(v.get<std::string>());
    } catch (const MoneyError& e) {
        check.fail(where + ": " + e.what());
        return Money{};
    }
    check.fail(where + ": expected a decimal string or integer");
    return Money{};
}

Fraction parse_fraction(const ojson& v, const std::string& where, Checker& check) {
    try {
        if (v.is_number_integer()) return Fraction(v.get<std::int64_t>(), 1);
        if (v.is_string()) return Fraction::parse(v.get<std::string>());
    } catch (const FractionError& e) {
        check.fail(where + ": " + e.what());
        return Fraction();
    }
    check.fail(where + ": expected \"num/den\" or an integer");
    return Fraction();
}

PlanFamily parse_plans(const ojson& v, const std::string& where, Checker& check) {
    if (v.is_array()) {
        FinitePlans finite;
        for (const auto& p : v) {
            if (!p.is_array() || p.size() != 2) {
                check.fail(where + ": each plan is [value_per_token, cost]");
                continue;
            }
            BusinessPlan plan{parse_money(p[0], where + ".value", check),
                              parse_money(p[1], where + ".cost", check)};
            if (plan.cost < Money{}) check.fail(where + ": plan cost must be >= 0");
            if (plan.value_outcome < Money{}) check.fail(where + ": plan value must be >= 0");
            finite.plans.push_back(plan);
        }
        return finite;
    }
    if (v.is_object()) {
        Checker& c = check;
        c.expect_keys(v, where,
                      {"shape", "base_value", "gain", "scale", "slope", "cost_cap", "grid_points"});
        ConcaveCurve curve;
        std::string shape = v.value("shape", "saturating");
        if (shape == "saturating") {
            curve.shape = ConcaveCurve::Shape::Saturating;
        } else if (shape == "quadratic") {
            curve.shape = ConcaveCurve::Shape::Quadratic;
        } else {
            c.fail(where + ": shape must be saturating|quadratic");
        }
        if (v.contains("base_value")) curve.base_value = parse_money(v["base_value"], where, c);
        if (v.contains("gain")) curve.gain = parse_money(v["gain"], where, c);
        if (v.contains("scale")) curve.scale = parse_money(v["scale"], where, c);
        if (v.contains("slope")) curve.slope = parse_fraction(v["slope"], where, c);
        if (v.contains("cost_cap")) curve.cost_cap = parse_money(v["cost_cap"], where, c);
        if (v.contains("grid_points")) curve.grid_points = v["grid_points"].get<int>();
        if (curve.grid_points < 3 || curve.grid_points > 1'000'000) {
            c.fail(where + ": grid_points out of range");
        }
        return curve;
    }
    check.fail(where + ": plans must be an array of [V,C] or a curve object");
    return FinitePlans{};
}

}  // namespace

std::shared_ptr<const DeltaProfile> DeltaProfileSpec::build() const {
    if (kind == "constant") return constant_delta_profile(amount);
    if (kind == "proportional") return proportional_delta_profile(rate, amount);
    throw ScenarioError("unknown delta profile kind: " + kind);
}

Money PriceProcessSpec::piecewise_at(Tick t, Money fallback) const {
    Money last = fallback;
    for (const auto& [tick, price] : points) {
        if (tick > t) break;
        last = price;
    }
    return last;
}

Tokens DemandCurveSpec::quantity_at(Money price) const {
    // slope is per fiat; price carries 10^6 minor units per fiat
    Tokens shed = static_cast<Tokens>(__int128(slope_per_fiat.num()) * price.minor() /
                                      (__int128(slope_per_fiat.den()) * Money::kScale));
    Tokens qty = intercept - shed;
    return qty < 0 ? 0 : qty;
}

Money DemandCurveSpec::clearing_price(Tokens quantity) const {
    if (slope_per_fiat.num() <= 0) {
        return intercept >= quantity ? Money::from_minor(std::numeric_limits<std::int64_t>::max())
                                     : Money{};
    }
    if (intercept < quantity) return Money{};
    // largest p with intercept - floor(slope·p) >= quantity
    __int128 p = (__int128(intercept - quantity + 1) * slope_per_fiat.den() * Money::kScale - 1) /
                 slope_per_fiat.num();
    if (p < 0) p = 0;
    return Money::from_minor(static_cast<std::int64_t>(p));
}

const AgentSpec* ScenarioConfig::find_agent(const std::string& id) const {
    for (const auto& a : agents) {
        if (a.profile.id == id) return &a;
    }
    return nullptr;
}

ScenarioConfig load_scenario_text(const std::string& json_text) {
    ojson j;
    try {
        j = ojson::parse(json_text);
    } catch (const ojson::parse_error& e) {
        throw ScenarioError(std::string("scenario is not valid JSON: ") + e.what());
    }

    Checker check;
    ScenarioConfig cfg;

    check.expect_keys(j, "scenario",
                      {"seed", "dao", "holders", "agents", "price_process", "flush", "variants",
                       "market_maker", "holder_purchase_capacity", "horizon"});

    if (!j.contains("seed")) {
        check.fail("scenario: missing seed");
    } else {
        cfg.seed = j["seed"].get<std::uint64_t>();
    }

    if (!j.contains("dao") || !j["dao"].is_object()) {
        check.fail("scenario: missing dao object");
        check.finish();
    }
    const ojson& dao = j["dao"];
    check.expect_keys(dao, "dao",
                      {"q", "initial_price", "t_m", "gamma", "epsilon", "delta_profile",
                       "success_window", "success_run", "control_period_limit", "auction_duration",
                       "increment", "reference_price_window"});
    if (dao.contains("q")) cfg.q = dao["q"].get<Tokens>();
    if (cfg.q <= 0) check.fail("dao.q: must be a positive token count");
    if (dao.contains("initial_price")) {
        cfg.initial_price = parse_money(dao["initial_price"], "dao.initial_price", check);
    }
    if (cfg.initial_price <= Money{}) check.fail("dao.initial_price: must be positive");
    if (dao.contains("t_m")) cfg.t_m = parse_fraction(dao["t_m"], "dao.t_m", check);
    if (!(cfg.t_m > Fraction::zero() && cfg.t_m < Fraction::one())) {
        check.fail("dao.t_m: must lie strictly inside (0,1)");
    }
    if (dao.contains("gamma")) cfg.gamma = parse_fraction(dao["gamma"], "dao.gamma", check);
    if (cfg.gamma > Fraction::one()) check.fail("dao.gamma: must be <= 1");
    if (dao.contains("epsilon")) cfg.epsilon = parse_fraction(dao["epsilon"], "dao.epsilon", check);
    if (cfg.epsilon < Fraction::zero() || cfg.epsilon > Fraction::one()) {
        check.fail("dao.epsilon: must lie in [0,1]");
    }
    if (dao.contains("delta_profile")) {
        const ojson& dp = dao["delta_profile"];
        check.expect_keys(dp, "dao.delta_profile", {"kind", "amount", "rate"});
        cfg.delta.kind = dp.value("kind", "constant");
        if (dp.contains("amount")) {
            cfg.delta.amount = parse_money(dp["amount"], "dao.delta_profile.amount", check);
        }
        if (dp.contains("rate")) {
            cfg.delta.rate = parse_fraction(dp["rate"], "dao.delta_profile.rate", check);
        }
        if (cfg.delta.kind != "constant" && cfg.delta.kind != "proportional") {
            check.fail("dao.delta_profile.kind: constant|proportional");
        }
    }
    if (dao.contains("success_window")) cfg.success_window = dao["success_window"].get<Tick>();
    if (dao.contains("success_run")) cfg.success_run = dao["success_run"].get<Tick>();
    if (cfg.success_run > cfg.success_window || cfg.success_run <= 0) {
        check.fail("dao.success_run: must satisfy 0 < run <= window");
    }
    if (dao.contains("control_period_limit")) {
        cfg.control_period_limit = dao["control_period_limit"].get<Tick>();
    }
    if (dao.contains("auction_duration")) cfg.auction_duration = dao["auction_duration"].get<Tick>();
    if (cfg.auction_duration <= 0) check.fail("dao.auction_duration: must be positive");
    if (dao.contains("increment")) {
        cfg.increment = parse_money(dao["increment"], "dao.increment", check);
        if (*cfg.increment <= Money{}) check.fail("dao.increment: must be positive");
    }
    if (dao.contains("reference_price_window")) {
        cfg.reference_price_window = dao["reference_price_window"].get<Tick>();
        if (cfg.reference_price_window < 1) check.fail("dao.reference_price_window: must be >= 1");
    }

    if (j.contains("holders")) {
        for (std::size_t i = 0; i < j["holders"].size(); ++i) {
            const ojson& h = j["holders"][i];
            std::string where = "holders[" + std::to_string(i) + "]";
            check.expect_keys(h, where, {"id", "tokens", "cash"});
            HolderSpec spec;
            spec.id = h.value("id", "");
            if (spec.id.empty()) check.fail(where + ": missing id");
            if (h.contains("tokens")) spec.tokens = h["tokens"].get<Tokens>();
            if (spec.tokens < 0) check.fail(where + ": tokens must be >= 0");
            if (h.contains("cash")) spec.cash = parse_money(h["cash"], where + ".cash", check);
            cfg.holders.push_back(std::move(spec));
        }
    }

    std::set<std::string> ids;
    if (j.contains("agents")) {
        for (std::size_t i = 0; i < j["agents"].size(); ++i) {
            const ojson& a = j["agents"][i];
            std::string where = "agents[" + std::to_string(i) + "]";
            check.expect_keys(
                a, where,
                {"id", "cash", "tokens", "behavior", "plans", "initiate_auction_at", "abandon_at",
                 "participates", "rebid_on_periodic", "rebid_on_challenge", "renew_claim",
                 "renewal_cost", "exec_duration", "exec_completion", "overbid_claim_margin",
                 "overbid_exit_margin", "collusion_group", "concealed_tokens", "nominee_id",
                 "destroyed_value", "short_notional", "fixed_short_gain", "destroyer_cost"});
            AgentSpec spec;
            spec.profile.id = a.value("id", "");
            if (spec.profile.id.empty()) check.fail(where + ": missing id");
            if (a.contains("cash")) spec.cash = parse_money(a["cash"], where + ".cash", check);
            if (a.contains("tokens")) spec.tokens = a["tokens"].get<Tokens>();
            try {
                spec.profile.behavior = behavior_from_name(a.value("behavior", "truthful"));
            } catch (const std::runtime_error& e) {
                check.fail(where + ": " + e.what());
            }
            if (a.contains("plans")) {
                spec.profile.plans = parse_plans(a["plans"], where + ".plans", check);
            }
            if (a.contains("initiate_auction_at")) {
                spec.initiate_auction_at = a["initiate_auction_at"].get<std::vector<Tick>>();
            }
            if (a.contains("abandon_at")) spec.abandon_at = a["abandon_at"].get<Tick>();
            spec.participates = a.value("participates", true);
            spec.rebid_on_periodic = a.value("rebid_on_periodic", false);
            spec.rebid_on_challenge = a.value("rebid_on_challenge", false);
            spec.renew_claim = a.value("renew_claim", true);
            if (a.contains("renewal_cost")) {
                spec.renewal_cost = parse_money(a["renewal_cost"], where + ".renewal_cost", check);
            }
            if (a.contains("exec_duration")) spec.exec_duration = a["exec_duration"].get<Tick>();
            if (spec.exec_duration <= 0) check.fail(where + ".exec_duration: must be positive");
            if (a.contains("exec_completion")) {
                spec.exec_completion =
                    parse_fraction(a["exec_completion"], where + ".exec_completion", check);
                if (!spec.exec_completion.in_unit_interval()) {
                    check.fail(where + ".exec_completion: must lie in [0,1]");
                }
            }
            if (a.contains("overbid_claim_margin")) {
                spec.profile.overbid_claim_margin =
                    parse_money(a["overbid_claim_margin"], where, check);
            }
            if (a.contains("overbid_exit_margin")) {
                spec.profile.overbid_exit_margin =
                    parse_money(a["overbid_exit_margin"], where, check);
            }
            spec.profile.collusion_group = a.value("collusion_group", "");
            if (a.contains("concealed_tokens")) {
                spec.profile.concealed_tokens = a["concealed_tokens"].get<Tokens>();
            }
            spec.profile.nominee_id = a.value("nominee_id", "");
            if (a.contains("destroyed_value")) {
                spec.profile.destroyed_value = parse_money(a["destroyed_value"], where, check);
            }
            if (a.contains("short_notional")) {
                spec.profile.short_notional = a["short_notional"].get<Tokens>();
            }
            if (a.contains("fixed_short_gain")) {
                spec.profile.fixed_short_gain = parse_money(a["fixed_short_gain"], where, check);
            }
            if (a.contains("destroyer_cost")) {
                spec.profile.destroyer_cost = parse_money(a["destroyer_cost"], where, check);
            }
            spec.profile.toehold_tokens = spec.tokens;
            if (!ids.insert(spec.profile.id).second) {
                check.fail(where + ": duplicate agent id " + spec.profile.id);
            }
            cfg.agents.push_back(std::move(spec));
        }
    }

    if (j.contains("price_process")) {
        const ojson& pp = j["price_process"];
        check.expect_keys(pp, "price_process", {"kind", "sigma", "points"});
        cfg.price_process.kind = pp.value("kind", "execution_ramp");
        if (cfg.price_process.kind != "execution_ramp" && cfg.price_process.kind != "stochastic" &&
            cfg.price_process.kind != "piecewise") {
            check.fail("price_process.kind: execution_ramp|stochastic|piecewise");
        }
        cfg.price_process.sigma = pp.value("sigma", 0.0);
        if (cfg.price_process.sigma < 0) check.fail("price_process.sigma: must be >= 0");
        if (pp.contains("points")) {
            for (const auto& pt : pp["points"]) {
                if (!pt.is_array() || pt.size() != 2) {
                    check.fail("price_process.points: entries are [tick, price]");
                    continue;
                }
                cfg.price_process.points.emplace_back(
                    pt[0].get<Tick>(), parse_money(pt[1], "price_process.points", check));
            }
        }
    }

    if (j.contains("market_maker")) {
        const ojson& mm = j["market_maker"];
        check.expect_keys(mm, "market_maker", {"capacity", "cash"});
        if (mm.contains("capacity")) cfg.market_maker_capacity = mm["capacity"].get<Tokens>();
        if (mm.contains("cash")) cfg.market_maker_cash = parse_money(mm["cash"], "market_maker.cash", check);
    }
    if (j.contains("holder_purchase_capacity")) {
        cfg.holder_purchase_capacity = j["holder_purchase_capacity"].get<Tokens>();
    }
    if (j.contains("horizon")) cfg.horizon = j["horizon"].get<Tick>();

    if (j.contains("flush")) {
        const ojson& f = j["flush"];
        check.expect_keys(f, "flush",
                          {"demand_intercept", "demand_slope_per_fiat", "registered", "affiliates",
                           "distribution_delay", "bounty_detection_probability"});
        if (f.contains("demand_intercept")) {
            cfg.flush.demand.intercept = f["demand_intercept"].get<Tokens>();
        }
        if (f.contains("demand_slope_per_fiat")) {
            cfg.flush.demand.slope_per_fiat =
                parse_fraction(f["demand_slope_per_fiat"], "flush.demand_slope_per_fiat", check);
        }
        if (f.contains("registered")) {
            cfg.flush.registered = f["registered"].get<std::vector<std::string>>();
        }
        if (f.contains("affiliates")) {
            cfg.flush.affiliates = f["affiliates"].get<std::vector<std::string>>();
        }
        if (f.contains("distribution_delay")) {
            cfg.flush.distribution_delay = f["distribution_delay"].get<Tick>();
        }
        if (f.contains("bounty_detection_probability")) {
            cfg.flush.bounty_detection_probability = f["bounty_detection_probability"].get<double>();
            if (cfg.flush.bounty_detection_probability < 0.0 ||
                cfg.flush.bounty_detection_probability > 1.0) {
                check.fail("flush.bounty_detection_probability: must lie in [0,1]");
            }
        }
    }

    if (j.contains("variants")) {
        const ojson& v = j["variants"];
        check.expect_keys(v, "variants",
                          {"flush_sale", "winner_r_raise", "pool_votes_count_toward_threshold",
                           "flush_surplus_redirect_to_winner", "periodic_auctions"});
        cfg.variants.flush_sale = v.value("flush_sale", false);
        cfg.variants.winner_r_raise = v.value("winner_r_raise", true);
        cfg.variants.pool_votes_count_toward_threshold =
            v.value("pool_votes_count_toward_threshold", false);
        cfg.variants.flush_surplus_redirect_to_winner =
            v.value("flush_surplus_redirect_to_winner", false);
        cfg.variants.periodic_auctions = v.value("periodic_auctions", true);
    }

    // cross references
    Tokens holder_total = 0;
    std::set<std::string> everyone;
    for (const auto& h : cfg.holders) {
        holder_total += h.tokens;
        if (!everyone.insert(h.id).second) check.fail("holders: duplicate id " + h.id);
    }
    for (const auto& a : cfg.agents) {
        holder_total += a.tokens;
        if (!everyone.insert(a.profile.id).second) {
            check.fail("agents: id collides with a holder: " + a.profile.id);
        }
    }
    if (cfg.q > 0 && holder_total != cfg.q) {
        check.fail("token genesis does not sum to dao.q (" + std::to_string(holder_total) + " vs " +
                   std::to_string(cfg.q) + ")");
    }
    for (const auto& a : cfg.agents) {
        if (a.profile.behavior == Behavior::ToeholdConcealer) {
            if (a.profile.nominee_id.empty() || !everyone.count(a.profile.nominee_id)) {
                check.fail("agent " + a.profile.id + ": concealer needs a declared nominee holder");
            }
        }
        if (a.profile.behavior == Behavior::Colluder && a.profile.collusion_group.empty()) {
            check.fail("agent " + a.profile.id + ": colluder needs a collusion_group");
        }
        if (a.profile.behavior == Behavior::ValueDestroyer &&
            a.profile.destroyed_value >= cfg.initial_price) {
            check.fail("agent " + a.profile.id + ": destroyed_value must sit below the price");
        }
    }
    for (const auto& r : cfg.flush.registered) {
        if (!everyone.count(r)) check.fail("flush.registered: unknown id " + r);
    }
    for (const auto& r : cfg.flush.affiliates) {
        if (!everyone.count(r)) check.fail("flush.affiliates: unknown id " + r);
    }

    // the delta profile must honor the positivity condition, and the forfeit
    // family it induces must be monotone in the claim, before anything runs
    if (cfg.initial_price > Money{}) {
        try {
            auto profile = cfg.delta.build();
            Money top = cfg.initial_price * 4;
            for (Money s = cfg.initial_price + Money::from_minor(1); s <= top;
                 s += max(Money::from_minor((top - cfg.initial_price).minor() / 7),
                          Money::from_minor(1))) {
                if (!delta_profile_positive_on_grid(*profile, cfg.initial_price, s)) {
                    check.fail("dao.delta_profile: fails the positivity grid check");
                    break;
                }
            }
            ForfeitParams probe{cfg.initial_price * (4 * cfg.q), cfg.initial_price, top,
                                cfg.q, cfg.q, profile};
            if (!forfeit_monotone_in_claim_on_grid(probe, 40)) {
                check.fail("dao.delta_profile: forfeit family is not monotone in the claim");
            }
        } catch (const ScenarioError& e) {
            check.fail(e.what());
        }
    }

    check.finish();
    return cfg;
}

ScenarioConfig load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ScenarioError("cannot open scenario file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return load_scenario_text(buf.str());
}

}  // namespace ccsim
