#include "ccsim/sim.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <sstream>

#include "ccsim/flush.hpp"
#include "ccsim/rng.hpp"
#include "ccsim/strategies.hpp"

namespace ccsim {

namespace {

std::vector<std::int64_t> forfeit_shares(Money total, const std::vector<Tokens>& weights) {
    return allocate_largest_remainder(total.minor(), weights);
}

}  // namespace

std::string RunSummary::to_csv() const {
    std::ostringstream out;
    out << "id,kind,cash_start,cash_end,tokens_start,tokens_end,wealth_delta,locked_escrow\n";
    for (const auto& r : rows) {
        out << r.id << ',' << r.kind << ',' << r.cash_start.str() << ',' << r.cash_end.str() << ','
            << r.tokens_start << ',' << r.tokens_end << ',' << r.wealth_delta.str() << ','
            << r.locked_escrow.str() << '\n';
    }
    for (const auto& [k, v] : scalars) {
        out << k << ",scalar," << v << ",,,,,\n";
    }
    return out.str();
}

std::string RunSummary::scalar(const std::string& key) const {
    for (const auto& [k, v] : scalars) {
        if (k == key) return v;
    }
    return "";
}

const SummaryRow* RunSummary::row(const std::string& id) const {
    for (const auto& r : rows) {
        if (r.id == id) return &r;
    }
    return nullptr;
}

Simulation::Simulation(ScenarioConfig cfg) : cfg_(std::move(cfg)) {
    horizon_ = cfg_.horizon_or_default();
    genesis();
}

void Simulation::post(std::string kind, std::string step, std::vector<std::string> parties,
                      std::vector<AccountDelta> deltas,
                      std::vector<std::pair<std::string, std::string>> attrs) {
    LedgerEvent ev;
    ev.tick = now_;
    ev.kind = std::move(kind);
    ev.step = std::move(step);
    ev.parties = std::move(parties);
    ev.deltas = std::move(deltas);
    ev.attrs = std::move(attrs);
    accounts_.apply(ev);
    ledger_.append(std::move(ev));
}

void Simulation::genesis() {
    std::vector<AccountDelta> deltas;
    Money cash_total;
    Tokens token_total = 0;
    auto endow = [&](const std::string& id, Money cash, Tokens tokens) {
        if (cash.is_zero() && tokens == 0) return;
        deltas.push_back(AccountDelta{id, cash, tokens});
        cash_total += cash;
        token_total += tokens;
        if (tokens > 0) registry_.set(id, tokens);
    };
    for (const auto& h : cfg_.holders) endow(h.id, h.cash, h.tokens);
    for (const auto& a : cfg_.agents) endow(a.profile.id, a.cash, a.tokens);
    if (!cfg_.market_maker_cash.is_zero()) endow("market_maker", cfg_.market_maker_cash, 0);
    deltas.push_back(AccountDelta{"external:genesis", -cash_total, -token_total});
    post("genesis", "", {}, std::move(deltas));
}

Money Simulation::price_at(Tick t) const {
    if (prices_.empty()) return cfg_.initial_price;
    auto i = static_cast<std::size_t>(std::clamp<Tick>(t, 0, static_cast<Tick>(prices_.size()) - 1));
    return prices_[i];
}

Money Simulation::reference_price(Tick t) const {
    Tick window = cfg_.reference_price_window;
    if (window <= 1 || prices_.empty()) return price_at(t);
    Tick lo = std::max<Tick>(0, t - window + 1);
    __int128 sum = 0;
    Tick n = 0;
    for (Tick i = lo; i <= t && std::cmp_less(i, prices_.size()); ++i, ++n) {
        sum += prices_[static_cast<std::size_t>(i)].minor();
    }
    return n == 0 ? price_at(t) : Money::from_minor(static_cast<std::int64_t>(sum / n));
}

void Simulation::advance_price() {
    Money p;
    if (cfg_.price_process.kind == "piecewise") {
        p = cfg_.price_process.piecewise_at(now_, cfg_.initial_price);
    } else if (control_ && !control_path_.empty()) {
        Tick idx = now_ - control_->started_at;
        auto i = static_cast<std::size_t>(
            std::clamp<Tick>(idx, 0, static_cast<Tick>(control_path_.size()) - 1));
        p = control_path_[i];
    } else if (!prices_.empty()) {
        p = prices_.back();
    } else {
        p = cfg_.initial_price;
    }
    prices_.push_back(p);
}

void Simulation::step() {
    if (finished()) return;
    advance_price();
    post("price", "", {}, {}, {{"price", current_price().str()}});

    if (auction_ && now_ == auction_->setup.closes_at) settle_auction();

    if (flush_distribution_at_ == now_) distribute_flush_surplus();

    if (control_ && !auction_) {
        Tick since_start = now_ - control_->started_at;
        SuccessCriterion crit{cfg_.success_window, cfg_.success_run};
        if (since_start >= crit.window &&
            check_success_termination(prices_, control_->record.winning_bid.value_claim, crit)) {
            success_terminate_impl();
        } else if (now_ >= control_->limit_at) {
            if (cfg_.variants.periodic_auctions) {
                post("periodic_auction_triggered", "", {control_->controller}, {},
                     {{"reserve", current_price().str()}});
                open_auction("", true);
            } else {
                plain_period_end_settlement();
            }
        }
    }

    for (const auto& agent : cfg_.agents) {
        if (agent.abandon_at && *agent.abandon_at == now_ && control_ && !auction_ &&
            control_->controller == agent.profile.id) {
            abandon(agent.profile.id);
        }
        for (Tick t : agent.initiate_auction_at) {
            if (t == now_) open_auction(agent.profile.id, false);
        }
    }

    check_tick_invariants();
    tick_accounts_.push_back(accounts_);
    ++now_;
}

std::optional<BidIntent> Simulation::agent_intent(const AgentSpec& agent, Money reserve,
                                                  bool periodic, bool is_initiator) {
    const AgentProfile& p = agent.profile;
    bool incumbent = control_ && control_->controller == p.id;

    if (incumbent) {
        bool willing = periodic ? agent.rebid_on_periodic : agent.rebid_on_challenge;
        if (!willing) return std::nullopt;
        Money claim;
        Money cost = agent.renewal_cost;
        if (agent.renew_claim) {
            claim = max(control_->record.winning_bid.value_claim, reserve);
        } else {
            auto chosen = best_plan(p.plans, reserve, cfg_.q, cfg_.t_m);
            if (!chosen) return std::nullopt;
            claim = chosen->plan.value_outcome;
            cost = chosen->plan.cost;
        }
        Money psi = (claim - reserve) * cfg_.q - cost;
        if (psi <= Money{}) return std::nullopt;
        Tokens toehold = control_->record.deposit_tokens + registry_.balance(p.id);
        return BidIntent{claim, toehold, psi, p.id};
    }

    if (!is_initiator && !agent.participates) return std::nullopt;

    auto chosen = best_plan(p.plans, reserve, cfg_.q, cfg_.t_m);
    if (!chosen) return std::nullopt;
    AuctionTerms terms = cfg_.terms_at(reserve);
    Money claim = strategy_value_claim(p, *chosen);
    Money exit = strategy_exit_level(p, *chosen, terms);
    Tokens declared = registry_.balance(p.id);
    if (p.behavior == Behavior::ToeholdConcealer) {
        // the concealed position masquerades as holder surplus, inflating
        // the level this agent can profitably stay to
        exit += (chosen->plan.value_outcome - reserve) * p.concealed_tokens;
    }
    return BidIntent{claim, declared, exit, p.id};
}

std::vector<BidIntent> Simulation::gather_intents(Money reserve, bool periodic,
                                                  const std::string& initiator,
                                                  std::vector<Money>& cash_out,
                                                  std::vector<std::string>& order_out) {
    std::vector<BidIntent> intents;
    auto consider = [&](const AgentSpec& agent, bool is_initiator) {
        auto intent = agent_intent(agent, reserve, periodic, is_initiator);
        if (!intent) return;
        intents.push_back(*intent);
        order_out.push_back(agent.profile.id);
    };
    if (!initiator.empty()) {
        if (const AgentSpec* a = cfg_.find_agent(initiator)) consider(*a, true);
    }
    for (const auto& agent : cfg_.agents) {
        if (agent.profile.id == initiator) continue;
        consider(agent, false);
    }

    // collusion: within each group only the strongest member bids
    std::map<std::string, std::vector<std::pair<std::string, Money>>> groups;
    for (const auto& intent : intents) {
        const AgentSpec* spec = cfg_.find_agent(intent.bidder_id);
        if (spec && spec->profile.behavior == Behavior::Colluder &&
            !spec->profile.collusion_group.empty()) {
            groups[spec->profile.collusion_group].emplace_back(intent.bidder_id, intent.exit_a);
        }
    }
    std::set<std::string> abstain;
    for (const auto& [group, members] : groups) {
        for (const auto& id : collusive_abstentions(members)) {
            abstain.insert(id);
            post("collusive_abstention", "", {id}, {}, {{"group", group}});
        }
    }
    if (!abstain.empty()) {
        std::vector<BidIntent> kept;
        std::vector<std::string> kept_order;
        for (std::size_t i = 0; i < intents.size(); ++i) {
            if (!abstain.count(intents[i].bidder_id)) {
                kept.push_back(intents[i]);
                kept_order.push_back(order_out[i]);
            }
        }
        intents = std::move(kept);
        order_out = std::move(kept_order);
    }

    cash_out.clear();
    for (const auto& intent : intents) {
        auto it = accounts_.cash.find(intent.bidder_id);
        cash_out.push_back(it == accounts_.cash.end() ? Money{} : it->second);
    }
    return intents;
}

bool Simulation::open_auction(const std::string& initiator_id, bool periodic) {
    if (auction_) {
        post("auction_rejected", "", {initiator_id}, {},
             {{"reason", "another_auction_in_progress"}});
        return false;
    }
    if (periodic && !control_) throw TransitionError(status_, "periodic_auction");

    Money reserve = current_price();
    Money ref = reference_price(now_);

    std::vector<Money> cash;
    std::vector<std::string> order;
    std::vector<BidIntent> intents = gather_intents(reserve, periodic, initiator_id, cash, order);

    if (intents.empty()) {
        if (periodic) {
            post("periodic_no_bids", "", {}, {}, {{"synthetic_claim", reserve.str()}});
            no_bid_settlement(reserve);
            return true;
        }
        post("auction_not_opened", "", {initiator_id}, {}, {{"reason", "no_first_bid"}});
        return false;
    }

    AuctionSetup setup{cfg_.terms_at(reserve), cfg_.increment_or_default(), now_,
                       now_ + cfg_.auction_duration};
    AuctionOutcome outcome =
        run_english_auction(setup, intents, &cash, cfg_.variants.winner_r_raise);

    for (const auto& r : outcome.rejected) {
        post("bid_rejected", "", {r.bidder_id}, {}, {{"reason", bid_error_name(r.reason)}});
    }
    if (outcome.is_void) {
        if (periodic) {
            post("periodic_no_bids", "", {}, {}, {{"synthetic_claim", reserve.str()}});
            no_bid_settlement(reserve);
            return true;
        }
        post("auction_not_opened", "", {initiator_id}, {}, {{"reason", "all_bids_invalid"}});
        return false;
    }
    if (!periodic && !initiator_id.empty()) {
        bool initiator_in = false;
        for (const auto& e : outcome.entries) {
            if (e.intent.bidder_id == initiator_id) initiator_in = true;
        }
        if (!initiator_in) {
            post("auction_not_opened", "", {initiator_id}, {}, {{"reason", "initiator_bid_invalid"}});
            return false;
        }
    }

    ++auction_rounds_;
    post("auction_opened", "", {initiator_id.empty() ? "dao" : initiator_id}, {},
         {{"reserve", reserve.str()},
          {"closes_at", std::to_string(now_ + cfg_.auction_duration)},
          {"round", std::to_string(auction_rounds_)},
          {"periodic", periodic ? "true" : "false"}});

    for (const auto& entry : outcome.entries) escrow_entry(entry, auction_rounds_);

    auction_ = PendingAuction{setup, std::move(outcome), ref, periodic,
                              control_.has_value(), auction_rounds_};
    status_ = Status::AuctionInProgress;
    return true;
}

void Simulation::escrow_entry(const AuctionEntry& entry, int round) {
    const std::string& id = entry.intent.bidder_id;
    Tokens declared = entry.intent.toehold_tokens;
    Tokens carried = 0;
    std::vector<AccountDelta> deltas;
    if (control_ && control_->controller == id) {
        carried = std::min(declared, accounts_.tokens.count(esc(id, control_->escrow_round, "tokens"))
                                         ? accounts_.tokens.at(esc(id, control_->escrow_round, "tokens"))
                                         : 0);
        if (carried > 0) {
            deltas.push_back(AccountDelta{esc(id, control_->escrow_round, "tokens"), Money{}, -carried});
        }
    }
    Tokens from_registry = declared - carried;
    if (from_registry > 0) {
        registry_.add(id, -from_registry);
        deltas.push_back(AccountDelta{id, Money{}, -from_registry});
    }
    if (declared > 0) deltas.push_back(AccountDelta{esc(id, round, "tokens"), Money{}, declared});

    const DepositSet& d = entry.entry_deposits;
    deltas.push_back(AccountDelta{id, -d.cash_total(), 0});
    deltas.push_back(AccountDelta{esc(id, round, "value"), d.value_deposit, 0});
    if (!d.purchase_deposit.is_zero()) {
        deltas.push_back(AccountDelta{esc(id, round, "purchase"), d.purchase_deposit, 0});
    }
    if (!d.surety_deposit.is_zero()) {
        deltas.push_back(AccountDelta{esc(id, round, "surety"), d.surety_deposit, 0});
    }
    post("bid_entered", "", {id}, std::move(deltas),
         {{"value_claim", entry.intent.value_claim.str()},
          {"entry_a", entry.entry_a.str()},
          {"toehold_tokens", std::to_string(declared)}});
}

void Simulation::refund_entry(const AuctionEntry& entry, int round, const std::string& why) {
    const std::string& id = entry.intent.bidder_id;
    std::vector<AccountDelta> deltas;
    Money cash_back;
    for (const char* leg : {"value", "purchase", "surety"}) {
        auto it = accounts_.cash.find(esc(id, round, leg));
        if (it != accounts_.cash.end() && !it->second.is_zero()) {
            deltas.push_back(AccountDelta{it->first, -it->second, 0});
            cash_back += it->second;
        }
    }
    if (!cash_back.is_zero()) deltas.push_back(AccountDelta{id, cash_back, 0});
    auto tok = accounts_.tokens.find(esc(id, round, "tokens"));
    if (tok != accounts_.tokens.end() && tok->second != 0) {
        deltas.push_back(AccountDelta{tok->first, Money{}, -tok->second});
        deltas.push_back(AccountDelta{id, Money{}, tok->second});
        registry_.add(id, tok->second);
    }
    if (!deltas.empty()) post("deposits_returned", "", {id}, std::move(deltas), {{"cause", why}});
}

void Simulation::settle_auction() {
    PendingAuction auction = std::move(*auction_);
    auction_.reset();

    const AuctionOutcome& o = auction.outcome;
    for (const auto& [bidder, level] : o.exits) {
        post("bid_exit", "", {bidder}, {}, {{"level", level.str()}});
    }
    for (std::size_t i = 0; i < o.entries.size(); ++i) {
        if (i != o.winner_index) refund_entry(o.entries[i], auction.round, "auction_lost");
    }

    const AuctionEntry& won = o.entries[o.winner_index];
    const std::string& winner = won.intent.bidder_id;

    // escrow moves from the entry bid to the cleared bid
    {
        std::vector<AccountDelta> deltas;
        Money net;
        auto adjust = [&](const char* leg, Money from, Money to) {
            if (from == to) return;
            deltas.push_back(AccountDelta{esc(winner, auction.round, leg), to - from, 0});
            net += to - from;
        };
        adjust("value", won.entry_deposits.value_deposit, o.winning_deposits.value_deposit);
        adjust("purchase", won.entry_deposits.purchase_deposit, o.winning_deposits.purchase_deposit);
        adjust("surety", won.entry_deposits.surety_deposit, o.winning_deposits.surety_deposit);
        if (!net.is_zero()) deltas.push_back(AccountDelta{winner, -net, 0});
        post("auction_cleared", "", {winner}, std::move(deltas),
             {{"clearing_a", o.clearing_a.str()},
              {"second_best_a", o.second_best_a.str()},
              {"value_claim", o.winning_bid.value_claim.str()},
              {"surplus_claim", o.winning_bid.surplus_claim.str()}});
    }

    last_clearing_a_ = o.clearing_a;
    last_second_best_a_ = o.second_best_a;
    last_winner_ = winner;

    if (control_) {
        if (control_->controller == winner) {
            settle_previous_deposits(o.winning_bid.value_claim, auction.setup.terms.reserve_price,
                                     auction.reference_price);
        } else {
            close_control_with_loss(o.winning_bid.value_claim, auction.setup.terms.reserve_price,
                                    auction.reference_price, "loss");
        }
    }
    install_winner(auction);
}

void Simulation::settle_previous_deposits(Money winning_claim, Money new_reserve, Money reference) {
    ControlState& c = *control_;
    const int r = c.escrow_round;
    ForfeitParams fp = ForfeitParams::from_record(c.record, cfg_.delta.build());

    auto outcome = transitional_forfeit(fp, winning_claim, reference);
    const auto& snap = c.record.t1_snapshot;
    {
        std::vector<AccountDelta> deltas;
        deltas.push_back(AccountDelta{esc(c.controller, r, "value"), -fp.value_deposit, 0});
        if (outcome.forfeit_to_holders > Money{}) {
            auto shares = forfeit_shares(outcome.forfeit_to_holders, snap.holdings);
            for (std::size_t i = 0; i < snap.ids.size(); ++i) {
                if (shares[i] != 0) {
                    deltas.push_back(AccountDelta{snap.ids[i], Money::from_minor(shares[i]), 0});
                }
            }
            holder_forfeits_received_ += outcome.forfeit_to_holders;
        }
        if (outcome.refund_to_control > Money{}) {
            deltas.push_back(AccountDelta{c.controller, outcome.refund_to_control, 0});
        }
        post("value_deposit_settled", "transition_step_3", {c.controller}, std::move(deltas),
             {{"forfeit", outcome.forfeit_to_holders.str()},
              {"refund", outcome.refund_to_control.str()},
              {"winning_claim", winning_claim.str()},
              {"reference_price", reference.str()}});
    }

    Money d_s = c.record.deposits.surety_deposit;
    auto surety = surety_settlement(d_s, fp.value_deposit, c.record.reserve_price, new_reserve,
                                    winning_claim, cfg_.q);
    if (!d_s.is_zero()) {
        std::vector<AccountDelta> deltas;
        deltas.push_back(AccountDelta{esc(c.controller, r, "surety"), -d_s, 0});
        if (surety.forfeited > Money{}) {
            auto shares = forfeit_shares(surety.forfeited, snap.holdings);
            for (std::size_t i = 0; i < snap.ids.size(); ++i) {
                if (shares[i] != 0) {
                    deltas.push_back(AccountDelta{snap.ids[i], Money::from_minor(shares[i]), 0});
                }
            }
            holder_forfeits_received_ += surety.forfeited;
        }
        if (surety.returned > Money{}) {
            deltas.push_back(AccountDelta{c.controller, surety.returned, 0});
        }
        post("surety_deposit_settled", "transition_step_5", {c.controller}, std::move(deltas),
             {{"returned", surety.returned.str()},
              {"forfeited", surety.forfeited.str()},
              {"value_shortfall", surety.value_shortfall.str()},
              {"adjusted_shortfall", surety.adjusted_shortfall.str()},
              {"bid_shortfall", surety.bid_shortfall.str()}});
    }
}

void Simulation::close_control_with_loss(Money winning_claim, Money new_reserve, Money reference,
                                         const std::string& step) {
    ControlState& c = *control_;
    const int r = c.escrow_round;

    post("vote_pool_closed", step + "_step_1", {c.controller}, {},
         {{"extra_votes", std::to_string(c.pool.extra_votes)}});

    auto tok = accounts_.tokens.find(esc(c.controller, r, "tokens"));
    if (tok != accounts_.tokens.end() && tok->second > 0) {
        Tokens n = tok->second;
        registry_.add(c.controller, n);
        post("token_deposit_returned", step + "_step_2", {c.controller},
             {AccountDelta{tok->first, Money{}, -n}, AccountDelta{c.controller, Money{}, n}});
    }

    settle_previous_deposits(winning_claim, new_reserve, reference);

    if (const AgentSpec* spec = cfg_.find_agent(c.controller)) {
        if (spec->profile.behavior == Behavior::ValueDestroyer) {
            realize_short_gain(*spec, current_price());
        }
    }

    control_.reset();
    control_path_.clear();
    status_ = Status::Open;
}

void Simulation::no_bid_settlement(Money synthetic_price) {
    close_control_with_loss(synthetic_price, synthetic_price, synthetic_price, "no_bid_loss");
}

void Simulation::abandon(const std::string& agent_id) {
    if (status_ != Status::ControlPeriod || !control_ || control_->controller != agent_id) {
        throw TransitionError(status_, "abandon");
    }
    Money p = current_price();
    post("abandonment", "", {agent_id}, {}, {{"price", p.str()}});
    close_control_with_loss(p, p, p, "abandonment_loss");
}

void Simulation::force_success_terminate() {
    if (status_ != Status::ControlPeriod || !control_) {
        throw TransitionError(status_, "success_terminate");
    }
    success_terminate_impl();
}

void Simulation::success_terminate_impl() {
    ControlState& c = *control_;
    const int r = c.escrow_round;

    post("vote_pool_closed", "success_step_1", {c.controller}, {},
         {{"extra_votes", std::to_string(c.pool.extra_votes)}});

    std::vector<AccountDelta> deltas;
    Money cash_back;
    for (const char* leg : {"value", "surety"}) {
        auto it = accounts_.cash.find(esc(c.controller, r, leg));
        if (it != accounts_.cash.end() && !it->second.is_zero()) {
            deltas.push_back(AccountDelta{it->first, -it->second, 0});
            cash_back += it->second;
        }
    }
    if (!cash_back.is_zero()) deltas.push_back(AccountDelta{c.controller, cash_back, 0});
    post("deposits_refunded", "success_step_2", {c.controller}, std::move(deltas),
         {{"refund", cash_back.str()}});

    auto tok = accounts_.tokens.find(esc(c.controller, r, "tokens"));
    if (tok != accounts_.tokens.end() && tok->second > 0) {
        Tokens n = tok->second;
        registry_.add(c.controller, n);
        post("token_deposit_released", "success_step_3", {c.controller},
             {AccountDelta{tok->first, Money{}, -n}, AccountDelta{c.controller, Money{}, n}});
    }

    control_.reset();
    control_path_.clear();
    status_ = Status::Open;
}

void Simulation::plain_period_end_settlement() {
    ControlState& c = *control_;
    const int r = c.escrow_round;
    Money x = current_price();
    ForfeitParams fp = ForfeitParams::from_record(c.record, cfg_.delta.build());

    post("vote_pool_closed", "period_end_step_1", {c.controller}, {},
         {{"extra_votes", std::to_string(c.pool.extra_votes)}});

    auto tok = accounts_.tokens.find(esc(c.controller, r, "tokens"));
    if (tok != accounts_.tokens.end() && tok->second > 0) {
        Tokens n = tok->second;
        registry_.add(c.controller, n);
        post("token_deposit_returned", "period_end_step_2", {c.controller},
             {AccountDelta{tok->first, Money{}, -n}, AccountDelta{c.controller, Money{}, n}});
    }

    // deposits measured against the end-of-period price; forfeits attach to
    // the holders of record at the close of the installing auction
    const auto& snap = c.record.t1_snapshot;
    Tokens retained_sum = 0;
    for (Tokens t : snap.retained) retained_sum += t;
    const std::vector<Tokens>& weights = retained_sum > 0 ? snap.retained : snap.holdings;

    auto outcome = value_forfeit(fp, x);
    {
        std::vector<AccountDelta> deltas;
        deltas.push_back(AccountDelta{esc(c.controller, r, "value"), -fp.value_deposit, 0});
        if (outcome.forfeit_to_holders > Money{}) {
            auto shares = forfeit_shares(outcome.forfeit_to_holders, weights);
            for (std::size_t i = 0; i < snap.ids.size(); ++i) {
                if (shares[i] != 0) {
                    deltas.push_back(AccountDelta{snap.ids[i], Money::from_minor(shares[i]), 0});
                }
            }
            holder_forfeits_received_ += outcome.forfeit_to_holders;
        }
        if (outcome.refund_to_control > Money{}) {
            deltas.push_back(AccountDelta{c.controller, outcome.refund_to_control, 0});
        }
        post("value_deposit_settled", "period_end_step_3", {c.controller}, std::move(deltas),
             {{"forfeit", outcome.forfeit_to_holders.str()},
              {"refund", outcome.refund_to_control.str()},
              {"end_price", x.str()}});
    }

    Money d_s = c.record.deposits.surety_deposit;
    if (!d_s.is_zero()) {
        auto surety = surety_settlement(d_s, fp.value_deposit, c.record.reserve_price, x, x, cfg_.q);
        std::vector<AccountDelta> deltas;
        deltas.push_back(AccountDelta{esc(c.controller, r, "surety"), -d_s, 0});
        if (surety.forfeited > Money{}) {
            auto shares = forfeit_shares(surety.forfeited, weights);
            for (std::size_t i = 0; i < snap.ids.size(); ++i) {
                if (shares[i] != 0) {
                    deltas.push_back(AccountDelta{snap.ids[i], Money::from_minor(shares[i]), 0});
                }
            }
            holder_forfeits_received_ += surety.forfeited;
        }
        if (surety.returned > Money{}) deltas.push_back(AccountDelta{c.controller, surety.returned, 0});
        post("surety_deposit_settled", "period_end_step_4", {c.controller}, std::move(deltas),
             {{"returned", surety.returned.str()}, {"forfeited", surety.forfeited.str()}});
    }

    if (const AgentSpec* spec = cfg_.find_agent(c.controller)) {
        if (spec->profile.behavior == Behavior::ValueDestroyer) realize_short_gain(*spec, x);
    }

    control_.reset();
    control_path_.clear();
    status_ = Status::Open;
}

void Simulation::realize_short_gain(const AgentSpec& agent, Money settlement_price) {
    const AgentProfile& p = agent.profile;
    Money base = control_ ? control_->record.reserve_price : cfg_.initial_price;
    Money gain;
    if (p.fixed_short_gain) {
        gain = *p.fixed_short_gain;
    } else if (p.short_notional > 0) {
        gain = max((base - settlement_price) * p.short_notional, Money{});
    }
    if (gain <= Money{}) return;
    post("short_gain_realized", "", {p.id},
         {AccountDelta{"external:short", -gain, 0}, AccountDelta{p.id, gain, 0}},
         {{"settlement_price", settlement_price.str()}});
}

void Simulation::install_winner(const PendingAuction& auction) {
    const AuctionOutcome& o = auction.outcome;
    const AuctionEntry& won = o.entries[o.winner_index];
    const std::string& winner = won.intent.bidder_id;
    const AgentSpec* spec = cfg_.find_agent(winner);
    bool renewal = control_ && control_->controller == winner;

    AuctionRecord record;
    record.opened_at = auction.setup.opened_at;
    record.closed_at = now_;
    record.reserve_price = auction.setup.terms.reserve_price;
    record.q = cfg_.q;
    record.winning_bid = o.winning_bid;
    record.auction_parameter = o.clearing_a;
    record.second_best_a = o.second_best_a;
    record.deposits = o.winning_deposits;
    record.freezeout_tokens = o.freezeout_tokens;

    int prev_round = renewal ? control_->escrow_round : -1;

    if (cfg_.variants.flush_sale) {
        install_winner_flush(auction, record);
    } else {
        ClosingResult closing = closing_steps(record, registry_, cfg_.holder_purchase_capacity,
                                              cfg_.market_maker_capacity);
        record.t1_snapshot = closing.snapshot;
        record.deposit_tokens = closing.deposit_tokens;

        if (record.freezeout_tokens >= 0 && !closing.transfers.empty()) {
            std::vector<AccountDelta> deltas;
            Money paid;
            Tokens moved = 0;
            for (const auto& t : closing.transfers) {
                deltas.push_back(AccountDelta{t.holder, t.cash, -t.tokens});
                paid += t.cash;
                moved += t.tokens;
            }
            deltas.push_back(AccountDelta{esc(winner, auction.round, "purchase"), -paid, 0});
            deltas.push_back(AccountDelta{esc(winner, auction.round, "tokens"), Money{}, moved});
            post("freezeout", "closing_step_2", {winner}, std::move(deltas),
                 {{"tokens", std::to_string(moved)}, {"paid", paid.str()}});
        } else if (record.freezeout_tokens < 0) {
            std::vector<AccountDelta> deltas;
            Tokens sold = 0;
            for (const auto& t : closing.transfers) {  // holders bought at P0
                deltas.push_back(AccountDelta{t.holder, t.cash, -t.tokens});
                sold += -t.tokens;
            }
            if (closing.market_maker_tokens > 0) {
                registry_.add("market_maker", closing.market_maker_tokens);
                deltas.push_back(AccountDelta{
                    "market_maker", -(record.reserve_price * closing.market_maker_tokens),
                    closing.market_maker_tokens});
                sold += closing.market_maker_tokens;
            }
            if (sold > 0) {
                deltas.push_back(AccountDelta{esc(winner, auction.round, "tokens"), Money{}, -sold});
                deltas.push_back(AccountDelta{winner, closing.sale_proceeds, 0});
                post("sale_leg", "closing_step_3", {winner}, std::move(deltas),
                     {{"tokens_sold", std::to_string(sold)},
                      {"unsold", std::to_string(closing.unsold_sale_tokens)}});
            }
        }

        post(renewal ? "vote_pool_adjusted" : "vote_pool_created",
             renewal ? "reset_step_2" : "closing_step_4", {winner}, {},
             {{"deposit_tokens", std::to_string(closing.deposit_tokens)},
              {"extra_votes", std::to_string(closing.pool.extra_votes)}});

        control_ = ControlState{record, closing.pool, winner, auction.round,
                                now_,   0,            Money{}, 0, Money{}};
    }

    // a renewing incumbent's stale escrow rounds should now be empty
    if (renewal && prev_round >= 0) {
        for (const char* leg : {"value", "purchase", "surety"}) {
            auto it = accounts_.cash.find(esc(winner, prev_round, leg));
            if (it != accounts_.cash.end() && !it->second.is_zero()) {
                throw MoneyError("previous escrow not settled: " + it->first);
            }
        }
        auto tok = accounts_.tokens.find(esc(winner, prev_round, "tokens"));
        if (tok != accounts_.tokens.end() && tok->second != 0) {
            throw MoneyError("previous token escrow not settled: " + tok->first);
        }
    }

    ControlState& c = *control_;
    c.limit_at = now_ + cfg_.control_period_limit;

    // what the winner actually executes
    Money base = current_price();
    Money target;
    Tick duration = spec ? spec->exec_duration : 30;
    Money cost;
    if (renewal) {
        target = execution_target_prev_;
        duration = std::max<Tick>(execution_ends_prev_ - now_, 1);
        cost = spec ? spec->renewal_cost : Money{};
    } else if (spec && spec->profile.behavior == Behavior::ValueDestroyer) {
        target = spec->profile.destroyed_value;
        cost = spec->profile.destroyer_cost;
    } else if (spec) {
        auto chosen = best_plan(spec->profile.plans, record.reserve_price, cfg_.q, cfg_.t_m);
        Money v = chosen ? chosen->plan.value_outcome : record.winning_bid.value_claim;
        cost = chosen ? chosen->plan.cost : Money{};
        ExecutionModel exec{v, duration, spec->exec_completion};
        target = deterministic_path(base, exec, duration).at(duration);
    } else {
        target = record.winning_bid.value_claim;
    }
    c.execution_target = target;
    c.execution_ends_at = now_ + duration;
    c.executed_cost = cost;
    execution_target_prev_ = target;
    execution_ends_prev_ = c.execution_ends_at;

    if (cost > Money{}) {
        post("plan_cost", "", {winner},
             {AccountDelta{winner, -cost, 0}, AccountDelta{"external:cost", cost, 0}});
    }

    if (cfg_.price_process.kind != "piecewise") {
        ExecutionModel exec{target, duration, Fraction::one()};
        Tick span = horizon_ - now_ + 1;
        if (cfg_.price_process.kind == "stochastic" && cfg_.price_process.sigma > 0) {
            control_path_ = stochastic_path(base, exec, span, cfg_.price_process.sigma,
                                            Rng::derive(cfg_.seed, static_cast<std::uint64_t>(auction.round)))
                                .prices;
        } else {
            control_path_ = deterministic_path(base, exec, span).prices;
        }
    }

    post("control_period_started", "", {winner}, {},
         {{"limit_at", std::to_string(c.limit_at)},
          {"value_claim", record.winning_bid.value_claim.str()},
          {"deposit_tokens", std::to_string(record.deposit_tokens)}});
    status_ = Status::ControlPeriod;

    if (cfg_.price_process.kind == "stochastic" && cfg_.price_process.sigma > 0) {
        maybe_adjust_deposits_stochastic(auction, c.record);
    }
}

void Simulation::maybe_adjust_deposits_stochastic(const PendingAuction& auction,
                                                  AuctionRecord& record) {
    ControlState& c = *control_;
    ForfeitParams fp = ForfeitParams::from_record(record, cfg_.delta.build());
    ExecutionModel exec{c.execution_target, std::max<Tick>(c.execution_ends_at - now_, 1),
                        Fraction::one()};
    ForfeitEstimate est = estimate_expected_forfeit(
        fp, record.deposits.surety_deposit, current_price(), exec, cfg_.price_process.sigma,
        exec.duration, 2000, Rng::derive(cfg_.seed ^ 0xad70575ULL, static_cast<std::uint64_t>(auction.round)));
    AdjustedDeposits adj = adjust_deposits_stochastic(record.deposits, fp, est);

    std::vector<AccountDelta> deltas;
    Money v_cut = record.deposits.value_deposit - adj.deposits.value_deposit;
    Money s_cut = record.deposits.surety_deposit - adj.deposits.surety_deposit;
    if (!v_cut.is_zero()) {
        deltas.push_back(AccountDelta{esc(c.controller, c.escrow_round, "value"), -v_cut, 0});
    }
    if (!s_cut.is_zero()) {
        deltas.push_back(AccountDelta{esc(c.controller, c.escrow_round, "surety"), -s_cut, 0});
    }
    if (!v_cut.is_zero() || !s_cut.is_zero()) {
        deltas.push_back(AccountDelta{c.controller, v_cut + s_cut, 0});
        record.deposits.value_deposit = adj.deposits.value_deposit;
        record.deposits.surety_deposit = adj.deposits.surety_deposit;
        post("stochastic_deposit_adjustment", "", {c.controller}, std::move(deltas),
             {{"expected_value_forfeit", std::to_string(est.expected_value_forfeit)},
              {"expected_surety_forfeit", std::to_string(est.expected_surety_forfeit)},
              {"value_clamped", adj.value_clamped ? "true" : "false"},
              {"surety_clamped", adj.surety_clamped ? "true" : "false"}});
    }
}

void Simulation::install_winner_flush(const PendingAuction& auction, AuctionRecord& record) {
    const AuctionOutcome& o = auction.outcome;
    const AuctionEntry& won = o.entries[o.winner_index];
    const std::string& winner = won.intent.bidder_id;
    Tokens declared = won.intent.toehold_tokens;
    Money p0 = record.reserve_price;

    // T1 snapshot before the flush
    HolderSnapshot snap;
    for (const auto& [id, n] : registry_.snapshot_excluding(winner)) {
        snap.ids.push_back(id);
        snap.holdings.push_back(n);
        snap.retained.push_back(0);  // everything is flushed
    }

    // revised purchase deposit covers all tokens outside the declared toehold
    Money revised = revised_purchase_deposit(declared, p0, cfg_.q);
    Money have = o.winning_deposits.purchase_deposit;
    if (revised != have) {
        post("purchase_deposit_revised", "flush_step_1", {winner},
             {AccountDelta{winner, -(revised - have), 0},
              AccountDelta{esc(winner, auction.round, "purchase"), revised - have, 0}},
             {{"revised", revised.str()}});
    }

    std::set<HolderId> affiliates(cfg_.flush.affiliates.begin(), cfg_.flush.affiliates.end());
    FlushSaleResult flush =
        run_flush_sale(registry_, winner, declared, cfg_.q, p0, affiliates);
    // the token deposit is adjusted by the (signed) freeze-out quantity; a
    // negative adjustment releases part of the declared toehold to the pool
    Tokens adjust = std::clamp<Tokens>(record.freezeout_tokens, -declared, flush.purchased_total);
    Tokens to_auction = flush.purchased_total - adjust;
    {
        std::vector<AccountDelta> deltas;
        std::vector<std::pair<std::string, std::string>> attrs;
        for (const auto& p : flush.purchases) {
            deltas.push_back(AccountDelta{p.holder, p.cash, -p.tokens});
            if (p.concealed_position) {
                attrs.emplace_back("concealed:" + p.holder, std::to_string(p.tokens));
            }
        }
        deltas.push_back(AccountDelta{esc(winner, auction.round, "purchase"), -flush.cash_total, 0});
        if (adjust != 0) {
            deltas.push_back(AccountDelta{esc(winner, auction.round, "tokens"), Money{}, adjust});
        }
        if (to_auction > 0) deltas.push_back(AccountDelta{"escrow:flush:pool", Money{}, to_auction});
        attrs.emplace_back("tokens_flushed", std::to_string(flush.purchased_total));
        post("flush_sale", "flush_step_2", {winner}, std::move(deltas), std::move(attrs));
    }
    record.deposit_tokens = declared + adjust;
    record.t1_snapshot = snap;

    // bounty detection converts concealed proceeds into burns
    if (cfg_.flush.bounty_detection_probability > 0.0) {
        Rng rng(Rng::derive(cfg_.seed ^ 0xb0047ULL, static_cast<std::uint64_t>(auction.round)));
        for (const auto& p : flush.purchases) {
            if (!p.concealed_position) continue;
            if (rng.uniform01() < cfg_.flush.bounty_detection_probability) {
                post("concealed_position_burned", "flush_bounty", {p.holder},
                     {AccountDelta{p.holder, -p.cash, 0}, AccountDelta{"external:burn", p.cash, 0}},
                     {{"tokens", std::to_string(p.tokens)}});
            }
        }
    }

    TokenAuctionResult tokauc = run_token_auction(to_auction, cfg_.flush.demand, p0);
    {
        registry_.add("market:buyers", to_auction);
        Money basis = p0 * to_auction;
        Money to_winner = min(tokauc.revenue, basis);
        Money surplus = max(tokauc.revenue - basis, Money{});
        std::vector<AccountDelta> deltas;
        deltas.push_back(AccountDelta{"escrow:flush:pool", Money{}, -to_auction});
        deltas.push_back(AccountDelta{"market:buyers", Money{}, to_auction});
        deltas.push_back(AccountDelta{"external:buyers", -tokauc.revenue, 0});
        if (!to_winner.is_zero()) deltas.push_back(AccountDelta{winner, to_winner, 0});

        Money redirect;
        if (!surplus.is_zero() && cfg_.variants.flush_surplus_redirect_to_winner) {
            bool cap_binding =
                Fraction(record.deposit_tokens, cfg_.q) == cfg_.t_m;
            if (cap_binding) {
                Money f = (record.winning_bid.value_claim - p0) * (cfg_.q - record.deposit_tokens);
                redirect = min(surplus, f);
                if (!redirect.is_zero()) deltas.push_back(AccountDelta{winner, redirect, 0});
            }
        }
        Money escrowed = surplus - redirect;
        if (!escrowed.is_zero()) deltas.push_back(AccountDelta{"escrow:flush:surplus", escrowed, 0});
        post("token_auction_cleared", "flush_step_4", {winner}, std::move(deltas),
             {{"clearing_price", tokauc.clearing_price.str()},
              {"quantity", std::to_string(to_auction)},
              {"surplus_or_deficit", tokauc.surplus_or_deficit.str()},
              {"redirected_to_winner", redirect.str()}});
        if (tokauc.surplus_or_deficit < Money{}) {
            post("token_auction_deficit", "flush_step_6", {winner}, {},
                 {{"liability", (-tokauc.surplus_or_deficit).str()}});
            dao_liability_ += -tokauc.surplus_or_deficit;
        }
        flush_surplus_escrowed_ = escrowed;
        flush_clearing_ = tokauc.clearing_price;
        flush_snapshot_ = snap;
        flush_winner_ = winner;
        flush_distribution_at_ = now_ + cfg_.flush.distribution_delay;
    }

    VotePool pool = VotePool::sized_for(record.deposit_tokens, cfg_.q);
    post("vote_pool_created", "closing_step_4", {winner}, {},
         {{"deposit_tokens", std::to_string(record.deposit_tokens)},
          {"extra_votes", std::to_string(pool.extra_votes)}});

    control_ = ControlState{record, pool, winner, auction.round, now_, 0, Money{}, 0, Money{}};
}

void Simulation::distribute_flush_surplus() {
    flush_distribution_at_ = -1;
    if (flush_surplus_escrowed_.is_zero()) return;

    RegistrationPredicate reg;
    reg.registered.insert(cfg_.flush.registered.begin(), cfg_.flush.registered.end());
    reg.restricted.insert(flush_winner_);
    reg.restricted.insert(cfg_.flush.affiliates.begin(), cfg_.flush.affiliates.end());

    auto allocations = distribute_token_auction_surplus(flush_surplus_escrowed_, flush_snapshot_, reg);
    if (allocations.empty()) {
        post("flush_surplus_unclaimed", "flush_step_6", {}, {},
             {{"escrowed", flush_surplus_escrowed_.str()},
              {"reason", "no_registered_t1_holders"}});
        return;
    }
    std::vector<AccountDelta> deltas;
    Money total;
    for (const auto& a : allocations) {
        deltas.push_back(AccountDelta{a.holder, a.amount, 0});
        total += a.amount;
    }
    deltas.push_back(AccountDelta{"escrow:flush:surplus", -total, 0});
    post("flush_surplus_distributed", "flush_step_6", {flush_winner_}, std::move(deltas),
         {{"distributed", total.str()}});
    flush_surplus_escrowed_ -= total;
}

void Simulation::check_tick_invariants() {
    Tokens total = 0;
    for (const auto& [account, tokens] : accounts_.tokens) {
        if (!is_external_account(account)) total += tokens;
        if (account.rfind("escrow:", 0) != 0 && !is_external_account(account)) {
            if (registry_.balance(account) != tokens) {
                throw MoneyError("registry and accounts disagree on " + account);
            }
        }
    }
    if (total != cfg_.q) {
        throw MoneyError("token conservation broken at tick " + std::to_string(now_));
    }
}

RunResult Simulation::run() {
    while (!finished()) step();

    RunResult result;
    result.terminal_status = status_;
    result.prices = prices_;
    Money mark = current_price();

    std::map<std::string, std::pair<Money, Tokens>> start;
    if (!ledger_.events().empty()) {
        for (const auto& d : ledger_.events().front().deltas) {
            if (!is_external_account(d.account)) start[d.account] = {d.cash, d.tokens};
        }
    }
    auto make_row = [&](const std::string& id, const std::string& kind) {
        SummaryRow row;
        row.id = id;
        row.kind = kind;
        auto s = start.find(id);
        if (s != start.end()) {
            row.cash_start = s->second.first;
            row.tokens_start = s->second.second;
        }
        auto c = accounts_.cash.find(id);
        if (c != accounts_.cash.end()) row.cash_end = c->second;
        auto t = accounts_.tokens.find(id);
        if (t != accounts_.tokens.end()) row.tokens_end = t->second;
        for (const auto& [account, cash] : accounts_.cash) {
            if (account.rfind("escrow:" + id + ":", 0) == 0) row.locked_escrow += cash;
        }
        Tokens escrow_tokens = 0;
        for (const auto& [account, tokens] : accounts_.tokens) {
            if (account.rfind("escrow:" + id + ":", 0) == 0) escrow_tokens += tokens;
        }
        row.wealth_delta = (row.cash_end - row.cash_start) + row.locked_escrow +
                           mark * (row.tokens_end + escrow_tokens - row.tokens_start);
        return row;
    };
    RunSummary summary;
    for (const auto& a : cfg_.agents) summary.rows.push_back(make_row(a.profile.id, "agent"));
    for (const auto& h : cfg_.holders) summary.rows.push_back(make_row(h.id, "holder"));
    if (!cfg_.market_maker_cash.is_zero() || cfg_.market_maker_capacity > 0) {
        summary.rows.push_back(make_row("market_maker", "account"));
    }
    summary.scalars.emplace_back("terminal_status", status_name(status_));
    summary.scalars.emplace_back("terminal_price", mark.str());
    summary.scalars.emplace_back("auctions", std::to_string(auction_rounds_));
    summary.scalars.emplace_back("last_winner", last_winner_);
    summary.scalars.emplace_back("last_clearing_a", last_clearing_a_.str());
    summary.scalars.emplace_back("last_second_best_a", last_second_best_a_.str());
    summary.scalars.emplace_back("holder_forfeits_received", holder_forfeits_received_.str());
    summary.scalars.emplace_back("flush_clearing_price", flush_clearing_.str());
    summary.scalars.emplace_back("dao_liability", dao_liability_.str());

    result.summary = std::move(summary);
    result.ledger = ledger_;
    result.final_accounts = accounts_;
    result.tick_accounts = tick_accounts_;
    return result;
}

RunResult run_scenario(const ScenarioConfig& cfg) { return Simulation(cfg).run(); }

}  // namespace ccsim
