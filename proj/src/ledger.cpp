#include "ccsim/ledger.hpp"

#include <json.hpp>

namespace ccsim {

using ojson = nlohmann::ordered_json;

std::string LedgerEvent::to_json_line() const {
    ojson j;
    j["tick"] = tick;
    j["kind"] = kind;
    if (!step.empty()) j["step"] = step;
    if (!parties.empty()) j["parties"] = parties;
    ojson ds = ojson::array();
    for (const auto& d : deltas) {
        ojson e;
        e["account"] = d.account;
        if (!d.cash.is_zero()) e["cash"] = d.cash.str();
        if (d.tokens != 0) e["tokens"] = d.tokens;
        ds.push_back(std::move(e));
    }
    j["deltas"] = std::move(ds);
    if (!attrs.empty()) {
        ojson a;
        for (const auto& [k, v] : attrs) a[k] = v;
        j["attrs"] = std::move(a);
    }
    return j.dump();
}

LedgerEvent LedgerEvent::from_json_line(const std::string& line) {
    ojson j = ojson::parse(line);
    LedgerEvent ev;
    ev.tick = j.at("tick").get<Tick>();
    ev.kind = j.at("kind").get<std::string>();
    if (j.contains("step")) ev.step = j["step"].get<std::string>();
    if (j.contains("parties")) ev.parties = j["parties"].get<std::vector<std::string>>();
    for (const auto& e : j.at("deltas")) {
        AccountDelta d;
        d.account = e.at("account").get<std::string>();
        if (e.contains("cash")) d.cash = Money::parse(e["cash"].get<std::string>());
        if (e.contains("tokens")) d.tokens = e["tokens"].get<std::int64_t>();
        ev.deltas.push_back(std::move(d));
    }
    if (j.contains("attrs")) {
        for (auto it = j["attrs"].begin(); it != j["attrs"].end(); ++it) {
            ev.attrs.emplace_back(it.key(), it.value().get<std::string>());
        }
    }
    return ev;
}

void Accounts::apply(const LedgerEvent& event) {
    for (const auto& d : event.deltas) {
        if (!d.cash.is_zero()) cash[d.account] += d.cash;
        if (d.tokens != 0) tokens[d.account] += d.tokens;
    }
}

void Ledger::append(LedgerEvent event) {
    if (!events_.empty() && event.tick < events_.back().tick) {
        throw MoneyError("ledger events must be appended in tick order");
    }
    events_.push_back(std::move(event));
}

std::int64_t Ledger::first_unbalanced_event() const {
    for (std::size_t i = 0; i < events_.size(); ++i) {
        Money cash_sum;
        std::int64_t token_sum = 0;
        for (const auto& d : events_[i].deltas) {
            cash_sum += d.cash;
            token_sum += d.tokens;
        }
        if (!cash_sum.is_zero() || token_sum != 0) return static_cast<std::int64_t>(i);
    }
    return -1;
}

std::string Ledger::to_jsonl() const {
    std::string out;
    for (const auto& ev : events_) {
        out += ev.to_json_line();
        out += '\n';
    }
    return out;
}

Ledger Ledger::from_jsonl(const std::string& text) {
    Ledger ledger;
    std::size_t start = 0;
    while (start < text.size()) {
        std::size_t end = text.find('\n', start);
        if (end == std::string::npos) end = text.size();
        if (end > start) ledger.append(LedgerEvent::from_json_line(text.substr(start, end - start)));
        start = end + 1;
    }
    return ledger;
}

Accounts Ledger::replay(Tick up_to_tick) const {
    Accounts acc;
    for (const auto& ev : events_) {
        if (up_to_tick >= 0 && ev.tick > up_to_tick) break;
        acc.apply(ev);
    }
    return acc;
}

bool is_external_account(const std::string& name) {
    return name.rfind("external:", 0) == 0;
}

}  // namespace ccsim
