#include <benchmark/benchmark.h>

#include <string>
#include <vector>

#include "parsim/ledger.hpp"
#include "parsim/market.hpp"
#include "parsim/scenario.hpp"

using namespace parsim;

namespace {

void claim(LedgerWorld& w, AgentId creditor, AgentId debtor, InstrumentKind kind, Amount amt) {
  w.seed(creditor, Side::Asset, {kind, SecurityClass::None, debtor}, amt);
  w.seed(debtor, Side::Liability, {kind, SecurityClass::None, creditor}, amt);
}

struct Payments {
  LedgerWorld world;
  std::vector<AgentId> people;

  explicit Payments(int banks, int per_bank) {
    for (int b = 0; b < banks; ++b) {
      const AgentId bank = world.add_agent(AgentKind::Bank, "bank" + std::to_string(b));
      claim(world, bank, kFed, InstrumentKind::Reserves, Amount{1'000'000'00});
      for (int i = 0; i < per_bank; ++i) {
        const AgentId a = world.add_agent(AgentKind::Holder, "h" + std::to_string(b) + "_" + std::to_string(i));
        world.sheet_mut(a).home_bank = bank;
        claim(world, a, bank, InstrumentKind::Deposit, Amount{10'000'00});
        people.push_back(a);
      }
    }
  }
};

void BM_LedgerPayment(benchmark::State& state) {
  Payments p(static_cast<int>(state.range(0)), 8);
  std::size_t i = 0;
  for (auto _ : state) {
    const AgentId from = p.people[i % p.people.size()];
    const AgentId to = p.people[(i * 7 + 3) % p.people.size()];
    if (from != to) p.world.apply(p.world.payment_postings(from, to, Amount{1}));
    ++i;
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()));
}
BENCHMARK(BM_LedgerPayment)->Arg(2)->Arg(16);

void BM_MarketClear(benchmark::State& state) {
  const int sellers = static_cast<int>(state.range(0));
  for (auto _ : state) {
    state.PauseTiming();
    LedgerWorld w;
    const AgentId bank = w.add_agent(AgentKind::Bank, "bank");
    claim(w, bank, kFed, InstrumentKind::Reserves, Amount{1'000'000'00});
    std::vector<DealerProfile> dealers;
    for (int d = 0; d < 4; ++d) {
      const AgentId id = w.add_agent(AgentKind::BrokerDealer, "dealer" + std::to_string(d));
      w.sheet_mut(id).reserve_account = true;
      claim(w, id, kFed, InstrumentKind::Reserves, Amount{1'000'000'00});
      w.seed(id, Side::Liability, {InstrumentKind::OtherLiabilities, SecurityClass::None, std::nullopt},
             Amount{900'000'00});
      DealerProfile p;
      p.id = id;
      dealers.push_back(p);
    }
    const AgentId lender = w.add_agent(AgentKind::TreasuryBuyer, "lender");
    w.sheet_mut(lender).home_bank = bank;
    claim(w, lender, bank, InstrumentKind::Deposit, Amount{1'000'000'00});
    Market m(MarketParams{}, dealers, {lender});
    for (int s = 0; s < sellers; ++s) {
      const AgentId a = w.add_agent(AgentKind::TreasuryBuyer, "seller" + std::to_string(s));
      w.sheet_mut(a).home_bank = bank;
      w.seed(a, Side::Asset, {InstrumentKind::Treasury, SecurityClass::Long, std::nullopt}, Amount{5'000'00});
      m.submit(w, a, SecurityClass::Long, Amount{5'000'00});
    }
    state.ResumeTiming();
    benchmark::DoNotOptimize(m.clear(w));
  }
}
BENCHMARK(BM_MarketClear)->Arg(8)->Arg(64);

void BM_PresetRun(benchmark::State& state, const std::string& name) {
  const ScenarioConfig cfg = parse_config(preset_json(name));
  for (auto _ : state) benchmark::DoNotOptimize(run(cfg));
}

const bool registered = [] {
  for (const auto& name : preset_names()) {
    benchmark::RegisterBenchmark(("BM_PresetRun/" + name).c_str(), BM_PresetRun, name);
  }
  return true;
}();

}  // namespace
