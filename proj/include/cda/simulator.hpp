#pragma once

#include <cstdint>
#include <stdexcept>
#include <thread>
#include <vector>

#include "cda/model.hpp"
#include "cda/rng.hpp"

namespace cda {

struct PricePath {
  std::vector<Trade> trades;
  std::uint64_t events_seen = 0;
  AuctionState final_state;
};

struct FptSample {
  double hit_time = 0.0;
  std::uint64_t events = 0;
  Price hit_price = 0;  // 1 or N; 0 when censored
  bool censored = false;
};

inline constexpr std::uint64_t kDefaultFptEventCap = 1000000000ULL;

namespace detail {

struct KindCutoffs {
  double limit_bid;   // lambda / S
  double limit_ask;   // 2 lambda / S
  double market_buy;  // (2 lambda + mu) / S
  double total_rate;  // S = 2 lambda + 2 mu
};

inline KindCutoffs kind_cutoffs(const ModelParams& p) {
  const double total = 2.0 * p.limit_rate + 2.0 * p.market_rate;
  return {p.limit_rate / total, 2.0 * p.limit_rate / total,
          (2.0 * p.limit_rate + p.market_rate) / total, total};
}

inline EventKind pick_kind(double u, const KindCutoffs& c) {
  if (u < c.limit_bid) return EventKind::LimitBid;
  if (u < c.limit_ask) return EventKind::LimitAsk;
  if (u < c.market_buy) return EventKind::MarketBuy;
  return EventKind::MarketSell;
}

}  // namespace detail

// Samples the next order arrival: the four Poisson streams superpose into
// one exponential clock at rate 2*lambda + 2*mu with a categorical kind.
inline Event next_event(const ModelParams& params, double now, Rng& rng) {
  const auto c = detail::kind_cutoffs(params);
  const double t = now + rng.exponential(c.total_rate);
  return Event{detail::pick_kind(rng.uniform01(), c), t};
}

// Draw source used by run_path. Tests substitute recorders or mirrored
// sources through run_path_with.
struct RngDraws {
  Rng& rng;
  double event_gap(double total_rate) { return rng.exponential(total_rate); }
  EventKind kind(const detail::KindCutoffs& c) {
    return detail::pick_kind(rng.uniform01(), c);
  }
  Price placement(Price lo, Price hi) { return rng.uniform_int(lo, hi); }
};

template <typename Draws>
PricePath run_path_with(const ModelParams& params, Price opening,
                        std::uint64_t max_events, Draws& draws) {
  params.validate();
  if (opening < 1 || opening > params.num_prices)
    throw std::invalid_argument("opening price outside the grid");
  const auto cutoffs = detail::kind_cutoffs(params);
  PricePath path{{}, 0, AuctionState(params, opening)};
  AuctionState& state = path.final_state;
  for (std::uint64_t i = 0; i < max_events; ++i) {
    const Event ev{draws.kind(cutoffs),
                   state.clock + draws.event_gap(cutoffs.total_rate)};
    const auto trade = apply_event(
        state, ev, params, [&](Price lo, Price hi) { return draws.placement(lo, hi); });
    if (trade) path.trades.push_back(*trade);
  }
  path.events_seen = max_events;
  return path;
}

inline PricePath run_path(const ModelParams& params, Price opening,
                          std::uint64_t max_events, Rng& rng) {
  RngDraws draws{rng};
  return run_path_with(params, opening, max_events, draws);
}

// Empirical distribution of trade prices over a fixed number of order
// arrivals, discarding trades from the first burn_in events. No event times
// are drawn (trade prices do not depend on them). Throws if no trade
// survives the burn-in.
inline PriceDistribution equilibrium_histogram(const ModelParams& params,
                                               Price opening,
                                               std::uint64_t events,
                                               std::uint64_t burn_in,
                                               Rng& rng) {
  params.validate();
  if (events <= burn_in)
    throw std::invalid_argument("events must exceed burn_in");
  std::vector<std::uint64_t> counts(static_cast<std::size_t>(params.num_prices) + 1, 0);
  std::uint64_t seen = 0;
  std::uint64_t kept = 0;
  const auto cutoffs = detail::kind_cutoffs(params);
  AuctionState state(params, opening);
  for (std::uint64_t i = 0; i < events; ++i) {
    const Event ev{detail::pick_kind(rng.uniform01(), cutoffs), state.clock};
    const auto trade = apply_event(
        state, ev, params, [&](Price lo, Price hi) { return rng.uniform_int(lo, hi); });
    ++seen;
    if (trade && seen > burn_in) {
      ++counts[static_cast<std::size_t>(trade->price)];
      ++kept;
    }
  }
  if (kept == 0) throw std::runtime_error("no trades recorded after burn-in");
  PriceDistribution freq(static_cast<std::size_t>(params.num_prices));
  for (int p = 1; p <= params.num_prices; ++p)
    freq[static_cast<std::size_t>(p) - 1] =
        static_cast<double>(counts[static_cast<std::size_t>(p)]) / static_cast<double>(kept);
  return freq;
}

// Same histogram keyed to a target number of recorded trades instead of a
// fixed event budget; the first burn_in_trades trades are discarded. The
// equilibrium comparisons use this form: they need a fixed number of chain
// iterations (trades), and at small traffic intensity trades are a vanishing
// fraction of order arrivals.
//
// While the book is empty, market orders cannot change anything, so the
// run of no-op arrivals before the next limit order is integrated out: the
// next observable event is a limit order, bid or ask with probability 1/2
// (the rates are symmetric). This is an exact marginalization, not an
// approximation, and it is what makes rho ~ 1e-4 runs affordable.
inline PriceDistribution trade_driven_histogram(const ModelParams& params,
                                                Price opening,
                                                std::uint64_t target_trades,
                                                std::uint64_t burn_in_trades,
                                                Rng& rng) {
  params.validate();
  if (target_trades <= burn_in_trades)
    throw std::invalid_argument("target_trades must exceed burn_in_trades");
  std::vector<std::uint64_t> counts(static_cast<std::size_t>(params.num_prices) + 1, 0);
  std::uint64_t trades = 0;
  const auto cutoffs = detail::kind_cutoffs(params);
  AuctionState state(params, opening);
  const auto place = [&](Price lo, Price hi) { return rng.uniform_int(lo, hi); };
  while (trades < target_trades) {
    EventKind kind;
    if (state.book.empty()) {
      kind = rng.uniform01() < 0.5 ? EventKind::LimitBid : EventKind::LimitAsk;
    } else {
      kind = detail::pick_kind(rng.uniform01(), cutoffs);
    }
    const auto trade = apply_event(state, Event{kind, state.clock}, params, place);
    if (trade) {
      ++trades;
      if (trades > burn_in_trades) ++counts[static_cast<std::size_t>(trade->price)];
    }
  }
  const double kept = static_cast<double>(target_trades - burn_in_trades);
  PriceDistribution freq(static_cast<std::size_t>(params.num_prices));
  for (int p = 1; p <= params.num_prices; ++p)
    freq[static_cast<std::size_t>(p) - 1] =
        static_cast<double>(counts[static_cast<std::size_t>(p)]) / kept;
  return freq;
}

// Runs from the median opening price with an empty book until the first
// trade at price 1 or N. Runs exceeding event_cap are returned censored
// (flagged, with the clock and event count at the cap).
inline FptSample first_passage_sample(const ModelParams& params, Rng& rng,
                                      std::uint64_t event_cap = kDefaultFptEventCap) {
  params.validate();
  if (params.num_prices < 3)
    throw std::invalid_argument("first passage requires num_prices >= 3");
  const auto cutoffs = detail::kind_cutoffs(params);
  AuctionState state(params, params.median_price());
  FptSample out;
  for (std::uint64_t i = 1; i <= event_cap; ++i) {
    const Event ev{detail::pick_kind(rng.uniform01(), cutoffs),
                   state.clock + rng.exponential(cutoffs.total_rate)};
    const auto trade = apply_event(
        state, ev, params, [&](Price lo, Price hi) { return rng.uniform_int(lo, hi); });
    if (trade && (trade->price == 1 || trade->price == params.num_prices)) {
      out.hit_time = trade->time;
      out.events = i;
      out.hit_price = trade->price;
      return out;
    }
  }
  out.hit_time = state.clock;
  out.events = event_cap;
  out.censored = true;
  return out;
}

// Independent replicates on derived streams (base.stream_index + r). Results
// depend only on (params, seed spec), not on thread scheduling.
inline std::vector<FptSample> first_passage_batch(
    const ModelParams& params, int replicates, RngSpec base,
    std::uint64_t event_cap = kDefaultFptEventCap, unsigned threads = 0) {
  params.validate();
  if (replicates < 1) throw std::invalid_argument("replicates must be >= 1");
  if (threads == 0) threads = std::thread::hardware_concurrency();
  if (threads < 1) threads = 1;
  if (threads > static_cast<unsigned>(replicates))
    threads = static_cast<unsigned>(replicates);
  std::vector<FptSample> out(static_cast<std::size_t>(replicates));
  auto worker = [&](unsigned w) {
    for (int r = static_cast<int>(w); r < replicates;
         r += static_cast<int>(threads)) {
      Rng rng(RngSpec{base.master_seed,
                      base.stream_index + static_cast<std::uint64_t>(r)});
      out[static_cast<std::size_t>(r)] = first_passage_sample(params, rng, event_cap);
    }
  };
  if (threads == 1) {
    worker(0);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (unsigned w = 0; w < threads; ++w) pool.emplace_back(worker, w);
    for (auto& t : pool) t.join();
  }
  return out;
}

}  // namespace cda
