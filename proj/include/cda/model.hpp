#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

namespace cda {

// Prices are integer ticks 1..num_prices.
using Price = int;

using PriceDistribution = std::vector<double>;

enum class Side { Bid, Ask };

enum class EventKind { LimitBid, LimitAsk, MarketBuy, MarketSell };

struct Event {
  EventKind kind;
  double time;
};

struct Trade {
  double time;
  Price price;
};

// Model parameters. limit_rate (lambda) and market_rate (mu) are per-side
// Poisson rates; max_jump (n) caps how far a limit order may be placed from
// its reference quote.
struct ModelParams {
  int num_prices = 10;
  int max_jump = 1;
  double limit_rate = 0.01;
  double market_rate = 1.0;

  double traffic_intensity() const { return limit_rate / market_rate; }

  static ModelParams from_traffic(int num_prices, int max_jump, double rho,
                                  double mu = 1.0) {
    ModelParams p{num_prices, max_jump, rho * mu, mu};
    p.validate();
    return p;
  }

  Price median_price() const { return (num_prices + 1) / 2; }

  void validate() const {
    if (num_prices < 2) throw std::invalid_argument("num_prices must be >= 2");
    if (max_jump < 1) throw std::invalid_argument("max_jump must be >= 1");
    if (!(limit_rate > 0.0))
      throw std::invalid_argument("limit_rate must be > 0");
    if (!(market_rate > 0.0))
      throw std::invalid_argument("market_rate must be > 0");
  }
};

// Closed integer interval [lo, hi]; lo > hi means empty.
struct PriceInterval {
  Price lo = 1;
  Price hi = 0;

  bool empty() const { return lo > hi; }
  int size() const { return empty() ? 0 : hi - lo + 1; }
  bool contains(Price p) const { return p >= lo && p <= hi; }
};

// Resting unit-quantity orders, held as per-price counts. Orders carry no
// identity beyond their price, which makes queue priority within a level
// unobservable; removal always takes from the best level.
class OrderBook {
 public:
  explicit OrderBook(int num_prices)
      : bids_(static_cast<std::size_t>(num_prices) + 1, 0),
        asks_(static_cast<std::size_t>(num_prices) + 1, 0),
        num_prices_(num_prices) {}

  bool has_bids() const { return total_bids_ > 0; }
  bool has_asks() const { return total_asks_ > 0; }
  bool has(Side s) const { return s == Side::Bid ? has_bids() : has_asks(); }
  bool empty() const { return total_bids_ == 0 && total_asks_ == 0; }

  Price best_bid() const { return best_bid_; }  // requires has_bids()
  Price best_ask() const { return best_ask_; }  // requires has_asks()
  Price best(Side s) const { return s == Side::Bid ? best_bid_ : best_ask_; }

  void add(Side s, Price p) { s == Side::Bid ? add_bid(p) : add_ask(p); }
  Price pop_best(Side s) {
    return s == Side::Bid ? pop_best_bid() : pop_best_ask();
  }

  std::uint64_t bid_count() const { return total_bids_; }
  std::uint64_t ask_count() const { return total_asks_; }
  std::uint32_t bids_at(Price p) const { return bids_[static_cast<std::size_t>(p)]; }
  std::uint32_t asks_at(Price p) const { return asks_[static_cast<std::size_t>(p)]; }

  void add_bid(Price p) {
    ++bids_[static_cast<std::size_t>(p)];
    ++total_bids_;
    if (p > best_bid_ || total_bids_ == 1) best_bid_ = p;
  }

  void add_ask(Price p) {
    ++asks_[static_cast<std::size_t>(p)];
    ++total_asks_;
    if (p < best_ask_ || total_asks_ == 1) best_ask_ = p;
  }

  Price pop_best_bid() {
    const Price p = best_bid_;
    --bids_[static_cast<std::size_t>(p)];
    --total_bids_;
    if (bids_[static_cast<std::size_t>(p)] == 0) {
      best_bid_ = 0;
      for (Price q = p - 1; q >= 1; --q) {
        if (bids_[static_cast<std::size_t>(q)] > 0) {
          best_bid_ = q;
          break;
        }
      }
    }
    return p;
  }

  Price pop_best_ask() {
    const Price p = best_ask_;
    --asks_[static_cast<std::size_t>(p)];
    --total_asks_;
    if (asks_[static_cast<std::size_t>(p)] == 0) {
      best_ask_ = 0;
      for (Price q = p + 1; q <= num_prices_; ++q) {
        if (asks_[static_cast<std::size_t>(q)] > 0) {
          best_ask_ = q;
          break;
        }
      }
    }
    return p;
  }

  int num_prices() const { return num_prices_; }

 private:
  std::vector<std::uint32_t> bids_;
  std::vector<std::uint32_t> asks_;
  std::uint64_t total_bids_ = 0;
  std::uint64_t total_asks_ = 0;
  Price best_bid_ = 0;
  Price best_ask_ = 0;
  int num_prices_;
};

struct AuctionState {
  OrderBook book;
  Price last_trade_price;
  double clock = 0.0;

  AuctionState(const ModelParams& params, Price opening)
      : book(params.num_prices), last_trade_price(opening) {}
};

// Interval an incoming limit bid is drawn from, clipped to the grid.
// Reference quote is the best ask; with no asks the empty-book rule anchored
// at the last trade price applies (also when bids rest but asks do not).
inline PriceInterval bid_interval(const AuctionState& state,
                                  const ModelParams& params) {
  const int n = params.max_jump;
  PriceInterval iv;
  if (state.book.has_asks()) {
    const Price pa = state.book.best_ask();
    iv = {pa - n, pa - 1};
  } else {
    const Price p = state.last_trade_price;
    iv = {p - n, p};
  }
  if (iv.lo < 1) iv.lo = 1;
  if (iv.hi > params.num_prices) iv.hi = params.num_prices;
  return iv;
}

inline PriceInterval ask_interval(const AuctionState& state,
                                  const ModelParams& params) {
  const int n = params.max_jump;
  PriceInterval iv;
  if (state.book.has_bids()) {
    const Price pb = state.book.best_bid();
    iv = {pb + 1, pb + n};
  } else {
    const Price p = state.last_trade_price;
    iv = {p, p + n};
  }
  if (iv.lo < 1) iv.lo = 1;
  if (iv.hi > params.num_prices) iv.hi = params.num_prices;
  return iv;
}

// Applies one event. `draw(lo, hi)` supplies the uniform integer for limit
// placement and is consulted only when the placement interval is non-empty.
// Limit orders with an empty (fully clipped) interval and market orders
// against an empty side are no-ops. Returns the trade, if one executed.
template <typename DrawFn>
std::optional<Trade> apply_event(AuctionState& state, const Event& event,
                                 const ModelParams& params, DrawFn&& draw) {
  state.clock = event.time;
  switch (event.kind) {
    case EventKind::LimitBid: {
      const PriceInterval iv = bid_interval(state, params);
      if (!iv.empty()) state.book.add_bid(draw(iv.lo, iv.hi));
      return std::nullopt;
    }
    case EventKind::LimitAsk: {
      const PriceInterval iv = ask_interval(state, params);
      if (!iv.empty()) state.book.add_ask(draw(iv.lo, iv.hi));
      return std::nullopt;
    }
    case EventKind::MarketBuy:
    case EventKind::MarketSell: {
      const Side hit = event.kind == EventKind::MarketBuy ? Side::Ask : Side::Bid;
      if (!state.book.has(hit)) return std::nullopt;
      const Price p = state.book.pop_best(hit);
      state.last_trade_price = p;
      return Trade{event.time, p};
    }
  }
  return std::nullopt;
}

}  // namespace cda
